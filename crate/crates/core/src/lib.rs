//! Higher-order affine functionals of convex and star bodies: (L_p, Q)
//! projection bodies, the integral affine surface area Φ_{p,Q}, the
//! constants d_{n,p}(Q), L_p surface areas and two-sided bounds for the
//! matrix-valued p-affine capacity.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bodies;
pub mod config;
pub mod error;
pub mod functionals;
pub mod projection;
pub mod quadrature;
pub mod run;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
