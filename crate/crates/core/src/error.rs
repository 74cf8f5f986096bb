use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or out-of-range input (dimension mismatch, p < 1, singular map, ...).
    #[error("input error: {0}")]
    Input(String),

    /// A body violates a geometric precondition (origin not interior, degenerate hull, ...).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A support oracle fell below the positivity floor on a quadrature node.
    #[error("positivity violation: value {value:e} at node {node:?}")]
    Positivity { node: Vec<f64>, value: f64 },

    /// An integrand returned a non-finite value.
    #[error("non-finite integrand value {value} at node {node:?}")]
    Integrand { node: Vec<f64>, value: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unknown property `{name}`; valid names: {}", valid.join(", "))]
    UnknownProperty { name: String, valid: Vec<String> },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn geometry(msg: impl Into<String>) -> Self {
        Error::Geometry(msg.into())
    }

    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Positivity { .. } | Error::Integrand { .. } | Error::Numerical(_)
        )
    }
}
