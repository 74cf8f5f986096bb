//! Property harness and independent oracles.

mod fixtures;
mod oracle;
mod properties;
mod shell;

pub use fixtures::{
    random_body, random_box, random_ellipsoid, random_map, random_polytope, random_q, random_segment, random_simplex,
    trial_rng, MIN_RADIAL,
};
pub use oracle::{monotone_chain, oracle_polygon_phi, regular_polygon_vertices, shoelace};
pub use properties::{check_property, summary_table, FixtureDiagnostic, PropertyReport, VerifyOptions, PROPERTY_NAMES};
pub use shell::{shell_energy_convergence, ShellRow, ShellTable};
