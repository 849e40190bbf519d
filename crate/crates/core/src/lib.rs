//! Deterministic approximate counting for list colorings of triangle-free
//! graphs and partition functions of discrete Markov random fields.
//!
//! The counting path truncates an exact marginal recursion at a fixed depth
//! and telescopes the resulting estimates through a node-elimination chain;
//! correlation decay makes the truncation error shrink geometrically in the
//! depth. An exact variable-elimination oracle serves as the ground truth at
//! desk scale.

pub mod conditions;
pub mod count;
pub mod decay;
pub mod formats;
pub mod gen;
pub mod graph;
pub mod instance;
pub mod mrf;
pub mod mrf_count;
pub mod oracle;
pub mod phi;

pub use conditions::{
    beta_condition_holds, beta_condition_lhs, check_list_condition, solve_alpha_threshold,
    ConditionReport,
};
pub use count::{count_color, marginal_error_profile, CountError, CountResult, CountStep,
    ProfileRow, RegimeReport};
pub use decay::{derive_constants, mrf_error_bound, required_depth, theoretical_error_bound,
    DecayConstants};
pub use graph::{Graph, GraphError};
pub use instance::ColoringInstance;
pub use mrf::{
    coloring_to_mrf, gamma_condition, potts, potts_condition, GammaReport, MrfInstance,
    PottsParams,
};
pub use mrf_count::{compute_z, mrf_marginal_error_profile, phi_mrf, phi_mrf_vector};
pub use oracle::{ln_big, plan_elimination, EliminationPlan, Oracle, OracleError};
pub use phi::{PhiConstants, PhiEngine, PhiStats};
