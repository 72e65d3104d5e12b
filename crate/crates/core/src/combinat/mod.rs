//! Averages over the symmetric group and sign vectors, exact or Monte Carlo, and the
//! permutation averages that generate Orlicz, `ℓ_p` and Orlicz-Lorentz norms.

mod averages;
mod engine;
mod perm;

pub use averages::{
    average_over_perms, c_supports, corollary_bounds_check, ks_average, ks_construction, ks_orlicz_from_weights,
    ks_terms, schuett_sides, theorem31_average, z_vector, BoundScan, CorollaryBounds, KsConstruction, KsTerms,
    SchuettSides, SCAN_SLACK,
};
pub use engine::{budget_from_env, pairwise_sum, AveragingPlan, Estimate, Mode, BUDGET_ENV, DEFAULT_BUDGET};
pub use perm::{factorial, next_permutation, unrank_permutation};

pub(crate) use engine::{average, Space};
pub(crate) use perm::{PermSignPoint, PermSignSpace};
