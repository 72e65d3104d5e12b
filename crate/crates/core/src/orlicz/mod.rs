//! Orlicz functions: evaluation, generalized inverse, Legendre conjugate, and grid checks.

mod checks;
mod concave;
mod function;
mod grammar;

pub use checks::{
    check_duality_product, check_n_function, check_power_ratio_monotone, equivalence_ratio, DualityCheck, DualityPoint,
    EquivalenceRatio, NFunctionCheck, PowerRatioCheck, DUALITY_TOL, MONOTONE_TOL,
};
pub use concave::{fit_concave_inverse, pl_from_concave_inverse, ConcaveInverseFit};
pub use function::{Grid, OrliczFunction, PiecewiseLinear, Tail};
