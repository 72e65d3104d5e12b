//! The embedding `Ψ_n : ℓⁿ_{M,a} → L₁` built from three permutations and two sign vectors,
//! together with the `d`-sequence construction and the checks around it.

mod distortion;
mod psi;
mod spec;

pub use distortion::{
    default_sample, distortion_report, DistortionEntry, DistortionReport, SampleVector, DEFAULT_GAUSSIAN,
    DEFAULT_SPARSE,
};
pub use psi::{khintchine_ratio, psi_coordinates, psi_l1_norm, PsiCoordinate, DUMP_MAX_N, KHINTCHINE_EXACT_MAX_N};
pub use spec::{
    build_d, hypothesis_grid, verify_md_equivalence, EmbeddingSpec, MdEquivalence, DEFAULT_SPREAD_BOUND,
    D_MONOTONE_SLACK,
};
