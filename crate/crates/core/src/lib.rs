//! Orlicz, Lorentz and Orlicz-Lorentz sequence norms, permutation averages over the
//! symmetric group, and an explicit embedding of `ℓⁿ_{M,a}` into a finite `L₁` space.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod combinat;
pub mod embed;
pub mod error;
pub mod orlicz;
pub mod report;
pub mod spaces;

pub use error::{Error, Result};
