//! Rearrangements and sequence-space norms: `ℓ_p`, Lorentz, Orlicz (Luxemburg) and
//! Orlicz-Lorentz, together with the Hardy-type operators and weight-decay conditions.

mod hardy;
mod norms;

pub use hardy::{
    empirical_hardy_constant, hardy_operator, weight_condition, HardyConstant, HardyOperator, WeightCondition,
    WeightConditionVariant,
};
pub use norms::{
    lorentz_norm, lp_norm, luxemburg_norm, luxemburg_norm_with_stats, orlicz_lorentz_norm, rearrange,
    LuxemburgSolution, LUXEMBURG_MAX_ITER, LUXEMBURG_REL_TOL,
};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Non-increasing positive weights `a₁ ≥ … ≥ a_n > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct WeightSequence(Vec<f64>);

impl WeightSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("weight sequence must be non-empty"));
        }
        if values.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(invalid("weights must be positive and finite"));
        }
        if let Some(i) = values.windows(2).position(|w| w[1] > w[0]) {
            return Err(invalid(format!(
                "weights must be non-increasing: a[{}] = {} < a[{}] = {}",
                i + 1,
                values[i],
                i + 2,
                values[i + 1]
            )));
        }
        Ok(Self(values))
    }

    /// `a ≡ 1`.
    pub fn constant(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    /// `a_i = i^{-alpha}` for `alpha ≥ 0`.
    pub fn power_decay(n: usize, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(invalid(format!("decay exponent must be >= 0, got {alpha}")));
        }
        Self::new((1..=n).map(|i| (i as f64).powf(-alpha)).collect())
    }

    /// Weights `a_i = i^{p/q − 1}` of the `ℓ_{q,p}` quasi-Lorentz spaces, `1 ≤ p ≤ q`.
    pub fn lorentz_qp(n: usize, q: f64, p: f64) -> Result<Self> {
        if !(p >= 1.0 && q >= p) {
            return Err(invalid(format!("ℓ_(q,p) weights need 1 <= p <= q, got q={q}, p={p}")));
        }
        Self::power_decay(n, 1.0 - p / q)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.0.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.0.len(),
            });
        }
        Ok(())
    }
}

impl<'de> Deserialize<'de> for WeightSequence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<f64>::deserialize(d)?;
        WeightSequence::new(values).map_err(serde::de::Error::custom)
    }
}

/// A finite vector in `ℝⁿ`, `n ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RealVector(Vec<f64>);

impl RealVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("vector must have at least one coordinate"));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(invalid("vector entries must be finite"));
        }
        Ok(Self(coords))
    }

    /// The unit vector `e_{index+1}` in `ℝⁿ`.
    pub fn unit(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(invalid(format!("unit vector index {index} out of range for n = {n}")));
        }
        let mut v = vec![0.0; n];
        v[index] = 1.0;
        Self::new(v)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|x| x * factor).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl<'de> Deserialize<'de> for RealVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<f64>::deserialize(d)?;
        RealVector::new(values).map_err(serde::de::Error::custom)
    }
}
