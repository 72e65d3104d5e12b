use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::combinat::{AveragingPlan, Estimate};
use crate::error::{invalid, Result};
use crate::spaces::{orlicz_lorentz_norm, RealVector};

use super::psi::psi_l1_norm;
use super::spec::EmbeddingSpec;

pub const DEFAULT_GAUSSIAN: usize = 20;
pub const DEFAULT_SPARSE: usize = 10;

/// A labelled test vector.
#[derive(Debug, Clone, Serialize)]
pub struct SampleVector {
    pub label: String,
    pub x: RealVector,
}

/// `e₁`, the all-ones vector, `(i^{−α})` for `α ∈ {0.5, 1, 2}`, 20 Gaussian and 10 sparse
/// Gaussian vectors drawn from `seed`.
pub fn default_sample(n: usize, seed: u64) -> Result<Vec<SampleVector>> {
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    let mut out = vec![
        SampleVector {
            label: "e1".into(),
            x: RealVector::unit(n, 0)?,
        },
        SampleVector {
            label: "ones".into(),
            x: RealVector::new(vec![1.0; n])?,
        },
    ];
    for alpha in [0.5, 1.0, 2.0] {
        out.push(SampleVector {
            label: format!("power-{alpha}"),
            x: RealVector::new((1..=n).map(|i| (i as f64).powf(-alpha)).collect())?,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaussian = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.sample(StandardNormal)).collect() };
    for j in 0..DEFAULT_GAUSSIAN {
        out.push(SampleVector {
            label: format!("gaussian-{j}"),
            x: RealVector::new(gaussian(&mut rng))?,
        });
    }
    let max_support = n.div_ceil(2).max(1);
    for j in 0..DEFAULT_SPARSE {
        let support = rng.random_range(1..=max_support);
        let mut idx: Vec<usize> = (0..n).collect();
        // partial Fisher-Yates for the support positions
        for t in 0..support {
            let u = rng.random_range(t..n);
            idx.swap(t, u);
        }
        let mut x = vec![0.0; n];
        for &i in &idx[..support] {
            let g: f64 = rng.sample(StandardNormal);
            x[i] = if g == 0.0 { 1.0 } else { g };
        }
        out.push(SampleVector {
            label: format!("sparse-{j}"),
            x: RealVector::new(x)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct DistortionEntry {
    pub label: String,
    pub psi: Estimate,
    pub norm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistortionReport {
    pub n: usize,
    pub entries: Vec<DistortionEntry>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `max_ratio / min_ratio`: a lower bound on the distortion of `Ψ_n`.
    pub distortion: f64,
    pub exact: bool,
}

/// Ratios `‖Ψ_n x‖₁ / ‖x‖_{M,a}` over the sample.
pub fn distortion_report(
    spec: &EmbeddingSpec,
    sample: &[SampleVector],
    plan: &AveragingPlan,
) -> Result<DistortionReport> {
    if sample.is_empty() {
        return Err(invalid("sample must be non-empty"));
    }
    let mut entries = Vec::with_capacity(sample.len());
    for s in sample {
        if s.x.is_zero() {
            return Err(invalid(format!("sample vector {} is zero", s.label)));
        }
        let psi = psi_l1_norm(spec, &s.x, plan)?;
        let norm = orlicz_lorentz_norm(&spec.orlicz, &spec.weights, &s.x)?;
        entries.push(DistortionEntry {
            label: s.label.clone(),
            psi,
            norm,
            ratio: psi.mean / norm,
        });
    }
    let min_ratio = entries.iter().map(|e| e.ratio).fold(f64::INFINITY, f64::min);
    let max_ratio = entries.iter().map(|e| e.ratio).fold(0.0, f64::max);
    let exact = entries.iter().all(|e| e.psi.exact);
    Ok(DistortionReport {
        n: spec.n,
        entries,
        min_ratio,
        max_ratio,
        distortion: max_ratio / min_ratio,
        exact,
    })
}
