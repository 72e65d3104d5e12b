use serde::{Deserialize, Serialize};

use crate::combinat::{c_supports, ks_construction, z_vector, KsConstruction};
use crate::error::{invalid, Error, Result};
use crate::orlicz::{check_power_ratio_monotone, equivalence_ratio, Grid, OrliczFunction};
use crate::spaces::WeightSequence;

/// Relative slack for microscopic increases of `d` before clamping.
pub const D_MONOTONE_SLACK: f64 = 1e-12;
/// Default bound on the spread of `(M_d*)⁻¹/(M*)⁻¹`.
pub const DEFAULT_SPREAD_BOUND: f64 = 16.0;

/// `d_ℓ = n[(M*)⁻¹(ℓ/n) − (M*)⁻¹((ℓ−1)/n)]` with `(M*)⁻¹(0) = 0`, so that the running means of
/// `d` reproduce `(M*)⁻¹` on the grid `ℓ/n`.
pub fn build_d(m: &OrliczFunction, n: usize) -> Result<WeightSequence> {
    m.require_strict()?;
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    let conj = m.conjugate();
    let nf = n as f64;
    let mut prev = 0.0;
    let mut d: Vec<f64> = Vec::with_capacity(n);
    for l in 1..=n {
        let g = conj.inverse(l as f64 / nf)?;
        let mut dl = nf * (g - prev);
        if let Some(&last) = d.last() {
            if dl > last * (1.0 + D_MONOTONE_SLACK) {
                return Err(Error::Numeric(format!(
                    "d increases at l = {l}: {dl} > {last}; (M*)⁻¹ is not concave on the grid"
                )));
            }
            dl = dl.min(last);
        }
        if !(dl > 0.0) {
            return Err(Error::Numeric(format!("d_{l} = {dl} is not positive")));
        }
        d.push(dl);
        prev = g;
    }
    WeightSequence::new(d)
}

/// The data `(n, p, M, a, d, z, c¹…cⁿ)` defining `Ψ_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingSpec {
    pub n: usize,
    pub p: f64,
    pub orlicz: OrliczFunction,
    pub weights: WeightSequence,
    pub d: WeightSequence,
    pub z: Vec<f64>,
    /// `⌊n/k⌋`, the number of entries equal to `a_k` in `c^k`.
    pub c_supports: Vec<usize>,
}

impl EmbeddingSpec {
    pub fn new(orlicz: OrliczFunction, weights: WeightSequence, p: f64) -> Result<Self> {
        if !(p > 1.0 && p < 2.0) {
            return Err(invalid(format!("p must lie in (1, 2), got {p}")));
        }
        let n = weights.len();
        let d = build_d(&orlicz, n)?;
        Ok(Self {
            n,
            p,
            orlicz,
            weights,
            d,
            z: z_vector(n, p),
            c_supports: c_supports(n),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Deserialize)]
struct RawSpec {
    n: usize,
    p: f64,
    orlicz: OrliczFunction,
    weights: WeightSequence,
    d: Option<Vec<f64>>,
    z: Option<Vec<f64>>,
    c_supports: Option<Vec<usize>>,
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= tol * y.abs().max(x.abs()))
}

impl<'de> Deserialize<'de> for EmbeddingSpec {
    /// Rebuilds the derived fields and rejects stored values that disagree with them.
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawSpec::deserialize(de)?;
        if raw.n != raw.weights.len() {
            return Err(D::Error::custom(format!(
                "n = {} but {} weights given",
                raw.n,
                raw.weights.len()
            )));
        }
        let spec = EmbeddingSpec::new(raw.orlicz, raw.weights, raw.p).map_err(D::Error::custom)?;
        if let Some(d) = raw.d {
            if !close(&d, spec.d.values(), 1e-10) {
                return Err(D::Error::custom("stored d does not match the Orlicz function"));
            }
        }
        if let Some(z) = raw.z {
            if !close(&z, &spec.z, 1e-12) {
                return Err(D::Error::custom("stored z does not match (n/i)^(1/p)"));
            }
        }
        if let Some(c) = raw.c_supports {
            if c != spec.c_supports {
                return Err(D::Error::custom("stored c_supports do not match floor(n/k)"));
            }
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MdEquivalence {
    pub n: usize,
    pub p: f64,
    pub eps: f64,
    pub d: WeightSequence,
    /// `(M_d*)⁻¹(ℓ/n)`.
    pub md_inverse: Vec<f64>,
    /// `(M*)⁻¹(ℓ/n)`.
    pub m_inverse: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
    pub spread: f64,
    pub spread_bound: f64,
    /// `lo ≥ 1` up to float slack: the head term alone reproduces `(M*)⁻¹`.
    pub lower_exact: bool,
    pub majorized: bool,
    pub monotone_repair: bool,
    pub pass: bool,
    #[serde(skip)]
    pub construction: Option<KsConstruction>,
}

/// Hypothesis grid for `M(t)/t^{p−ε}` non-increasing.
pub fn hypothesis_grid() -> Grid {
    Grid::log_spaced(1e-6, 1e6, 121).expect("valid grid")
}

/// Builds `d` from `M`, the Orlicz function `M_d` with `(M_d*)⁻¹(ℓ/n) ≈ (1/n)Σ_{i≤ℓ} d_i +
/// (ℓ/n)^{1/p*}((1/n)Σ_{i>ℓ} d_i^p)^{1/p}`, and compares `(M_d*)⁻¹` with `(M*)⁻¹` on `ℓ/n`.
pub fn verify_md_equivalence(
    m: &OrliczFunction,
    n: usize,
    p: f64,
    eps: f64,
    spread_bound: Option<f64>,
) -> Result<MdEquivalence> {
    if !(p > 1.0 && p < 2.0) {
        return Err(invalid(format!("p must lie in (1, 2), got {p}")));
    }
    if !(eps > 0.0 && eps < p - 1.0) {
        return Err(invalid(format!("eps must lie in (0, p - 1), got {eps}")));
    }
    let q = p - eps;
    let hyp = check_power_ratio_monotone(m, q, &hypothesis_grid())?;
    if !hyp.pass {
        let at = hyp
            .first_violation
            .map_or_else(|| "unknown point".to_string(), |t| format!("t = {t:e}"));
        return Err(Error::Precondition(format!(
            "M(t)/t^{q} is not non-increasing (first violation at {at})"
        )));
    }
    let d = build_d(m, n)?;
    let construction = ks_construction(&d, 1.0, p)?;
    let grid = Grid::fractions(n)?;
    let md_star = &construction.fit.conjugate;
    let m_star = m.conjugate();
    let ratio = equivalence_ratio(md_star, &m_star, &grid)?;
    let md_inverse = grid
        .points()
        .iter()
        .map(|&s| md_star.inverse(s))
        .collect::<Result<Vec<_>>>()?;
    let m_inverse = grid
        .points()
        .iter()
        .map(|&s| m_star.inverse(s))
        .collect::<Result<Vec<_>>>()?;
    let spread_bound = spread_bound.unwrap_or(DEFAULT_SPREAD_BOUND);
    let spread = ratio.spread();
    Ok(MdEquivalence {
        n,
        p,
        eps,
        d,
        md_inverse,
        m_inverse,
        lo: ratio.lo,
        hi: ratio.hi,
        spread,
        spread_bound,
        lower_exact: ratio.lo >= 1.0 - 1e-12,
        majorized: construction.fit.majorized,
        monotone_repair: construction.monotone_repair,
        pass: spread <= spread_bound,
        construction: Some(construction),
    })
}
