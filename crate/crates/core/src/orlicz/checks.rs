//! Grid-based hypothesis and identity checks for Orlicz functions.

use serde::Serialize;

use super::function::{Grid, OrliczFunction};
use crate::error::{invalid, Error, Result};

/// Relative slack of the duality sandwich `t ≤ M⁻¹(t)(M*)⁻¹(t) ≤ 2t`.
pub const DUALITY_TOL: f64 = 1e-9;
/// Relative slack when testing monotonicity of `M(t)/t^q`.
pub const MONOTONE_TOL: f64 = 1e-12;

/// `(min, max)` of `M⁻¹(s)/N⁻¹(s)` over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceRatio {
    pub lo: f64,
    pub hi: f64,
}

impl EquivalenceRatio {
    /// `hi/lo`; equivalence constants exist on the tested range iff this is finite.
    pub fn spread(&self) -> f64 {
        self.hi / self.lo
    }
}

pub fn equivalence_ratio(m: &OrliczFunction, n: &OrliczFunction, grid: &Grid) -> Result<EquivalenceRatio> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for &s in grid.points() {
        let num = m.inverse(s)?;
        let den = n.inverse(s)?;
        if !(den > 0.0) {
            return Err(invalid(format!("N⁻¹({s}) = {den} is not positive")));
        }
        let r = num / den;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok(EquivalenceRatio { lo, hi })
}

#[derive(Debug, Clone, Serialize)]
pub struct DualityPoint {
    pub t: f64,
    pub product: f64,
    /// `product / t`, which must lie in `[1, 2]`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualityCheck {
    pub points: Vec<DualityPoint>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub pass: bool,
}

/// `sup { x : M(x) ≤ s }` without the range restriction: past a wall's finite range it is
/// the wall position.
fn sup_inverse(m: &OrliczFunction, s: f64) -> Result<f64> {
    match (m.inverse(s), m.domain_bound()) {
        (Err(Error::Range { .. }), Some(bound)) => Ok(bound),
        (r, _) => r,
    }
}

/// Evaluates `M⁻¹(t)·(M*)⁻¹(t)` on the grid and tests the two-sided bound.
pub fn check_duality_product(m: &OrliczFunction, grid: &Grid) -> Result<DualityCheck> {
    m.require_strict()?;
    let conj = m.conjugate();
    let mut points = Vec::with_capacity(grid.len());
    let mut pass = true;
    for &t in grid.points() {
        let product = m.inverse(t)? * sup_inverse(&conj, t)?;
        let ok = product >= t * (1.0 - DUALITY_TOL) && product <= 2.0 * t * (1.0 + DUALITY_TOL);
        pass &= ok;
        points.push(DualityPoint {
            t,
            product,
            ratio: product / t,
        });
    }
    let min_ratio = points.iter().map(|p| p.ratio).fold(f64::INFINITY, f64::min);
    let max_ratio = points.iter().map(|p| p.ratio).fold(0.0, f64::max);
    Ok(DualityCheck {
        points,
        min_ratio,
        max_ratio,
        pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerRatioCheck {
    pub q: f64,
    pub pass: bool,
    /// Decided analytically (power functions) rather than on the grid.
    pub analytic: bool,
    /// First grid point where `M(t)/t^q` increased, if any.
    pub first_violation: Option<f64>,
}

/// Is `t ↦ M(t)/t^q` non-increasing? Exact for power functions, grid-based otherwise.
pub fn check_power_ratio_monotone(m: &OrliczFunction, q: f64, grid: &Grid) -> Result<PowerRatioCheck> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(invalid(format!("exponent q must be positive, got {q}")));
    }
    if let OrliczFunction::Power { p, .. } = m {
        return Ok(PowerRatioCheck {
            q,
            pass: *p <= q,
            analytic: true,
            first_violation: (*p > q).then(|| grid.points()[0]),
        });
    }
    let mut first_violation = None;
    let mut prev: Option<f64> = None;
    for &t in grid.points() {
        let r = m.eval(t)? / t.powf(q);
        if let Some(pr) = prev {
            if r > pr * (1.0 + MONOTONE_TOL) {
                first_violation = Some(t);
                break;
            }
        }
        prev = Some(r);
    }
    Ok(PowerRatioCheck {
        q,
        pass: first_violation.is_none(),
        analytic: false,
        first_violation,
    })
}

/// Grid indicator of the N-function limits `M(t)/t → 0` at 0 and `→ ∞` at ∞.
#[derive(Debug, Clone, Serialize)]
pub struct NFunctionCheck {
    pub ratio_at_min: f64,
    pub ratio_at_max: f64,
    pub vanishes_at_zero: bool,
    pub blows_up_at_infinity: bool,
}

/// `vanishes_at_zero` iff `M(t)/t ≤ tol` at the smallest grid point, `blows_up_at_infinity`
/// iff `M(t)/t ≥ 1/tol` at the largest.
pub fn check_n_function(m: &OrliczFunction, grid: &Grid, tol: f64) -> Result<NFunctionCheck> {
    let pts = grid.points();
    let (a, b) = (pts[0], pts[pts.len() - 1]);
    let ratio_at_min = m.eval(a)? / a;
    let ratio_at_max = m.eval(b)? / b;
    Ok(NFunctionCheck {
        ratio_at_min,
        ratio_at_max,
        vanishes_at_zero: ratio_at_min <= tol,
        blows_up_at_infinity: ratio_at_max >= 1.0 / tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::log_spaced(1e-3, 1e3, 50).unwrap()
    }

    #[test]
    fn equivalence_examples() {
        let m = OrliczFunction::power(2.0, 1.0).unwrap();
        let r = equivalence_ratio(&m, &m, &grid()).unwrap();
        assert_eq!((r.lo, r.hi), (1.0, 1.0));
        let n = OrliczFunction::power(2.0, 4.0).unwrap();
        let r = equivalence_ratio(&m, &n, &grid()).unwrap();
        assert!((r.lo - 2.0).abs() < 1e-14 && (r.hi - 2.0).abs() < 1e-14);
    }

    #[test]
    fn duality_square_attains_upper_bound() {
        let check = check_duality_product(&OrliczFunction::power(2.0, 1.0).unwrap(), &grid()).unwrap();
        assert!(check.pass);
        for p in &check.points {
            assert!((p.product - 2.0 * p.t).abs() <= 1e-12 * p.t);
        }
    }

    #[test]
    fn duality_half_square_is_self_conjugate() {
        let m = OrliczFunction::power(2.0, 0.5).unwrap();
        let check = check_duality_product(&m, &grid()).unwrap();
        assert!(check.pass);
        for p in &check.points {
            let expected = (2.0 * p.t).sqrt();
            assert!((m.inverse(p.t).unwrap() - expected).abs() <= 1e-13 * expected);
            assert!((p.product - 2.0 * p.t).abs() <= 1e-12 * p.t);
        }
    }

    #[test]
    fn duality_rejects_degenerate() {
        let m = OrliczFunction::piecewise_linear(vec![(0.0, 0.0), (1.0, 0.0), (2.0, 1.0)], None, None).unwrap();
        assert!(check_duality_product(&m, &grid()).is_err());
    }

    #[test]
    fn power_ratio_examples() {
        let g = grid();
        let check = |p: f64, q: f64| {
            check_power_ratio_monotone(&OrliczFunction::power(p, 1.0).unwrap(), q, &g)
                .unwrap()
                .pass
        };
        assert!(check(1.2, 1.4));
        assert!(!check(2.0, 1.4));
        assert!(check(1.4, 1.4));
        // grid-based path on a piecewise-linear function: M(t)/t^1 is non-decreasing
        let pl = OrliczFunction::piecewise_linear(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 3.0)], None, None).unwrap();
        let res = check_power_ratio_monotone(&pl, 1.0, &g).unwrap();
        assert!(!res.pass && !res.analytic);
        assert!(
            check_power_ratio_monotone(&pl, 3.0, &Grid::log_spaced(1e-2, 1.0, 20).unwrap())
                .unwrap()
                .pass
        );
    }

    #[test]
    fn n_function_indicator() {
        let g = Grid::log_spaced(1e-6, 1e6, 10).unwrap();
        let sq = check_n_function(&OrliczFunction::power(2.0, 1.0).unwrap(), &g, 1e-3).unwrap();
        assert!(sq.vanishes_at_zero && sq.blows_up_at_infinity);
        let lin = check_n_function(&OrliczFunction::power(1.0, 1.0).unwrap(), &g, 1e-3).unwrap();
        assert!(!lin.vanishes_at_zero && !lin.blows_up_at_infinity);
    }
}
