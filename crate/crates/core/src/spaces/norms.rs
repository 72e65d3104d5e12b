use serde::Serialize;

use super::{RealVector, WeightSequence};
use crate::error::{invalid, Error, Result};
use crate::orlicz::OrliczFunction;

/// Relative bracket width at which the Luxemburg bisection stops.
pub const LUXEMBURG_REL_TOL: f64 = 1e-12;
pub const LUXEMBURG_MAX_ITER: usize = 200;
const MAX_BRACKET_STEPS: usize = 2100;

/// `(|x_i|)` sorted non-increasingly; ties keep their original order.
pub fn rearrange(x: &RealVector) -> RealVector {
    let mut v: Vec<f64> = x.coords().iter().map(|c| c.abs()).collect();
    // sort_by is stable
    v.sort_by(|a, b| b.total_cmp(a));
    RealVector(v)
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid(format!("exponent must be finite and >= 1, got {p}")));
    }
    Ok(())
}

pub fn lp_norm(x: &RealVector, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let m = x.max_abs();
    if m == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(x.coords().iter().map(|c| c.abs()).sum());
    }
    let s: f64 = x.coords().iter().map(|c| (c.abs() / m).powf(p)).sum();
    Ok(m * s.powf(1.0 / p))
}

/// `(Σ a_i (x*_i)^p)^{1/p}`.
pub fn lorentz_norm(x: &RealVector, a: &WeightSequence, p: f64) -> Result<f64> {
    check_exponent(p)?;
    a.check_len(x.len())?;
    let xs = rearrange(x);
    let m = xs.coords()[0];
    if m == 0.0 {
        return Ok(0.0);
    }
    let s: f64 = xs
        .coords()
        .iter()
        .zip(a.values())
        .map(|(&v, &w)| w * (v / m).powf(p))
        .sum();
    Ok(m * s.powf(1.0 / p))
}

/// Luxemburg norm together with solver diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LuxemburgSolution {
    pub rho: f64,
    /// `Σ M(|x_i|/ρ) − 1` at the returned `ρ`.
    pub residual: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

fn modular(m: &OrliczFunction, abs_sorted: &[f64], rho: f64) -> f64 {
    abs_sorted.iter().map(|&v| m.eval_unchecked(v / rho)).sum()
}

/// Smallest `ρ` with `Σ M(|x_i|/ρ) ≤ 1`, by bracketing and bisection.
///
/// Degenerate functions (vanishing near 0) are accepted: the infimum is still attained
/// and defines a norm as long as `M` is not identically zero.
pub fn luxemburg_norm_with_stats(m: &OrliczFunction, x: &RealVector) -> Result<LuxemburgSolution> {
    let xs = rearrange(x);
    let v = xs.coords();
    let top = v[0];
    if top == 0.0 {
        return Ok(LuxemburgSolution {
            rho: 0.0,
            residual: -1.0,
            iterations: 0,
            bracket: (0.0, 0.0),
        });
    }
    let start = match m.inverse(1.0) {
        Ok(u) if u > 0.0 && u.is_finite() => top / u,
        _ => match m.domain_bound() {
            Some(b) if b > 0.0 => top / b,
            _ => top,
        },
    };

    let (mut lo, mut hi);
    if modular(m, v, start) <= 1.0 {
        hi = start;
        lo = start / 2.0;
        let mut steps = 0;
        while modular(m, v, lo) <= 1.0 {
            hi = lo;
            lo /= 2.0;
            steps += 1;
            if steps > MAX_BRACKET_STEPS || lo == 0.0 {
                return Err(Error::Numeric(format!(
                    "Luxemburg bracket: modular stays <= 1 down to rho = {lo:e} (function {m})"
                )));
            }
        }
    } else {
        lo = start;
        hi = start * 2.0;
        let mut steps = 0;
        while modular(m, v, hi) > 1.0 {
            lo = hi;
            hi *= 2.0;
            steps += 1;
            if steps > MAX_BRACKET_STEPS || !hi.is_finite() {
                return Err(Error::Numeric(format!(
                    "Luxemburg bracket: modular stays > 1 up to rho = {hi:e} (function {m})"
                )));
            }
        }
    }

    let mut iterations = 0;
    while hi - lo > LUXEMBURG_REL_TOL * hi {
        if iterations == LUXEMBURG_MAX_ITER {
            return Err(Error::Numeric(format!(
                "Luxemburg bisection did not converge: bracket [{lo:e}, {hi:e}] after {iterations} iterations"
            )));
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if modular(m, v, mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(LuxemburgSolution {
        rho: hi,
        residual: modular(m, v, hi) - 1.0,
        iterations,
        bracket: (lo, hi),
    })
}

/// `‖x‖_M = inf { ρ > 0 : Σ M(|x_i|/ρ) ≤ 1 }`.
pub fn luxemburg_norm(m: &OrliczFunction, x: &RealVector) -> Result<f64> {
    luxemburg_norm_with_stats(m, x).map(|s| s.rho)
}

/// `‖x‖_{M,a}`: the Luxemburg norm of `(a_i x*_i)`.
pub fn orlicz_lorentz_norm(m: &OrliczFunction, a: &WeightSequence, x: &RealVector) -> Result<f64> {
    a.check_len(x.len())?;
    let xs = rearrange(x);
    let y: Vec<f64> = xs.coords().iter().zip(a.values()).map(|(v, w)| v * w).collect();
    luxemburg_norm(m, &RealVector(y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> RealVector {
        RealVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn rearrange_examples() {
        assert_eq!(rearrange(&v(&[-1.0, 3.0, -2.0])).coords(), &[3.0, 2.0, 1.0]);
        let sorted = v(&[5.0, 2.0, 2.0, 0.0]);
        assert_eq!(rearrange(&sorted), sorted);
        let x = v(&[0.3, -7.0, 2.0, -0.3]);
        assert_eq!(rearrange(&rearrange(&x)), rearrange(&x));
    }

    #[test]
    fn lp_examples() {
        assert_eq!(lp_norm(&v(&[3.0, 4.0]), 2.0).unwrap(), 5.0);
        assert_eq!(lp_norm(&v(&[1.0, 1.0, 1.0]), 1.0).unwrap(), 3.0);
        for p in [1.0, 1.5, 2.0, 7.0] {
            assert_eq!(lp_norm(&v(&[0.0, 1.0, 0.0]), p).unwrap(), 1.0);
        }
        assert!(lp_norm(&v(&[1.0]), 0.5).is_err());
    }

    #[test]
    fn lorentz_examples() {
        let x = v(&[1.0, 1.0]);
        let a = WeightSequence::new(vec![1.0, 0.5]).unwrap();
        assert_eq!(lorentz_norm(&x, &a, 1.0).unwrap(), 1.5);
        let y = v(&[0.3, -2.0, 1.1]);
        let ones = WeightSequence::constant(3).unwrap();
        let diff = lorentz_norm(&y, &ones, 2.5).unwrap() - lp_norm(&y, 2.5).unwrap();
        assert!(diff.abs() < 1e-15);
        assert!(matches!(
            lorentz_norm(&y, &WeightSequence::constant(2).unwrap(), 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn luxemburg_power_matches_lp() {
        let x = v(&[0.5, -1.5, 2.0, 0.1]);
        for p in [1.0, 1.5, 2.0, 3.0] {
            let m = OrliczFunction::power(p, 1.0).unwrap();
            let lux = luxemburg_norm(&m, &x).unwrap();
            let lp = lp_norm(&x, p).unwrap();
            assert!((lux - lp).abs() <= 1e-9 * lp, "p={p}: {lux} vs {lp}");
        }
    }

    #[test]
    fn luxemburg_single_coordinate() {
        let m: OrliczFunction = "pl:[[0,0],[1,0.5],[2,2]]".parse().unwrap();
        let x = v(&[0.0, -3.0, 0.0]);
        let expected = 3.0 / m.inverse(1.0).unwrap();
        let got = luxemburg_norm(&m, &x).unwrap();
        assert!((got - expected).abs() <= 1e-11 * expected);
    }

    #[test]
    fn luxemburg_zero_vector() {
        let m = OrliczFunction::power(2.0, 1.0).unwrap();
        assert_eq!(luxemburg_norm(&m, &v(&[0.0, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn luxemburg_residual_is_small() {
        let m: OrliczFunction = "pl:[[0,0],[0.3,0.1],[1,1.2],[2,4]]".parse().unwrap();
        let x = v(&[0.4, 2.0, -1.3, 0.05, 0.9]);
        let sol = luxemburg_norm_with_stats(&m, &x).unwrap();
        assert!(sol.residual.abs() <= 1e-9, "{sol:?}");
    }

    #[test]
    fn luxemburg_handles_degenerate_and_walls() {
        // flat on [0, 0.5], wall at 2
        let m: OrliczFunction = "pl:[[0,0],[0.5,0],[2,1.5]];bound=2".parse().unwrap();
        let x = v(&[1.0, 1.0]);
        let rho = luxemburg_norm(&m, &x).unwrap();
        let s: f64 = x.coords().iter().map(|c| m.eval(c / rho).unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-9);
    }

    #[test]
    fn orlicz_lorentz_power_gives_reweighted_lorentz() {
        let p = 1.7;
        let m = OrliczFunction::power(p, 1.0).unwrap();
        let a = WeightSequence::new(vec![1.0, 0.6, 0.2]).unwrap();
        let x = v(&[0.2, -1.0, 3.0]);
        let ap = WeightSequence::new(a.values().iter().map(|w| w.powf(p)).collect()).unwrap();
        let got = orlicz_lorentz_norm(&m, &a, &x).unwrap();
        let want = lorentz_norm(&x, &ap, p).unwrap();
        assert!((got - want).abs() <= 1e-10 * want);
        // c·e1 -> c·a1 / M⁻¹(1)
        let e = v(&[0.0, 2.5, 0.0]);
        let got = orlicz_lorentz_norm(&m, &a, &e).unwrap();
        assert!((got - 2.5).abs() <= 1e-11);
    }
}
