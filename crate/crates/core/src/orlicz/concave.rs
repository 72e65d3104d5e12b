//! Orlicz functions from prescribed values of the inverse conjugate.
//!
//! Given samples `(s_ℓ, φ_ℓ)` the goal is a function `N` whose conjugate satisfies
//! `(N*)⁻¹(s_ℓ) = φ_ℓ`. The sample polyline through the origin is replaced by its least
//! concave majorant when it is not already concave; that concave polyline is inverted to
//! a convex piecewise-linear `N*` with a wall at `φ_max`, and `N` is its conjugate.

use serde::Serialize;

use super::function::OrliczFunction;
use crate::error::{invalid, Result};

/// Result of fitting a convex `N*` to inverse-conjugate samples.
#[derive(Debug, Clone, Serialize)]
pub struct ConcaveInverseFit {
    /// The Orlicz function `N`.
    pub function: OrliczFunction,
    /// Its conjugate `N*`, with `(N*)⁻¹(s_ℓ) = fitted[ℓ]`.
    pub conjugate: OrliczFunction,
    /// Majorant values at the sample abscissae.
    pub fitted: Vec<f64>,
    /// Whether any sample had to be lifted to restore concavity.
    pub majorized: bool,
    /// Largest `fitted[ℓ] − φ_ℓ`.
    pub max_lift: f64,
}

/// Indices of the vertices of the least concave majorant of `pts` (sorted by abscissa).
/// Collinear points are kept as vertices.
fn upper_hull(pts: &[(f64, f64)]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(pts.len());
    for (i, &p) in pts.iter().enumerate() {
        while hull.len() >= 2 {
            let a = pts[hull[hull.len() - 2]];
            let b = pts[hull[hull.len() - 1]];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross > 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

pub fn fit_concave_inverse(samples: &[(f64, f64)]) -> Result<ConcaveInverseFit> {
    if samples.is_empty() {
        return Err(invalid("need at least one sample"));
    }
    let mut prev = (0.0, 0.0);
    for &(s, phi) in samples {
        if !(s.is_finite() && phi.is_finite()) {
            return Err(invalid("samples must be finite"));
        }
        if s <= prev.0 {
            return Err(invalid(format!(
                "sample abscissae must be positive and increasing (at s = {s})"
            )));
        }
        if phi <= 0.0 {
            return Err(invalid(format!(
                "sample values must be positive (φ = {phi} at s = {s})"
            )));
        }
        if phi < prev.1 {
            return Err(invalid(format!(
                "sample values must be non-decreasing ({} then {phi} at s = {s})",
                prev.1
            )));
        }
        prev = (s, phi);
    }

    let mut pts = Vec::with_capacity(samples.len() + 1);
    pts.push((0.0, 0.0));
    pts.extend_from_slice(samples);
    let hull = upper_hull(&pts);

    for w in hull.windows(2) {
        let (a, b) = (pts[w[0]], pts[w[1]]);
        if b.1 <= a.1 {
            return Err(invalid(format!(
                "concave majorant is flat on [{}, {}]; the inverse conjugate must be strictly increasing",
                a.0, b.0
            )));
        }
    }

    let mut fitted = Vec::with_capacity(samples.len());
    let mut seg = 0;
    for (idx, &(s, phi)) in pts.iter().enumerate().skip(1) {
        while hull[seg + 1] < idx {
            seg += 1;
        }
        let value = if hull[seg + 1] == idx {
            phi
        } else {
            let (a, b) = (pts[hull[seg]], pts[hull[seg + 1]]);
            a.1 + (s - a.0) * (b.1 - a.1) / (b.0 - a.0)
        };
        fitted.push(value.max(phi));
    }
    let max_lift = fitted
        .iter()
        .zip(samples)
        .map(|(f, &(_, phi))| f - phi)
        .fold(0.0, f64::max);
    let majorized = hull.len() < pts.len();

    // N* passes through (φ̂_v, s_v) at the hull vertices and is +∞ past φ_max
    let knots: Vec<(f64, f64)> = hull.iter().map(|&i| (pts[i].1, pts[i].0)).collect();
    let phi_max = knots.last().expect("hull contains the origin").0;
    let conjugate = OrliczFunction::piecewise_linear(knots, None, Some(phi_max))?;
    let function = conjugate.conjugate();
    Ok(ConcaveInverseFit {
        function,
        conjugate,
        fitted,
        majorized,
        max_lift,
    })
}

/// The Orlicz function `N` with `(N*)⁻¹(s_ℓ)` equal to the concave majorant of `φ_ℓ`.
pub fn pl_from_concave_inverse(samples: &[(f64, f64)]) -> Result<OrliczFunction> {
    fit_concave_inverse(samples).map(|fit| fit.function)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample() {
        let fit = fit_concave_inverse(&[(1.0, 2.5)]).unwrap();
        assert_eq!(fit.conjugate.inverse(1.0).unwrap(), 2.5);
        assert!(!fit.majorized);
    }

    #[test]
    fn concave_samples_are_reproduced() {
        let n = 8;
        let samples: Vec<(f64, f64)> = (1..=n)
            .map(|l| {
                let s = l as f64 / n as f64;
                (s, s.sqrt())
            })
            .collect();
        let fit = fit_concave_inverse(&samples).unwrap();
        assert!(!fit.majorized);
        for (&(s, phi), &f) in samples.iter().zip(&fit.fitted) {
            assert_eq!(f, phi);
            assert!((fit.conjugate.inverse(s).unwrap() - phi).abs() <= 1e-15 * phi);
        }
    }

    #[test]
    fn non_concave_samples_are_majorized() {
        let samples = [(0.25, 1.0), (0.5, 1.1), (0.75, 2.0), (1.0, 2.1)];
        let fit = fit_concave_inverse(&samples).unwrap();
        assert!(fit.majorized);
        assert!(fit.max_lift > 0.0);
        for (&(s, phi), &f) in samples.iter().zip(&fit.fitted) {
            assert!(f >= phi);
            assert!((fit.conjugate.inverse(s).unwrap() - f).abs() <= 1e-14 * f);
        }
        // the majorant slopes are non-increasing
        let slopes: Vec<f64> = std::iter::once((0.0, 0.0))
            .chain(samples.iter().map(|&(s, _)| s).zip(fit.fitted.iter().copied()))
            .collect::<Vec<_>>()
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect();
        assert!(slopes.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(fit_concave_inverse(&[]).is_err());
        assert!(fit_concave_inverse(&[(0.5, 2.0), (1.0, 1.0)]).is_err());
        assert!(fit_concave_inverse(&[(0.5, 0.0), (1.0, 1.0)]).is_err());
        assert!(fit_concave_inverse(&[(0.5, 1.0), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn fitted_function_is_degenerate_with_linear_tail() {
        let fit = fit_concave_inverse(&[(0.5, 1.0), (1.0, 1.5)]).unwrap();
        assert!(fit.function.is_degenerate());
        assert_eq!(fit.function.domain_bound(), None);
        assert_eq!(fit.conjugate.domain_bound(), Some(1.5));
        assert_eq!(fit.conjugate.eval(1.5).unwrap(), 1.0);
    }
}
