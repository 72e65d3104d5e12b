use crate::error::{invalid, Error, Result};

/// Relative slack used when validating slope monotonicity of piecewise-linear input.
const SLOPE_TOL: f64 = 1e-12;

/// Behaviour of a piecewise-linear function to the right of its last breakpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// Linear extension with the given slope, unbounded domain.
    Slope(f64),
    /// The function is `+∞` past the last breakpoint.
    Wall,
}

/// Convex, non-decreasing, piecewise-linear function on `[0, ∞)` with `M(0) = 0`.
///
/// Breakpoints are stored as `(t, M(t))` pairs starting at `(0, 0)`. A finite domain
/// bound is represented by a final breakpoint at the bound followed by [`Tail::Wall`].
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
    tail: Tail,
}

impl PiecewiseLinear {
    /// Validates and builds a piecewise-linear Orlicz function.
    ///
    /// `tail_slope` defaults to the slope of the last segment. A `domain_bound` larger than
    /// the last breakpoint extends the function linearly up to the bound before the wall.
    pub fn new(knots: Vec<(f64, f64)>, tail_slope: Option<f64>, domain_bound: Option<f64>) -> Result<Self> {
        if knots.is_empty() {
            return Err(invalid("piecewise-linear function needs at least the origin"));
        }
        if knots[0] != (0.0, 0.0) {
            return Err(invalid(format!(
                "first breakpoint must be (0, 0), got ({}, {})",
                knots[0].0, knots[0].1
            )));
        }
        if knots.iter().any(|&(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(invalid("breakpoints must be finite"));
        }
        let mut prev_slope = 0.0_f64;
        for w in knots.windows(2) {
            let (t0, v0) = w[0];
            let (t1, v1) = w[1];
            if t1 <= t0 {
                return Err(invalid(format!(
                    "breakpoint abscissae must be strictly increasing ({t0} then {t1})"
                )));
            }
            let slope = (v1 - v0) / (t1 - t0);
            if slope < -SLOPE_TOL * v1.abs().max(1.0) {
                return Err(invalid(format!("function decreases on [{t0}, {t1}]")));
            }
            if slope < prev_slope - SLOPE_TOL * prev_slope.abs().max(1.0) {
                return Err(invalid(format!(
                    "slopes must be non-decreasing (convexity): {prev_slope} then {slope} at t = {t0}"
                )));
            }
            prev_slope = prev_slope.max(slope);
        }
        let last_slope = Self::last_segment_slope(&knots);
        let tail_slope = match (tail_slope, last_slope) {
            (Some(s), _) => s,
            (None, Some(s)) => s,
            (None, None) if domain_bound.is_some() => 0.0,
            (None, None) => {
                return Err(invalid(
                    "a function with a single breakpoint needs an explicit tail slope",
                ))
            }
        };
        if !tail_slope.is_finite() || tail_slope < prev_slope - SLOPE_TOL * prev_slope.abs().max(1.0) {
            return Err(invalid(format!(
                "tail slope {tail_slope} must be finite and at least the last segment slope {prev_slope}"
            )));
        }
        let mut knots = knots;
        let tail = match domain_bound {
            None => Tail::Slope(tail_slope),
            Some(b) => {
                let &(tm, vm) = knots.last().expect("non-empty");
                if !b.is_finite() || b < tm {
                    return Err(invalid(format!(
                        "domain bound {b} must be finite and not below the last breakpoint {tm}"
                    )));
                }
                if b > tm {
                    knots.push((b, vm + tail_slope * (b - tm)));
                }
                Tail::Wall
            }
        };
        let pl = Self { knots, tail };
        if pl.is_identically_zero() {
            return Err(invalid("function vanishes identically on its domain"));
        }
        Ok(pl)
    }

    /// Builds from already-consistent data (conjugates, fits). Only cheap structural checks.
    pub(crate) fn from_parts(knots: Vec<(f64, f64)>, tail: Tail) -> Self {
        debug_assert!(!knots.is_empty() && knots[0] == (0.0, 0.0));
        Self { knots, tail }
    }

    fn last_segment_slope(knots: &[(f64, f64)]) -> Option<f64> {
        let n = knots.len();
        (n >= 2).then(|| {
            let (t0, v0) = knots[n - 2];
            let (t1, v1) = knots[n - 1];
            (v1 - v0) / (t1 - t0)
        })
    }

    fn is_identically_zero(&self) -> bool {
        match self.tail {
            Tail::Slope(s) => s == 0.0 && self.knots.iter().all(|&(_, v)| v == 0.0),
            // an indicator of [0, b] is allowed, a domain reduced to {0} is not
            Tail::Wall => self.knots.len() == 1,
        }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    /// Slope of each segment between consecutive breakpoints.
    pub fn segment_slopes(&self) -> Vec<f64> {
        self.knots
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect()
    }

    /// Slope used past the last breakpoint, `None` for a wall.
    pub fn tail_slope(&self) -> Option<f64> {
        match self.tail {
            Tail::Slope(s) => Some(s),
            Tail::Wall => None,
        }
    }

    pub fn domain_bound(&self) -> Option<f64> {
        match self.tail {
            Tail::Slope(_) => None,
            Tail::Wall => Some(self.knots.last().expect("non-empty").0),
        }
    }

    /// Slope of the first piece; zero marks a degenerate function.
    fn initial_slope(&self) -> f64 {
        if self.knots.len() >= 2 {
            let (t1, v1) = self.knots[1];
            v1 / t1
        } else {
            match self.tail {
                Tail::Slope(s) => s,
                Tail::Wall => 0.0,
            }
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let idx = self.knots.partition_point(|&(tk, _)| tk <= t);
        let (tj, vj) = self.knots[idx - 1];
        if idx == self.knots.len() {
            return match self.tail {
                Tail::Slope(s) => vj + s * (t - tj),
                Tail::Wall if t == tj => vj,
                Tail::Wall => f64::INFINITY,
            };
        }
        if t == tj {
            return vj;
        }
        let (tk, vk) = self.knots[idx];
        vj + (t - tj) * (vk - vj) / (tk - tj)
    }

    fn inverse(&self, s: f64) -> Result<f64> {
        // first breakpoint whose value exceeds s
        let idx = self.knots.partition_point(|&(_, v)| v <= s);
        if idx == self.knots.len() {
            let &(tm, vm) = self.knots.last().expect("non-empty");
            return match self.tail {
                Tail::Slope(slope) if slope > 0.0 => Ok(tm + (s - vm) / slope),
                Tail::Slope(_) => Ok(f64::INFINITY),
                Tail::Wall => {
                    if s <= vm * (1.0 + 1e-12) + f64::MIN_POSITIVE {
                        Ok(tm)
                    } else {
                        Err(Error::Range { value: s, sup: vm })
                    }
                }
            };
        }
        let (tj, vj) = self.knots[idx - 1];
        let (tk, vk) = self.knots[idx];
        Ok(tj + (s - vj) * (tk - tj) / (vk - vj))
    }

    fn conjugate(&self) -> Self {
        let tol = |x: f64| 1e-13 * x.abs().max(1.0);
        let mut out: Vec<(f64, f64)> = vec![(0.0, 0.0)];
        let mut push = |xi: f64, val: f64| {
            let &(last, _) = out.last().expect("non-empty");
            if xi > last + tol(last) {
                out.push((xi, val));
            }
        };
        // supporting line of slope sigma_j touches at the left end of segment j
        for w in self.knots.windows(2) {
            let (t0, v0) = w[0];
            let (t1, v1) = w[1];
            let sigma = (v1 - v0) / (t1 - t0);
            push(sigma, sigma * t0 - v0);
        }
        let &(tm, vm) = self.knots.last().expect("non-empty");
        let tail = match self.tail {
            Tail::Slope(s) => {
                push(s, s * tm - vm);
                Tail::Wall
            }
            Tail::Wall => Tail::Slope(tm),
        };
        Self::from_parts(out, tail)
    }

    fn range_sup(&self) -> f64 {
        match self.tail {
            Tail::Slope(s) if s > 0.0 => f64::INFINITY,
            _ => self.knots.last().expect("non-empty").1,
        }
    }
}

/// An Orlicz function: convex, non-decreasing, `M(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum OrliczFunction {
    /// `M(t) = c · t^p`.
    Power {
        p: f64,
        c: f64,
    },
    PiecewiseLinear(PiecewiseLinear),
}

impl OrliczFunction {
    pub fn power(p: f64, c: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(invalid(format!("power exponent must be >= 1, got {p}")));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(invalid(format!("power scale must be positive, got {c}")));
        }
        Ok(OrliczFunction::Power { p, c })
    }

    pub fn piecewise_linear(
        knots: Vec<(f64, f64)>,
        tail_slope: Option<f64>,
        domain_bound: Option<f64>,
    ) -> Result<Self> {
        PiecewiseLinear::new(knots, tail_slope, domain_bound).map(OrliczFunction::PiecewiseLinear)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(invalid(format!("Orlicz function argument must be >= 0, got {t}")));
        }
        Ok(self.eval_unchecked(t))
    }

    /// Evaluation without the sign check, for hot loops over absolute values.
    #[inline]
    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        match self {
            OrliczFunction::Power { p, c } => {
                if *p == 1.0 {
                    c * t
                } else if *p == 2.0 {
                    c * t * t
                } else {
                    c * t.powf(*p)
                }
            }
            OrliczFunction::PiecewiseLinear(pl) => pl.eval(t),
        }
    }

    /// Generalized inverse `sup { t >= 0 : M(t) <= s }`.
    pub fn inverse(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(invalid(format!("inverse argument must be >= 0, got {s}")));
        }
        match self {
            OrliczFunction::Power { p, c } => Ok(if *p == 2.0 {
                (s / c).sqrt()
            } else {
                (s / c).powf(1.0 / p)
            }),
            OrliczFunction::PiecewiseLinear(pl) => pl.inverse(s),
        }
    }

    /// Legendre conjugate `M*(x) = sup_t (x t − M(t))`.
    pub fn conjugate(&self) -> Self {
        match self {
            OrliczFunction::Power { p, c } if *p > 1.0 => {
                let q = p / (p - 1.0);
                let cq = (p - 1.0) * p.powf(-q) * c.powf(-1.0 / (p - 1.0));
                OrliczFunction::Power { p: q, c: cq }
            }
            // c·t is conjugate to the indicator of [0, c]
            OrliczFunction::Power { c, .. } => {
                OrliczFunction::PiecewiseLinear(PiecewiseLinear::from_parts(vec![(0.0, 0.0), (*c, 0.0)], Tail::Wall))
            }
            OrliczFunction::PiecewiseLinear(pl) => OrliczFunction::PiecewiseLinear(pl.conjugate()),
        }
    }

    /// `M(t) > 0` for every `t > 0`.
    pub fn is_strict(&self) -> bool {
        match self {
            OrliczFunction::Power { .. } => true,
            OrliczFunction::PiecewiseLinear(pl) => pl.initial_slope() > 0.0,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        !self.is_strict()
    }

    pub(crate) fn require_strict(&self) -> Result<()> {
        if self.is_strict() {
            Ok(())
        } else {
            Err(Error::Degenerate)
        }
    }

    /// Supremum of the finite values of `M`.
    pub fn range_sup(&self) -> f64 {
        match self {
            OrliczFunction::Power { .. } => f64::INFINITY,
            OrliczFunction::PiecewiseLinear(pl) => pl.range_sup(),
        }
    }

    /// Right end of the domain where `M` is finite.
    pub fn domain_bound(&self) -> Option<f64> {
        match self {
            OrliczFunction::Power { .. } => None,
            OrliczFunction::PiecewiseLinear(pl) => pl.domain_bound(),
        }
    }

    pub fn as_piecewise_linear(&self) -> Option<&PiecewiseLinear> {
        match self {
            OrliczFunction::PiecewiseLinear(pl) => Some(pl),
            OrliczFunction::Power { .. } => None,
        }
    }
}

/// Evaluation abscissae: non-empty, strictly increasing, positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("grid must be non-empty"));
        }
        if points.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(invalid("grid points must be positive and finite"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("grid points must be strictly increasing"));
        }
        Ok(Self { points })
    }

    /// `count` points geometrically spaced from `lo` to `hi` inclusive.
    pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo) || count == 0 {
            return Err(invalid(format!("bad log grid [{lo}, {hi}] x {count}")));
        }
        if count == 1 {
            return Self::new(vec![lo]);
        }
        let (a, b) = (lo.ln(), hi.ln());
        let step = (b - a) / (count - 1) as f64;
        let mut points: Vec<f64> = (0..count).map(|i| (a + step * i as f64).exp()).collect();
        points[0] = lo;
        points[count - 1] = hi;
        Self::new(points)
    }

    /// The points `ℓ/n` for `ℓ = 1..=n`.
    pub fn fractions(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("fraction grid needs n >= 1"));
        }
        Self::new((1..=n).map(|l| l as f64 / n as f64).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_pl() -> OrliczFunction {
        OrliczFunction::piecewise_linear(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 3.0)], None, None).unwrap()
    }

    #[test]
    fn eval_examples() {
        let sq = OrliczFunction::power(2.0, 1.0).unwrap();
        assert_eq!(sq.eval(3.0).unwrap(), 9.0);
        assert_eq!(sample_pl().eval(1.5).unwrap(), 2.0);
        assert_eq!(sq.eval(0.0).unwrap(), 0.0);
        assert_eq!(sample_pl().eval(0.0).unwrap(), 0.0);
        // linear extension with the final slope 2
        assert_eq!(sample_pl().eval(3.0).unwrap(), 5.0);
        assert!(sq.eval(-1.0).is_err());
    }

    #[test]
    fn inverse_examples() {
        let sq = OrliczFunction::power(2.0, 1.0).unwrap();
        assert_eq!(sq.inverse(4.0).unwrap(), 2.0);
        assert_eq!(sample_pl().inverse(2.0).unwrap(), 1.5);
        let m = OrliczFunction::power(1.7, 0.3).unwrap();
        let t = 0.7;
        assert!((m.inverse(m.eval(t).unwrap()).unwrap() - t).abs() < 1e-15);
        assert!((sample_pl().inverse(sample_pl().eval(t).unwrap()).unwrap() - t).abs() < 1e-15);
    }

    #[test]
    fn inverse_of_flat_returns_right_end() {
        let m = OrliczFunction::piecewise_linear(vec![(0.0, 0.0), (1.0, 0.0), (2.0, 1.0)], None, None).unwrap();
        assert!(m.is_degenerate());
        assert_eq!(m.inverse(0.0).unwrap(), 1.0);
        assert_eq!(m.inverse(0.5).unwrap(), 1.5);
    }

    #[test]
    fn bounded_domain() {
        let m = OrliczFunction::piecewise_linear(vec![(0.0, 0.0), (1.0, 1.0)], Some(2.0), Some(2.0)).unwrap();
        assert_eq!(m.domain_bound(), Some(2.0));
        assert_eq!(m.eval(2.0).unwrap(), 3.0);
        assert_eq!(m.eval(2.5).unwrap(), f64::INFINITY);
        assert_eq!(m.inverse(3.0).unwrap(), 2.0);
        assert!(matches!(m.inverse(3.5), Err(Error::Range { .. })));
        assert_eq!(m.range_sup(), 3.0);
    }

    #[test]
    fn rejects_invalid_piecewise_linear() {
        // concave
        assert!(OrliczFunction::piecewise_linear(vec![(0.0, 0.0), (1.0, 2.0), (2.0, 3.0)], None, None).is_err());
        // not starting at the origin
        assert!(OrliczFunction::piecewise_linear(vec![(0.0, 1.0), (1.0, 2.0)], None, None).is_err());
        // tail slope below last slope
        assert!(OrliczFunction::piecewise_linear(vec![(0.0, 0.0), (1.0, 2.0)], Some(1.0), None).is_err());
        // identically zero
        assert!(OrliczFunction::piecewise_linear(vec![(0.0, 0.0), (1.0, 0.0)], None, None).is_err());
        assert!(OrliczFunction::power(0.5, 1.0).is_err());
        assert!(OrliczFunction::power(2.0, 0.0).is_err());
    }

    #[test]
    fn power_conjugates() {
        // t^p/p -> t^q/q
        let p = 1.5;
        let q = 3.0;
        let m = OrliczFunction::power(p, 1.0 / p).unwrap();
        match m.conjugate() {
            OrliczFunction::Power { p: pq, c } => {
                assert!((pq - q).abs() < 1e-14);
                assert!((c - 1.0 / q).abs() < 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
        // t^2 -> x^2/4
        match OrliczFunction::power(2.0, 1.0).unwrap().conjugate() {
            OrliczFunction::Power { p, c } => {
                assert_eq!(p, 2.0);
                assert!((c - 0.25).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
        let lin = OrliczFunction::power(1.0, 2.0).unwrap().conjugate();
        assert_eq!(lin.domain_bound(), Some(2.0));
        assert!(lin.is_degenerate());
    }

    #[test]
    fn pl_conjugate_structure() {
        let m = sample_pl();
        let ms = m.conjugate();
        let pl = ms.as_piecewise_linear().unwrap();
        // slopes 1 and 2 become breakpoints; flat on [0,1]; wall at the final slope 2
        assert_eq!(pl.knots(), &[(0.0, 0.0), (1.0, 0.0), (2.0, 1.0)]);
        assert_eq!(pl.tail(), Tail::Wall);
        assert!(ms.is_degenerate());
        let back = ms.conjugate();
        for &(t, v) in sample_pl().as_piecewise_linear().unwrap().knots() {
            assert!((back.eval(t).unwrap() - v).abs() < 1e-15);
        }
        assert_eq!(back.as_piecewise_linear().unwrap().tail(), Tail::Slope(2.0));
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(vec![]).is_err());
        assert!(Grid::new(vec![0.0, 1.0]).is_err());
        assert!(Grid::new(vec![1.0, 1.0]).is_err());
        let g = Grid::log_spaced(1e-3, 10.0, 50).unwrap();
        assert_eq!(g.len(), 50);
        assert_eq!(g.points()[0], 1e-3);
        assert_eq!(g.points()[49], 10.0);
        assert_eq!(Grid::fractions(4).unwrap().points(), &[0.25, 0.5, 0.75, 1.0]);
    }
}
