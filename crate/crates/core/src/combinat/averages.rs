use serde::Serialize;

use super::engine::{average, AveragingPlan, Estimate};
use super::perm::{PermSignPoint, PermSignSpace};
use crate::error::{invalid, Result};
use crate::orlicz::{fit_concave_inverse, ConcaveInverseFit, OrliczFunction};
use crate::spaces::{rearrange, RealVector, WeightSequence};

/// Relative float slack allowed in the partial-sum scans.
pub const SCAN_SLACK: f64 = 1e-12;

/// `Ave_π f(π)` over permutations of `0..n` (`π[i]` is the image of `i`).
pub fn average_over_perms<F>(f: F, n: usize, plan: &AveragingPlan) -> Result<Estimate>
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    if n == 0 {
        return Err(invalid("permutation degree must be >= 1"));
    }
    let space = PermSignSpace::perms(n, 1);
    average(&space, |pt: &PermSignPoint| f(&pt.perms), plan, 1.0)
}

/// `z_i = (n/i)^{1/p}`, the vector generating the `ℓ_p`-norm.
pub fn z_vector(n: usize, p: f64) -> Vec<f64> {
    (1..=n).map(|i| (n as f64 / i as f64).powf(1.0 / p)).collect()
}

/// Nonzero entries `⌊n/k⌋` of `c^k`, for `k = 1..n`.
pub fn c_supports(n: usize) -> Vec<usize> {
    (1..=n).map(|k| n / k).collect()
}

/// `1/p* = 1 − 1/p`.
fn inv_conj(p: f64) -> f64 {
    1.0 - 1.0 / p
}

/// The two terms of the inverse-conjugate formula at `ℓ/n`, `ℓ = 1..n`.
#[derive(Debug, Clone, Serialize)]
pub struct KsTerms {
    pub s: Vec<f64>,
    /// `(ℓ/n)^{1/p*} ((1/n) Σ_{i≤ℓ} a_i^p)^{1/p}`.
    pub head: Vec<f64>,
    /// `(ℓ/n)^{1/r*} ((1/n) Σ_{i>ℓ} a_i^r)^{1/r}`.
    pub tail: Vec<f64>,
}

impl KsTerms {
    pub fn raw(&self) -> Vec<f64> {
        self.head.iter().zip(&self.tail).map(|(h, t)| h + t).collect()
    }

    /// `head + running max of tail`: a non-decreasing majorant of `raw`.
    pub fn monotone(&self) -> Vec<f64> {
        let mut best = 0.0_f64;
        self.head
            .iter()
            .zip(&self.tail)
            .map(|(h, &t)| {
                best = best.max(t);
                h + best
            })
            .collect()
    }
}

fn check_ks_exponents(p: f64, r: f64) -> Result<()> {
    if !(p >= 1.0 && r > p && r.is_finite()) {
        return Err(invalid(format!("need 1 <= p < r < inf, got p = {p}, r = {r}")));
    }
    Ok(())
}

pub fn ks_terms(a: &WeightSequence, p: f64, r: f64) -> Result<KsTerms> {
    check_ks_exponents(p, r)?;
    let w = a.values();
    let n = w.len();
    let nf = n as f64;
    let mut suffix = vec![0.0; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + w[i].powf(r);
    }
    let mut head = Vec::with_capacity(n);
    let mut tail = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    let mut prefix = 0.0;
    for l in 1..=n {
        prefix += w[l - 1].powf(p);
        let sl = l as f64 / nf;
        s.push(sl);
        head.push(sl.powf(inv_conj(p)) * (prefix / nf).powf(1.0 / p));
        tail.push(sl.powf(inv_conj(r)) * (suffix[l] / nf).powf(1.0 / r));
    }
    Ok(KsTerms { s, head, tail })
}

#[derive(Debug, Clone, Serialize)]
pub struct KsConstruction {
    pub terms: KsTerms,
    /// Samples handed to the concave fit.
    pub samples: Vec<(f64, f64)>,
    /// Whether the tail term had to be replaced by its running maximum.
    pub monotone_repair: bool,
    pub fit: ConcaveInverseFit,
}

/// Builds `N` with `(N*)⁻¹(ℓ/n)` given by the two-term formula, after monotone repair and
/// concave majorization.
pub fn ks_construction(a: &WeightSequence, p: f64, r: f64) -> Result<KsConstruction> {
    let terms = ks_terms(a, p, r)?;
    let phi = terms.monotone();
    let monotone_repair = phi.iter().zip(terms.raw()).any(|(m, raw)| *m != raw);
    let samples: Vec<(f64, f64)> = terms.s.iter().copied().zip(phi).collect();
    let fit = fit_concave_inverse(&samples)?;
    Ok(KsConstruction {
        terms,
        samples,
        monotone_repair,
        fit,
    })
}

pub fn ks_orlicz_from_weights(a: &WeightSequence, p: f64, r: f64) -> Result<OrliczFunction> {
    ks_construction(a, p, r).map(|c| c.fit.function)
}

/// `(Ave_π (Σ_i |x_i a_{π(i)}|^r)^{p/r})^{1/p}`.
pub fn ks_average(x: &RealVector, a: &WeightSequence, r: f64, p: f64, plan: &AveragingPlan) -> Result<Estimate> {
    check_ks_exponents(p, r)?;
    a.check_len(x.len())?;
    let n = x.len();
    let xs: Vec<f64> = x.coords().iter().map(|v| v.abs()).collect();
    let w = a.values();
    let space = PermSignSpace::perms(n, 1);
    let est = average(
        &space,
        |pt: &PermSignPoint| {
            let s: f64 = xs.iter().zip(&pt.perms).map(|(&v, &j)| (v * w[j]).powf(r)).sum();
            s.powf(p / r)
        },
        plan,
        n as f64,
    )?;
    Ok(est.powf(1.0 / p))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SchuettSides {
    pub lhs: Estimate,
    pub rhs: f64,
    /// The `p`-mean head of `rhs`.
    pub rhs_head: f64,
    /// The quadratic tail of `rhs`.
    pub rhs_tail: f64,
}

impl SchuettSides {
    pub fn ratio(&self) -> f64 {
        self.lhs.mean / self.rhs
    }
}

/// Both sides of the mixed-norm average: `(Ave_π (Σ_{i≤⌊n/k⌋} |x_{π(i)}|²)^{p/2})^{1/p}` and
/// `((1/k) Σ_{i≤k} (x*_i)^p)^{1/p} + ((1/k) Σ_{i>k} (x*_i)²)^{1/2}`.
pub fn schuett_sides(x: &RealVector, k: usize, p: f64, plan: &AveragingPlan) -> Result<SchuettSides> {
    let n = x.len();
    if !(1..=n).contains(&k) {
        return Err(invalid(format!("k must lie in [1, {n}], got {k}")));
    }
    if !(1.0..=2.0).contains(&p) {
        return Err(invalid(format!("p must lie in [1, 2], got {p}")));
    }
    let m = n / k;
    let sq: Vec<f64> = x.coords().iter().map(|v| v * v).collect();
    let space = PermSignSpace::perms(n, 1);
    let lhs = average(
        &space,
        |pt: &PermSignPoint| {
            let s: f64 = pt.perms[..m].iter().map(|&j| sq[j]).sum();
            s.powf(p / 2.0)
        },
        plan,
        m as f64,
    )?
    .powf(1.0 / p);
    let xs = rearrange(x);
    let v = xs.coords();
    let kf = k as f64;
    let rhs_head = (v[..k].iter().map(|c| c.powf(p)).sum::<f64>() / kf).powf(1.0 / p);
    let rhs_tail = (v[k..].iter().map(|c| c * c).sum::<f64>() / kf).sqrt();
    Ok(SchuettSides {
        lhs,
        rhs: rhs_head + rhs_tail,
        rhs_head,
        rhs_tail,
    })
}

/// One of the partial-sum scans for `z_i = (n/i)^{1/p}`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundScan {
    pub name: String,
    pub constant: f64,
    pub pass: bool,
    /// Smallest `bound − value` normalized by `(m/n)^{1/p*}` (negative for upper bounds
    /// means a violation; for the lower bound `value − bound`).
    pub worst_margin: f64,
    pub worst_m: usize,
    /// `m` values violating the bound, truncated to the first 20.
    pub violations: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorollaryBounds {
    pub n: usize,
    pub p: f64,
    pub upper: BoundScan,
    pub lower: BoundScan,
    pub tail: BoundScan,
    /// The lower bound with constant `1/(2(1 − 1/p))`, scanned for information only.
    pub halved_lower: BoundScan,
    pub pass: bool,
}

struct Scan {
    name: &'static str,
    constant: f64,
    upper: bool,
    worst_margin: f64,
    worst_m: usize,
    violations: Vec<usize>,
    count: usize,
}

impl Scan {
    fn new(name: &'static str, constant: f64, upper: bool) -> Self {
        Self {
            name,
            constant,
            upper,
            worst_margin: f64::INFINITY,
            worst_m: 0,
            violations: Vec::new(),
            count: 0,
        }
    }

    /// Compares `value` with `constant · scale`.
    fn visit(&mut self, m: usize, value: f64, scale: f64) {
        let bound = self.constant * scale;
        let (ok, margin) = if self.upper {
            (value <= bound * (1.0 + SCAN_SLACK), (bound - value) / scale)
        } else {
            (value >= bound * (1.0 - SCAN_SLACK), (value - bound) / scale)
        };
        if margin < self.worst_margin {
            self.worst_margin = margin;
            self.worst_m = m;
        }
        if !ok {
            self.count += 1;
            if self.violations.len() < 20 {
                self.violations.push(m);
            }
        }
    }

    fn finish(self) -> BoundScan {
        BoundScan {
            name: self.name.to_string(),
            constant: self.constant,
            pass: self.count == 0,
            worst_margin: self.worst_margin,
            worst_m: self.worst_m,
            violations: self.violations,
        }
    }
}

/// Scans all `m ≤ n` for the partial-sum and tail estimates behind the `ℓ_p`-generating vector.
pub fn corollary_bounds_check(n: usize, p: f64) -> Result<CorollaryBounds> {
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    if !(p > 1.0 && p < 2.0) {
        return Err(invalid(format!("p must lie in (1, 2), got {p}")));
    }
    let z = z_vector(n, p);
    let nf = n as f64;
    let q = inv_conj(p);
    let mut tails = vec![0.0; n + 1];
    for i in (0..n).rev() {
        tails[i] = tails[i + 1] + z[i] * z[i];
    }
    let mut upper = Scan::new("upper partial sum", 2.0 / (1.0 - 1.0 / p), true);
    let mut lower = Scan::new("lower partial sum", 1.0, false);
    let mut tail = Scan::new("quadratic tail", (2.0 / p - 1.0).powf(-0.5), true);
    let mut halved = Scan::new(
        "lower partial sum, halved constant",
        1.0 / (2.0 * (1.0 - 1.0 / p)),
        false,
    );
    let mut partial = 0.0;
    for m in 1..=n {
        partial += z[m - 1];
        let mean = partial / nf;
        let scale = (m as f64 / nf).powf(q);
        upper.visit(m, mean, scale);
        lower.visit(m, mean, scale);
        halved.visit(m, mean, scale);
        let t = (m as f64 / nf).sqrt() * (tails[m] / nf).sqrt();
        tail.visit(m, t, scale);
    }
    let (upper, lower, tail) = (upper.finish(), lower.finish(), tail.finish());
    let pass = upper.pass && lower.pass && tail.pass;
    Ok(CorollaryBounds {
        n,
        p,
        upper,
        lower,
        tail,
        halved_lower: halved.finish(),
        pass,
    })
}

pub(crate) fn check_triple_inputs(n: usize, d: &WeightSequence, a: &WeightSequence, p: f64) -> Result<()> {
    d.check_len(n)?;
    a.check_len(n)?;
    if !(p > 1.0 && p < 2.0) {
        return Err(invalid(format!("p must lie in (1, 2), got {p}")));
    }
    Ok(())
}

/// Per-permutation data shared by the triple average and the embedding norm.
pub(crate) struct Theorem31Kernel {
    pub n: usize,
    pub x: Vec<f64>,
    /// `a_k`.
    pub a: Vec<f64>,
    pub d: Vec<f64>,
    pub z: Vec<f64>,
    pub supports: Vec<usize>,
}

impl Theorem31Kernel {
    pub fn new(x: &RealVector, d: &WeightSequence, a: &WeightSequence, p: f64) -> Result<Self> {
        let n = x.len();
        check_triple_inputs(n, d, a, p)?;
        Ok(Self {
            n,
            x: x.coords().to_vec(),
            a: a.values().to_vec(),
            d: d.values().to_vec(),
            z: z_vector(n, p),
            supports: c_supports(n),
        })
    }

    /// `(Σ_{i,k} |x_i c^k_{π(i)} d_{σ(k)} z_{η(k)}|²)^{1/2}`, using that `c^k_{π(i)} ≠ 0` iff
    /// `π(i) < ⌊n/k⌋`.
    pub fn value(&self, pi: &[usize], sigma: &[usize], eta: &[usize], scratch: &mut Vec<f64>) -> f64 {
        let n = self.n;
        scratch.clear();
        scratch.resize(n + 1, 0.0);
        for (i, &j) in pi.iter().enumerate() {
            scratch[j + 1] = self.x[i] * self.x[i];
        }
        for j in 0..n {
            scratch[j + 1] += scratch[j];
        }
        let mut total = 0.0;
        for k in 0..n {
            let w = self.a[k] * self.d[sigma[k]] * self.z[eta[k]];
            total += w * w * scratch[self.supports[k]];
        }
        total.sqrt()
    }
}

/// `Ave_{π,σ,η} (Σ_{i,k} |x_i c^k_{π(i)} d_{σ(k)} z_{η(k)}|²)^{1/2}` with `z_i = (n/i)^{1/p}` and
/// `c^k = (a_k, …, a_k, 0, …, 0)` carrying `⌊n/k⌋` nonzero entries.
pub fn theorem31_average(
    x: &RealVector,
    d: &WeightSequence,
    a: &WeightSequence,
    p: f64,
    plan: &AveragingPlan,
) -> Result<Estimate> {
    let kernel = Theorem31Kernel::new(x, d, a, p)?;
    let n = kernel.n;
    let space = PermSignSpace::perms(n, 3);
    let terms = (n * n) as f64;
    let scratch = thread_local_scratch();
    average(
        &space,
        |pt: &PermSignPoint| {
            scratch.with(|s| kernel.value(pt.perm(0, n), pt.perm(1, n), pt.perm(2, n), &mut s.borrow_mut()))
        },
        plan,
        terms,
    )
}

type Scratch = &'static std::thread::LocalKey<std::cell::RefCell<Vec<f64>>>;

pub(crate) fn thread_local_scratch() -> Scratch {
    thread_local! {
        static SCRATCH: std::cell::RefCell<Vec<f64>> = const { std::cell::RefCell::new(Vec::new()) };
    }
    &SCRATCH
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn v(c: &[f64]) -> RealVector {
        RealVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn uniform_marginal() {
        let x = [1.0, 2.0, 3.0];
        let e = average_over_perms(|pi| x[pi[0]], 3, &AveragingPlan::exact()).unwrap();
        assert_eq!(e.mean, 2.0);
        assert!(e.exact && e.se == 0.0 && e.n_samples == 6);
        let mc = average_over_perms(|_| 1.25, 4, &AveragingPlan::monte_carlo(500, 3)).unwrap();
        assert_eq!((mc.mean, mc.se), (1.25, 0.0));
    }

    #[test]
    fn exact_budget_is_enforced() {
        let plan = AveragingPlan::exact().with_budget(100);
        assert!(matches!(
            average_over_perms(|_| 0.0, 6, &plan),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn ks_average_hand_example() {
        let x = v(&[1.0, 1.0]);
        let a = WeightSequence::new(vec![2.0, 1.0]).unwrap();
        let e = ks_average(&x, &a, 2.0, 1.0, &AveragingPlan::exact()).unwrap();
        assert!((e.mean - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ks_single_weight() {
        let a = WeightSequence::new(vec![1.7]).unwrap();
        let c = ks_construction(&a, 1.0, 2.0).unwrap();
        assert_eq!(c.terms.tail, vec![0.0]);
        assert!((c.fit.conjugate.inverse(1.0).unwrap() - 1.7).abs() < 1e-15);
    }

    #[test]
    fn ks_constant_weights_closed_form() {
        let n = 50;
        let t = ks_terms(&WeightSequence::constant(n).unwrap(), 1.0, 2.0).unwrap();
        for (l, phi) in t.raw().iter().enumerate() {
            let s = (l + 1) as f64 / n as f64;
            let want = s + (s * (1.0 - s)).sqrt();
            assert!((phi - want).abs() < 1e-14, "l={l}");
        }
    }

    #[test]
    fn mixed_norm_endpoints() {
        let x = v(&[0.3, -1.2, 2.0, 0.7, -0.1]);
        let plan = AveragingPlan::exact();
        let full = schuett_sides(&x, 5, 1.4, &plan).unwrap();
        assert_eq!(full.rhs_tail, 0.0);
        assert!((full.ratio() - 1.0).abs() < 1e-12);
        let one = schuett_sides(&x, 1, 1.4, &plan).unwrap();
        let l2 = crate::spaces::lp_norm(&x, 2.0).unwrap();
        assert!((one.lhs.mean - l2).abs() < 1e-14);
        assert!(one.ratio() >= 0.5 && one.ratio() <= 1.0);
        assert!(schuett_sides(&x, 0, 1.4, &plan).is_err());
        assert!(schuett_sides(&x, 6, 1.4, &plan).is_err());
    }

    #[test]
    fn partial_sum_scans() {
        let r = corollary_bounds_check(1000, 1.5).unwrap();
        assert!(r.pass);
        // equality at m = 1
        assert!(r.lower.worst_margin.abs() < 1e-12 && r.lower.worst_m == 1);
        assert!(!r.halved_lower.pass && r.halved_lower.violations.contains(&2));
    }

    #[test]
    fn triple_average_one_dimensional() {
        let x = v(&[-2.0]);
        let d = WeightSequence::new(vec![0.7]).unwrap();
        let a = WeightSequence::new(vec![1.5]).unwrap();
        let e = theorem31_average(&x, &d, &a, 1.5, &AveragingPlan::exact()).unwrap();
        assert!((e.mean - 2.0 * 0.7 * 1.5).abs() < 1e-15);
    }
}
