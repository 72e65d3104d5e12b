use serde::Serialize;

use crate::combinat::{average, AveragingPlan, Estimate, Mode, PermSignPoint, PermSignSpace, Space};
use crate::error::{invalid, Error, Result};
use crate::spaces::RealVector;

use super::spec::EmbeddingSpec;

/// Largest dimension for exact sign enumeration in [`khintchine_ratio`].
pub const KHINTCHINE_EXACT_MAX_N: usize = 12;
/// Largest dimension for which [`psi_coordinates`] materializes `Ψ_n x`.
pub const DUMP_MAX_N: usize = 3;

/// `Ave_{ε,δ} |Σ_{i,k} ε_i δ_k b_{ik}|` over all sign pairs, for a row-major `n × n` matrix.
///
/// Uses `|−v| = |v|` to fix `ε₁ = δ₁ = +1`, and walks the remaining signs in Gray-code
/// order so each step is a rank-one update.
pub(crate) fn sign_average_abs(b: &[f64], n: usize, v: &mut Vec<f64>) -> f64 {
    debug_assert_eq!(b.len(), n * n);
    let half = 1usize << (n - 1);
    // v = B δ, δ starting at all +1
    v.clear();
    v.extend((0..n).map(|i| b[i * n..(i + 1) * n].iter().sum::<f64>()));
    let mut delta = vec![1.0; n];
    let mut outer = 0.0;
    for step in 0..half {
        if step > 0 {
            let k = step.trailing_zeros() as usize + 1;
            delta[k] = -delta[k];
            let s = 2.0 * delta[k];
            for (i, vi) in v.iter_mut().enumerate() {
                *vi += s * b[i * n + k];
            }
        }
        // Ave_ε |ε·v| with ε₁ = +1
        let mut acc: f64 = v.iter().sum();
        let mut eps = vec![1.0; n];
        let mut inner = acc.abs();
        for e in 1..half {
            let j = e.trailing_zeros() as usize + 1;
            eps[j] = -eps[j];
            acc += 2.0 * eps[j] * v[j];
            inner += acc.abs();
        }
        outer += inner;
    }
    outer / (half * half) as f64
}

/// Fills the row-major matrix `B_{ik} = x_i c^k_{π(i)} d_{σ(k)} z_{η(k)}`.
fn fill_matrix(spec: &EmbeddingSpec, x: &[f64], pi: &[usize], sigma: &[usize], eta: &[usize], b: &mut [f64]) {
    let n = spec.n;
    let a = spec.weights.values();
    let d = spec.d.values();
    for k in 0..n {
        let w = a[k] * d[sigma[k]] * spec.z[eta[k]];
        let supp = spec.c_supports[k];
        for i in 0..n {
            b[i * n + k] = if pi[i] < supp { x[i] * w } else { 0.0 };
        }
    }
}

fn sign(mask: u64, i: usize) -> f64 {
    if mask >> i & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

thread_local! {
    static BUFFERS: std::cell::RefCell<(Vec<f64>, Vec<f64>)> = const { std::cell::RefCell::new((Vec::new(), Vec::new())) };
}

/// `‖Ψ_n x‖₁`: the average over `(π, σ, η, ε, δ)` of `|Σ_{i,k} x_i c^k_{π(i)} d_{σ(k)} z_{η(k)} ε_i δ_k|`.
///
/// Exact mode enumerates `S_n³` and averages over signs exactly inside each term; Monte
/// Carlo samples all five indices jointly.
pub fn psi_l1_norm(spec: &EmbeddingSpec, x: &RealVector, plan: &AveragingPlan) -> Result<Estimate> {
    let n = spec.n;
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let xs = x.coords();
    match plan.mode {
        Mode::Exact => {
            if n > 20 {
                return Err(Error::BudgetExceeded {
                    required: f64::INFINITY,
                    budget: plan.budget,
                });
            }
            let space = PermSignSpace::perms(n, 3);
            let terms = 4f64.powi(n as i32) * (n * n) as f64;
            average(
                &space,
                |pt: &PermSignPoint| {
                    BUFFERS.with(|cell| {
                        let (b, v) = &mut *cell.borrow_mut();
                        b.resize(n * n, 0.0);
                        fill_matrix(spec, xs, pt.perm(0, n), pt.perm(1, n), pt.perm(2, n), b);
                        sign_average_abs(b, n, v)
                    })
                },
                plan,
                terms,
            )
        }
        Mode::MonteCarlo => {
            let space = PermSignSpace { n, perms: 3, signs: 2 };
            average(
                &space,
                |pt: &PermSignPoint| joint_term(spec, xs, pt),
                plan,
                (n * n) as f64,
            )
        }
    }
}

/// One coordinate of `Ψ_n x`, with signs taken from the point's two masks.
fn joint_term(spec: &EmbeddingSpec, x: &[f64], pt: &PermSignPoint) -> f64 {
    let n = spec.n;
    let (pi, sigma, eta) = (pt.perm(0, n), pt.perm(1, n), pt.perm(2, n));
    let a = spec.weights.values();
    let d = spec.d.values();
    let mut total = 0.0;
    for k in 0..n {
        let w = a[k] * d[sigma[k]] * spec.z[eta[k]] * sign(pt.signs[1], k);
        let supp = spec.c_supports[k];
        for i in 0..n {
            if pi[i] < supp {
                total += x[i] * w * sign(pt.signs[0], i);
            }
        }
    }
    total.abs()
}

/// Exact `‖Ψ_n x‖₁` from a single joint enumeration of all five indices.
#[cfg(test)]
fn psi_l1_norm_joint(spec: &EmbeddingSpec, x: &RealVector, plan: &AveragingPlan) -> Result<Estimate> {
    let space = PermSignSpace {
        n: spec.n,
        perms: 3,
        signs: 2,
    };
    let xs = x.coords();
    average(
        &space,
        |pt: &PermSignPoint| joint_term(spec, xs, pt),
        plan,
        (spec.n * spec.n) as f64,
    )
}

/// One materialized coordinate of `Ψ_n x`; permutations and signs are 0-based / ±1.
#[derive(Debug, Clone, Serialize)]
pub struct PsiCoordinate {
    pub pi: Vec<usize>,
    pub sigma: Vec<usize>,
    pub eta: Vec<usize>,
    pub epsilon: Vec<i8>,
    pub delta: Vec<i8>,
    pub value: f64,
}

/// All `n!³ 4ⁿ` coordinates of `Ψ_n x` in enumeration order, for `n ≤ 3`.
pub fn psi_coordinates(spec: &EmbeddingSpec, x: &RealVector) -> Result<Vec<PsiCoordinate>> {
    let n = spec.n;
    if n > DUMP_MAX_N {
        return Err(invalid(format!(
            "coordinates are materialized only for n <= {DUMP_MAX_N}, got {n}"
        )));
    }
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let space = PermSignSpace { n, perms: 3, signs: 2 };
    let total = space.count().expect("small space");
    let xs = x.coords();
    let a = spec.weights.values();
    let d = spec.d.values();
    let signs = |mask: u64| (0..n).map(|i| sign(mask, i) as i8).collect::<Vec<_>>();
    let mut pt = space.point_at(0);
    let mut out = Vec::with_capacity(total as usize);
    for idx in 0..total {
        if idx > 0 {
            space.advance(&mut pt);
        }
        let (pi, sigma, eta) = (pt.perm(0, n), pt.perm(1, n), pt.perm(2, n));
        let mut value = 0.0;
        for k in 0..n {
            let w = a[k] * d[sigma[k]] * spec.z[eta[k]] * sign(pt.signs[1], k);
            for i in 0..n {
                if pi[i] < spec.c_supports[k] {
                    value += xs[i] * w * sign(pt.signs[0], i);
                }
            }
        }
        out.push(PsiCoordinate {
            pi: pi.to_vec(),
            sigma: sigma.to_vec(),
            eta: eta.to_vec(),
            epsilon: signs(pt.signs[0]),
            delta: signs(pt.signs[1]),
            value,
        });
    }
    Ok(out)
}

/// `Ave_{ε,δ}|Σ_{i,k} ε_i δ_k b_{ik}| / (Σ b_{ik}²)^{1/2}` for a square matrix.
pub fn khintchine_ratio(b: &[Vec<f64>], plan: &AveragingPlan) -> Result<Estimate> {
    let n = b.len();
    if n == 0 || b.iter().any(|row| row.len() != n) {
        return Err(invalid("matrix must be square and non-empty"));
    }
    let flat: Vec<f64> = b.iter().flatten().copied().collect();
    if flat.iter().any(|v| !v.is_finite()) {
        return Err(invalid("matrix entries must be finite"));
    }
    let frob = flat.iter().map(|v| v * v).sum::<f64>().sqrt();
    if frob == 0.0 {
        return Err(invalid("matrix must not be zero"));
    }
    let est = match plan.mode {
        Mode::Exact => {
            if n > KHINTCHINE_EXACT_MAX_N {
                return Err(invalid(format!(
                    "exact sign enumeration supports n <= {KHINTCHINE_EXACT_MAX_N}; use Monte Carlo"
                )));
            }
            plan.check_budget(4f64.powi(n as i32))?;
            let mut v = Vec::new();
            Estimate::exact_value(sign_average_abs(&flat, n, &mut v), 1u64 << (2 * n))
        }
        Mode::MonteCarlo => {
            let space = PermSignSpace { n, perms: 0, signs: 2 };
            average(
                &space,
                |pt: &PermSignPoint| {
                    let mut s = 0.0;
                    for i in 0..n {
                        let mut row = 0.0;
                        for k in 0..n {
                            row += sign(pt.signs[1], k) * flat[i * n + k];
                        }
                        s += sign(pt.signs[0], i) * row;
                    }
                    s.abs()
                },
                plan,
                (n * n) as f64,
            )?
        }
    };
    Ok(est.scale(1.0 / frob))
}
