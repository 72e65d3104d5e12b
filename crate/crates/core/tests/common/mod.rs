//! Independent reference implementations shared by the integration tests.
//!
//! Nothing here calls the averaging engine: permutations come from Heap's algorithm, and
//! `c^k`, `z` and all sums are rebuilt from their definitions.

#![allow(dead_code)]

use orlicz_lorentz::orlicz::OrliczFunction;
use orlicz_lorentz::spaces::RealVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> RealVector {
    RealVector::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

/// All permutations of `0..n`, by Heap's algorithm.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k - 1 {
            heap(k - 1, a, out);
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
        heap(k - 1, a, out);
    }
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    heap(n, &mut a, &mut out);
    out
}

/// All sign vectors in `{±1}^n`.
pub fn sign_vectors(n: usize) -> Vec<Vec<f64>> {
    (0..1u32 << n)
        .map(|m| (0..n).map(|i| if m >> i & 1 == 1 { -1.0 } else { 1.0 }).collect())
        .collect()
}

/// `c^k` for 1-based `k`: `a_k` in the first `⌊n/k⌋` places, zero elsewhere.
pub fn c_vectors(a: &[f64]) -> Vec<Vec<f64>> {
    let n = a.len();
    (1..=n)
        .map(|k| (1..=n).map(|j| if j <= n / k { a[k - 1] } else { 0.0 }).collect())
        .collect()
}

/// `z_i = (n/i)^{1/p}`.
pub fn z_values(n: usize, p: f64) -> Vec<f64> {
    (1..=n).map(|i| (n as f64 / i as f64).powf(1.0 / p)).collect()
}

/// Triple average `Ave_{π,σ,η} (Σ_{i,k} |x_i c^k_{π(i)} d_{σ(k)} z_{η(k)}|²)^{1/2}`, full double sum.
pub fn triple_average_brute(x: &[f64], d: &[f64], a: &[f64], p: f64) -> f64 {
    let n = x.len();
    let c = c_vectors(a);
    let z = z_values(n, p);
    let perms = permutations(n);
    let mut total = 0.0;
    for pi in &perms {
        for sigma in &perms {
            for eta in &perms {
                let mut s = 0.0;
                for i in 0..n {
                    for k in 0..n {
                        let v = x[i] * c[k][pi[i]] * d[sigma[k]] * z[eta[k]];
                        s += v * v;
                    }
                }
                total += s.sqrt();
            }
        }
    }
    total / (perms.len().pow(3)) as f64
}

/// `‖Ψ_n x‖₁` by a five-fold loop over `(π, σ, η, ε, δ)`.
pub fn psi_brute(x: &[f64], d: &[f64], a: &[f64], p: f64) -> f64 {
    let n = x.len();
    let c = c_vectors(a);
    let z = z_values(n, p);
    let perms = permutations(n);
    let signs = sign_vectors(n);
    let mut total = 0.0;
    let mut count = 0usize;
    for pi in &perms {
        for sigma in &perms {
            for eta in &perms {
                for eps in &signs {
                    for delta in &signs {
                        let mut s = 0.0;
                        for i in 0..n {
                            for k in 0..n {
                                s += x[i] * c[k][pi[i]] * d[sigma[k]] * z[eta[k]] * eps[i] * delta[k];
                            }
                        }
                        total += s.abs();
                        count += 1;
                    }
                }
            }
        }
    }
    total / count as f64
}

/// `Ave_π f(π)` over Heap-ordered permutations.
pub fn perm_average(n: usize, f: impl Fn(&[usize]) -> f64) -> f64 {
    let perms = permutations(n);
    perms.iter().map(|p| f(p)).sum::<f64>() / perms.len() as f64
}

/// A random strict convex piecewise-linear function with `pieces` segments.
pub fn random_pl(rng: &mut ChaCha8Rng, pieces: usize) -> OrliczFunction {
    let mut knots = vec![(0.0, 0.0)];
    let (mut t, mut v) = (0.0, 0.0);
    let mut slope = rng.random_range(0.05..1.0);
    for _ in 0..pieces {
        let dt = rng.random_range(0.1..2.0);
        t += dt;
        v += slope * dt;
        knots.push((t, v));
        slope += rng.random_range(0.05..1.5);
    }
    OrliczFunction::piecewise_linear(knots, None, None).unwrap()
}

/// `sup_t (x t − M(t))` over the union of `extra` and a dense grid on `[0, t_max]`.
pub fn conjugate_by_grid(m: &OrliczFunction, x: f64, t_max: f64, extra: &[f64]) -> f64 {
    let steps = 20_000;
    (0..=steps)
        .map(|i| t_max * i as f64 / steps as f64)
        .chain(extra.iter().copied())
        .filter(|&t| t <= t_max)
        .map(|t| x * t - m.eval(t).unwrap())
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
