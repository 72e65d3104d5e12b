//! Monte Carlo estimates against exact enumeration.

mod common;

use common::*;
use orlicz_lorentz::combinat::*;
use orlicz_lorentz::embed::*;
use orlicz_lorentz::orlicz::OrliczFunction;
use orlicz_lorentz::spaces::WeightSequence;
use rand::Rng;

const SAMPLES: u64 = 100_000;

/// `|mc − exact| ≤ k·se`, plus a rounding floor for summands that do not depend on the sample.
fn within(exact: f64, mc: &Estimate, k: f64) -> bool {
    (mc.mean - exact).abs() <= k * mc.se + 1e-12 * exact.abs()
}

/// Counts instances `0..count` whose Monte Carlo estimate covers the exact value.
fn coverage(count: u64, mut instance: impl FnMut(u64) -> (f64, Estimate)) -> u64 {
    (0..count)
        .filter(|&j| {
            let (exact, mc) = instance(j);
            assert!(!mc.exact && mc.n_samples == SAMPLES);
            within(exact, &mc, 4.0)
        })
        .count() as u64
}

#[test]
fn random_functionals_n6() {
    let mut g = rng(100);
    for j in 0..50 {
        let w: Vec<f64> = (0..6).map(|_| g.random_range(-1.0..1.0)).collect();
        let f = |pi: &[usize]| {
            pi.iter()
                .zip(&w)
                .map(|(&i, c)| c * (i as f64 + 1.0).sqrt())
                .sum::<f64>()
                .abs()
        };
        let exact = average_over_perms(f, 6, &AveragingPlan::exact()).unwrap().mean;
        let mc = average_over_perms(f, 6, &AveragingPlan::monte_carlo(SAMPLES, j)).unwrap();
        assert!(within(exact, &mc, 4.0), "functional {j}: exact {exact}, mc {mc:?}");
    }
}

#[test]
fn ks_average_coverage() {
    let mut g = rng(101);
    let hits = coverage(100, |j| {
        let n = 4 + (j % 4) as usize;
        let x = random_vector(&mut g, n);
        let a = WeightSequence::power_decay(n, 0.5).unwrap();
        let e = ks_average(&x, &a, 2.0, 1.0, &AveragingPlan::exact()).unwrap().mean;
        (
            e,
            ks_average(&x, &a, 2.0, 1.0, &AveragingPlan::monte_carlo(SAMPLES, j)).unwrap(),
        )
    });
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn mixed_norm_lhs_coverage() {
    let mut g = rng(102);
    let hits = coverage(100, |j| {
        let n = 6;
        let k = 1 + (j % 3) as usize;
        let x = random_vector(&mut g, n);
        let e = schuett_sides(&x, k, 1.5, &AveragingPlan::exact()).unwrap().lhs.mean;
        (
            e,
            schuett_sides(&x, k, 1.5, &AveragingPlan::monte_carlo(SAMPLES, j))
                .unwrap()
                .lhs,
        )
    });
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn triple_average_coverage() {
    let mut g = rng(103);
    let a = WeightSequence::power_decay(4, 0.25).unwrap();
    let d = build_d(&OrliczFunction::power(1.1, 1.0).unwrap(), 4).unwrap();
    let hits = coverage(100, |j| {
        let x = random_vector(&mut g, 4);
        let e = theorem31_average(&x, &d, &a, 1.2, &AveragingPlan::exact())
            .unwrap()
            .mean;
        (
            e,
            theorem31_average(&x, &d, &a, 1.2, &AveragingPlan::monte_carlo(SAMPLES, j)).unwrap(),
        )
    });
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn psi_coverage() {
    let mut g = rng(104);
    let spec = EmbeddingSpec::new(
        OrliczFunction::power(1.3, 1.0).unwrap(),
        WeightSequence::power_decay(3, 1.0).unwrap(),
        1.6,
    )
    .unwrap();
    let hits = coverage(100, |j| {
        let x = random_vector(&mut g, 3);
        let e = psi_l1_norm(&spec, &x, &AveragingPlan::exact()).unwrap().mean;
        (
            e,
            psi_l1_norm(&spec, &x, &AveragingPlan::monte_carlo(SAMPLES, j)).unwrap(),
        )
    });
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn khintchine_coverage() {
    let mut g = rng(105);
    let hits = coverage(100, |j| {
        let b: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..4).map(|_| g.random_range(-1.0..1.0)).collect())
            .collect();
        let e = khintchine_ratio(&b, &AveragingPlan::exact()).unwrap().mean;
        (
            e,
            khintchine_ratio(&b, &AveragingPlan::monte_carlo(SAMPLES, j)).unwrap(),
        )
    });
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn early_stop_reaches_target() {
    let mut g = rng(107);
    let v = random_vector(&mut g, 6);
    let a = WeightSequence::power_decay(6, 0.5).unwrap();
    let plan = AveragingPlan::monte_carlo(10_000_000, 3).with_target_rel_se(1e-3);
    let e = ks_average(&v, &a, 2.0, 1.0, &plan).unwrap();
    assert!(e.rel_se() <= 1e-3);
    assert!(e.n_samples < 10_000_000);
}
