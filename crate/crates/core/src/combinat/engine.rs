use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Exact-mode budget in elementary terms.
pub const DEFAULT_BUDGET: u64 = 100_000_000;
/// Environment variable overriding [`DEFAULT_BUDGET`].
pub const BUDGET_ENV: &str = "OL_BUDGET";

/// Index-space points evaluated sequentially per exact-mode work item.
const EXACT_CHUNK: u64 = 4096;
/// Samples drawn from one RNG stream per Monte Carlo work item.
const MC_BLOCK: u64 = 1024;
/// Blocks between early-stopping checks.
const MC_ROUND: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    #[serde(rename = "mc")]
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragingPlan {
    pub mode: Mode,
    pub samples: u64,
    pub seed: u64,
    pub target_rel_se: Option<f64>,
    pub budget: u64,
    /// Worker count; `None` uses rayon's global pool. Never affects results.
    pub threads: Option<usize>,
}

/// Budget from `OL_BUDGET` when it parses as a positive integer, else the default.
pub fn budget_from_env() -> u64 {
    std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<u64>().ok())
        .filter(|&b| b > 0)
        .unwrap_or(DEFAULT_BUDGET)
}

impl AveragingPlan {
    pub fn exact() -> Self {
        Self {
            mode: Mode::Exact,
            samples: 0,
            seed: 0,
            target_rel_se: None,
            budget: budget_from_env(),
            threads: None,
        }
    }

    pub fn monte_carlo(samples: u64, seed: u64) -> Self {
        Self {
            mode: Mode::MonteCarlo,
            samples,
            seed,
            target_rel_se: None,
            budget: budget_from_env(),
            threads: None,
        }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_target_rel_se(mut self, target: f64) -> Self {
        self.target_rel_se = Some(target);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == Mode::MonteCarlo && self.samples < 2 {
            return Err(invalid("Monte Carlo needs at least 2 samples"));
        }
        if let Some(t) = self.target_rel_se {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid(format!(
                    "target relative standard error must be positive, got {t}"
                )));
            }
        }
        if self.threads == Some(0) {
            return Err(invalid("thread count must be positive"));
        }
        Ok(())
    }

    /// Fails with a budget error when exact enumeration would cost more than the budget.
    pub fn check_budget(&self, terms: f64) -> Result<()> {
        if terms > self.budget as f64 {
            return Err(Error::BudgetExceeded {
                required: terms,
                budget: self.budget,
            });
        }
        Ok(())
    }

    pub(crate) fn install<R: Send>(&self, op: impl FnOnce() -> R + Send) -> Result<R> {
        match self.threads {
            None => Ok(op()),
            Some(t) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?;
                Ok(pool.install(op))
            }
        }
    }
}

/// Mean of an averaged quantity with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Standard error of the mean; `0` in exact mode.
    pub se: f64,
    pub n_samples: u64,
    pub exact: bool,
}

impl Estimate {
    pub fn exact_value(mean: f64, n: u64) -> Self {
        Self {
            mean,
            se: 0.0,
            n_samples: n,
            exact: true,
        }
    }

    /// `mean^e`, standard error through the first-order delta method.
    pub fn powf(self, e: f64) -> Self {
        let mean = self.mean.powf(e);
        let se = if self.se == 0.0 {
            0.0
        } else {
            (e * self.mean.powf(e - 1.0)).abs() * self.se
        };
        Self { mean, se, ..self }
    }

    pub fn scale(self, factor: f64) -> Self {
        Self {
            mean: self.mean * factor,
            se: self.se * factor.abs(),
            ..self
        }
    }

    pub fn rel_se(&self) -> f64 {
        if self.mean == 0.0 {
            if self.se == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.se / self.mean.abs()
        }
    }
}

/// Recursive halving sum; the tree depends only on the length of `v`.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if v.len() <= LEAF {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Streaming mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        Moments {
            n,
            mean: self.mean + d * nb / n as f64,
            m2: self.m2 + other.m2 + d * d * na * nb / n as f64,
        }
    }

    pub fn estimate(&self) -> Estimate {
        let se = if self.n > 1 {
            (self.m2.max(0.0) / (self.n - 1) as f64 / self.n as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            mean: self.mean,
            se,
            n_samples: self.n,
            exact: false,
        }
    }
}

/// An index space that can be walked in a fixed order and sampled uniformly.
pub(crate) trait Space: Sync {
    type Point: Send;

    /// Number of points; `None` if it overflows `u64`.
    fn count(&self) -> Option<u64>;
    fn point_at(&self, index: u64) -> Self::Point;
    /// Moves to the next point in enumeration order.
    fn advance(&self, point: &mut Self::Point);
    fn sample(&self, rng: &mut ChaCha8Rng) -> Self::Point;
    /// Point buffer reused for sampling.
    fn resample(&self, rng: &mut ChaCha8Rng, point: &mut Self::Point) {
        *point = self.sample(rng);
    }
}

/// Uniform average of `f` over `space`.
///
/// Exact mode walks fixed-size chunks in enumeration order, sums each chunk pairwise and the
/// chunk sums pairwise. Monte Carlo draws fixed-size blocks, block `b` from stream `b` of a
/// ChaCha8 generator seeded with the plan seed, and merges block moments in block order. Both
/// are therefore independent of the worker count.
pub(crate) fn average<S, F>(space: &S, f: F, plan: &AveragingPlan, terms_per_point: f64) -> Result<Estimate>
where
    S: Space,
    F: Fn(&S::Point) -> f64 + Sync,
{
    plan.validate()?;
    match plan.mode {
        Mode::Exact => {
            let total = space.count().ok_or(Error::BudgetExceeded {
                required: f64::INFINITY,
                budget: plan.budget,
            })?;
            plan.check_budget(total as f64 * terms_per_point)?;
            plan.install(|| exact_average(space, &f, total))?
        }
        Mode::MonteCarlo => plan.install(|| mc_average(space, &f, plan))?,
    }
}

fn exact_average<S, F>(space: &S, f: &F, total: u64) -> Result<Estimate>
where
    S: Space,
    F: Fn(&S::Point) -> f64 + Sync,
{
    let chunks = total.div_ceil(EXACT_CHUNK);
    let sums: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * EXACT_CHUNK;
            let len = EXACT_CHUNK.min(total - start);
            let mut point = space.point_at(start);
            let mut buf = Vec::with_capacity(len as usize);
            for j in 0..len {
                if j > 0 {
                    space.advance(&mut point);
                }
                buf.push(f(&point));
            }
            pairwise_sum(&buf)
        })
        .collect();
    let mean = pairwise_sum(&sums) / total as f64;
    if !mean.is_finite() {
        return Err(Error::Numeric(format!("exact average is not finite: {mean}")));
    }
    Ok(Estimate::exact_value(mean, total))
}

fn mc_average<S, F>(space: &S, f: &F, plan: &AveragingPlan) -> Result<Estimate>
where
    S: Space,
    F: Fn(&S::Point) -> f64 + Sync,
{
    let blocks = plan.samples.div_ceil(MC_BLOCK);
    let run_block = |b: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
        rng.set_stream(b);
        let len = MC_BLOCK.min(plan.samples - b * MC_BLOCK);
        let mut point = space.sample(&mut rng);
        let mut m = Moments::default();
        for j in 0..len {
            if j > 0 {
                space.resample(&mut rng, &mut point);
            }
            m.push(f(&point));
        }
        m
    };
    let mut acc = Moments::default();
    let mut next = 0;
    while next < blocks {
        let end = match plan.target_rel_se {
            Some(_) => (next + MC_ROUND).min(blocks),
            None => blocks,
        };
        let parts: Vec<Moments> = (next..end).into_par_iter().map(run_block).collect();
        acc = parts.into_iter().fold(acc, Moments::merge);
        next = end;
        if let Some(t) = plan.target_rel_se {
            let est = acc.estimate();
            if est.n_samples > 1 && est.rel_se() < t {
                break;
            }
        }
    }
    let est = acc.estimate();
    if !est.mean.is_finite() {
        return Err(Error::Numeric(format!("Monte Carlo mean is not finite: {}", est.mean)));
    }
    Ok(est)
}
