use serde::{Deserialize, Serialize};

use super::norms::{orlicz_lorentz_norm, rearrange};
use super::{RealVector, WeightSequence};
use crate::error::{invalid, Result};
use crate::orlicz::OrliczFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HardyOperator {
    /// Running `p`-mean of the head: `((1/k) Σ_{i≤k} (x*_i)^p)^{1/p}`.
    H1,
    /// Scaled quadratic tail: `((1/k) Σ_{i>k} (x*_i)²)^{1/2}`, zero at `k = n`.
    H2,
}

pub fn hardy_operator(x: &RealVector, p: f64, which: HardyOperator) -> Result<RealVector> {
    let xs = rearrange(x);
    let v = xs.coords();
    let n = v.len();
    let out = match which {
        HardyOperator::H1 => {
            if !(p > 1.0 && p < 2.0) {
                return Err(invalid(format!("H1 needs p in (1, 2), got {p}")));
            }
            let mut acc = 0.0;
            let mut out: Vec<f64> = Vec::with_capacity(n);
            for (k, &c) in v.iter().enumerate() {
                acc += c.powf(p);
                let h = (acc / (k + 1) as f64).powf(1.0 / p);
                // running means of a non-increasing sequence are non-increasing; absorb rounding
                let h = out.last().map_or(h, |&prev: &f64| h.min(prev));
                out.push(h);
            }
            out[0] = v[0];
            out
        }
        HardyOperator::H2 => {
            let mut tail = vec![0.0; n];
            let mut acc = 0.0;
            for k in (0..n).rev() {
                tail[k] = acc;
                acc += v[k] * v[k];
            }
            tail.iter()
                .enumerate()
                .map(|(k, &t)| (t / (k + 1) as f64).sqrt())
                .collect()
        }
    };
    RealVector::new(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct HardyConstant {
    pub which: HardyOperator,
    /// Largest `‖H x‖_{M,a} / ‖x‖_{M,a}` over the sample: a lower bound on the true constant.
    pub constant: f64,
    pub ratios: Vec<f64>,
    /// Index into the sample of the maximizing vector.
    pub argmax: usize,
}

pub fn empirical_hardy_constant(
    m: &OrliczFunction,
    a: &WeightSequence,
    p: f64,
    which: HardyOperator,
    sample: &[RealVector],
) -> Result<HardyConstant> {
    if sample.is_empty() {
        return Err(invalid("Hardy sample must be non-empty"));
    }
    let mut ratios = Vec::with_capacity(sample.len());
    for (i, x) in sample.iter().enumerate() {
        if x.is_zero() {
            return Err(invalid(format!("sample vector {i} is zero")));
        }
        let num = orlicz_lorentz_norm(m, a, &hardy_operator(x, p, which)?)?;
        let den = orlicz_lorentz_norm(m, a, x)?;
        ratios.push(num / den);
    }
    let (argmax, constant) =
        ratios.iter().copied().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |best, (i, r)| if r > best.1 { (i, r) } else { best },
        );
    Ok(HardyConstant {
        which,
        constant,
        ratios,
        argmax,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightConditionVariant {
    /// Weights do not decay too slowly: `Σ_{i>k} a_i i^{-1/p} ≤ C a_k k^{1-1/p}`.
    Slow,
    /// Weights do not decay too fast: `Σ_{i≤k} a_i^r i^{-p/2} ≤ C a_k^r k^{1-p/2}`.
    Fast,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightCondition {
    pub variant: WeightConditionVariant,
    /// Smallest constant `C` that works for every `k ≤ n`.
    pub constant: f64,
    /// 1-based `k` attaining the maximum.
    pub argmax_k: usize,
    pub per_k: Vec<f64>,
}

pub fn weight_condition(
    a: &WeightSequence,
    p: f64,
    r: Option<f64>,
    variant: WeightConditionVariant,
) -> Result<WeightCondition> {
    if !(p > 1.0 && p < 2.0) {
        return Err(invalid(format!("weight condition needs p in (1, 2), got {p}")));
    }
    let w = a.values();
    let n = w.len();
    let per_k: Vec<f64> = match variant {
        WeightConditionVariant::Slow => {
            // suffix sums, accumulated from the small end
            let mut tail = vec![0.0; n];
            let mut acc = 0.0;
            for k in (0..n).rev() {
                tail[k] = acc;
                let i = (k + 1) as f64;
                acc += w[k] / i.powf(1.0 / p);
            }
            (0..n)
                .map(|k| {
                    let kk = (k + 1) as f64;
                    tail[k] / (w[k] * kk.powf(1.0 - 1.0 / p))
                })
                .collect()
        }
        WeightConditionVariant::Fast => {
            let r = r.ok_or_else(|| invalid("fast weight condition needs r"))?;
            if !(r > 1.0 && r < p) {
                return Err(invalid(format!("fast weight condition needs 1 < r < p, got r = {r}")));
            }
            let mut acc = 0.0;
            (0..n)
                .map(|k| {
                    let kk = (k + 1) as f64;
                    acc += w[k].powf(r) / kk.powf(p / 2.0);
                    acc / (w[k].powf(r) * kk.powf(1.0 - p / 2.0))
                })
                .collect()
        }
    };
    let (argmax, constant) =
        per_k.iter().copied().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |best, (i, c)| if c > best.1 { (i, c) } else { best },
        );
    Ok(WeightCondition {
        variant,
        constant,
        argmax_k: argmax + 1,
        per_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hardy_on_unit_vector() {
        let n = 6;
        let e1 = RealVector::unit(n, 2).unwrap();
        let p = 1.5;
        let h1 = hardy_operator(&e1, p, HardyOperator::H1).unwrap();
        for (k, &h) in h1.coords().iter().enumerate() {
            let want = ((k + 1) as f64).powf(-1.0 / p);
            assert!((h - want).abs() <= 1e-15, "k={k}");
        }
        let h2 = hardy_operator(&e1, p, HardyOperator::H2).unwrap();
        assert!(h2.coords().iter().all(|&h| h == 0.0));
    }

    #[test]
    fn hardy_on_constant_vector() {
        let n = 5;
        let ones = RealVector::new(vec![-1.0; n]).unwrap();
        let h1 = hardy_operator(&ones, 1.3, HardyOperator::H1).unwrap();
        assert!(h1.coords().iter().all(|&h| (h - 1.0).abs() < 1e-15));
        let h2 = hardy_operator(&ones, 1.3, HardyOperator::H2).unwrap();
        for (k, &h) in h2.coords().iter().enumerate() {
            let kk = (k + 1) as f64;
            assert!((h - ((n as f64 - kk) / kk).sqrt()).abs() < 1e-15);
        }
        assert_eq!(h2.coords()[n - 1], 0.0);
    }

    #[test]
    fn h1_starts_at_sup_norm_and_is_monotone() {
        let x = RealVector::new(vec![0.2, -3.0, 1.0, 2.9, 0.0, 0.7]).unwrap();
        let h = hardy_operator(&x, 1.7, HardyOperator::H1).unwrap();
        assert_eq!(h.coords()[0], x.max_abs());
        assert!(h.coords().windows(2).all(|w| w[1] <= w[0]));
        assert!(hardy_operator(&x, 2.5, HardyOperator::H1).is_err());
    }

    #[test]
    fn hardy_constant_examples() {
        let n = 7;
        let p = 1.5;
        let m = OrliczFunction::power(p, 1.0).unwrap();
        let a = WeightSequence::constant(n).unwrap();
        let e1 = vec![RealVector::unit(n, 0).unwrap()];
        let h2 = empirical_hardy_constant(&m, &a, p, HardyOperator::H2, &e1).unwrap();
        assert_eq!(h2.constant, 0.0);
        let h1 = empirical_hardy_constant(&m, &a, p, HardyOperator::H1, &e1).unwrap();
        let harmonic: f64 = (1..=n).map(|k| 1.0 / k as f64).sum();
        let want = harmonic.powf(1.0 / p);
        assert!((h1.constant - want).abs() <= 1e-10 * want);
        let zero = vec![RealVector::new(vec![0.0; n]).unwrap()];
        assert!(empirical_hardy_constant(&m, &a, p, HardyOperator::H1, &zero).is_err());
        assert!(empirical_hardy_constant(&m, &a, p, HardyOperator::H1, &[]).is_err());
    }

    #[test]
    fn weight_condition_controls() {
        let slow = |a: &WeightSequence| weight_condition(a, 1.5, None, WeightConditionVariant::Slow).unwrap();
        let c64 = slow(&WeightSequence::constant(64).unwrap());
        assert!(c64.constant > 2.0);
        assert!(slow(&WeightSequence::constant(128).unwrap()).constant > c64.constant);
        assert_eq!(*c64.per_k.last().unwrap(), 0.0);
        let harmonic = slow(&WeightSequence::power_decay(1000, 1.0).unwrap());
        assert!(harmonic.constant <= 1.5);
        assert_eq!(slow(&WeightSequence::constant(1).unwrap()).constant, 0.0);
        assert!(weight_condition(
            &WeightSequence::constant(4).unwrap(),
            1.5,
            Some(1.7),
            WeightConditionVariant::Fast
        )
        .is_err());
        assert!(weight_condition(
            &WeightSequence::constant(4).unwrap(),
            1.5,
            None,
            WeightConditionVariant::Fast
        )
        .is_err());
        let fast = weight_condition(
            &WeightSequence::constant(4).unwrap(),
            1.5,
            Some(1.2),
            WeightConditionVariant::Fast,
        )
        .unwrap();
        assert!(fast.constant.is_finite() && fast.constant > 0.0);
    }
}
