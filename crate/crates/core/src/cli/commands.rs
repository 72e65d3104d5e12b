use serde_json::json;

use super::inputs;
use super::{Cli, Command, EmbedCommand, Outcome, SpaceArg, SpecArgs, VariantArg, VerifyCommand};
use crate::combinat::{
    corollary_bounds_check, ks_average, ks_construction, schuett_sides, theorem31_average, AveragingPlan, Mode,
};
use crate::embed::{
    build_d, default_sample, distortion_report, khintchine_ratio, psi_coordinates, psi_l1_norm, verify_md_equivalence,
    EmbeddingSpec, SampleVector,
};
use crate::error::{invalid, Error, Result};
use crate::orlicz::{check_duality_product, Grid};
use crate::report::{num, to_value, Table, VerificationReport};
use crate::spaces::{
    empirical_hardy_constant, lorentz_norm, lp_norm, luxemburg_norm, luxemburg_norm_with_stats, orlicz_lorentz_norm,
    weight_condition, HardyOperator, RealVector, WeightConditionVariant,
};

/// Tolerance for the exactly-known endpoint ratios of the mixed-norm average.
const ENDPOINT_TOL: f64 = 1e-12;
/// Bracket for the mixed-norm ratio at interior `k`.
const MIXED_NORM_BRACKET: (f64, f64) = (0.125, 8.0);

pub(super) fn dispatch(cli: &Cli) -> Result<Outcome> {
    let plan = cli.run.plan();
    plan.validate()?;
    let (name, mut outcome) = match &cli.command {
        Command::Norm {
            space,
            vector,
            p,
            weights,
            orlicz,
        } => ("norm", norm(*space, vector, *p, weights.as_deref(), orlicz.as_deref())?),
        Command::Verify { check } => match check {
            VerifyCommand::Corollary22 { p, nmax } => ("verify corollary22", partial_sums(*p, *nmax)?),
            VerifyCommand::Lemma23 { n, p, trials } => ("verify lemma23", mixed_norm(*n, *p, *trials, &plan)?),
            VerifyCommand::Lemma21 {
                weights,
                p,
                r,
                n,
                trials,
                max_log_spread,
            } => (
                "verify lemma21",
                constructed_norm(weights, *n, *p, *r, *trials, *max_log_spread, &plan)?,
            ),
            VerifyCommand::Theorem31 {
                n,
                p,
                orlicz,
                weights,
                trials,
                max_log_spread,
            } => (
                "verify theorem31",
                triple_average(*n, *p, orlicz, weights, *trials, *max_log_spread, &plan)?,
            ),
            VerifyCommand::Duality {
                orlicz,
                grid_min,
                grid_max,
                grid_points,
            } => ("verify duality", duality(orlicz, *grid_min, *grid_max, *grid_points)?),
        },
        Command::Hardy {
            which,
            orlicz,
            weights,
            p,
            n,
            trials,
            max_constant,
        } => (
            "hardy",
            hardy(*which, orlicz, weights, *p, *n, *trials, *max_constant, cli.run.seed)?,
        ),
        Command::Weightcond {
            variant,
            weights,
            p,
            r,
            n,
            max_constant,
        } => ("weightcond", weightcond(*variant, weights, *p, *r, *n, *max_constant)?),
        Command::Embed { action } => match action {
            EmbedCommand::Build { spec } => ("embed build", embed_build(spec)?),
            EmbedCommand::Norm { spec, vector, dump } => {
                ("embed norm", embed_norm(spec, vector, dump.as_deref(), &plan)?)
            }
            EmbedCommand::Distortion {
                spec,
                sample,
                max_distortion,
            } => (
                "embed distortion",
                embed_distortion(spec, sample.as_deref(), *max_distortion, &plan)?,
            ),
            EmbedCommand::Md {
                orlicz,
                n,
                p,
                eps,
                spread_bound,
            } => ("embed md", embed_md(orlicz, *n, *p, *eps, *spread_bound)?),
            EmbedCommand::Khintchine { matrix } => ("embed khintchine", embed_khintchine(matrix, &plan)?),
        },
    };
    outcome.report.command = name.to_string();
    outcome.report.seed = Some(plan.seed);
    outcome.report.param("plan", &plan);
    Ok(outcome)
}

fn report(params: serde_json::Value) -> VerificationReport {
    let mut r = VerificationReport::new("");
    if let serde_json::Value::Object(map) = params {
        for (k, v) in map {
            r.params.insert(k, v);
        }
    }
    r
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| invalid(format!("--{flag} is required here")))
}

/// Plan for the `j`-th trial: same mode, its own seed.
fn trial_plan(plan: &AveragingPlan, j: usize) -> AveragingPlan {
    AveragingPlan {
        seed: plan.seed.wrapping_add(1 + j as u64),
        ..plan.clone()
    }
}

fn log_spread(ratios: &[f64]) -> (f64, f64, f64) {
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    (lo, hi, hi.ln() - lo.ln())
}

fn norm(space: SpaceArg, vector: &str, p: Option<f64>, weights: Option<&str>, orlicz: Option<&str>) -> Result<Outcome> {
    let x = inputs::vector(vector)?;
    let n = Some(x.len());
    let mut rep =
        report(json!({ "space": format!("{space:?}"), "vector": x, "p": p, "weights": weights, "orlicz": orlicz }));
    let w = || inputs::weights(weights.ok_or_else(|| invalid("--weights is required here"))?, n);
    let m = || inputs::orlicz(orlicz.ok_or_else(|| invalid("--orlicz is required here"))?);
    let (value, extra) = match space {
        SpaceArg::Lp => (lp_norm(&x, need(p, "p")?)?, json!({})),
        SpaceArg::Lorentz => (lorentz_norm(&x, &w()?, need(p, "p")?)?, json!({})),
        SpaceArg::Orlicz => {
            let sol = luxemburg_norm_with_stats(&m()?, &x)?;
            (sol.rho, to_value(sol))
        }
        SpaceArg::OrliczLorentz => (orlicz_lorentz_norm(&m()?, &w()?, &x)?, json!({})),
    };
    rep.results = json!({ "value": value, "solver": extra });
    let mut table = Table::new(&["space", "value"]);
    table.push(vec![format!("{space:?}"), num(value)]);
    Ok(Outcome {
        report: rep,
        table: Some(table),
    })
}

fn partial_sums(p: f64, nmax: usize) -> Result<Outcome> {
    if nmax == 0 {
        return Err(invalid("--nmax must be >= 1"));
    }
    let mut rep = report(json!({ "p": p, "nmax": nmax }));
    let mut table = Table::new(&[
        "n",
        "upper_margin",
        "lower_margin",
        "tail_margin",
        "halved_lower_pass",
        "pass",
    ]);
    let mut failing = Vec::new();
    let mut worst = [f64::INFINITY; 3];
    let mut halved_failures = 0usize;
    let mut last = None;
    for n in 1..=nmax {
        let c = corollary_bounds_check(n, p)?;
        if !c.pass && failing.len() < 20 {
            failing.push(n);
        }
        worst[0] = worst[0].min(c.upper.worst_margin);
        worst[1] = worst[1].min(c.lower.worst_margin);
        worst[2] = worst[2].min(c.tail.worst_margin);
        halved_failures += usize::from(!c.halved_lower.pass);
        table.push(vec![
            n.to_string(),
            num(c.upper.worst_margin),
            num(c.lower.worst_margin),
            num(c.tail.worst_margin),
            c.halved_lower.pass.to_string(),
            c.pass.to_string(),
        ]);
        last = Some(c);
    }
    rep.pass = failing.is_empty();
    rep.results = json!({
        "mode": "exact",
        "failing_n": failing,
        "worst_margin": { "upper": worst[0], "lower": worst[1], "tail": worst[2] },
        "halved_lower_failures": halved_failures,
        "at_nmax": to_value(last),
    });
    Ok(Outcome {
        report: rep,
        table: Some(table),
    })
}

fn mixed_norm(n: usize, p: f64, trials: usize, plan: &AveragingPlan) -> Result<Outcome> {
    if n == 0 || trials == 0 {
        return Err(invalid("--n and --trials must be >= 1"));
    }
    let mut rep = report(json!({ "n": n, "p": p, "trials": trials }));
    let xs = inputs::random_vectors(n, trials, plan.seed)?;
    let exact = plan.mode == Mode::Exact;
    let mut table = Table::new(&["trial", "k", "lhs", "lhs_se", "rhs", "ratio"]);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    let mut kn_dev = 0.0_f64;
    let (mut k1_lo, mut k1_hi) = (f64::INFINITY, 0.0_f64);
    for (j, x) in xs.iter().enumerate() {
        let tp = trial_plan(plan, j);
        for k in 1..=n {
            let s = schuett_sides(x, k, p, &tp)?;
            let r = s.ratio();
            lo = lo.min(r);
            hi = hi.max(r);
            if k == n {
                kn_dev = kn_dev.max((r - 1.0).abs());
            }
            if k == 1 {
                k1_lo = k1_lo.min(r);
                k1_hi = k1_hi.max(r);
            }
            table.push(vec![
                j.to_string(),
                k.to_string(),
                num(s.lhs.mean),
                num(s.lhs.se),
                num(s.rhs),
                num(r),
            ]);
        }
    }
    let bracket_ok = lo >= MIXED_NORM_BRACKET.0 && hi <= MIXED_NORM_BRACKET.1;
    let kn_ok = !exact || kn_dev <= ENDPOINT_TOL;
    let k1_ok = !exact || (k1_lo >= 0.5 - ENDPOINT_TOL && k1_hi <= 1.0 + ENDPOINT_TOL);
    rep.pass = bracket_ok && kn_ok && k1_ok;
    rep.results = json!({
        "mode": if exact { "exact" } else { "mc" },
        "ratio_min": lo, "ratio_max": hi, "bracket": MIXED_NORM_BRACKET, "bracket_pass": bracket_ok,
        "k_eq_n_max_deviation": kn_dev, "k_eq_n_pass": kn_ok,
        "k_eq_1_range": [k1_lo, k1_hi], "k_eq_1_pass": k1_ok,
        "endpoint_checks_applied": exact,
    });
    Ok(Outcome {
        report: rep,
        table: Some(table),
    })
}

fn constructed_norm(
    weights: &str,
    n: Option<usize>,
    p: f64,
    r: f64,
    trials: usize,
    max_log_spread: f64,
    plan: &AveragingPlan,
) -> Result<Outcome> {
    let a = inputs::weights(weights, n)?;
    let n = a.len();
    let mut rep = report(json!({ "weights": a, "p": p, "r": r, "trials": trials, "max_log_spread": max_log_spread }));
    let c = ks_construction(&a, p, r)?;
    let big_n = &c.fit.function;
    let xs = inputs::random_vectors(n, trials, plan.seed)?;
    let mut table = Table::new(&["trial", "average", "se", "orlicz_norm", "ratio"]);
    let mut ratios = Vec::with_capacity(trials);
    let mut exact = true;
    for (j, x) in xs.iter().enumerate() {
        let avg = ks_average(x, &a, r, p, &trial_plan(plan, j))?;
        exact &= avg.exact;
        let nx = luxemburg_norm(big_n, x)?;
        ratios.push(avg.mean / nx);
        table.push(vec![
            j.to_string(),
            num(avg.mean),
            num(avg.se),
            num(nx),
            num(avg.mean / nx),
        ]);
    }
    let (lo, hi, spread) = log_spread(&ratios);
    rep.pass = spread <= max_log_spread;
    rep.results = json!({
        "mode": if exact { "exact" } else { "mc" },
        "orlicz": big_n,
        "monotone_repair": c.monotone_repair,
        "majorized": c.fit.majorized,
        "max_lift": c.fit.max_lift,
        "ratio_min": lo, "ratio_max": hi, "log_spread": spread,
        "ratios": ratios,
    });
    Ok(Outcome {
        report: rep,
        table: Some(table),
    })
}

fn triple_average(
    n: Option<usize>,
    p: f64,
    orlicz: &str,
    weights: &str,
    trials: usize,
    max_log_spread: f64,
    plan: &AveragingPlan,
) -> Result<Outcome> {
    let m = inputs::orlicz(orlicz)?;
    let a = inputs::weights(weights, n)?;
    let n = a.len();
    let mut rep = report(
        json!({ "n": n, "p": p, "orlicz": m, "weights": a, "trials": trials, "max_log_spread": max_log_spread }),
    );
    let d = build_d(&m, n)?;
    let md = ks_construction(&d, 1.0, p)?;
    let xs = inputs::random_vectors(n, trials, plan.seed)?;
    let mut table = Table::new(&["trial", "average", "se", "md_norm", "ratio"]);
    let mut ratios = Vec::with_capacity(trials);
    let mut max_rel_se = 0.0_f64;
    let mut exact = true;
    for (j, x) in xs.iter().enumerate() {
        let avg = theorem31_average(x, &d, &a, p, &trial_plan(plan, j))?;
        exact &= avg.exact;
        max_rel_se = max_rel_se.max(avg.rel_se());
        let nx = orlicz_lorentz_norm(&md.fit.function, &a, x)?;
        ratios.push(avg.mean / nx);
        table.push(vec![
            j.to_string(),
            num(avg.mean),
            num(avg.se),
            num(nx),
            num(avg.mean / nx),
        ]);
    }
    let (lo, hi, spread) = log_spread(&ratios);
    let slow = weight_condition(&a, p, None, WeightConditionVariant::Slow).ok();
    rep.pass = spread <= max_log_spread;
    rep.results = json!({
        "mode": if exact { "exact" } else { "mc" },
        "d": d,
        "md": md.fit.function,
        "ratio_min": lo, "ratio_max": hi, "log_spread": spread,
        "max_rel_se": max_rel_se,
        "slow_weight_constant": slow.map(|s| s.constant),
        "ratios": ratios,
    });
    Ok(Outcome {
        report: rep,
        table: Some(table),
    })
}

fn duality(orlicz: &str, lo: f64, hi: f64, count: usize) -> Result<Outcome> {
    let m = inputs::orlicz(orlicz)?;
    let grid = Grid::log_spaced(lo, hi, count)?;
    let mut rep = report(json!({ "orlicz": m, "grid_min": lo, "grid_max": hi, "grid_points": count }));
    let check = check_duality_product(&m, &grid)?;
    let mut table = Table::new(&["t", "product", "ratio"]);
    for pt in &check.points {
        table.push(vec![num(pt.t), num(pt.product), num(pt.ratio)]);
    }
    rep.pass = check.pass;
    rep.results = json!({
        "mode": "exact",
        "conjugate": m.conjugate(),
        "min_ratio": check.min_ratio,
        "max_ratio": check.max_ratio,
    });
    Ok(Outcome {
        report: rep,
        table: Some(table),
    })
}

#[allow(clippy::too_many_arguments)]
fn hardy(
    which: u8,
    orlicz: &str,
    weights: &str,
    p: f64,
    n: Option<usize>,
    trials: usize,
    max_constant: Option<f64>,
    seed: u64,
) -> Result<Outcome> {
    let m = inputs::orlicz(orlicz)?;
    let a = inputs::weights(weights, n)?;
    let n = a.len();
    let op = if which == 1 {
        HardyOperator::H1
    } else {
        HardyOperator::H2
    };
    let mut rep = report(
        json!({ "which": which, "orlicz": m, "weights": a, "p": p, "trials": trials, "max_constant": max_constant }),
    );
    let mut sample = vec![RealVector::unit(n, 0)?, RealVector::new(vec![1.0; n])?];
    for alpha in [0.25, 0.5, 1.0, 2.0] {
        sample.push(RealVector::new((1..=n).map(|i| (i as f64).powf(-alpha)).collect())?);
    }
    sample.extend(inputs::random_vectors(n, trials, seed)?);
    let h = empirical_hardy_constant(&m, &a, p, op, &sample)?;
    let mut table = Table::new(&["vector", "ratio"]);
    for (i, r) in h.ratios.iter().enumerate() {
        table.push(vec![i.to_string(), num(*r)]);
    }
    rep.pass = max_constant.is_none_or(|c| h.constant <= c);
    rep.results = json!({ "mode": "exact", "constant": h.constant, "argmax": h.argmax, "ratios": h.ratios });
    Ok(Outcome {
        report: rep,
        table: Some(table),
    })
}

fn weightcond(
    variant: VariantArg,
    weights: &str,
    p: f64,
    r: Option<f64>,
    n: Option<usize>,
    max_constant: Option<f64>,
) -> Result<Outcome> {
    let a = inputs::weights(weights, n)?;
    let v = match variant {
        VariantArg::Slow => WeightConditionVariant::Slow,
        VariantArg::Fast => WeightConditionVariant::Fast,
    };
    let mut rep = report(json!({ "variant": v, "weights": a, "p": p, "r": r, "max_constant": max_constant }));
    let w = weight_condition(&a, p, r, v)?;
    let mut table = Table::new(&["k", "constant"]);
    for (k, c) in w.per_k.iter().enumerate() {
        table.push(vec![(k + 1).to_string(), num(*c)]);
    }
    rep.pass = max_constant.is_none_or(|c| w.constant <= c);
    rep.results = json!({ "mode": "exact", "constant": w.constant, "argmax_k": w.argmax_k });
    Ok(Outcome {
        report: rep,
        table: Some(table),
    })
}

fn load_spec(args: &SpecArgs) -> Result<EmbeddingSpec> {
    let spec = match &args.spec {
        Some(path) => {
            // Either a bare spec or an `embed build` report.
            let mut v: serde_json::Value =
                serde_json::from_str(&inputs::read_file(path)?).map_err(|e| Error::Parse(e.to_string()))?;
            if let Some(inner) = v.pointer_mut("/results/spec") {
                v = inner.take();
            }
            serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))?
        }
        None => {
            let p = need(args.p, "p")?;
            let m = inputs::orlicz(
                args.orlicz
                    .as_deref()
                    .ok_or_else(|| invalid("--orlicz is required here"))?,
            )?;
            let a = inputs::weights(
                args.weights
                    .as_deref()
                    .ok_or_else(|| invalid("--weights is required here"))?,
                args.n,
            )?;
            EmbeddingSpec::new(m, a, p)?
        }
    };
    if let Some(n) = args.n {
        if n != spec.n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: spec.n,
            });
        }
    }
    Ok(spec)
}

fn spec_params(spec: &EmbeddingSpec) -> serde_json::Value {
    json!({ "n": spec.n, "p": spec.p, "orlicz": spec.orlicz, "weights": spec.weights })
}

fn embed_build(args: &SpecArgs) -> Result<Outcome> {
    let spec = load_spec(args)?;
    let mut rep = report(spec_params(&spec));
    let mut table = Table::new(&["i", "weight", "d", "z", "c_support"]);
    for i in 0..spec.n {
        table.push(vec![
            (i + 1).to_string(),
            num(spec.weights.values()[i]),
            num(spec.d.values()[i]),
            num(spec.z[i]),
            spec.c_supports[i].to_string(),
        ]);
    }
    rep.results = json!({ "mode": "exact", "spec": spec });
    Ok(Outcome {
        report: rep,
        table: Some(table),
    })
}

fn embed_norm(args: &SpecArgs, vector: &str, dump: Option<&std::path::Path>, plan: &AveragingPlan) -> Result<Outcome> {
    let spec = load_spec(args)?;
    let x = inputs::vector(vector)?;
    let mut params = spec_params(&spec);
    params["vector"] = to_value(&x);
    let mut rep = report(params);
    let psi = psi_l1_norm(&spec, &x, plan)?;
    let norm = orlicz_lorentz_norm(&spec.orlicz, &spec.weights, &x)?;
    if let Some(path) = dump {
        let coords = psi_coordinates(&spec, &x)?;
        inputs::write_file(
            path,
            &serde_json::to_string(&coords).map_err(|e| Error::Numeric(e.to_string()))?,
        )?;
    }
    let mut table = Table::new(&["psi_l1", "se", "orlicz_lorentz", "ratio"]);
    table.push(vec![num(psi.mean), num(psi.se), num(norm), num(psi.mean / norm)]);
    rep.results = json!({
        "mode": if psi.exact { "exact" } else { "mc" },
        "psi_l1": psi,
        "orlicz_lorentz_norm": norm,
        "ratio": psi.mean / norm,
        "dump": dump.map(|p| p.display().to_string()),
    });
    Ok(Outcome {
        report: rep,
        table: Some(table),
    })
}

fn embed_distortion(
    args: &SpecArgs,
    sample: Option<&str>,
    max_distortion: Option<f64>,
    plan: &AveragingPlan,
) -> Result<Outcome> {
    let spec = load_spec(args)?;
    let mut params = spec_params(&spec);
    params["max_distortion"] = to_value(max_distortion);
    let vectors = match sample {
        Some(s) => {
            params["sample"] = json!(s);
            inputs::vectors(s)?
                .into_iter()
                .enumerate()
                .map(|(i, x)| SampleVector {
                    label: format!("input-{i}"),
                    x,
                })
                .collect()
        }
        None => {
            params["sample"] = json!("default");
            default_sample(spec.n, plan.seed)?
        }
    };
    let mut rep = report(params);
    let dr = distortion_report(&spec, &vectors, plan)?;
    let mut table = Table::new(&["label", "psi_l1", "se", "orlicz_lorentz", "ratio"]);
    for e in &dr.entries {
        table.push(vec![
            e.label.clone(),
            num(e.psi.mean),
            num(e.psi.se),
            num(e.norm),
            num(e.ratio),
        ]);
    }
    rep.pass = dr.distortion.is_finite() && max_distortion.is_none_or(|m| dr.distortion <= m);
    rep.results = json!({ "mode": if dr.exact { "exact" } else { "mc" }, "report": dr });
    Ok(Outcome {
        report: rep,
        table: Some(table),
    })
}

fn embed_md(orlicz: &str, n: usize, p: f64, eps: f64, spread_bound: Option<f64>) -> Result<Outcome> {
    let m = inputs::orlicz(orlicz)?;
    let mut rep = report(json!({ "orlicz": m, "n": n, "p": p, "eps": eps, "spread_bound": spread_bound }));
    let res = verify_md_equivalence(&m, n, p, eps, spread_bound)?;
    let mut table = Table::new(&["l", "md_star_inverse", "m_star_inverse", "ratio"]);
    for (l, (a, b)) in res.md_inverse.iter().zip(&res.m_inverse).enumerate() {
        table.push(vec![(l + 1).to_string(), num(*a), num(*b), num(a / b)]);
    }
    rep.pass = res.pass;
    rep.results = json!({ "mode": "exact", "equivalence": res });
    Ok(Outcome {
        report: rep,
        table: Some(table),
    })
}

fn embed_khintchine(matrix: &str, plan: &AveragingPlan) -> Result<Outcome> {
    let b = inputs::matrix(matrix)?;
    let mut rep = report(json!({ "matrix": b }));
    let est = khintchine_ratio(&b, plan)?;
    rep.pass = est.mean > 0.0 && est.mean <= 1.0 + 1e-12;
    rep.results = json!({ "mode": if est.exact { "exact" } else { "mc" }, "ratio": est });
    Ok(Outcome {
        report: rep,
        table: None,
    })
}
