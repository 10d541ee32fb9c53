//! One experiment per limit statement. Each returns its CSV table, a pass flag
//! and summary statistics; configuration problems surface as `Error::Config`
//! before any sampling starts.

use rand::Rng;
use serde_json::{Map, Value};

use crate::ctrw_engine::{
    marked_point_process, residual_order_statistics, sample_jumps, sample_walk, stream_positions,
};
use crate::error::{Error, Result};
use crate::levy_measure::{euclidean_norm, LevyMeasureModel};
use crate::mpp::{window_count, TimeMarking};
use crate::rng::{mix, rng_from_seed};
use crate::series_sampler::{
    limit_marked_points, limit_positions, limit_residual_order_stats, sample_driver, LimitMode,
};
use crate::stats::{
    kolmogorov_inequality_check, ks_two_sample, renewal_mean_ratio, renewal_straddle, run_mc,
    tv_distance, KolmogorovCase, McPlan, StepLaw, StoppingRule,
};

use super::config::{CaseSpec, CouplingName, ExperimentConfig, LawSpec, RuleSpec, WindowSpec};
use super::table::{fmt, ResultTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    ResidualOrder,
    LimitCompare,
    Arcsine,
    Mpp,
    Kolmogorov,
    RenewalMean,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::ResidualOrder,
        Command::LimitCompare,
        Command::Arcsine,
        Command::Mpp,
        Command::Kolmogorov,
        Command::RenewalMean,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::ResidualOrder => "residual-order",
            Command::LimitCompare => "limit-compare",
            Command::Arcsine => "arcsine",
            Command::Mpp => "mpp",
            Command::Kolmogorov => "kolmogorov",
            Command::RenewalMean => "renewal-mean",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub experiment: String,
    pub pass: bool,
    pub stats: Map<String, Value>,
    pub table: ResultTable,
}

impl Outcome {
    /// `{"experiment": …, "pass": …, "stats": {…}}` on one line.
    pub fn summary_json(&self) -> String {
        let mut m = Map::new();
        m.insert("experiment".into(), Value::from(self.experiment.clone()));
        m.insert("pass".into(), Value::from(self.pass));
        m.insert("stats".into(), Value::Object(self.stats.clone()));
        Value::Object(m).to_string()
    }

    pub fn stat(&self, key: &str) -> Option<f64> {
        self.stats.get(key).and_then(Value::as_f64)
    }
}

/// Runs `command` with `config`; `workers` overrides the config's worker count.
pub fn run_experiment(
    command: Command,
    config: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<Outcome> {
    config.validate_common(command.name())?;
    let workers = workers.or(config.workers);
    let plan = McPlan::new(config.replicates, config.base_seed).with_workers(workers);
    match command {
        Command::ResidualOrder => residual_order(config, &plan),
        Command::LimitCompare => limit_compare(config, &plan),
        Command::Arcsine => arcsine(config, &plan),
        Command::Mpp => mpp(config, &plan),
        Command::Kolmogorov => kolmogorov(config, workers),
        Command::RenewalMean => renewal_mean(config, workers),
    }
}

fn put(stats: &mut Map<String, Value>, key: impl Into<String>, v: impl Into<Value>) {
    stats.insert(key.into(), v.into());
}

fn column(rows: &[Vec<f64>], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r[i]).collect()
}

/// Norm followed by the coordinates of each vector.
fn components(v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len() + 1);
    out.push(euclidean_norm(v));
    out.extend_from_slice(v);
    out
}

fn component_names(d: usize) -> Vec<String> {
    std::iter::once("norm".to_string())
        .chain((1..=d).map(|i| format!("x{i}")))
        .collect()
}

/// KS distances between matching component columns; records each and the max.
fn ks_components(
    stats: &mut Map<String, Value>,
    prefix: &str,
    names: &[String],
    a: &[Vec<f64>],
    b: &[Vec<f64>],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for (i, name) in names.iter().enumerate() {
        let ks = ks_two_sample(&column(a, i), &column(b, i))?;
        worst = worst.max(ks);
        put(stats, format!("ks_{prefix}_{name}"), ks);
    }
    put(stats, format!("ks_{prefix}_max"), worst);
    Ok(worst)
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn residual_order(c: &ExperimentConfig, plan: &McPlan) -> Result<Outcome> {
    let model = c.model()?;
    let horizon = c.horizon()?;
    let n_scale = c.n_scale()?;
    let steps = c.steps_on_horizon()?;
    let k_max = c.k_max()?;
    let depth = c.truncation.unwrap_or(200.max(50 * k_max));
    let ks_max = c.threshold(c.thresholds.ks_max, "ks_max")?;
    if k_max > steps || k_max > depth {
        return Err(config_err(
            "k_max exceeds the walk length or the truncation depth",
        ));
    }
    let scale = model
        .jump_normalization(n_scale)
        .map_err(|e| config_err(e.to_string()))?;
    let d = model.dimension();
    let direction_independent = model.is_direction_independent();

    struct Rep {
        pre: Vec<Vec<f64>>,
        lim: Vec<Vec<f64>>,
        dhat: Vec<usize>,
        identity: bool,
    }
    let reps = run_mc(plan, |_, seed| {
        let mut jumps = sample_jumps(steps, &model, mix(seed, 0))?;
        for row in jumps.chunks_exact_mut(d) {
            row.iter_mut().zip(&scale).for_each(|(x, a)| *x *= a);
        }
        let ros = residual_order_statistics(&jumps, d, k_max)?;
        let driver = sample_driver(depth, mix(seed, 1), model.spectral())?;
        let seq = limit_residual_order_stats(&driver, horizon, model.tails(), k_max)?;
        if !seq.is_certified() {
            return Err(Error::Uncertified { k_max, depth });
        }
        Ok(Rep {
            pre: (0..k_max).map(|k| components(ros.vector(k))).collect(),
            lim: (0..k_max).map(|k| components(seq.mark(k))).collect(),
            dhat: seq.dhat[..k_max].to_vec(),
            identity: seq.dhat.iter().enumerate().all(|(i, &x)| x == i + 1),
        })
    })?;

    let names = component_names(d);
    let mut header = vec!["replicate".to_string()];
    for k in 1..=k_max {
        header.extend(names.iter().map(|n| format!("pre_{k}_{n}")));
        header.extend(names.iter().map(|n| format!("limit_{k}_{n}")));
        header.push(format!("limit_dhat_{k}"));
    }
    let mut table = ResultTable::new(header);
    for (r, rep) in reps.iter().enumerate() {
        let mut row = vec![r.to_string()];
        for k in 0..k_max {
            row.extend(rep.pre[k].iter().map(|&x| fmt(x)));
            row.extend(rep.lim[k].iter().map(|&x| fmt(x)));
            row.push(rep.dhat[k].to_string());
        }
        table.push(row)?;
    }

    let mut stats = Map::new();
    let mut worst = 0.0f64;
    for k in 0..k_max {
        let pre: Vec<Vec<f64>> = reps.iter().map(|r| r.pre[k].clone()).collect();
        let lim: Vec<Vec<f64>> = reps.iter().map(|r| r.lim[k].clone()).collect();
        worst = worst.max(ks_components(
            &mut stats,
            &format!("k{}", k + 1),
            &names,
            &pre,
            &lim,
        )?);
    }
    let n = reps.len() as f64;
    let identity = reps.iter().filter(|r| r.identity).count() as f64 / n;
    let dhat1_is_2 = reps.iter().filter(|r| r.dhat[0] == 2).count() as f64 / n;
    put(&mut stats, "ks_max", worst);
    put(&mut stats, "dhat_identity_fraction", identity);
    put(&mut stats, "dhat1_eq_2_fraction", dhat1_is_2);
    put(&mut stats, "direction_independent", direction_independent);
    let order_ok = if direction_independent {
        identity == 1.0
    } else {
        dhat1_is_2 > 0.0 && dhat1_is_2 < 1.0
    };
    Ok(Outcome {
        experiment: c.experiment.clone(),
        pass: worst <= ks_max && order_ok,
        stats,
        table,
    })
}

/// Cap on streamed steps: far beyond any plausible `N_{t·b_n}`.
fn step_cap(n_scale: u64, t: f64, alpha: f64) -> usize {
    let cap = 1000.0 * n_scale as f64 * (1.0 + t).powf(alpha);
    cap.min(1e12) as usize
}

fn limit_compare(c: &ExperimentConfig, plan: &McPlan) -> Result<Outcome> {
    let (pre, lim) = c.couplings()?;
    let n_scale = c.n_scale()?;
    let horizon = c.horizon()?;
    let t = c.time()?;
    let depth = c.truncation_depth()?;
    let eps = c.eps_or_default(lim.model())?;
    let ks_max = c.threshold(c.thresholds.ks_max, "ks_max")?;
    let equal_max = c
        .thresholds
        .ks_equal_max
        .map(|v| c.threshold(Some(v), "ks_equal_max"))
        .transpose()?;
    let distinct_min = c
        .thresholds
        .ks_distinct_min
        .map(|v| c.threshold(Some(v), "ks_distinct_min"))
        .transpose()?;
    let cap = step_cap(n_scale, t, pre.sub().alpha());
    let d = pre.dimension();

    let reps = run_mc(plan, |_, seed| {
        let p = stream_positions(&pre, n_scale, t, mix(seed, 0), cap)?;
        let back = limit_positions(
            &lim,
            &lim.sample_drivers(depth, mix(seed, 1))?,
            horizon,
            t,
            eps,
        )?;
        let fwd = limit_positions(
            &lim,
            &lim.sample_drivers(depth, mix(seed, 2))?,
            horizon,
            t,
            eps,
        )?;
        Ok((p.count, p.backward, p.forward, back.backward, fwd.forward))
    })?;

    let mut header = vec!["replicate".to_string(), "pre_count".to_string()];
    for prefix in [
        "pre_backward",
        "pre_forward",
        "limit_backward",
        "limit_forward",
    ] {
        header.extend((1..=d).map(|i| format!("{prefix}_x{i}")));
    }
    let mut table = ResultTable::new(header);
    for (r, rep) in reps.iter().enumerate() {
        let mut row = vec![r.to_string(), rep.0.to_string()];
        for v in [&rep.1, &rep.2, &rep.3, &rep.4] {
            row.extend(v.iter().map(|&x| fmt(x)));
        }
        table.push(row)?;
    }

    let names = component_names(d);
    let pb: Vec<Vec<f64>> = reps.iter().map(|r| components(&r.1)).collect();
    let pf: Vec<Vec<f64>> = reps.iter().map(|r| components(&r.2)).collect();
    let lb: Vec<Vec<f64>> = reps.iter().map(|r| components(&r.3)).collect();
    let lf: Vec<Vec<f64>> = reps.iter().map(|r| components(&r.4)).collect();
    let mut stats = Map::new();
    let back = ks_components(&mut stats, "pre_vs_limit_backward", &names, &pb, &lb)?;
    let fwd = ks_components(&mut stats, "pre_vs_limit_forward", &names, &pf, &lf)?;
    let lim_fb = ks_components(&mut stats, "limit_forward_vs_backward", &names, &lf, &lb)?;
    ks_components(&mut stats, "pre_forward_vs_backward", &names, &pf, &pb)?;
    put(&mut stats, "truncation_depth", depth as u64);
    put(&mut stats, "eps", eps);

    let mut pass = back <= ks_max && fwd <= ks_max;
    if let Some(max) = equal_max {
        pass &= lim_fb <= max;
    }
    if let Some(min) = distinct_min {
        pass &= lim_fb >= min;
    }
    Ok(Outcome {
        experiment: c.experiment.clone(),
        pass,
        stats,
        table,
    })
}

fn arcsine(c: &ExperimentConfig, plan: &McPlan) -> Result<Outcome> {
    if c.coupling_name()? != CouplingName::Tight {
        return Err(config_err("arcsine needs \"coupling\": \"tight\""));
    }
    let (pre, lim) = c.couplings()?;
    let sub = *pre.sub();
    let n_scale = c.n_scale()?;
    let horizon = c.horizon()?;
    let t = c.time()?;
    let depth = c.truncation_depth()?;
    let ks_max = c.threshold(c.thresholds.ks_max, "ks_max")?;
    let distinct_min = c
        .thresholds
        .ks_distinct_min
        .map(|v| c.threshold(Some(v), "ks_distinct_min"))
        .transpose()?;
    let b_n = pre.normalization(n_scale)?.b_n;
    let level = t * b_n;

    let reps = run_mc(plan, |_, seed| {
        let mut rng = rng_from_seed(mix(seed, 0));
        let oracle = renewal_straddle(sub.alpha(), sub.c_time(), level, &mut rng);
        let p = limit_positions(
            &lim,
            &lim.sample_drivers(depth, mix(seed, 1))?,
            horizon,
            t,
            0.0,
        )?;
        let f = limit_positions(
            &lim,
            &lim.sample_drivers(depth, mix(seed, 2))?,
            horizon,
            t,
            0.0,
        )?;
        let sandwich = 0.0 <= p.d_left && p.d_left <= t && t < p.d_right;
        Ok([
            t - p.d_left,
            p.d_right - t,
            t - oracle.left / b_n,
            oracle.right / b_n - t,
            p.backward[0],
            f.forward[0],
            f64::from(u8::from(!sandwich)),
        ])
    })?;

    let mut table = ResultTable::new([
        "replicate",
        "limit_undershoot",
        "limit_overshoot",
        "oracle_undershoot",
        "oracle_overshoot",
        "limit_backward",
        "limit_forward",
    ]);
    for (r, rep) in reps.iter().enumerate() {
        let mut row = vec![r.to_string()];
        row.extend(rep[..6].iter().map(|&x| fmt(x)));
        table.push(row)?;
    }
    let col = |i: usize| reps.iter().map(|r| r[i]).collect::<Vec<f64>>();
    let ks_under = ks_two_sample(&col(0), &col(2))?;
    let ks_over = ks_two_sample(&col(1), &col(3))?;
    let ks_fb = ks_two_sample(&col(5), &col(4))?;
    let violations = reps.iter().filter(|r| r[6] != 0.0).count() as u64;
    let mut stats = Map::new();
    put(&mut stats, "ks_undershoot", ks_under);
    put(&mut stats, "ks_overshoot", ks_over);
    put(&mut stats, "ks_limit_forward_vs_backward", ks_fb);
    put(&mut stats, "sandwich_violations", violations);
    put(&mut stats, "truncation_depth", depth as u64);
    let mut pass = ks_under <= ks_max && ks_over <= ks_max && violations == 0;
    if let Some(min) = distinct_min {
        pass &= ks_fb >= min;
    }
    Ok(Outcome {
        experiment: c.experiment.clone(),
        pass,
        stats,
        table,
    })
}

/// Level `δ` with `T · η(‖x‖ > δ) = 2`: on average two limit marks exceed it.
fn default_delta(model: &LevyMeasureModel, horizon: f64) -> Result<f64> {
    let target = 2.0 / horizon;
    let (mut lo, mut hi) = (1e-12f64, 1e12f64);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if model.radial_tail(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

pub fn mpp_windows(c: &ExperimentConfig) -> Result<Vec<WindowSpec>> {
    if let Some(w) = &c.windows {
        if w.is_empty() || w.iter().any(|w| !(w.s > 0.0 && w.delta > 0.0)) {
            return Err(config_err("windows need s > 0 and delta > 0"));
        }
        return Ok(w.clone());
    }
    let (_, lim) = c.couplings()?;
    let horizon = c.horizon()?;
    let sub = lim.sub();
    let scale = (sub.c_time() * horizon).powf(1.0 / sub.alpha());
    let delta = default_delta(lim.model(), horizon)?;
    Ok([0.25, 0.5, 1.0]
        .iter()
        .map(|f| WindowSpec {
            s: f * scale,
            delta,
        })
        .collect())
}

fn mpp(c: &ExperimentConfig, plan: &McPlan) -> Result<Outcome> {
    let (pre, lim) = c.couplings()?;
    let n_scale = c.n_scale()?;
    let horizon = c.horizon()?;
    let steps = c.steps_on_horizon()?;
    let depth = c.truncation_depth()?;
    let windows = mpp_windows(c)?;
    let tv_max = c.threshold(c.thresholds.tv_max, "tv_max")?;
    let min_delta = windows
        .iter()
        .map(|w| w.delta)
        .fold(f64::INFINITY, f64::min);
    let eps = match c.eps {
        Some(e) if e > 0.0 && e.is_finite() => e,
        Some(_) => return Err(config_err("mpp needs eps > 0")),
        None => min_delta,
    };
    let shared = lim.mode() != LimitMode::Uncoupled;

    let reps = run_mc(plan, |_, seed| {
        let walk = sample_walk(steps, &pre, mix(seed, 0))?;
        let pb = marked_point_process(&walk, n_scale, TimeMarking::Backward, eps, &pre)?;
        let pf = marked_point_process(&walk, n_scale, TimeMarking::Forward, eps, &pre)?;
        let drivers = lim.sample_drivers(depth, mix(seed, 1))?;
        let lb = limit_marked_points(&lim, &drivers, horizon, eps, TimeMarking::Backward)?;
        let lf = limit_marked_points(&lim, &drivers, horizon, eps, TimeMarking::Forward)?;
        let consistent = lb.len() == lf.len()
            && lb.iter().zip(&lf).all(|(b, f)| {
                b.mark == f.mark
                    && if shared {
                        f.time < b.time
                    } else {
                        f.time == b.time
                    }
            });
        let mut counts = Vec::with_capacity(4 * windows.len());
        for w in &windows {
            for pts in [&pb, &pf, &lb, &lf] {
                counts.push(window_count(pts, w.s, w.delta));
            }
        }
        Ok((counts, consistent))
    })?;

    let mut header = vec!["replicate".to_string()];
    for j in 1..=windows.len() {
        for name in [
            "pre_backward",
            "pre_forward",
            "limit_backward",
            "limit_forward",
        ] {
            header.push(format!("{name}_w{j}"));
        }
    }
    let mut table = ResultTable::new(header);
    for (r, (counts, _)) in reps.iter().enumerate() {
        let mut row = vec![r.to_string()];
        row.extend(counts.iter().map(|k| k.to_string()));
        table.push(row)?;
    }

    let mut stats = Map::new();
    let mut worst = 0.0f64;
    for (j, w) in windows.iter().enumerate() {
        let col = |i: usize| reps.iter().map(|r| r.0[4 * j + i]).collect::<Vec<usize>>();
        let tv_b = tv_distance(&col(0), &col(2))?;
        let tv_f = tv_distance(&col(1), &col(3))?;
        worst = worst.max(tv_b).max(tv_f);
        put(&mut stats, format!("tv_backward_w{}", j + 1), tv_b);
        put(&mut stats, format!("tv_forward_w{}", j + 1), tv_f);
        put(&mut stats, format!("window_s_w{}", j + 1), w.s);
        put(&mut stats, format!("window_delta_w{}", j + 1), w.delta);
    }
    let violations = reps.iter().filter(|r| !r.1).count() as u64;
    put(&mut stats, "tv_max", worst);
    put(&mut stats, "pathwise_violations", violations);
    put(&mut stats, "eps", eps);
    Ok(Outcome {
        experiment: c.experiment.clone(),
        pass: worst <= tv_max && violations == 0,
        stats,
        table,
    })
}

/// Random centered bounded step law and stopping rule.
fn random_case<R: Rng>(rng: &mut R) -> CaseSpec {
    let law = match rng.random_range(0..3) {
        0 => LawSpec::Rademacher,
        1 => LawSpec::Uniform {
            half_width: rng.random_range(0.5..3.0),
        },
        _ => {
            let a: f64 = rng.random_range(0.5..2.0);
            let p: f64 = rng.random_range(0.2..1.0);
            LawSpec::Discrete {
                values: vec![-a, 0.0, a],
                probs: vec![p / 2.0, 1.0 - p, p / 2.0],
            }
        }
    };
    let rule = if rng.random::<bool>() {
        RuleSpec::Fixed {
            m: rng.random_range(1..=20),
        }
    } else {
        RuleSpec::FirstExceedance {
            threshold: rng.random_range(0.0..1.5),
            cap: rng.random_range(1..=20),
        }
    };
    CaseSpec {
        law,
        rule,
        delta: rng.random_range(0.5..5.0),
    }
}

fn kolmogorov(c: &ExperimentConfig, workers: Option<usize>) -> Result<Outcome> {
    let spec = c
        .kolmogorov
        .as_ref()
        .ok_or_else(|| config_err("missing key \"kolmogorov\""))?;
    let mut cases = spec.cases.clone();
    let mut rng = rng_from_seed(mix(c.base_seed, u64::from(u32::MAX)));
    cases.extend((0..spec.random_cases).map(|_| random_case(&mut rng)));
    if cases.is_empty() {
        return Err(config_err("kolmogorov needs at least one case"));
    }
    let built: Vec<KolmogorovCase> = cases
        .iter()
        .enumerate()
        .map(|(i, cs)| {
            let case = KolmogorovCase {
                law: StepLaw::from(&cs.law),
                rule: StoppingRule::from(&cs.rule),
                delta: cs.delta,
                replicates: c.replicates,
                seed: mix(c.base_seed, i as u64),
            };
            case.law.validate().map_err(|e| config_err(e.to_string()))?;
            if !(cs.delta > 0.0) {
                return Err(config_err("kolmogorov delta must be positive"));
            }
            Ok(case)
        })
        .collect::<Result<_>>()?;

    let mut table = ResultTable::new([
        "case",
        "law",
        "rule",
        "delta",
        "lhs",
        "stderr",
        "rhs",
        "mean_stopping_time",
        "holds",
    ]);
    let mut violations = 0u64;
    let mut worst_margin = f64::NEG_INFINITY;
    for (i, (case, cs)) in built.iter().zip(&cases).enumerate() {
        let r = kolmogorov_inequality_check(case, workers)?;
        if !r.holds() {
            violations += 1;
        }
        worst_margin = worst_margin.max(r.lhs - 3.0 * r.stderr - r.rhs);
        table.push(vec![
            i.to_string(),
            serde_json::to_string(&cs.law).expect("law serializes"),
            serde_json::to_string(&cs.rule).expect("rule serializes"),
            fmt(cs.delta),
            fmt(r.lhs),
            fmt(r.stderr),
            fmt(r.rhs),
            fmt(r.mean_stopping_time),
            r.holds().to_string(),
        ])?;
    }
    let mut stats = Map::new();
    put(&mut stats, "cases", built.len() as u64);
    put(&mut stats, "violations", violations);
    put(&mut stats, "worst_margin", worst_margin);
    Ok(Outcome {
        experiment: c.experiment.clone(),
        pass: violations == 0,
        stats,
        table,
    })
}

fn renewal_mean(c: &ExperimentConfig, workers: Option<usize>) -> Result<Outcome> {
    let sub = c.sub()?;
    let spec = c
        .renewal
        .as_ref()
        .ok_or_else(|| config_err("missing key \"renewal\""))?;
    let band = c
        .thresholds
        .ratio_band
        .ok_or_else(|| config_err("missing threshold \"ratio_band\""))?;
    if !(band[0] <= band[1]) {
        return Err(config_err("ratio_band must be [low, high]"));
    }
    if spec.times.is_empty() || spec.times.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
        return Err(config_err("renewal times must be finite and >= 0"));
    }
    if spec.times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(config_err("renewal times must be strictly increasing"));
    }
    let band_index = spec
        .times
        .iter()
        .position(|&t| t == spec.band_time)
        .ok_or_else(|| config_err("band_time must be one of the renewal times"))?;
    if spec.runs == 0 {
        return Err(config_err("runs must be >= 1"));
    }

    let mut table = ResultTable::new(["t", "run", "ratio", "stderr", "mean_count"]);
    let mut stats = Map::new();
    let mut averages = Vec::with_capacity(spec.times.len());
    let mut band_first = f64::NAN;
    for (i, &t) in spec.times.iter().enumerate() {
        let mut sum = 0.0;
        for run in 0..spec.runs {
            let plan = McPlan::new(c.replicates, mix(mix(c.base_seed, i as u64), run))
                .with_workers(workers);
            let r = renewal_mean_ratio(sub.alpha(), sub.c_time(), t, &plan)?;
            if i == band_index && run == 0 {
                band_first = r.ratio;
            }
            sum += r.ratio;
            table.push(vec![
                fmt(t),
                run.to_string(),
                fmt(r.ratio),
                fmt(r.stderr),
                fmt(r.mean_count),
            ])?;
        }
        let avg = sum / spec.runs as f64;
        put(&mut stats, format!("mean_ratio_t{t}"), avg);
        averages.push(avg);
    }
    let within = |x: f64| x >= band[0] && x <= band[1];
    let trend = averages
        .windows(2)
        .all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs());
    put(&mut stats, "band_ratio_single_run", band_first);
    put(&mut stats, "band_ratio_mean", averages[band_index]);
    put(&mut stats, "trend_monotone", trend);
    let pass = within(band_first) && within(averages[band_index]) && (!spec.require_trend || trend);
    Ok(Outcome {
        experiment: c.experiment.clone(),
        pass,
        stats,
        table,
    })
}
