//! The four subcommands. Each returns a JSON summary and whether every
//! criterion passed.

use std::f64::consts::PI;
use std::path::Path;

use serde_json::{json, Value};
use sip_hydro::duality::duality_sweep;
use sip_hydro::harness::{
    hydro_experiment, hydrostatic_experiment, variance_bound_scan, HydroConfig, HydrostaticConfig,
};
use sip_hydro::pde::{HeatGrid, HeatProblem, TestFunction};
use sip_hydro::stationary::{
    expected_absorption_time, harmonic_residual, lookdown_generator_check, stationary_profile, two_point,
    two_point_residual, TWO_POINT_CAP,
};
use sip_hydro::ModelParams;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{unix_now, OutDir};

pub const VERIFY_BLOCKS: [&str; 5] = ["duality", "profile", "two_point", "lookdown", "absorption"];

pub struct Outcome {
    pub summary: Value,
    pub pass: bool,
}

fn test_functions(names: &[String], params: &ModelParams) -> CliResult<Vec<TestFunction>> {
    if names.is_empty() {
        return Ok(TestFunction::catalog(params));
    }
    names
        .iter()
        .map(|n| TestFunction::by_name(n, params).map_err(CliError::from))
        .collect()
}

fn ratio(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

fn verify_block(name: &str, config: &RunConfig, params: &ModelParams) -> CliResult<(Value, bool)> {
    let v = &config.verify;
    let scale = |q: &ModelParams| q.bulk_speed() * q.alpha;
    let theta_max = params.theta_l.max(params.theta_r);
    Ok(match name {
        "duality" => {
            let r = duality_sweep(v.pairs_per_combo, v.tolerance, config.seed);
            let pass = r.failures.is_empty();
            (
                json!({
                    "pairs_tested": r.pairs_tested,
                    "max_residual": r.max_residual,
                    "failures": r.failures.len(),
                    "pass": pass,
                }),
                pass,
            )
        }
        "profile" => {
            let mut worst: f64 = 0.0;
            let mut ends = true;
            for &n in &v.profile_ns {
                let q = params.with_n(n).validate()?;
                let h = stationary_profile(&q);
                worst = worst.max(harmonic_residual(&q, &h) / (scale(&q) * theta_max));
                ends &= h.get(0) == q.theta_l && h.get(n) == q.theta_r;
            }
            let pass = worst <= 1e-10 && ends;
            (json!({"max_residual": worst, "exact_endpoints": ends, "pass": pass}), pass)
        }
        "two_point" => {
            let mut worst: f64 = 0.0;
            let mut min_centered = f64::INFINITY;
            for &n in &v.two_point_ns {
                let q = params.with_n(n).validate()?;
                let k = two_point(&q)?;
                worst = worst.max(two_point_residual(&q, &k) / (scale(&q) * theta_max * theta_max));
                min_centered = min_centered.min(k.min_centered());
            }
            let pass = worst <= 1e-8 && min_centered >= -1e-12;
            (
                json!({"max_residual": worst, "min_centered": min_centered, "pass": pass}),
                pass,
            )
        }
        "lookdown" => {
            let mut worst: f64 = 0.0;
            for &n in &v.lookdown_ns {
                let q = params.with_n(n).validate()?;
                worst = worst.max(lookdown_generator_check(&q) / scale(&q));
            }
            let pass = worst <= 1e-12;
            (json!({"max_residual": worst, "pass": pass}), pass)
        }
        "absorption" => {
            let mut rows = Vec::new();
            let mut pass = true;
            for &beta in &v.absorption_betas {
                let scaled: Vec<f64> = v
                    .absorption_ns
                    .iter()
                    .map(|&n| {
                        let q = params.with_n(n).with_beta(beta).validate()?;
                        Ok(expected_absorption_time(&q)?.scaled)
                    })
                    .collect::<CliResult<_>>()?;
                let r = ratio(&scaled);
                pass &= r <= 3.0;
                rows.push(json!({"beta": beta, "scaled_sup": scaled, "max_over_min": r}));
            }
            (json!({"ns": v.absorption_ns, "betas": rows, "pass": pass}), pass)
        }
        other => return Err(CliError::Config(format!("unknown verify block `{other}`"))),
    })
}

pub fn verify(config: &RunConfig, only: &[String], out: Option<&Path>) -> CliResult<Outcome> {
    let started = unix_now();
    let params = config.params()?;
    for name in only {
        if !VERIFY_BLOCKS.contains(&name.as_str()) {
            return Err(CliError::Config(format!(
                "unknown verify block `{name}`, expected one of {VERIFY_BLOCKS:?}"
            )));
        }
    }
    let mut blocks = serde_json::Map::new();
    let mut pass = true;
    for name in VERIFY_BLOCKS {
        if !only.is_empty() && !only.iter().any(|o| o == name) {
            continue;
        }
        let (block, ok) = verify_block(name, config, &params)?;
        pass &= ok;
        blocks.insert(name.into(), block);
    }
    let summary = json!({"command": "verify", "seed": config.seed, "blocks": blocks, "pass": pass});
    if let Some(dir) = out {
        let mut o = OutDir::create(dir)?;
        o.json("verify.json", &summary)?;
        o.finish("verify", config, params, started)?;
    }
    Ok(Outcome { summary, pass })
}

pub fn hydro(config: &RunConfig, out: &Path) -> CliResult<Outcome> {
    let started = unix_now();
    let params = config.params()?;
    let s = &config.hydro;
    let gs = test_functions(&s.test_fns, &params)?;
    let mut hc = HydroConfig::new(s.times.clone(), s.replicas, config.seed);
    hc.grid = HeatGrid::new(s.grid);
    hc.budget_fraction = s.budget_fraction;
    let h = HeatProblem::from_params(&params).stationary();
    let amp = s.perturbation;
    let report = hydro_experiment(&params, |u| h.value(u) + amp * (PI * u).sin(), &gs, &hc)?;

    let mut o = OutDir::create(out)?;
    for (series, cmp) in report.series.iter().zip(&report.fields) {
        let rows = series
            .times
            .iter()
            .zip(&series.values)
            .flat_map(|(t, vals)| vals.iter().enumerate().map(move |(r, v)| (*t, r, *v)));
        o.csv(&format!("field_{}.csv", series.test_fn), &["time", "replica", "value"], rows)?;
        let rows = (0..cmp.times.len()).map(|i| (cmp.times[i], cmp.mean[i], cmp.se[i], cmp.oracle[i]));
        o.csv(&format!("oracle_{}.csv", cmp.test_fn), &["time", "mean", "se", "oracle"], rows)?;
    }
    o.json("report.json", &report)?;
    o.finish("hydro", config, params, started)?;

    let mut summary = json!({
        "command": "hydro",
        "regime": report.regime,
        "criteria": report.criteria,
        "decay_rate": report.decay_rate,
        "pass": report.pass,
    });
    if params.is_equilibrium() && amp == 0.0 {
        summary["stationary_case"] = json!(if report.pass { "pass" } else { "fail" });
    }
    Ok(Outcome {
        summary,
        pass: report.pass,
    })
}

pub fn hydrostatic(config: &RunConfig, out: &Path) -> CliResult<Outcome> {
    let started = unix_now();
    let params = config.params()?;
    let s = &config.hydrostatic;
    let gs = test_functions(&s.test_fns, &params)?;
    let mut hc = HydrostaticConfig::new(s.burn_in, s.samples, s.thinning, config.seed);
    hc.batches = s.batches;
    hc.budget_fraction = s.budget_fraction;
    let report = hydrostatic_experiment(&params, None, &gs, &hc)?;

    let mut o = OutDir::create(out)?;
    let rows = report
        .sites
        .iter()
        .map(|c| (c.x, c.mean, c.se, c.discrete, c.continuum, c.variance, c.variance_se));
    o.csv(
        "sites.csv",
        &["x", "mean", "se", "discrete", "continuum", "variance", "variance_se"],
        rows,
    )?;
    let rows = report.fields.iter().map(|f| (f.test_fn.clone(), f.mean[0], f.se[0], f.oracle[0]));
    o.csv("fields.csv", &["test_fn", "mean", "se", "oracle"], rows)?;
    o.json("report.json", &report)?;
    o.finish("hydrostatic", config, params, started)?;
    Ok(Outcome {
        summary: json!({
            "command": "hydrostatic",
            "regime": report.regime,
            "criteria": report.criteria,
            "pass": report.pass,
        }),
        pass: report.pass,
    })
}

pub fn scan(config: &RunConfig, out: &Path) -> CliResult<Outcome> {
    let started = unix_now();
    let params = config.params()?;
    let s = &config.scan;
    if s.ns.is_empty() || s.betas.is_empty() {
        return Err(CliError::Config("scan needs at least one N and one beta".into()));
    }
    let g = TestFunction::by_name(&s.test_fn, &params)?;
    let mut o = OutDir::create(out)?;
    let mut tables = Vec::new();
    for &beta in &s.betas {
        let qs: Vec<ModelParams> = s
            .ns
            .iter()
            .map(|&n| params.with_n(n).with_beta(beta).validate())
            .collect::<Result<_, _>>()?;
        let small: Vec<ModelParams> = qs.iter().copied().filter(|q| q.n <= TWO_POINT_CAP).collect();
        let pairings = variance_bound_scan(&small, &g)?;
        let mut rows = Vec::new();
        let mut scaled_times = Vec::new();
        for q in &qs {
            let a = expected_absorption_time(q)?;
            scaled_times.push(a.scaled);
            let norm = (q.n as f64).powf(beta - 1.0).max(1.0);
            let (pairing, scaled) = match pairings.iter().find(|r| r.n == q.n) {
                Some(r) => (r.pairing.to_string(), r.scaled.to_string()),
                None => ("skipped".to_string(), "skipped".to_string()),
            };
            rows.push((q.n, a.sup, norm, a.scaled, pairing, scaled));
        }
        let name = format!("scan_beta_{beta}.csv");
        o.csv(
            &name,
            &["n", "sup_absorption_time", "normalizer", "scaled_absorption_time", "pairing", "scaled_pairing"],
            rows,
        )?;
        tables.push(json!({"beta": beta, "file": name, "absorption_max_over_min": ratio(&scaled_times)}));
    }
    o.finish("scan", config, params, started)?;
    Ok(Outcome {
        summary: json!({"command": "scan", "tables": tables, "pass": true}),
        pass: true,
    })
}
