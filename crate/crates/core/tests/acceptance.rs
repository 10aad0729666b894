//! End-to-end acceptance suite. Prints one line per criterion and exits
//! nonzero if any fails. Pass criterion numbers as arguments to run a subset.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use sip_hydro::duality::duality_sweep;
use sip_hydro::harness::{
    hydro_experiment, hydrostatic_experiment, martingale_check, variance_bound_scan, HydroConfig,
    HydrostaticConfig,
};
use sip_hydro::kmc::{simulate_single_walk_with, PairKind, PairState, PairWalk};
use sip_hydro::pde::{
    corrected_test_function, discrete_laplacian, solve_heat, HeatGrid, HeatProblem, TestFunction,
};
use sip_hydro::rng::{derive_seed, replica_rng};
use sip_hydro::stationary::{
    apply_a, correlation_mc, expected_absorption_time, harmonic_residual, lookdown_generator_check,
    stationary_profile, two_point, two_point_residual,
};
use sip_hydro::stats::{ls_slope, Estimate};
use sip_hydro::{ModelParams, Regime, Result};

const SEED: u64 = 20_241_016;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn p(alpha: f64, al: f64, ar: f64, tl: f64, tr: f64, beta: f64, n: usize) -> ModelParams {
    ModelParams::new(alpha, al, ar, tl, tr, beta, n).expect("valid parameters")
}

fn duality() -> Result<Outcome> {
    let r = duality_sweep(20, 1e-9, SEED);
    outcome(
        r.pairs_tested >= 500 && r.failures.is_empty(),
        format!("{} pairs, max relative residual {:.2e}", r.pairs_tested, r.max_residual),
    )
}

fn harmonic_profile() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut ends = true;
    for n in [2, 3, 8, 64, 256, 1024] {
        for beta in [0.0, 0.5, 1.0, 1.5, 2.0] {
            let q = p(1.3, 0.7, 2.4, 0.4, 3.1, beta, n);
            let h = stationary_profile(&q);
            let scale = q.bulk_speed() * q.alpha * q.theta_l.max(q.theta_r);
            worst = worst.max(harmonic_residual(&q, &h) / scale);
            ends &= h.get(0) == q.theta_l && h.get(n) == q.theta_r;
        }
    }
    outcome(
        worst <= 1e-10 && ends,
        format!("max scaled residual {worst:.2e}, exact endpoints {ends}"),
    )
}

fn two_point_bvp() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut min_centered = f64::INFINITY;
    let mut eq_err: f64 = 0.0;
    let mut big = Duration::ZERO;
    for n in [2, 4, 16, 64, 128] {
        for beta in [0.0, 1.0, 2.0] {
            let q = p(0.9, 1.6, 0.5, 0.5, 2.5, beta, n);
            let start = Instant::now();
            let k = two_point(&q)?;
            if n == 128 {
                big = big.max(start.elapsed());
            }
            let scale = q.bulk_speed() * q.alpha * q.theta_l.max(q.theta_r).powi(2);
            worst = worst.max(two_point_residual(&q, &k) / scale);
            min_centered = min_centered.min(k.min_centered());
            if n <= 64 {
                let e = q.with_thetas(1.7, 1.7);
                let ke = two_point(&e)?;
                for x in 0..=n {
                    for y in 0..=n {
                        eq_err = eq_err.max((ke.get(x, y) - 1.7 * 1.7).abs());
                    }
                }
            }
        }
    }
    outcome(
        worst <= 1e-8 && eq_err <= 1e-8 && min_centered >= -1e-12 && big < Duration::from_secs(30),
        format!(
            "scaled residual {worst:.2e}, equilibrium error {eq_err:.2e}, min centered {min_centered:.3e}, N=128 solve {:.2}s",
            big.as_secs_f64()
        ),
    )
}

fn both_in_bulk(params: &ModelParams, kind: PairKind, t: f64, replicas: usize, seed: u64) -> Result<Estimate> {
    let n = params.n;
    let hits: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r as u64);
            let (x, y) = match kind {
                PairKind::Lookdown if rand::Rng::random::<bool>(&mut rng) => (5, 2),
                _ => (2, 5),
            };
            let mut walk = PairWalk::new(params, PairState::new(x, y, kind), rng);
            walk.run_until(t, |_, _, _| {})?;
            let s = walk.state();
            Ok(if (1..n).contains(&s.x) && (1..n).contains(&s.y) { 1.0 } else { 0.0 })
        })
        .collect::<Result<_>>()?;
    Ok(Estimate::from_samples(&hits))
}

fn lookdown() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for n in [2, 3, 5, 8, 16] {
        for beta in [0.0, 1.0, 2.0] {
            let q = p(1.4, 0.6, 2.0, 1.0, 1.0, beta, n);
            worst = worst.max(lookdown_generator_check(&q) / (q.bulk_speed() * q.alpha));
        }
    }
    let q = p(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 8);
    let t = 0.05;
    let sym = both_in_bulk(&q, PairKind::Symmetric, t, 10_000, derive_seed(SEED, 41))?;
    let look = both_in_bulk(&q, PairKind::Lookdown, t, 10_000, derive_seed(SEED, 42))?;
    let z = sym.z_against(&look);
    outcome(
        worst <= 1e-12 && z.abs() <= 3.0,
        format!(
            "scaled generator residual {worst:.2e}; P(both in bulk) {:.4} vs {:.4}, z = {z:.2}",
            sym.mean, look.mean
        ),
    )
}

fn absorption_scaling() -> Result<Outcome> {
    let mut ratios = Vec::new();
    for beta in [0.0, 0.5, 1.0, 1.5, 2.0] {
        let scaled: Vec<f64> = [8, 16, 32, 64, 128, 256, 512]
            .iter()
            .map(|&n| expected_absorption_time(&p(1.0, 0.8, 1.5, 1.0, 1.0, beta, n)).map(|a| a.scaled))
            .collect::<Result<_>>()?;
        let max = scaled.iter().cloned().fold(0.0, f64::max);
        let min = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
        ratios.push(max / min);
    }
    let mut worst_z: f64 = 0.0;
    for beta in [0.0, 1.0, 2.0] {
        let q = p(1.0, 0.8, 1.5, 1.0, 1.0, beta, 16);
        let exact = expected_absorption_time(&q)?.u[5];
        let seed = derive_seed(SEED, 50 + beta as u64);
        let times: Vec<f64> = (0..10_000u64)
            .into_par_iter()
            .map(|r| simulate_single_walk_with(&q, 5, &mut replica_rng(seed, r)).absorption_time)
            .collect();
        worst_z = worst_z.max(Estimate::from_samples(&times).z_value(exact).abs());
    }
    let worst_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    outcome(
        worst_ratio <= 3.0 && worst_z <= 3.0,
        format!(
            "max/min per beta {:?}, worst MC |z| {worst_z:.2}",
            ratios.iter().map(|r| (r * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    )
}

fn correlation_representation() -> Result<Outcome> {
    let q = p(1.0, 1.0, 1.0, 1.0, 3.0, 0.0, 16);
    let k = two_point(&q)?;
    let grid = [2, 5, 8, 11, 14];
    let mut worst: f64 = 0.0;
    for (i, &x) in grid.iter().enumerate() {
        for (j, &y) in grid.iter().enumerate() {
            let seed = derive_seed(SEED, 600 + (i * 5 + j) as u64);
            let est = correlation_mc(&q, x, y, 50.0, 10_000, seed)?;
            worst = worst.max(est.z_value(k.centered(x, y)).abs());
        }
    }
    outcome(worst <= 3.0, format!("worst |z| over 25 pairs {worst:.2}"))
}

fn hydro() -> Result<Outcome> {
    let mut pass = true;
    let mut details = Vec::new();
    for beta in [0.5, 1.0, 2.0] {
        let q = p(1.0, 4.0, 4.0, 1.0, 2.0, beta, 64);
        let h = HeatProblem::from_params(&q).stationary();
        let g = TestFunction::catalog(&q).remove(0);
        let config = HydroConfig::new(vec![0.01, 0.05, 0.1, 0.2], 200, derive_seed(SEED, 70));
        let report = hydro_experiment(&q, |u| h.value(u) + 0.5 * (PI * u).sin(), &[g], &config)?;
        let f = &report.fields[0];
        pass &= report.pass;
        details.push(format!(
            "{} {}: excess {:.2e} budget {:.2e} ({:.0}s)",
            q.regime(),
            f.test_fn,
            f.max_excess,
            f.budget,
            report.runtime_secs
        ));
    }
    outcome(pass, details.join("; "))
}

fn hydrostatic() -> Result<Outcome> {
    // (params, burn-in, samples, thinning, batches): every batch spans at
    // least ten relaxation times of the slowest mode.
    let cases = [
        (p(0.5, 1.0, 1.0, 1.0, 3.0, 0.5, 64), 2.0, 10_000, 0.02, 100),
        (p(0.5, 2.0, 2.0, 1.0, 3.0, 1.0, 64), 5.0, 10_000, 0.05, 100),
        (p(0.2, 1.0, 2.0, 3.0, 1.0, 2.0, 64), 100.0, 10_500, 1.0, 50),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (q, burn_in, samples, thinning, batches) in cases {
        let g = TestFunction::catalog(&q).remove(0);
        let mut config = HydrostaticConfig::new(burn_in, samples, thinning, derive_seed(SEED, 80));
        config.batches = batches;
        let report = hydrostatic_experiment(&q, None, &[g], &config)?;
        pass &= report.pass;
        let crit: Vec<String> = report
            .criteria
            .iter()
            .map(|c| format!("{}{}", if c.pass { "" } else { "FAILED " }, c.detail))
            .collect();
        details.push(format!("{} [{}] ({:.0}s)", q.regime(), crit.join(", "), report.runtime_secs));
    }
    outcome(pass, details.join("; "))
}

fn corrected_test_fn() -> Result<Outcome> {
    let g = TestFunction::sin_k(1);
    let ns = [16, 32, 64, 128, 256, 512];
    let mut ends = true;
    let mut identity: f64 = 0.0;
    let mut errs = Vec::new();
    for &n in &ns {
        let q = p(1.3, 0.7, 2.1, 1.0, 1.0, 0.0, n);
        let gn = corrected_test_function(&q, &g)?;
        ends &= gn[0] == 0.0 && gn[n] == 0.0;
        let lhs = apply_a(&q, &gn);
        let lap = discrete_laplacian(&g, n);
        let scale = q.bulk_speed() * q.alpha;
        for x in 1..n {
            identity = identity.max((lhs[x] - q.alpha * lap[x]).abs() / scale);
        }
        let sup = (0..=n)
            .map(|x| (gn[x] - g.value(x as f64 / n as f64)).abs())
            .fold(0.0, f64::max);
        errs.push(sup);
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let slope = ls_slope(&xs, &ys);
    outcome(
        ends && identity <= 1e-12 && (slope + 1.0).abs() <= 0.15,
        format!("exact zeros {ends}, scaled identity residual {identity:.2e}, log-log slope {slope:.3}"),
    )
}

fn martingale() -> Result<Outcome> {
    let q = p(1.0, 1.5, 1.0, 1.0, 2.0, 1.0, 32);
    let h = HeatProblem::from_params(&q).stationary();
    let g = TestFunction::robin_mode(&q, 1);
    let r = martingale_check(&q, |u| h.value(u) + 0.5 * (PI * u).sin(), &g, 0.1, 400, derive_seed(SEED, 100))?;
    outcome(
        (r.ratio - 1.0).abs() <= 0.25,
        format!(
            "variance {:.4e}, mean qv {:.4e}, ratio {:.3}, mean M {:.2e} +- {:.2e}",
            r.variance, r.mean_qv, r.ratio, r.mean_martingale.mean, r.mean_martingale.se
        ),
    )
}

fn heat(regime: Regime) -> HeatProblem {
    HeatProblem {
        alpha: 0.8,
        regime,
        theta_l: 1.0,
        theta_r: 1.0,
        robin_l: 1.0,
        robin_r: 1.0,
    }
}

/// Sup error at `t` of the mode `1 + e^{-alpha pi^2 t} phi(pi u)`.
fn mode_error(regime: Regime, j: usize, t: f64) -> Result<f64> {
    let prob = heat(regime);
    let phi = |u: f64| match regime {
        Regime::Neumann => (PI * u).cos(),
        _ => (PI * u).sin(),
    };
    let sol = solve_heat(&prob, |u| 1.0 + phi(u), &[t], HeatGrid::new(j))?;
    let decay = (-prob.alpha * PI * PI * t).exp();
    Ok(sol.u
        .iter()
        .zip(&sol.values[0])
        .map(|(u, v)| (v - 1.0 - decay * phi(*u)).abs())
        .fold(0.0, f64::max))
}

fn pde_solver() -> Result<Outcome> {
    let mut mode: f64 = 0.0;
    let mut order = f64::INFINITY;
    for regime in [Regime::Dirichlet, Regime::Neumann] {
        for t in [0.05, 0.2] {
            mode = mode.max(mode_error(regime, 200, t)?);
        }
        let e: Vec<f64> = [25, 50, 100].iter().map(|&j| mode_error(regime, j, 0.1)).collect::<Result<_>>()?;
        order = order.min((e[0] / e[1]).log2()).min((e[1] / e[2]).log2());
    }
    let mut fixed: f64 = 0.0;
    for beta in [0.0, 1.0, 2.0] {
        let q = p(0.9, 1.3, 2.2, 0.5, 2.5, beta, 8);
        let prob = HeatProblem::from_params(&q);
        let h = prob.stationary();
        let sol = solve_heat(&prob, |u| h.value(u), &[0.5, 2.0], HeatGrid::new(100))?;
        for row in &sol.values {
            for (u, v) in sol.u.iter().zip(row) {
                fixed = fixed.max((v - h.value(*u)).abs());
            }
        }
    }
    let neu = heat(Regime::Neumann);
    let times = [0.0, 1.0, 2.0];
    let sol = solve_heat(&neu, |u| 1.0 + u * u * (1.5 - u), &times, HeatGrid::new(100))?;
    let mass: Vec<f64> = sol
        .values
        .iter()
        .map(|row| {
            let m = row.len() - 1;
            (0.5 * row[0] + row[1..m].iter().sum::<f64>() + 0.5 * row[m]) / m as f64
        })
        .collect();
    let drift = mass.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    outcome(
        mode <= 1e-3 && fixed <= 1e-10 && drift <= 1e-8 && order >= 1.9,
        format!("mode error {mode:.2e}, fixed-point error {fixed:.2e}, mass drift {drift:.2e}/unit time, order {order:.3}"),
    )
}

fn variance_scan() -> Result<Outcome> {
    let g = TestFunction::sin_k(1);
    let base = p(1.0, 1.0, 1.0, 1.0, 3.0, 0.0, 16);
    let list: Vec<ModelParams> = [16, 32, 64].iter().map(|&n| base.with_n(n)).collect();
    let rows = variance_bound_scan(&list, &g)?;
    let max = rows.iter().map(|r| r.scaled).fold(0.0, f64::max);
    let min = rows.iter().map(|r| r.scaled).fold(f64::INFINITY, f64::min);
    let eq: Vec<ModelParams> = list.iter().map(|q| q.with_thetas(2.0, 2.0)).collect();
    let eq_max = variance_bound_scan(&eq, &g)?
        .iter()
        .map(|r| r.pairing.abs())
        .fold(0.0, f64::max);
    outcome(
        min > 0.0 && max / min <= 3.0 && eq_max == 0.0,
        format!(
            "scaled pairings {:?}, max/min {:.3}, equilibrium max |pairing| {eq_max:e}",
            rows.iter().map(|r| format!("{:.4e}", r.scaled)).collect::<Vec<_>>(),
            max / min
        ),
    )
}

type Check = fn() -> Result<Outcome>;

fn main() -> ExitCode {
    let criteria: [(&str, Check, Duration); 12] = [
        ("duality identity", duality, Duration::from_secs(10)),
        ("discrete harmonic profile", harmonic_profile, Duration::from_secs(1)),
        ("two-point boundary value problem", two_point_bvp, Duration::from_secs(60)),
        ("lookdown identity", lookdown, Duration::from_secs(60)),
        ("absorption-time scaling", absorption_scaling, Duration::from_secs(120)),
        ("correlation representation", correlation_representation, Duration::from_secs(300)),
        ("hydrodynamic convergence", hydro, Duration::from_secs(3 * 600)),
        ("hydrostatic convergence", hydrostatic, Duration::from_secs(3 * 600)),
        ("corrected test function", corrected_test_fn, Duration::from_secs(1)),
        ("Dynkin martingale consistency", martingale, Duration::from_secs(120)),
        ("heat equation solver", pde_solver, Duration::from_secs(30)),
        ("variance bound scan", variance_scan, Duration::from_secs(60)),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && elapsed <= *limit, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {id:>2} {name}: {detail} [{:.2}s, limit {}s]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
