//! Density fields, Dynkin diagnostics and the limit experiments that compare
//! particle simulations with the heat equation and the stationary profiles.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kmc::{sample_local_gibbs, InclusionChain};
use crate::model::{Configuration, ModelParams, Regime};
use crate::pde::{solve_heat, trapezoid, HeatGrid, HeatProblem, TestFunction};
use crate::rng::{derive_seed, replica_rng};
use crate::stationary::{stationary_profile, two_point, ProfileVector};
use crate::stats::{ls_slope, sample_variance, Estimate};

/// `G(x/N)` on `0..=N`.
pub fn sample_test_function(g: &TestFunction, n: usize) -> Vec<f64> {
    (0..=n).map(|x| g.value(x as f64 / n as f64)).collect()
}

/// Empirical density field `(1/N) sum_x G(x/N) eta(x)`.
pub fn empirical_field(g: &TestFunction, eta: &Configuration, n: usize) -> f64 {
    (1..n).map(|x| g.value(x as f64 / n as f64) * eta.get(x) as f64).sum::<f64>() / n as f64
}

fn field_of(gv: &[f64], occ: &[u64]) -> f64 {
    let n = gv.len() - 1;
    (1..n).map(|x| gv[x] * occ[x] as f64).sum::<f64>() / n as f64
}

/// Stationary part `(1/N) sum_x G(x/N) h(x) alpha`.
pub fn stationary_pairing(g: &TestFunction, h: &ProfileVector, params: &ModelParams) -> f64 {
    let n = params.n;
    (1..n).map(|x| g.value(x as f64 / n as f64) * h.get(x)).sum::<f64>() * params.alpha / n as f64
}

/// Centered field `(1/N) sum_x G(x/N) (eta(x)/alpha - h(x)) alpha`.
pub fn centered_field(g: &TestFunction, eta: &Configuration, params: &ModelParams, h: &ProfileVector) -> f64 {
    let n = params.n;
    let a = params.alpha;
    (1..n)
        .map(|x| g.value(x as f64 / n as f64) * (eta.get(x) as f64 / a - h.get(x)) * a)
        .sum::<f64>()
        / n as f64
}

/// Drift and quadratic-variation rate of `<G, X>` by direct summation over
/// the transitions; `eta(x)` for `x` in `1..N`.
fn direct_rates(params: &ModelParams, gv: &[f64], eta: impl Fn(usize) -> f64) -> (f64, f64) {
    let n = params.n;
    let nf = n as f64;
    let a = params.alpha;
    let n2 = params.bulk_speed();
    let bs = params.boundary_speed();
    let (mut drift, mut qv) = (0.0, 0.0);
    for x in 1..n - 1 {
        let (e0, e1) = (eta(x), eta(x + 1));
        let fwd = n2 * e0 * (a + e1);
        let bwd = n2 * e1 * (a + e0);
        let dg = (gv[x + 1] - gv[x]) / nf;
        drift += (fwd - bwd) * dg;
        qv += (fwd + bwd) * dg * dg;
    }
    for (site, alpha_res, theta) in [(1, params.alpha_l, params.theta_l), (n - 1, params.alpha_r, params.theta_r)] {
        let e = eta(site);
        let birth = bs * alpha_res * theta * (a + e);
        let death = bs * e * alpha_res * (1.0 + theta);
        let dg = gv[site] / nf;
        drift += (birth - death) * dg;
        qv += (birth + death) * dg * dg;
    }
    (drift, qv)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftDiagnostic {
    /// Sum over transitions of rate times field increment.
    pub direct: f64,
    /// Discrete Laplacian bulk term plus gradient and reservoir terms.
    pub by_parts: f64,
    pub difference: f64,
}

/// Generator of the open process applied to `<G, X>`, evaluated two ways.
pub fn drift_diagnostic(params: &ModelParams, g: &TestFunction, eta: &Configuration) -> DriftDiagnostic {
    let n = params.n;
    let nf = n as f64;
    let a = params.alpha;
    let gv = sample_test_function(g, n);
    let direct = direct_rates(params, &gv, |x| eta.get(x) as f64).0;

    let f = |x: usize| {
        if x == 0 {
            params.theta_l
        } else if x == n {
            params.theta_r
        } else {
            eta.get(x) as f64 / a
        }
    };
    let bulk: f64 = (1..n)
        .map(|x| a * nf * nf * (gv[x + 1] - 2.0 * gv[x] + gv[x - 1]) * f(x) * a)
        .sum::<f64>()
        / nf;
    let grad_l = nf * (gv[1] - gv[0]);
    let grad_r = nf * (gv[n - 1] - gv[n]);
    let nb = nf.powf(1.0 - params.beta);
    let by_parts = bulk
        + a * grad_l * f(1) * a
        + a * grad_r * f(n - 1) * a
        + nb * params.alpha_l * gv[1] * (f(0) - f(1)) * a
        + nb * params.alpha_r * gv[n - 1] * (f(n) - f(n - 1)) * a;
    DriftDiagnostic {
        direct,
        by_parts,
        difference: (direct - by_parts).abs(),
    }
}

/// Instantaneous predictable quadratic variation of `<G, X>`, written with
/// the one- and two-point duality functions.
pub fn qv_rate(params: &ModelParams, g: &TestFunction, eta: &Configuration) -> f64 {
    let n = params.n;
    let a = params.alpha;
    let gv = sample_test_function(g, n);
    let d = |x: usize| match x {
        0 => params.theta_l,
        x if x == n => params.theta_r,
        x => eta.get(x) as f64 / a,
    };
    let v = |x: usize, y: usize| d(x) + d(y) + 2.0 * d(x) * d(y);
    let nb = (n as f64).powf(-params.beta);
    let bulk: f64 = (1..n - 1).map(|x| a * (gv[x + 1] - gv[x]).powi(2) * v(x, x + 1) * a).sum();
    bulk + nb * params.alpha_l * gv[1].powi(2) * v(0, 1) * a + nb * params.alpha_r * gv[n - 1].powi(2) * v(n - 1, n) * a
}

/// Quadratic-variation rate as the sum of rate times squared increment.
pub fn qv_rate_direct(params: &ModelParams, g: &TestFunction, eta: &Configuration) -> f64 {
    let gv = sample_test_function(g, params.n);
    direct_rates(params, &gv, |x| eta.get(x) as f64).1
}

/// Replica values of `<G, X_t>` on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSeries {
    pub test_fn: String,
    pub times: Vec<f64>,
    /// `values[i][r]`: time `times[i]`, replica `r`.
    pub values: Vec<Vec<f64>>,
    pub summary: Vec<Estimate>,
}

impl FieldSeries {
    fn new(test_fn: &str, times: &[f64], values: Vec<Vec<f64>>) -> Self {
        let summary = values.iter().map(|v| Estimate::from_samples(v)).collect();
        FieldSeries {
            test_fn: test_fn.into(),
            times: times.to_vec(),
            values,
            summary,
        }
    }

    pub fn replicas(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }
}

/// Field mean against its deterministic oracle over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldComparison {
    pub test_fn: String,
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
    pub oracle: Vec<f64>,
    /// Allowance for finite-`N` and grid error, separate from the 3 SE.
    pub budget: f64,
    /// `max_t (|mean - oracle| - 3 SE)`.
    pub max_excess: f64,
    pub pass: bool,
}

impl FieldComparison {
    fn build(test_fn: &str, times: &[f64], est: &[Estimate], oracle: Vec<f64>, budget: f64) -> Self {
        let max_excess = est
            .iter()
            .zip(&oracle)
            .map(|(e, o)| (e.mean - o).abs() - 3.0 * e.se)
            .fold(f64::NEG_INFINITY, f64::max);
        FieldComparison {
            test_fn: test_fn.into(),
            times: times.to_vec(),
            mean: est.iter().map(|e| e.mean).collect(),
            se: est.iter().map(|e| e.se).collect(),
            oracle,
            budget,
            max_excess,
            pass: max_excess <= budget,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Per-site long-run mean against the stationary oracles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteComparison {
    pub x: usize,
    pub mean: f64,
    pub se: f64,
    /// `alpha h^N(x)`.
    pub discrete: f64,
    /// `alpha h(x/N)`.
    pub continuum: f64,
    pub variance: f64,
    pub variance_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub params: ModelParams,
    pub regime: Regime,
    pub seed: u64,
    pub replicas: usize,
    pub fields: Vec<FieldComparison>,
    pub sites: Vec<SiteComparison>,
    pub criteria: Vec<CriterionResult>,
    /// Fitted exponential decay rate of the centered `sin_1` field, with the
    /// eigenmode rate `alpha pi^2` it should approach.
    pub decay_rate: Option<(f64, f64)>,
    pub runtime_secs: f64,
    pub pass: bool,
    #[serde(skip)]
    pub series: Vec<FieldSeries>,
}

impl ExperimentReport {
    fn finish(mut self, start: Instant) -> Self {
        self.runtime_secs = start.elapsed().as_secs_f64();
        self.pass = self.criteria.iter().all(|c| c.pass);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydroConfig {
    pub times: Vec<f64>,
    pub replicas: usize,
    pub seed: u64,
    pub grid: HeatGrid,
    /// Discretization budget as a fraction of `max_t |<G, theta(t) alpha>|`.
    pub budget_fraction: f64,
}

impl HydroConfig {
    pub fn new(times: Vec<f64>, replicas: usize, seed: u64) -> Self {
        HydroConfig {
            times,
            replicas,
            seed,
            grid: HeatGrid::new(400),
            budget_fraction: 0.05,
        }
    }
}

/// Runs replicas of the open process from local Gibbs states with profile
/// `theta0` and compares the field means with the heat equation.
pub fn hydro_experiment<F>(
    params: &ModelParams,
    theta0: F,
    g_list: &[TestFunction],
    config: &HydroConfig,
) -> Result<ExperimentReport>
where
    F: Fn(f64) -> f64 + Sync,
{
    let start = Instant::now();
    let n = params.n;
    if config.replicas < 2 {
        return Err(Error::InvalidArgument("need at least 2 replicas".into()));
    }
    let mut times = config.times.clone();
    if times.first() != Some(&0.0) {
        times.insert(0, 0.0);
    }
    let gvs: Vec<Vec<f64>> = g_list.iter().map(|g| sample_test_function(g, n)).collect();
    let per_replica: Vec<Vec<Vec<f64>>> = (0..config.replicas)
        .into_par_iter()
        .map(|r| {
            let r = r as u64;
            let eta0 = sample_local_gibbs(params, &theta0, &mut replica_rng(derive_seed(config.seed, 1), r))?;
            let mut chain = InclusionChain::primal(params, &eta0, replica_rng(derive_seed(config.seed, 2), r))?;
            let mut out = Vec::with_capacity(times.len());
            for &t in &times {
                chain.advance_to(t, |_, _, _| {})?;
                out.push(gvs.iter().map(|gv| field_of(gv, chain.occupations())).collect());
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let problem = HeatProblem::from_params(params);
    let pde = solve_heat(&problem, &theta0, &times, config.grid)?;
    let h = stationary_profile(params);
    let mut report = ExperimentReport {
        experiment: "hydro".into(),
        params: *params,
        regime: params.regime(),
        seed: config.seed,
        replicas: config.replicas,
        fields: Vec::new(),
        sites: Vec::new(),
        criteria: Vec::new(),
        decay_rate: None,
        runtime_secs: 0.0,
        pass: false,
        series: Vec::new(),
    };
    for (k, g) in g_list.iter().enumerate() {
        let values: Vec<Vec<f64>> = (0..times.len())
            .map(|i| per_replica.iter().map(|rep| rep[i][k]).collect())
            .collect();
        let series = FieldSeries::new(&g.name, &times, values);
        let oracle: Vec<f64> = (0..times.len()).map(|i| params.alpha * pde.pairing(i, g)).collect();
        let scale = oracle.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let cmp = FieldComparison::build(&g.name, &times, &series.summary, oracle, config.budget_fraction * scale);
        report.criteria.push(CriterionResult {
            name: format!("field {} vs heat equation", g.name),
            pass: cmp.pass,
            detail: format!("max(|mean - oracle| - 3 SE) = {:.4e}, budget {:.4e}", cmp.max_excess, cmp.budget),
        });
        if g.name == "sin_1" && params.regime() == Regime::Dirichlet {
            let stat = stationary_pairing(g, &h, params);
            let (ts, logs): (Vec<f64>, Vec<f64>) = series
                .summary
                .iter()
                .zip(&times)
                .filter(|(e, _)| e.mean - stat > 0.0)
                .map(|(e, t)| (*t, (e.mean - stat).ln()))
                .unzip();
            if ts.len() >= 2 {
                report.decay_rate = Some((-ls_slope(&ts, &logs), params.alpha * std::f64::consts::PI.powi(2)));
            }
        }
        report.fields.push(cmp);
        report.series.push(series);
    }
    Ok(report.finish(start))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydrostaticConfig {
    pub burn_in: f64,
    pub n_samples: usize,
    /// Time between recorded snapshots.
    pub thinning: f64,
    pub batches: usize,
    pub seed: u64,
    pub budget_fraction: f64,
}

impl HydrostaticConfig {
    pub fn new(burn_in: f64, n_samples: usize, thinning: f64, seed: u64) -> Self {
        HydrostaticConfig {
            burn_in,
            n_samples,
            thinning,
            batches: 20,
            seed,
            budget_fraction: 0.05,
        }
    }
}

/// Runs one long trajectory (from `start`, or a local Gibbs draw around the
/// discrete profile) and compares long-run means with the stationary
/// profiles.
pub fn hydrostatic_experiment(
    params: &ModelParams,
    start: Option<&Configuration>,
    g_list: &[TestFunction],
    config: &HydrostaticConfig,
) -> Result<ExperimentReport> {
    let t0 = Instant::now();
    let n = params.n;
    if config.n_samples < 2 * config.batches.max(2) {
        return Err(Error::InvalidArgument(format!(
            "need at least {} samples for {} batches",
            2 * config.batches.max(2),
            config.batches
        )));
    }
    if !(config.thinning > 0.0 && config.burn_in >= 0.0) {
        return Err(Error::InvalidArgument("thinning must be positive and burn-in non-negative".into()));
    }
    let h = stationary_profile(params);
    let eta0 = match start {
        Some(c) => c.clone(),
        None => {
            let hv = h.values.clone();
            sample_local_gibbs(
                params,
                move |u| hv[(u * n as f64).round() as usize],
                &mut replica_rng(derive_seed(config.seed, 1), 0),
            )?
        }
    };
    let mut chain = InclusionChain::primal(params, &eta0, replica_rng(derive_seed(config.seed, 2), 0))?;
    chain.advance_to(config.burn_in, |_, _, _| {})?;
    let mut site_series = vec![Vec::with_capacity(config.n_samples); n + 1];
    let gvs: Vec<Vec<f64>> = g_list.iter().map(|g| sample_test_function(g, n)).collect();
    let mut field_series = vec![Vec::with_capacity(config.n_samples); g_list.len()];
    let mut mass_series = Vec::with_capacity(config.n_samples);
    for i in 1..=config.n_samples {
        chain.advance_to(config.burn_in + i as f64 * config.thinning, |_, _, _| {})?;
        let occ = chain.occupations();
        for x in 1..n {
            site_series[x].push(occ[x] as f64);
        }
        for (k, gv) in gvs.iter().enumerate() {
            field_series[k].push(field_of(gv, occ));
        }
        mass_series.push(occ[1..n].iter().sum::<u64>() as f64 / (n - 1) as f64);
    }

    let continuum = HeatProblem::from_params(params).stationary();
    let a = params.alpha;
    let sites: Vec<SiteComparison> = (1..n)
        .map(|x| {
            let s = &site_series[x];
            let est = Estimate::batch_means(s, config.batches);
            let sq: Vec<f64> = s.iter().map(|v| (v - est.mean).powi(2)).collect();
            let var = Estimate::batch_means(&sq, config.batches);
            SiteComparison {
                x,
                mean: est.mean,
                se: est.se,
                discrete: a * h.get(x),
                continuum: a * continuum.value(x as f64 / n as f64),
                variance: sample_variance(s),
                variance_se: var.se,
            }
        })
        .collect();

    let mut criteria = Vec::new();
    let worst = sites
        .iter()
        .map(|s| (s.mean - s.discrete).abs() / s.se)
        .fold(0.0f64, f64::max);
    criteria.push(CriterionResult {
        name: "site means vs alpha h^N".into(),
        pass: sites.iter().all(|s| (s.mean - s.discrete).abs() <= 3.0 * s.se),
        detail: format!("max |mean - alpha h^N| / SE = {worst:.3} over {} sites", sites.len()),
    });
    if params.regime() == Regime::Neumann {
        let flat = a * (params.rho_l() + params.rho_r()) / (params.alpha_l + params.alpha_r);
        let est = Estimate::batch_means(&mass_series, config.batches);
        criteria.push(CriterionResult {
            name: "flat Neumann density".into(),
            pass: (est.mean - flat).abs() <= 3.0 * est.se,
            detail: format!("spatial mean {:.5} +- {:.5} vs {:.5}", est.mean, est.se, flat),
        });
    }
    if params.is_equilibrium() {
        let target = a * params.theta_l * (1.0 + params.theta_l);
        let worst_v = sites
            .iter()
            .map(|s| (s.variance - target).abs() / s.variance_se)
            .fold(0.0f64, f64::max);
        criteria.push(CriterionResult {
            name: "equilibrium site variance".into(),
            pass: worst_v <= 4.0,
            detail: format!("max |var - alpha theta (1 + theta)| / SE = {worst_v:.3}"),
        });
    }
    let mut fields = Vec::new();
    for (k, g) in g_list.iter().enumerate() {
        let est = Estimate::batch_means(&field_series[k], config.batches);
        let oracle = a * trapezoid(&grid_points(1000), |j| {
            let u = j as f64 / 1000.0;
            g.value(u) * continuum.value(u)
        });
        let budget = config.budget_fraction * oracle.abs().max(g.sup_norms()[0] * a * 1e-3);
        let cmp = FieldComparison::build(&g.name, &[chain.time()], &[est], vec![oracle], budget);
        criteria.push(CriterionResult {
            name: format!("field {} vs <G, h alpha>", g.name),
            pass: cmp.pass,
            detail: format!("mean {:.5} +- {:.5} vs {:.5}", est.mean, est.se, oracle),
        });
        fields.push(cmp);
    }
    let report = ExperimentReport {
        experiment: "hydrostatic".into(),
        params: *params,
        regime: params.regime(),
        seed: config.seed,
        replicas: 1,
        fields,
        sites,
        criteria,
        decay_rate: None,
        runtime_secs: 0.0,
        pass: false,
        series: Vec::new(),
    };
    Ok(report.finish(t0))
}

fn grid_points(m: usize) -> Vec<f64> {
    (0..=m).map(|j| j as f64 / m as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: usize,
    /// `<<G (x) G, k^N - h^N (x) h^N>>` with the pair weight.
    pub pairing: f64,
    /// `max(N, N^(beta-1)) |pairing|`.
    pub scaled: f64,
    pub min_summand: f64,
}

/// Weighted pairing of `G (x) G` with the centered stationary covariance at
/// each lattice size.
pub fn variance_bound_scan(params_list: &[ModelParams], g: &TestFunction) -> Result<Vec<ScanRow>> {
    params_list
        .par_iter()
        .map(|p| {
            let k = two_point(p)?;
            let n = p.n;
            let a = p.alpha;
            let gv = sample_test_function(g, n);
            let mut acc = 0.0;
            let mut min_summand = f64::INFINITY;
            for x in 1..n {
                for y in 1..n {
                    let w = a * (a + if x == y { 1.0 } else { 0.0 });
                    let s = gv[x] * gv[y] * k.centered(x, y) * w;
                    min_summand = min_summand.min(s);
                    acc += s;
                }
            }
            let pairing = acc / (n * n) as f64;
            let nf = n as f64;
            Ok(ScanRow {
                n,
                pairing,
                scaled: nf.max(nf.powf(p.beta - 1.0)) * pairing.abs(),
                min_summand,
            })
        })
        .collect()
}

/// Residual of the weak formulation for `g(t) = theta(t) - h`:
/// `<G, g(t)> - <G, g(0)> - int_0^t <alpha G'', g(s)> ds`, with the time
/// integral taken by the trapezoid rule over every solver step.
pub fn weak_identity_check<F>(problem: &HeatProblem, theta0: F, g: &TestFunction, t: f64, grid: HeatGrid) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let steps = (t / grid.dt).ceil().max(1.0) as usize;
    let times: Vec<f64> = (0..=steps).map(|i| t * i as f64 / steps as f64).collect();
    let sol = solve_heat(problem, theta0, &times, grid)?;
    let h = problem.stationary();
    let u = &sol.u;
    let pair = |i: usize, f: &dyn Fn(f64) -> f64| trapezoid(u, |j| f(u[j]) * (sol.values[i][j] - h.value(u[j])));
    let gg = |x: f64| g.value(x);
    let lap = |x: f64| problem.alpha * g.d2(x);
    let lap_pairs: Vec<f64> = (0..times.len()).map(|i| pair(i, &lap)).collect();
    let integral: f64 = lap_pairs.windows(2).zip(times.windows(2)).map(|(p, s)| 0.5 * (p[0] + p[1]) * (s[1] - s[0])).sum();
    Ok((pair(steps, &gg) - pair(0, &gg) - integral).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    /// Replica variance of `M_t = <G,X_t> - <G,X_0> - int_0^t L<G,X_s> ds`.
    pub variance: f64,
    /// Replica mean of `int_0^t qv_rate ds`.
    pub mean_qv: f64,
    pub ratio: f64,
    pub mean_martingale: Estimate,
}

/// Dynkin martingale of `<G, X>` against its predictable quadratic
/// variation, with time integrals taken exactly along each path.
pub fn martingale_check<F>(
    params: &ModelParams,
    theta0: F,
    g: &TestFunction,
    t: f64,
    replicas: usize,
    seed: u64,
) -> Result<MartingaleReport>
where
    F: Fn(f64) -> f64 + Sync,
{
    let n = params.n;
    let gv = sample_test_function(g, n);
    let runs: Vec<(f64, f64)> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let r = r as u64;
            let eta0 = sample_local_gibbs(params, &theta0, &mut replica_rng(derive_seed(seed, 1), r))?;
            let mut chain = InclusionChain::primal(params, &eta0, replica_rng(derive_seed(seed, 2), r))?;
            let f0 = field_of(&gv, chain.occupations());
            let (mut drift_int, mut qv_int) = (0.0, 0.0);
            chain.advance_to(t, |a, b, occ| {
                let (d, q) = direct_rates(params, &gv, |x| occ[x] as f64);
                drift_int += d * (b - a);
                qv_int += q * (b - a);
            })?;
            let m = field_of(&gv, chain.occupations()) - f0 - drift_int;
            Ok((m, qv_int))
        })
        .collect::<Result<_>>()?;
    let ms: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let qs: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let variance = sample_variance(&ms);
    let mean_qv = qs.iter().sum::<f64>() / qs.len() as f64;
    Ok(MartingaleReport {
        variance,
        mean_qv,
        ratio: variance / mean_qv,
        mean_martingale: Estimate::from_samples(&ms),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmc::sample_negbin_product;
    use crate::pde::stationary_solution;
    use crate::rng::seeded;

    fn params(beta: f64, n: usize) -> ModelParams {
        ModelParams::new(1.2, 0.8, 1.5, 0.6, 2.2, beta, n).unwrap()
    }

    #[test]
    fn field_examples() {
        let eta = Configuration::delta(4, 2);
        let g = TestFunction::custom("id", None, |u| u);
        assert_eq!(empirical_field(&g, &eta, 4), 0.125);
        assert_eq!(empirical_field(&g, &Configuration::empty(4), 4), 0.0);
    }

    #[test]
    fn decomposition_identity() {
        let p = params(0.5, 20);
        let h = stationary_profile(&p);
        let eta = sample_negbin_product(&p, 1.3, &mut seeded(4)).unwrap();
        let g = TestFunction::sin_k(2);
        let lhs = empirical_field(&g, &eta, 20);
        let rhs = stationary_pairing(&g, &h, &p) + centered_field(&g, &eta, &p, &h);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn drift_two_routes_agree() {
        let mut rng = seeded(9);
        for beta in [0.0, 1.0, 2.0] {
            for n in [2, 3, 10, 64] {
                let p = params(beta, n);
                let eta = sample_negbin_product(&p, 2.0, &mut rng).unwrap();
                for g in [TestFunction::sin_k(1), TestFunction::cos_k(2), TestFunction::exp()] {
                    let d = drift_diagnostic(&p, &g, &eta);
                    let scale = 1.0 + d.direct.abs().max(d.by_parts.abs());
                    assert!(d.difference <= 1e-9 * scale, "beta {beta} n {n} {}", g.name);
                }
            }
        }
    }

    #[test]
    fn drift_of_constant_is_boundary_flux() {
        let p = ModelParams::new(1.0, 1.0, 2.0, 3.0, 1.0, 2.0, 8).unwrap();
        let eta = Configuration::from_bulk(vec![2, 0, 1, 0, 0, 4, 3]);
        let d = drift_diagnostic(&p, &TestFunction::constant(1.0), &eta);
        // N^(1-beta) sum over both ends of alpha_res (theta alpha - eta)
        let nb = 8f64.powf(-1.0);
        let by_hand = nb * (1.0 * (3.0 - 2.0) + 2.0 * (1.0 - 3.0));
        assert!((d.direct - by_hand).abs() < 1e-12);
        assert!((d.by_parts - by_hand).abs() < 1e-12);
        let g = TestFunction::custom("pinned", None, |u| (u - 0.125) * (u - 0.875));
        let zero = drift_diagnostic(&p, &g, &Configuration::empty(8));
        assert!(zero.direct.abs() < 1e-15 && zero.by_parts.abs() < 1e-12);
    }

    #[test]
    fn qv_two_routes_agree() {
        let mut rng = seeded(10);
        for n in [2, 5, 33] {
            let p = params(1.0, n);
            let eta = sample_negbin_product(&p, 1.0, &mut rng).unwrap();
            let g = TestFunction::robin_mode(&p, 1);
            let a = qv_rate(&p, &g, &eta);
            let b = qv_rate_direct(&p, &g, &eta);
            assert!(a >= 0.0 && (a - b).abs() <= 1e-12 * a.max(1.0));
        }
        let p = params(0.0, 6);
        let g = TestFunction::sin_k(1);
        let empty = qv_rate(&p, &g, &Configuration::empty(6));
        let gv = sample_test_function(&g, 6);
        let hand = p.alpha_l * gv[1].powi(2) * p.theta_l * p.alpha + p.alpha_r * gv[5].powi(2) * p.theta_r * p.alpha;
        assert!((empty - hand).abs() < 1e-12);
    }

    #[test]
    fn weak_identity_trivial_and_eigenmode() {
        let p = params(0.0, 8);
        let prob = HeatProblem::from_params(&p);
        let h = stationary_solution(&p);
        let g = TestFunction::sin_k(1);
        let r = weak_identity_check(&prob, |u| h.value(u), &g, 0.05, HeatGrid::new(40)).unwrap();
        assert!(r < 1e-12);
        let r = weak_identity_check(&prob, |u| h.value(u) + (std::f64::consts::PI * u).sin(), &g, 0.05, HeatGrid::new(100))
            .unwrap();
        assert!(r < 1e-3, "{r}");
    }

    #[test]
    fn scan_at_equilibrium_vanishes() {
        let ps: Vec<ModelParams> = [8, 12].iter().map(|&n| params(0.0, n).with_thetas(1.1, 1.1)).collect();
        let rows = variance_bound_scan(&ps, &TestFunction::sin_k(1)).unwrap();
        assert!(rows.iter().all(|r| r.pairing == 0.0));
        let ps: Vec<ModelParams> = [8, 12].iter().map(|&n| params(0.0, n)).collect();
        let rows = variance_bound_scan(&ps, &TestFunction::sin_k(1)).unwrap();
        assert!(rows.iter().all(|r| r.pairing > 0.0 && r.min_summand >= 0.0));
    }

    #[test]
    fn hydrostatic_rejects_zero_samples() {
        let p = params(0.0, 8);
        let cfg = HydrostaticConfig::new(1.0, 0, 0.1, 1);
        assert!(hydrostatic_experiment(&p, None, &[], &cfg).is_err());
    }
}
