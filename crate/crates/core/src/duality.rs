//! Duality between the open process and the absorbing dual, checked at the
//! level of generators and propagated through Monte Carlo moments.

use rand::seq::IndexedRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kmc::{
    apply_dual, apply_primal, dual_transition_table, sample_negbin_product, transition_table,
    InclusionChain,
};
use crate::model::{Configuration, DualConfiguration, ModelParams};
use crate::rng::{derive_seed, replica_rng, seeded};
use crate::stats::Estimate;

/// Weighted falling factorial `n!/(n-k)! * Gamma(alpha)/Gamma(alpha+k)`,
/// zero for `k > n`.
pub fn d_single(k: u64, n: u64, alpha: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).map(|j| (n - j) as f64 / (alpha + j as f64)).product()
}

/// The duality function between a dual and a primal configuration.
pub fn duality_d(xi: &DualConfiguration, eta: &Configuration, params: &ModelParams) -> Result<f64> {
    let n = xi.n();
    if n != eta.n() {
        return Err(Error::SizeMismatch {
            dual: n,
            primal: eta.n(),
        });
    }
    Ok(duality_unchecked(xi, eta, params))
}

fn duality_unchecked(xi: &DualConfiguration, eta: &Configuration, params: &ModelParams) -> f64 {
    let n = xi.n();
    let mut v = params.theta_l.powi(xi.get(0) as i32) * params.theta_r.powi(xi.get(n) as i32);
    for x in 1..n {
        let k = xi.get(x);
        if k > 0 {
            v *= d_single(k, eta.get(x), params.alpha);
            if v == 0.0 {
                return 0.0;
            }
        }
    }
    v
}

/// Open-process generator applied to `D(xi, .)` at `eta`.
pub fn apply_primal_generator_to_d(params: &ModelParams, xi: &DualConfiguration, eta: &Configuration) -> f64 {
    let base = duality_unchecked(xi, eta, params);
    transition_table(params, eta)
        .iter()
        .map(|e| e.rate * (duality_unchecked(xi, &apply_primal(eta, e.kind), params) - base))
        .sum()
}

/// Dual generator applied to `D(., eta)` at `xi`.
pub fn apply_dual_generator_to_d(params: &ModelParams, eta: &Configuration, xi: &DualConfiguration) -> f64 {
    let base = duality_unchecked(xi, eta, params);
    dual_transition_table(params, xi)
        .iter()
        .map(|e| e.rate * (duality_unchecked(&apply_dual(xi, e.kind), eta, params) - base))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityResidual {
    pub primal: f64,
    pub dual: f64,
    pub residual: f64,
    pub pass: bool,
}

/// Relative residual `|primal - dual| / (1 + max(|primal|, |dual|))`.
pub fn check_duality(
    params: &ModelParams,
    xi: &DualConfiguration,
    eta: &Configuration,
    tol: f64,
) -> Result<DualityResidual> {
    if xi.n() != eta.n() || xi.n() != params.n {
        return Err(Error::SizeMismatch {
            dual: xi.n(),
            primal: eta.n(),
        });
    }
    let primal = apply_primal_generator_to_d(params, xi, eta);
    let dual = apply_dual_generator_to_d(params, eta, xi);
    let residual = (primal - dual).abs() / (1.0 + primal.abs().max(dual.abs()));
    Ok(DualityResidual {
        primal,
        dual,
        residual,
        pass: residual <= tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityFailure {
    pub params: ModelParams,
    pub xi: DualConfiguration,
    pub eta: Configuration,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub pairs_tested: usize,
    pub max_residual: f64,
    pub failures: Vec<DualityFailure>,
}

/// Randomized check over every `N in {2,3,4}`, `alpha in {0.5,1,2.3}`,
/// `beta in {0,1,2}` with `per_combo` random `(xi, eta)` pairs each,
/// at most 2 dual and 3 primal particles, random reservoir constants.
pub fn duality_sweep(per_combo: usize, tol: f64, seed: u64) -> SweepReport {
    let mut rng = seeded(seed);
    let mut report = SweepReport {
        pairs_tested: 0,
        max_residual: 0.0,
        failures: Vec::new(),
    };
    for n in [2usize, 3, 4] {
        for alpha in [0.5, 1.0, 2.3] {
            for beta in [0.0, 1.0, 2.0] {
                for _ in 0..per_combo {
                    let params = ModelParams::new(
                        alpha,
                        rng.random_range(0.2..3.0),
                        rng.random_range(0.2..3.0),
                        rng.random_range(0.2..3.0),
                        rng.random_range(0.2..3.0),
                        beta,
                        n,
                    )
                    .expect("sweep parameters are valid");
                    let dual_sites: Vec<usize> = (0..=n).collect();
                    let bulk_sites: Vec<usize> = (1..n).collect();
                    let kd = rng.random_range(0..=2);
                    let kp = rng.random_range(0..=3);
                    let xs: Vec<usize> = (0..kd).map(|_| *dual_sites.choose(&mut rng).unwrap()).collect();
                    let xi = DualConfiguration::from_particles(n, &xs);
                    let mut eta = Configuration::empty(n);
                    for _ in 0..kp {
                        let x = *bulk_sites.choose(&mut rng).unwrap();
                        eta.set(x, eta.get(x) + 1);
                    }
                    let r = check_duality(&params, &xi, &eta, tol).expect("sizes agree");
                    report.pairs_tested += 1;
                    report.max_residual = report.max_residual.max(r.residual);
                    if !r.pass {
                        report.failures.push(DualityFailure {
                            params,
                            xi,
                            eta,
                            residual: r.residual,
                        });
                    }
                }
            }
        }
    }
    report
}

/// Initial condition for [`moment_via_dual`].
#[derive(Debug, Clone, PartialEq)]
pub enum InitialLaw {
    Fixed(Configuration),
    /// Product NegBin measure with the given density parameter, redrawn
    /// independently for every replica.
    Product(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentComparison {
    pub primal: Estimate,
    pub dual: Estimate,
}

/// Estimates `E[D(xi0, eta_t)]` by running the open process and
/// `E[D(xi_t, eta0)]` by running the dual, over independent replicas.
pub fn moment_via_dual(
    params: &ModelParams,
    xi0: &DualConfiguration,
    eta0: &InitialLaw,
    t: f64,
    replicas: usize,
    seed: u64,
) -> Result<MomentComparison> {
    if replicas < 2 || t.is_nan() || t < 0.0 {
        return Err(Error::InvalidArgument("need t >= 0 and at least 2 replicas".into()));
    }
    let draw = |r: usize| -> Result<Configuration> {
        match eta0 {
            InitialLaw::Fixed(c) => Ok(c.clone()),
            InitialLaw::Product(theta) => {
                sample_negbin_product(params, *theta, &mut replica_rng(derive_seed(seed, 1), r as u64))
            }
        }
    };
    let primal: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let eta = draw(r)?;
            let mut chain = InclusionChain::primal(params, &eta, replica_rng(derive_seed(seed, 2), r as u64))?;
            chain.advance_to(t, |_, _, _| {})?;
            duality_d(xi0, &chain.configuration(), params)
        })
        .collect::<Result<_>>()?;
    let dual: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let eta = draw(r)?;
            let mut chain = InclusionChain::dual(params, xi0, replica_rng(derive_seed(seed, 3), r as u64))?;
            chain.advance_to(t, |_, _, _| {})?;
            duality_d(&chain.dual_configuration(), &eta, params)
        })
        .collect::<Result<_>>()?;
    Ok(MomentComparison {
        primal: Estimate::from_samples(&primal),
        dual: Estimate::from_samples(&dual),
    })
}
