//! Samplers for the reversible product measures and local Gibbs states.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::error::{Error, Result};
use crate::model::{Configuration, ModelParams};

/// One draw from NegBin with shape `alpha` and success parameter
/// `theta / (1 + theta)`: mean `alpha theta`, variance `alpha theta (1 + theta)`.
///
/// Drawn as a Poisson variable with Gamma(`alpha`, scale `theta`) intensity.
pub fn sample_negbin<R: Rng + ?Sized>(alpha: f64, theta: f64, rng: &mut R) -> u64 {
    if theta <= 0.0 {
        return 0;
    }
    let gamma = Gamma::new(alpha, theta).expect("alpha and theta are positive");
    let lambda: f64 = gamma.sample(rng);
    if lambda <= 0.0 {
        return 0;
    }
    let k: f64 = Poisson::new(lambda)
        .expect("finite positive intensity")
        .sample(rng);
    k as u64
}

/// I.i.d. NegBin occupations with density parameter `theta` on every site.
pub fn sample_negbin_product<R: Rng + ?Sized>(
    params: &ModelParams,
    theta: f64,
    rng: &mut R,
) -> Result<Configuration> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::NonPositiveParameter {
            name: "theta",
            value: theta,
        });
    }
    sample_local_gibbs(params, |_| theta, rng)
}

/// Independent NegBin occupations with site `x` using `theta0(x / N)`.
pub fn sample_local_gibbs<R, F>(params: &ModelParams, theta0: F, rng: &mut R) -> Result<Configuration>
where
    R: Rng + ?Sized,
    F: Fn(f64) -> f64,
{
    let n = params.n;
    let mut occ = Vec::with_capacity(n - 1);
    for x in 1..n {
        let u = x as f64 / n as f64;
        let th = theta0(u);
        if !th.is_finite() || th < 0.0 {
            return Err(Error::NegativeProfile { at: u, value: th });
        }
        occ.push(sample_negbin(params.alpha, th, rng));
    }
    Ok(Configuration::from_bulk(occ))
}
