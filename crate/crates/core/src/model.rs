//! System parameters, lattice configurations and the boundary regime.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary regime of the macroscopic equation, selected by the slowdown
/// exponent `beta` alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Dirichlet,
    Robin,
    Neumann,
}

impl Regime {
    pub fn of_beta(beta: f64) -> Regime {
        if beta < 1.0 {
            Regime::Dirichlet
        } else if beta == 1.0 {
            Regime::Robin
        } else {
            Regime::Neumann
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Dirichlet => "dirichlet",
            Regime::Robin => "robin",
            Regime::Neumann => "neumann",
        };
        f.write_str(s)
    }
}

/// All constants of the open inclusion process.
///
/// `alpha` is the bulk attraction, `alpha_l`/`alpha_r` the reservoir
/// attractions, `theta_l`/`theta_r` the reservoir density parameters and
/// `beta` the boundary slowdown exponent. Sites of the bulk are `1..=n-1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub alpha_l: f64,
    pub alpha_r: f64,
    pub theta_l: f64,
    pub theta_r: f64,
    pub beta: f64,
    pub n: usize,
}

impl ModelParams {
    /// Builds and validates a parameter set.
    pub fn new(
        alpha: f64,
        alpha_l: f64,
        alpha_r: f64,
        theta_l: f64,
        theta_r: f64,
        beta: f64,
        n: usize,
    ) -> Result<Self> {
        ModelParams {
            alpha,
            alpha_l,
            alpha_r,
            theta_l,
            theta_r,
            beta,
            n,
        }
        .validate()
    }

    /// Returns the parameters unchanged if every invariant holds.
    pub fn validate(self) -> Result<Self> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("alpha_l", self.alpha_l),
            ("alpha_r", self.alpha_r),
            ("theta_l", self.theta_l),
            ("theta_r", self.theta_r),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NonPositiveParameter { name, value: v });
            }
        }
        if !self.beta.is_finite() {
            return Err(Error::NonPositiveParameter {
                name: "beta",
                value: self.beta,
            });
        }
        if self.beta < 0.0 {
            return Err(Error::UnsupportedBeta(self.beta));
        }
        if self.n < 2 {
            return Err(Error::LatticeTooSmall(self.n));
        }
        Ok(self)
    }

    /// Builds parameters from the reservoir rates `a = alpha_res (1 + theta)`
    /// (removal) and `b = alpha_res theta` (injection) on each side.
    pub fn from_ab(
        a_l: f64,
        b_l: f64,
        a_r: f64,
        b_r: f64,
        alpha: f64,
        beta: f64,
        n: usize,
    ) -> Result<Self> {
        for (side, a, b) in [("left", a_l, b_l), ("right", a_r, b_r)] {
            if !(b > 0.0 && a > b) {
                return Err(Error::InconsistentRates { side, a, b });
            }
        }
        let alpha_l = a_l - b_l;
        let alpha_r = a_r - b_r;
        ModelParams::new(alpha, alpha_l, alpha_r, b_l / alpha_l, b_r / alpha_r, beta, n)
    }

    /// `(a_l, b_l, a_r, b_r)` of the alternative reservoir parametrization.
    pub fn ab(&self) -> (f64, f64, f64, f64) {
        (
            self.alpha_l * (1.0 + self.theta_l),
            self.alpha_l * self.theta_l,
            self.alpha_r * (1.0 + self.theta_r),
            self.alpha_r * self.theta_r,
        )
    }

    /// Left reservoir density `alpha_l * theta_l`.
    pub fn rho_l(&self) -> f64 {
        self.alpha_l * self.theta_l
    }

    /// Right reservoir density `alpha_r * theta_r`.
    pub fn rho_r(&self) -> f64 {
        self.alpha_r * self.theta_r
    }

    pub fn regime(&self) -> Regime {
        Regime::of_beta(self.beta)
    }

    /// Bulk speed-up `N^2`.
    pub fn bulk_speed(&self) -> f64 {
        let n = self.n as f64;
        n * n
    }

    /// Reservoir speed-up `N^(2 - beta)`.
    pub fn boundary_speed(&self) -> f64 {
        (self.n as f64).powf(2.0 - self.beta)
    }

    pub fn is_equilibrium(&self) -> bool {
        self.theta_l == self.theta_r
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_thetas(mut self, theta_l: f64, theta_r: f64) -> Self {
        self.theta_l = theta_l;
        self.theta_r = theta_r;
        self
    }
}

/// Classification of the boundary regime for validated parameters.
pub fn regime_of(params: &ModelParams) -> Regime {
    params.regime()
}

/// Particle counts on the bulk sites `1..=N-1`; `occupation[i]` is site `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    occupation: Vec<u64>,
}

impl Configuration {
    pub fn empty(n: usize) -> Self {
        Configuration {
            occupation: vec![0; n.saturating_sub(1)],
        }
    }

    /// Wraps bulk occupations; the lattice size is `occupation.len() + 1`.
    pub fn from_bulk(occupation: Vec<u64>) -> Self {
        Configuration { occupation }
    }

    /// Number of particles at site `x` in `1..=N-1`.
    pub fn get(&self, x: usize) -> u64 {
        self.occupation[x - 1]
    }

    pub fn set(&mut self, x: usize, value: u64) {
        self.occupation[x - 1] = value;
    }

    /// The scaling parameter `N` this configuration lives on.
    pub fn n(&self) -> usize {
        self.occupation.len() + 1
    }

    pub fn bulk(&self) -> &[u64] {
        &self.occupation
    }

    pub fn total(&self) -> u64 {
        self.occupation.iter().sum()
    }

    /// Configuration with a single particle at `x`.
    pub fn delta(n: usize, x: usize) -> Self {
        let mut c = Configuration::empty(n);
        c.set(x, 1);
        c
    }
}

/// Particle counts on the extended lattice `0..=N`; the two end entries hold
/// absorbed mass.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DualConfiguration {
    occupation: Vec<u64>,
}

impl DualConfiguration {
    pub fn empty(n: usize) -> Self {
        DualConfiguration {
            occupation: vec![0; n + 1],
        }
    }

    pub fn from_sites(occupation: Vec<u64>) -> Self {
        DualConfiguration { occupation }
    }

    /// Configuration with one particle at each listed site (repeats stack).
    pub fn from_particles(n: usize, sites: &[usize]) -> Self {
        let mut c = DualConfiguration::empty(n);
        for &x in sites {
            c.occupation[x] += 1;
        }
        c
    }

    pub fn get(&self, x: usize) -> u64 {
        self.occupation[x]
    }

    pub fn set(&mut self, x: usize, value: u64) {
        self.occupation[x] = value;
    }

    pub fn n(&self) -> usize {
        self.occupation.len() - 1
    }

    pub fn sites(&self) -> &[u64] {
        &self.occupation
    }

    pub fn total(&self) -> u64 {
        self.occupation.iter().sum()
    }

    /// True when no mass is left in the bulk.
    pub fn is_absorbed(&self) -> bool {
        let n = self.n();
        self.occupation[1..n].iter().all(|&k| k == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(beta: f64, n: usize) -> Result<ModelParams> {
        ModelParams::new(1.0, 1.0, 1.0, 1.0, 1.0, beta, n)
    }

    #[test]
    fn validation_errors() {
        assert!(unit(0.0, 4).is_ok());
        assert!(matches!(unit(-0.5, 4), Err(Error::UnsupportedBeta(_))));
        assert!(matches!(
            ModelParams::new(0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 4),
            Err(Error::NonPositiveParameter { name: "alpha", .. })
        ));
        assert!(matches!(unit(0.0, 1), Err(Error::LatticeTooSmall(1))));
    }

    #[test]
    fn ab_parametrization() {
        let p = ModelParams::from_ab(3.0, 2.0, 3.0, 2.0, 1.0, 1.0, 8).unwrap();
        assert_eq!((p.alpha_l, p.theta_l, p.alpha_r, p.theta_r), (1.0, 2.0, 1.0, 2.0));
        let p = ModelParams::from_ab(2.0, 1.0, 2.0, 1.0, 1.0, 1.0, 8).unwrap();
        assert_eq!((p.alpha_l, p.theta_l), (1.0, 1.0));
        assert!(matches!(
            ModelParams::from_ab(1.0, 1.0, 2.0, 1.0, 1.0, 1.0, 8),
            Err(Error::InconsistentRates { side: "left", .. })
        ));
    }

    #[test]
    fn regimes() {
        assert_eq!(unit(0.5, 4).unwrap().regime(), Regime::Dirichlet);
        assert_eq!(unit(1.0, 4).unwrap().regime(), Regime::Robin);
        assert_eq!(unit(2.0, 4).unwrap().regime(), Regime::Neumann);
    }

    #[test]
    fn densities() {
        let p = ModelParams::new(1.0, 2.0, 3.0, 0.5, 4.0, 0.0, 4).unwrap();
        assert_eq!(p.rho_l(), 1.0);
        assert_eq!(p.rho_r(), 12.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn ab_round_trip(a_l in 0.1f64..10.0, f_l in 0.01f64..0.99,
                             a_r in 0.1f64..10.0, f_r in 0.01f64..0.99) {
                let (b_l, b_r) = (a_l * f_l, a_r * f_r);
                let p = ModelParams::from_ab(a_l, b_l, a_r, b_r, 1.0, 0.0, 8).unwrap();
                let (a2l, b2l, a2r, b2r) = p.ab();
                for (x, y) in [(a_l, a2l), (b_l, b2l), (a_r, a2r), (b_r, b2r)] {
                    prop_assert!((x - y).abs() <= 1e-12 * x.abs());
                }
            }

            #[test]
            fn regime_depends_on_beta_only(beta in 0.0f64..3.0, alpha in 0.1f64..5.0,
                                           al in 0.1f64..5.0, tl in 0.1f64..5.0, n in 2usize..100) {
                let p = ModelParams::new(alpha, al, 1.0, tl, 2.0, beta, n).unwrap();
                prop_assert_eq!(p.regime(), Regime::of_beta(beta));
            }
        }
    }
}
