//! The single absorbed dual walk.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::model::ModelParams;
use crate::rng::{seeded, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkOutcome {
    pub absorption_time: f64,
    /// `0` or `N`.
    pub absorption_site: usize,
    pub path_length: u64,
}

/// Rates `(left, right)` of a single dual particle at bulk site `x`.
pub(crate) fn walk_rates(params: &ModelParams, x: usize) -> (f64, f64) {
    let n = params.n;
    let bulk = params.bulk_speed() * params.alpha;
    let bs = params.boundary_speed();
    let left = if x == 1 { bs * params.alpha_l } else { bulk };
    let right = if x == n - 1 { bs * params.alpha_r } else { bulk };
    (left, right)
}

/// Runs the walk from `x0` until it hits `0` or `N`.
pub fn simulate_single_walk(params: &ModelParams, x0: usize, seed: u64) -> WalkOutcome {
    simulate_single_walk_with(params, x0, &mut seeded(seed))
}

pub fn simulate_single_walk_with(params: &ModelParams, x0: usize, rng: &mut SimRng) -> WalkOutcome {
    let n = params.n;
    assert!(x0 <= n, "site {x0} outside 0..={n}");
    let mut x = x0;
    let mut t = 0.0;
    let mut steps = 0;
    while x != 0 && x != n {
        let (l, r) = walk_rates(params, x);
        let total = l + r;
        let e: f64 = Exp1.sample(rng);
        t += e / total;
        if rng.random::<f64>() * total < l {
            x -= 1;
        } else {
            x += 1;
        }
        steps += 1;
    }
    WalkOutcome {
        absorption_time: t,
        absorption_site: x,
        path_length: steps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absorbed_start() {
        let p = ModelParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 5).unwrap();
        let out = simulate_single_walk(&p, 5, 1);
        assert_eq!(out.absorption_time, 0.0);
        assert_eq!(out.absorption_site, 5);
        assert_eq!(out.path_length, 0);
    }

    #[test]
    fn two_site_mean_time() {
        let p = ModelParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 2).unwrap();
        let mut rng = seeded(3);
        let m = 100_000;
        let mean = (0..m)
            .map(|_| simulate_single_walk_with(&p, 1, &mut rng).absorption_time)
            .sum::<f64>()
            / m as f64;
        let se = 0.125 / (m as f64).sqrt();
        assert!((mean - 0.125).abs() < 4.0 * se, "{mean}");
    }
}
