//! Monte Carlo checks of the dual side against exact linear solves.

use rayon::prelude::*;
use sip_hydro::duality::{moment_via_dual, InitialLaw};
use sip_hydro::kmc::{simulate_single_walk, simulate_single_walk_with};
use sip_hydro::rng::replica_rng;
use sip_hydro::stationary::{absorption_probability_right, expected_absorption_time, stationary_profile};
use sip_hydro::stats::Estimate;
use sip_hydro::{Configuration, DualConfiguration, ModelParams};

#[test]
fn right_absorption_frequency_matches_harmonic_function() {
    let p = ModelParams::new(1.0, 0.5, 2.0, 1.0, 1.0, 1.0, 10).unwrap();
    let exact = absorption_probability_right(&p);
    for x0 in [1, 4, 9] {
        let hits: Vec<f64> = (0..20_000u64)
            .into_par_iter()
            .map(|r| {
                let w = simulate_single_walk_with(&p, x0, &mut replica_rng(3, r));
                if w.absorption_site == 10 { 1.0 } else { 0.0 }
            })
            .collect();
        let est = Estimate::from_samples(&hits);
        assert!(est.z_value(exact.get(x0)) < 4.0, "x0 {x0}: {est:?} vs {}", exact.get(x0));
    }
}

#[test]
fn single_walk_mean_time_matches_solve() {
    let p = ModelParams::new(0.7, 1.0, 1.0, 1.0, 1.0, 2.0, 12).unwrap();
    let u = expected_absorption_time(&p).unwrap().u;
    let times: Vec<f64> = (0..10_000u64).map(|s| simulate_single_walk(&p, 6, s).absorption_time).collect();
    assert!(Estimate::from_samples(&times).z_value(u[6]) < 4.0);
}

#[test]
fn dual_moment_matches_primal_from_fixed_start() {
    let p = ModelParams::new(1.2, 1.0, 1.5, 0.5, 2.0, 1.0, 5).unwrap();
    let eta0 = Configuration::from_bulk(vec![3, 0, 1, 2]);
    let xi0 = DualConfiguration::from_particles(5, &[2, 3]);
    let m = moment_via_dual(&p, &xi0, &InitialLaw::Fixed(eta0), 0.05, 6000, 17).unwrap();
    assert!(m.primal.z_against(&m.dual) < 4.0, "{m:?}");
}

#[test]
fn dual_moment_relaxes_to_the_profile() {
    let p = ModelParams::new(1.0, 1.0, 1.0, 1.0, 2.0, 0.0, 4).unwrap();
    let xi0 = DualConfiguration::from_particles(4, &[2]);
    let m = moment_via_dual(&p, &xi0, &InitialLaw::Product(1.0), 2.0, 4000, 5).unwrap();
    let h = stationary_profile(&p).get(2);
    assert!(m.dual.z_value(h) < 4.0, "{m:?} vs {h}");
    assert!(m.primal.z_value(h) < 4.0, "{m:?} vs {h}");
}
