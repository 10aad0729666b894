//! The product Negative Binomial measure is invariant at equilibrium.

use rayon::prelude::*;
use sip_hydro::kmc::{sample_negbin_product, simulate_primal};
use sip_hydro::rng::{derive_seed, replica_rng};
use sip_hydro::stats::Estimate;
use sip_hydro::ModelParams;

#[test]
fn equilibrium_marginals_are_preserved() {
    let theta = 1.5;
    let p = ModelParams::new(0.8, 1.2, 0.7, theta, theta, 1.0, 6).unwrap();
    let replicas = 4000;
    let seed = 11;
    // (site 1, site 3, total) at t = 0 and t = 0.3 per replica
    let rows: Vec<[f64; 6]> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let eta0 = sample_negbin_product(&p, theta, &mut replica_rng(derive_seed(seed, 1), r)).unwrap();
            let start = [eta0.get(1) as f64, eta0.get(3) as f64, eta0.total() as f64];
            let traj = simulate_primal(&p, &eta0, 0.3, &[0.3], derive_seed(seed, 2) ^ r, |_, c| {
                [c.get(1) as f64, c.get(3) as f64, c.total() as f64]
            })
            .unwrap();
            let end = traj.samples[0].1;
            [start[0], start[1], start[2], end[0], end[1], end[2]]
        })
        .collect();
    let mean_target = p.alpha * theta;
    let var_target = p.alpha * theta * (1.0 + theta);
    for k in 0..3 {
        let before: Vec<f64> = rows.iter().map(|r| r[k]).collect();
        let after: Vec<f64> = rows.iter().map(|r| r[k + 3]).collect();
        let (b, a) = (Estimate::from_samples(&before), Estimate::from_samples(&after));
        assert!(b.z_against(&a) < 4.0, "component {k}: {b:?} vs {a:?}");
        let scale = if k == 2 { 5.0 } else { 1.0 };
        assert!(a.z_value(mean_target * scale) < 4.0, "component {k}: {a:?}");
    }
    let sq: Vec<f64> = rows.iter().map(|r| (r[3] - mean_target).powi(2)).collect();
    let v = Estimate::from_samples(&sq);
    assert!(v.z_value(var_target) < 4.0, "variance {v:?} vs {var_target}");
}
