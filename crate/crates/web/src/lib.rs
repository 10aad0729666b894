//! WebAssembly bindings for the static demo page in `www/`.
//!
//! The plain functions carry the logic and are usable natively; the
//! `#[wasm_bindgen]` wrappers only convert errors.

use std::f64::consts::PI;

use sip_hydro::kmc::{sample_local_gibbs, InclusionChain};
use sip_hydro::pde::{solve_heat, HeatGrid, HeatProblem};
use sip_hydro::rng::{derive_seed, seeded};
use sip_hydro::stationary::stationary_profile;
use sip_hydro::{ModelParams, Result};
use wasm_bindgen::prelude::*;

/// Initial profile of the relaxation demos: stationary solution plus
/// `amplitude sin(pi u)`.
fn initial_profile(params: &ModelParams, amplitude: f64) -> impl Fn(f64) -> f64 {
    let h = HeatProblem::from_params(params).stationary();
    move |u| h.value(u) + amplitude * (PI * u).sin()
}

/// Discrete profile `h^N(x)` for `x = 0..=N` followed by the continuum
/// stationary solution at the same points `x / N`.
pub fn profiles(params: &ModelParams) -> Vec<f64> {
    let n = params.n;
    let h = HeatProblem::from_params(params).stationary();
    let mut out = stationary_profile(params).values;
    out.extend((0..=n).map(|x| h.value(x as f64 / n as f64)));
    out
}

/// Heat-equation solution at time `t` on `j + 1` grid points.
pub fn heat_profile(params: &ModelParams, amplitude: f64, t: f64, j: usize) -> Result<Vec<f64>> {
    let sol = solve_heat(
        &HeatProblem::from_params(params),
        initial_profile(params, amplitude),
        &[t],
        HeatGrid::new(j),
    )?;
    Ok(sol.values.into_iter().next().unwrap_or_default())
}

/// Bulk occupations `eta_t(1..N-1)` divided by `alpha`, from a local Gibbs
/// start around the perturbed profile.
pub fn snapshot(params: &ModelParams, amplitude: f64, t: f64, seed: u64) -> Result<Vec<f64>> {
    let theta0 = initial_profile(params, amplitude);
    let eta0 = sample_local_gibbs(params, theta0, &mut seeded(derive_seed(seed, 1)))?;
    let mut chain = InclusionChain::primal(params, &eta0, seeded(derive_seed(seed, 2)))?;
    chain.advance_to(t, |_, _, _| {})?;
    Ok(chain.occupations()[1..params.n].iter().map(|&k| k as f64 / params.alpha).collect())
}

#[wasm_bindgen]
pub struct Params(ModelParams);

#[wasm_bindgen]
impl Params {
    #[wasm_bindgen(constructor)]
    pub fn new(
        alpha: f64,
        alpha_l: f64,
        alpha_r: f64,
        theta_l: f64,
        theta_r: f64,
        beta: f64,
        n: usize,
    ) -> std::result::Result<Params, JsError> {
        ModelParams::new(alpha, alpha_l, alpha_r, theta_l, theta_r, beta, n)
            .map(Params)
            .map_err(|e| JsError::new(&e.to_string()))
    }

    #[wasm_bindgen(getter)]
    pub fn regime(&self) -> String {
        self.0.regime().to_string()
    }
}

#[wasm_bindgen(js_name = profiles)]
pub fn js_profiles(params: &Params) -> Vec<f64> {
    profiles(&params.0)
}

#[wasm_bindgen(js_name = heatProfile)]
pub fn js_heat_profile(params: &Params, amplitude: f64, t: f64, j: usize) -> std::result::Result<Vec<f64>, JsError> {
    heat_profile(&params.0, amplitude, t, j).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = snapshot)]
pub fn js_snapshot(params: &Params, amplitude: f64, t: f64, seed: u64) -> std::result::Result<Vec<f64>, JsError> {
    snapshot(&params.0, amplitude, t, seed).map_err(|e| JsError::new(&e.to_string()))
}
