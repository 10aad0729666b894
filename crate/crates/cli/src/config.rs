//! Run configuration: one TOML file per run.
//!
//! ```toml
//! seed = 7
//! jobs = 2                 # optional worker bound
//! alpha = 1.0
//! alpha_l = 1.0
//! alpha_r = 2.0
//! theta_l = 3.0
//! theta_r = 1.0
//! beta = 2.0
//! n = 64
//! # or: parametrization = "ab" with a_l, b_l, a_r, b_r instead of
//! # alpha_l, theta_l, alpha_r, theta_r
//!
//! [hydro]
//! times = [0.01, 0.05, 0.1, 0.2]
//! replicas = 200
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sip_hydro::ModelParams;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parametrization {
    #[default]
    Direct,
    Ab,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub parametrization: Parametrization,
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_r: Option<f64>,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub hydro: HydroSection,
    #[serde(default)]
    pub hydrostatic: HydrostaticSection,
    #[serde(default)]
    pub scan: ScanSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub pairs_per_combo: usize,
    pub tolerance: f64,
    pub profile_ns: Vec<usize>,
    pub two_point_ns: Vec<usize>,
    pub lookdown_ns: Vec<usize>,
    pub absorption_ns: Vec<usize>,
    pub absorption_betas: Vec<f64>,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            pairs_per_combo: 20,
            tolerance: 1e-9,
            profile_ns: vec![2, 16, 128, 1024],
            two_point_ns: vec![4, 16, 64],
            lookdown_ns: vec![2, 4, 8, 16],
            absorption_ns: vec![8, 16, 32, 64, 128, 256, 512],
            absorption_betas: vec![0.0, 0.5, 1.0, 1.5, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HydroSection {
    pub times: Vec<f64>,
    pub replicas: usize,
    /// Empty selects the regime catalog.
    pub test_fns: Vec<String>,
    /// Amplitude of the `sin(pi u)` perturbation added to the stationary
    /// solution in the initial profile.
    pub perturbation: f64,
    pub grid: usize,
    pub budget_fraction: f64,
}

impl Default for HydroSection {
    fn default() -> Self {
        HydroSection {
            times: vec![0.01, 0.05, 0.1, 0.2],
            replicas: 200,
            test_fns: Vec::new(),
            perturbation: 0.5,
            grid: 400,
            budget_fraction: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HydrostaticSection {
    pub burn_in: f64,
    pub samples: usize,
    pub thinning: f64,
    pub batches: usize,
    pub test_fns: Vec<String>,
    pub budget_fraction: f64,
}

impl Default for HydrostaticSection {
    fn default() -> Self {
        HydrostaticSection {
            burn_in: 5.0,
            samples: 4000,
            thinning: 0.05,
            batches: 20,
            test_fns: Vec::new(),
            budget_fraction: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub ns: Vec<usize>,
    pub betas: Vec<f64>,
    pub test_fn: String,
}

impl Default for ScanSection {
    fn default() -> Self {
        ScanSection {
            ns: vec![8, 16, 32, 64, 128, 256, 512],
            betas: vec![0.0, 1.0, 2.0],
            test_fn: "sin_1".into(),
        }
    }
}

impl RunConfig {
    /// Reads a TOML config, or the `config` block of a run manifest when
    /// the path ends in `.json`.
    pub fn load(path: &Path) -> CliResult<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CliError::Config(format!("{}: file not found", path.display())),
            _ => CliError::io(path, e),
        })?;
        let config = if path.extension().is_some_and(|e| e == "json") {
            #[derive(Deserialize)]
            struct Replay {
                config: RunConfig,
            }
            serde_json::from_str::<Replay>(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
                .config
        } else {
            Self::parse(&text)?
        };
        config.params()?;
        Ok(config)
    }

    pub fn parse(text: &str) -> CliResult<RunConfig> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn params(&self) -> CliResult<ModelParams> {
        let need = |v: Option<f64>, key: &str| v.ok_or_else(|| CliError::Config(format!("missing key `{key}`")));
        let params = match self.parametrization {
            Parametrization::Direct => {
                if [self.a_l, self.b_l, self.a_r, self.b_r].iter().any(Option::is_some) {
                    return Err(CliError::Config(
                        "a_l/b_l/a_r/b_r need parametrization = \"ab\"".into(),
                    ));
                }
                ModelParams::new(
                    self.alpha,
                    need(self.alpha_l, "alpha_l")?,
                    need(self.alpha_r, "alpha_r")?,
                    need(self.theta_l, "theta_l")?,
                    need(self.theta_r, "theta_r")?,
                    self.beta,
                    self.n,
                )?
            }
            Parametrization::Ab => {
                if [self.alpha_l, self.alpha_r, self.theta_l, self.theta_r].iter().any(Option::is_some) {
                    return Err(CliError::Config(
                        "alpha_l/alpha_r/theta_l/theta_r conflict with parametrization = \"ab\"".into(),
                    ));
                }
                ModelParams::from_ab(
                    need(self.a_l, "a_l")?,
                    need(self.b_l, "b_l")?,
                    need(self.a_r, "a_r")?,
                    need(self.b_r, "b_r")?,
                    self.alpha,
                    self.beta,
                    self.n,
                )?
            }
        };
        Ok(params)
    }
}
