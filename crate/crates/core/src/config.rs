//! Flat key-value (TOML) run configuration for the CLI commands, with the
//! documented defaults baked in as serde defaults. Unknown keys are
//! rejected so typos fail loudly instead of silently running defaults.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::priors::Hyperparameters;
use crate::rjmcmc::{PartitionScheme, SamplerConfig};
use crate::simulate::{BaselineHazard, ScenarioConfig};

fn d_chains() -> usize {
    2
}
fn d_eta0() -> f64 {
    0.2
}
fn d_kappa0() -> f64 {
    0.5
}
fn d_c0() -> f64 {
    1.0
}
fn d_alpha() -> f64 {
    10.0
}
fn d_rho() -> f64 {
    0.2
}
fn d_c_cap() -> f64 {
    0.8
}
fn d_j_max() -> usize {
    50
}
fn d_j_fixed() -> usize {
    10
}
fn d_n_iter() -> u64 {
    100_000
}
fn d_n_burnin() -> u64 {
    50_000
}
fn d_thin() -> u64 {
    10
}
fn d_beta_step() -> f64 {
    0.1
}
fn d_h_step() -> f64 {
    0.5
}
fn d_adapt() -> bool {
    true
}
fn d_seed() -> u64 {
    1
}
fn d_level() -> f64 {
    0.95
}
fn d_grid_points() -> usize {
    200
}
fn d_n_bins() -> usize {
    40
}
fn d_beta_true() -> Vec<f64> {
    vec![0.5, 0.8, -0.5]
}
fn d_n() -> usize {
    300
}
fn d_censor_target() -> f64 {
    0.3
}
fn d_baseline() -> String {
    "weibull".to_string()
}
fn d_shape() -> f64 {
    0.8
}
fn d_rate() -> f64 {
    0.05
}
fn d_b() -> f64 {
    0.1
}
fn d_k() -> f64 {
    0.0005
}
fn d_models() -> Vec<String> {
    vec!["gp-rj".to_string(), "gp-eq".to_string()]
}
fn d_n_datasets() -> usize {
    100
}

/// Model/sampler configuration for `fit` (and the per-model settings of
/// `study`).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FitFileConfig {
    /// "gp-rj" (adaptive partition), "gp-eq" (fixed equal-width), or
    /// "gp-uq" (fixed at distinct event times).
    pub model: String,
    #[serde(default = "d_chains")]
    pub chains: usize,
    #[serde(default = "d_eta0")]
    pub eta0: f64,
    #[serde(default = "d_kappa0")]
    pub kappa0: f64,
    #[serde(default = "d_c0")]
    pub c0: f64,
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    #[serde(default = "d_rho")]
    pub rho: f64,
    #[serde(default = "d_c_cap")]
    pub c_cap: f64,
    #[serde(default = "d_j_max")]
    pub j_max: usize,
    /// 0 means "use the largest observed time".
    #[serde(default)]
    pub s_max: f64,
    /// Interior split count for gp-eq.
    #[serde(default = "d_j_fixed")]
    pub j_fixed: usize,
    #[serde(default = "d_n_iter")]
    pub n_iter: u64,
    #[serde(default = "d_n_burnin")]
    pub n_burnin: u64,
    #[serde(default = "d_thin")]
    pub thin: u64,
    #[serde(default = "d_beta_step")]
    pub beta_step: f64,
    #[serde(default = "d_h_step")]
    pub h_step: f64,
    #[serde(default = "d_adapt")]
    pub adapt: bool,
    #[serde(default = "d_seed")]
    pub seed: u64,
    /// Explicit covariate subset; empty means every non-time/event column.
    #[serde(default)]
    pub covariates: Vec<String>,
    #[serde(default = "d_level")]
    pub level: f64,
    #[serde(default = "d_grid_points")]
    pub grid_points: usize,
    /// Bins of the split-position histogram.
    #[serde(default = "d_n_bins")]
    pub n_bins: usize,
}

impl FitFileConfig {
    pub fn scheme(&self) -> Result<PartitionScheme> {
        match self.model.as_str() {
            "gp-rj" => Ok(PartitionScheme::Adaptive),
            "gp-eq" => Ok(PartitionScheme::EqualSpaced { j: self.j_fixed }),
            "gp-uq" => Ok(PartitionScheme::EventTimes),
            other => Err(Error::config(format!(
                "unknown model {other:?}; expected gp-rj, gp-eq, or gp-uq"
            ))),
        }
    }

    pub fn hyperparameters(&self, y_max: f64) -> Hyperparameters {
        Hyperparameters {
            eta0: self.eta0,
            kappa0: self.kappa0,
            c0: self.c0,
            alpha: self.alpha,
            rho: self.rho,
            c_cap: self.c_cap,
            j_max: self.j_max,
            s_max: if self.s_max > 0.0 { self.s_max } else { y_max },
        }
    }

    pub fn sampler(&self, stream: u64) -> Result<SamplerConfig> {
        Ok(SamplerConfig {
            n_iter: self.n_iter,
            n_burnin: self.n_burnin,
            thin: self.thin,
            beta_step: self.beta_step,
            h_step: self.h_step,
            adapt: self.adapt,
            seed: self.seed,
            stream,
            scheme: self.scheme()?,
            flat_likelihood: false,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme()?;
        if self.chains == 0 {
            return Err(Error::config("chains must be at least 1"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::config(format!(
                "level must be in (0, 1), got {}",
                self.level
            )));
        }
        if self.grid_points == 0 || self.n_bins == 0 {
            return Err(Error::config("grid_points and n_bins must be positive"));
        }
        Ok(())
    }
}

/// Configuration for `simulate`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SimulateFileConfig {
    /// 1-4 selects a preset; 0 reads the custom fields below.
    #[serde(default)]
    pub scenario: usize,
    /// Overrides the preset sample size when given.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default = "d_censor_target")]
    pub censor_target: f64,
    /// "weibull" or "pwl"; used when scenario = 0.
    #[serde(default = "d_baseline")]
    pub baseline: String,
    #[serde(default = "d_shape")]
    pub shape: f64,
    #[serde(default = "d_rate")]
    pub rate: f64,
    #[serde(default = "d_b")]
    pub b: f64,
    #[serde(default = "d_k")]
    pub k: f64,
    #[serde(default = "d_beta_true")]
    pub beta_true: Vec<f64>,
    #[serde(default = "d_seed")]
    pub seed: u64,
}

impl SimulateFileConfig {
    pub fn scenario_config(&self) -> Result<ScenarioConfig> {
        if self.scenario > 0 {
            let mut sc = ScenarioConfig::scenario(self.scenario, self.seed)?;
            if let Some(n) = self.n {
                sc.n = n;
            }
            return Ok(sc);
        }
        let baseline = match self.baseline.as_str() {
            "weibull" => BaselineHazard::Weibull {
                shape: self.shape,
                rate: self.rate,
            },
            "pwl" => BaselineHazard::PiecewiseLinear {
                b: self.b,
                k: self.k,
            },
            other => {
                return Err(Error::config(format!(
                    "unknown baseline {other:?}; expected weibull or pwl"
                )))
            }
        };
        let sc = ScenarioConfig {
            name: "custom".to_string(),
            n: self.n.unwrap_or_else(d_n),
            censor_target: self.censor_target,
            baseline,
            beta_true: self.beta_true.clone(),
            seed: self.seed,
        };
        sc.validate()?;
        Ok(sc)
    }
}

/// Configuration for `study`: a scenario plus the models to fit per
/// replicate. Sampler keys apply to every model.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StudyFileConfig {
    #[serde(default)]
    pub scenario: usize,
    /// Overrides the preset sample size when given.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default = "d_censor_target")]
    pub censor_target: f64,
    #[serde(default = "d_baseline")]
    pub baseline: String,
    #[serde(default = "d_shape")]
    pub shape: f64,
    #[serde(default = "d_rate")]
    pub rate: f64,
    #[serde(default = "d_b")]
    pub b: f64,
    #[serde(default = "d_k")]
    pub k: f64,
    #[serde(default = "d_beta_true")]
    pub beta_true: Vec<f64>,
    #[serde(default = "d_n_datasets")]
    pub n_datasets: usize,
    /// Fitted per replicate, in order; the first is the width referent.
    #[serde(default = "d_models")]
    pub models: Vec<String>,
    #[serde(default = "d_chains")]
    pub chains: usize,
    #[serde(default = "d_eta0")]
    pub eta0: f64,
    #[serde(default = "d_kappa0")]
    pub kappa0: f64,
    #[serde(default = "d_c0")]
    pub c0: f64,
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    #[serde(default = "d_rho")]
    pub rho: f64,
    #[serde(default = "d_c_cap")]
    pub c_cap: f64,
    #[serde(default = "d_j_max")]
    pub j_max: usize,
    #[serde(default = "d_j_fixed")]
    pub j_fixed: usize,
    #[serde(default = "d_n_iter")]
    pub n_iter: u64,
    #[serde(default = "d_n_burnin")]
    pub n_burnin: u64,
    #[serde(default = "d_thin")]
    pub thin: u64,
    #[serde(default = "d_beta_step")]
    pub beta_step: f64,
    #[serde(default = "d_h_step")]
    pub h_step: f64,
    #[serde(default = "d_adapt")]
    pub adapt: bool,
    #[serde(default = "d_seed")]
    pub seed: u64,
    #[serde(default = "d_level")]
    pub level: f64,
}

impl StudyFileConfig {
    pub fn scenario_config(&self) -> Result<ScenarioConfig> {
        let sim = SimulateFileConfig {
            scenario: self.scenario,
            n: self.n,
            censor_target: self.censor_target,
            baseline: self.baseline.clone(),
            shape: self.shape,
            rate: self.rate,
            b: self.b,
            k: self.k,
            beta_true: self.beta_true.clone(),
            seed: self.seed,
        };
        sim.scenario_config()
    }

    /// The per-model fit settings, expressed through the fit schema.
    pub fn fit_config(&self, model: &str) -> FitFileConfig {
        FitFileConfig {
            model: model.to_string(),
            chains: self.chains,
            eta0: self.eta0,
            kappa0: self.kappa0,
            c0: self.c0,
            alpha: self.alpha,
            rho: self.rho,
            c_cap: self.c_cap,
            j_max: self.j_max,
            s_max: 0.0,
            j_fixed: self.j_fixed,
            n_iter: self.n_iter,
            n_burnin: self.n_burnin,
            thin: self.thin,
            beta_step: self.beta_step,
            h_step: self.h_step,
            adapt: self.adapt,
            seed: self.seed,
            covariates: Vec::new(),
            level: self.level,
            grid_points: d_grid_points(),
            n_bins: d_n_bins(),
        }
    }
}

pub fn load_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    toml::from_str(&text).map_err(|e| Error::config(format!("config file {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_config_minimal_and_defaults() {
        let cfg: FitFileConfig = toml::from_str("model = \"gp-rj\"").unwrap();
        assert_eq!(cfg.chains, 2);
        assert_eq!(cfg.n_iter, 100_000);
        assert_eq!(cfg.n_burnin, 50_000);
        assert_eq!(cfg.thin, 10);
        assert_eq!(cfg.alpha, 10.0);
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.scheme().unwrap(), PartitionScheme::Adaptive);
        let hp = cfg.hyperparameters(42.0);
        assert_eq!(hp.s_max, 42.0);
        assert_eq!((hp.eta0, hp.kappa0, hp.c0), (0.2, 0.5, 1.0));
    }

    #[test]
    fn explicit_s_max_wins() {
        let cfg: FitFileConfig =
            toml::from_str("model = \"gp-eq\"\ns_max = 100.0\nj_fixed = 4").unwrap();
        assert_eq!(cfg.hyperparameters(42.0).s_max, 100.0);
        assert_eq!(cfg.scheme().unwrap(), PartitionScheme::EqualSpaced { j: 4 });
    }

    #[test]
    fn unknown_keys_and_models_are_rejected() {
        assert!(toml::from_str::<FitFileConfig>("model = \"gp-rj\"\nitres = 5").is_err());
        let cfg: FitFileConfig = toml::from_str("model = \"gp-xx\"").unwrap();
        assert!(cfg.scheme().is_err());
    }

    #[test]
    fn simulate_presets_and_custom() {
        let cfg: SimulateFileConfig = toml::from_str("scenario = 3\nseed = 7").unwrap();
        let sc = cfg.scenario_config().unwrap();
        assert_eq!(sc.censor_target, 0.5);
        assert_eq!(sc.seed, 7);

        let custom: SimulateFileConfig = toml::from_str(
            "scenario = 0\nbaseline = \"pwl\"\nn = 50\ncensor_target = 0.2\nseed = 1",
        )
        .unwrap();
        let sc = custom.scenario_config().unwrap();
        assert_eq!(sc.n, 50);
        assert!(matches!(
            sc.baseline,
            BaselineHazard::PiecewiseLinear { b: 0.1, k: 0.0005 }
        ));

        let bad: SimulateFileConfig = toml::from_str("baseline = \"cauchy\"").unwrap();
        assert!(bad.scenario_config().is_err());
    }

    #[test]
    fn study_config_expands_to_fit_configs() {
        let cfg: StudyFileConfig =
            toml::from_str("scenario = 1\nn_datasets = 5\nn_iter = 2000\nn_burnin = 1000").unwrap();
        assert_eq!(cfg.models, vec!["gp-rj", "gp-eq"]);
        let fit = cfg.fit_config("gp-eq");
        assert_eq!(fit.model, "gp-eq");
        assert_eq!(fit.n_iter, 2000);
        assert_eq!(fit.j_fixed, 10);
    }

    #[test]
    fn toml_round_trips_for_the_manifest_echo() {
        let cfg: FitFileConfig = toml::from_str("model = \"gp-uq\"\nseed = 9").unwrap();
        let text = toml::to_string(&cfg).unwrap();
        let back: FitFileConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }
}
