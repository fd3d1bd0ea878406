//! JSON run configuration and its translation into experiment plans.

use gbsim_core::{
    CovarianceMode, DetectorKind, ExperimentPlan, Real, ScenarioConfig, SinrEvaluation,
    SubspaceMode, SymbolAlphabet,
};
use nalgebra::DMatrix;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioSection,
    pub sweep: SweepSection,
    pub detectors: Vec<DetectorKind>,
    pub cov_mode: CovKind,
    pub seed: u64,
    pub output: OutputSection,
    #[serde(default)]
    pub sinr_eval: SinrEvaluation,
    #[serde(default)]
    pub subspace: SubspaceMode,
    #[serde(default)]
    pub symbols: SymbolAlphabet,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub id: Option<String>,
    #[serde(rename = "L")]
    pub cells: usize,
    #[serde(rename = "K")]
    pub users: usize,
    #[serde(rename = "P_dB")]
    pub power_db: f64,
    /// One value or a list; each value becomes its own plan.
    pub eps: OneOrMany,
    /// Per-cell rows of gains in dB, `L x K`.
    #[serde(rename = "beta_dB")]
    pub beta_db: Option<Vec<Vec<f64>>>,
    /// Linear gains, `L x K`.
    pub beta: Option<Vec<Vec<f64>>>,
    /// Reference gain 1 and every other cell attenuated by this many dB.
    #[serde(rename = "beta_ratio_dB")]
    pub beta_ratio_db: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub n_list: Vec<usize>,
    pub trials: usize,
    /// Frames per trial for sample covariance or empirical SINR.
    #[serde(default)]
    pub frames: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovKind {
    Genie,
    Sample,
    Conditional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: String,
    pub format: OutputFormat,
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn config_error(message: impl Into<String>, key: &str) -> CliError {
    CliError::Config {
        message: message.into(),
        key: Some(key.to_string()),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(CliError::from_json)
    }

    /// Gains in linear scale, converted from dB exactly once here.
    fn gains(&self) -> Result<DMatrix<f64>, CliError> {
        let s = &self.scenario;
        let given = [
            s.beta_db.is_some(),
            s.beta.is_some(),
            s.beta_ratio_db.is_some(),
        ];
        match given.iter().filter(|&&g| g).count() {
            0 => {
                return Err(config_error(
                    "one of beta_dB, beta or beta_ratio_dB is required",
                    "scenario.beta_dB",
                ))
            }
            1 => {}
            _ => {
                return Err(config_error(
                    "give only one of beta_dB, beta or beta_ratio_dB",
                    "scenario.beta_dB",
                ))
            }
        }
        if let Some(ratio) = s.beta_ratio_db {
            if !ratio.is_finite() {
                return Err(config_error(
                    "beta_ratio_dB must be finite",
                    "scenario.beta_ratio_dB",
                ));
            }
            let other = db_to_linear(-ratio);
            return Ok(DMatrix::from_fn(s.cells, s.users, |l, _| {
                if l == 0 {
                    1.0
                } else {
                    other
                }
            }));
        }
        let (rows, key, linear) = match (&s.beta_db, &s.beta) {
            (Some(rows), _) => (rows, "scenario.beta_dB", false),
            (None, Some(rows)) => (rows, "scenario.beta", true),
            (None, None) => unreachable!("checked above"),
        };
        if rows.len() != s.cells || rows.iter().any(|r| r.len() != s.users) {
            return Err(config_error(
                format!(
                    "{key} must have L={} rows of K={} entries",
                    s.cells, s.users
                ),
                key,
            ));
        }
        let gains = DMatrix::from_fn(s.cells, s.users, |l, k| {
            if linear {
                rows[l][k]
            } else {
                db_to_linear(rows[l][k])
            }
        });
        if gains.iter().any(|b| !b.is_positive_finite()) {
            return Err(config_error(
                format!("{key} gains must be positive and finite"),
                key,
            ));
        }
        Ok(gains)
    }

    fn covariance(&self) -> CovarianceMode {
        match self.cov_mode {
            CovKind::Genie => CovarianceMode::Genie,
            CovKind::Sample => CovarianceMode::Sample {
                frames: self.sweep.frames,
            },
            CovKind::Conditional => CovarianceMode::Conditional,
        }
    }

    /// One plan per training-noise value. Scenario problems are reported as
    /// configuration errors, sweep problems as infeasible plans.
    pub fn plans(&self) -> Result<Vec<ExperimentPlan<f64>>, CliError> {
        let s = &self.scenario;
        if s.cells == 0 {
            return Err(config_error("L must be at least 1", "scenario.L"));
        }
        if s.users == 0 {
            return Err(config_error("K must be at least 1", "scenario.K"));
        }
        if !s.power_db.is_finite() {
            return Err(config_error("P_dB must be finite", "scenario.P_dB"));
        }
        let gains = self.gains()?;
        let power = db_to_linear(s.power_db);
        let eps_values = s.eps.values();
        if eps_values.is_empty() {
            return Err(config_error("eps list is empty", "scenario.eps"));
        }
        let id =
            s.id.clone()
                .unwrap_or_else(|| format!("L{}K{}", s.cells, s.users));
        let antennas = self.sweep.n_list.first().copied().unwrap_or(1).max(1);
        eps_values
            .into_iter()
            .map(|eps| {
                if !eps.is_nonnegative_finite() {
                    return Err(config_error(
                        "eps must be finite and non-negative",
                        "scenario.eps",
                    ));
                }
                let scenario = ScenarioConfig::new(antennas, power, eps, gains.clone())
                    .map_err(|e| config_error(e.to_string(), "scenario"))?;
                let mut plan = ExperimentPlan::new(
                    id.clone(),
                    scenario,
                    self.sweep.n_list.clone(),
                    self.detectors.clone(),
                    self.sweep.trials,
                    self.seed,
                );
                plan.covariance = self.covariance();
                plan.subspace = self.subspace;
                plan.sinr = self.sinr_eval;
                plan.symbols = self.symbols;
                plan.frames = self.sweep.frames;
                plan.validate()
                    .map_err(|e| CliError::Infeasible(e.to_string()))?;
                Ok(plan)
            })
            .collect()
    }
}
