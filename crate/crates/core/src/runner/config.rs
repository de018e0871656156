use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::benchmarks::Benchmark;
use crate::error::{Result, TrkError};
use crate::model::RegressionBasis;
use crate::objective::{PenaltyKind, PenaltySpec};
use crate::optimizer::{FitOptions, Optimizer};
use crate::tuner::GscvConfig;

/// One surrogate in an experiment roster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelEntry {
    pub name: String,
    #[serde(default = "default_basis")]
    pub basis: RegressionBasis,
    #[serde(default = "default_penalty")]
    pub penalty: PenaltyKind,
    #[serde(default)]
    pub coefficient: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Select the coefficient (and `alpha`) by cross-validation on each
    /// repetition's training set.
    #[serde(default)]
    pub tune: bool,
    /// Search used for the final fit; cross-validation always uses the
    /// pattern search.
    #[serde(default)]
    pub optimizer: Optimizer,
}

fn default_basis() -> RegressionBasis {
    RegressionBasis::Linear
}

fn default_penalty() -> PenaltyKind {
    PenaltyKind::None
}

fn default_alpha() -> f64 {
    0.5
}

impl ModelEntry {
    pub fn spec(&self) -> PenaltySpec {
        PenaltySpec::from_kind(self.penalty, self.coefficient, self.alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub benchmark: String,
    pub n_train: usize,
    /// Defaults to 5000 for analytic functions and `n_train / 3` for
    /// simulators (a 3:1 split of one pool).
    #[serde(default)]
    pub n_test: Option<usize>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub fit: FitOptions,
    #[serde(default)]
    pub gscv: GscvConfig,
    pub models: Vec<ModelEntry>,
}

fn default_repetitions() -> usize {
    10
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| TrkError::Deserialization(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn benchmark(&self) -> Result<Benchmark> {
        self.benchmark.parse()
    }

    pub fn n_test(&self) -> Result<usize> {
        Ok(match self.n_test {
            Some(n) => n,
            None if self.benchmark()?.is_simulator() => self.n_train.div_ceil(3),
            None => 5000,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bench = self.benchmark()?;
        let bad = |msg: String| Err(TrkError::InvalidArgument(msg));
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if self.models.is_empty() {
            return bad("the model roster is empty".into());
        }
        if self.n_test()? < 2 {
            return bad("n_test must be at least 2".into());
        }
        self.fit.validate()?;
        for m in &self.models {
            let p = m.basis.terms(bench.dim());
            if self.n_train < p + 1 {
                return bad(format!("model `{}` needs n_train >= {}, got {}", m.name, p + 1, self.n_train));
            }
            m.spec().validate()?;
            if m.tune {
                if m.penalty == PenaltyKind::None {
                    return bad(format!("model `{}` asks for tuning without a penalty", m.name));
                }
                self.gscv.validate()?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
benchmark = "sphere"
n_train = 60
n_test = 1000
repetitions = 3
seed = 7

[fit]
max_iters = 200

[gscv]
k = 4

[[models]]
name = "UK"

[[models]]
name = "TR-RK"
penalty = "ridge"
tune = true
"#;

    #[test]
    fn parses_and_fills_defaults() {
        let cfg = ExperimentConfig::from_toml_str(EXAMPLE).unwrap();
        assert_eq!(cfg.fit.max_iters, 200);
        assert_eq!(cfg.fit.epsilon, 1e-8);
        assert_eq!(cfg.gscv.k, 4);
        assert_eq!(cfg.gscv.n_terms, 20);
        assert_eq!(cfg.models[0].basis, RegressionBasis::Linear);
        assert_eq!(cfg.models[1].penalty, PenaltyKind::Ridge);
        assert!(cfg.models[1].tune);
    }

    #[test]
    fn simulator_split_default() {
        let cfg = ExperimentConfig::from_toml_str(&EXAMPLE.replace("sphere", "borehole").replace("n_test = 1000\n", ""))
            .unwrap();
        assert_eq!(cfg.n_test().unwrap(), 20);
        let analytic = ExperimentConfig::from_toml_str(&EXAMPLE.replace("n_test = 1000\n", "")).unwrap();
        assert_eq!(analytic.n_test().unwrap(), 5000);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_toml_str(&EXAMPLE.replace("sphere", "nope")).is_err());
        assert!(ExperimentConfig::from_toml_str(&EXAMPLE.replace("n_train = 60", "n_train = 4")).is_err());
        assert!(ExperimentConfig::from_toml_str(&EXAMPLE.replace("repetitions = 3", "repetitions = 0")).is_err());
        assert!(ExperimentConfig::from_toml_str(&EXAMPLE.replace("max_iters", "max_iterations")).is_err());
        assert!(ExperimentConfig::from_toml_str("benchmark = ").is_err());
    }
}
