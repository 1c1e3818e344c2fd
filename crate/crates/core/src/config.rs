//! Experiment configuration: defaults, TOML loading, and validation.
//!
//! The config file is flat `key = value` TOML; every key is optional and
//! missing keys take the defaults below, which reproduce the reference
//! simulation setting (200 features, 10k-query train pool, 4-feature queries,
//! noisy oracle with ~10% relevant features, ridge ensemble learner, 5 queries
//! per round).

use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::domain::ProbSpec;
use crate::error::{Error, Result};
use crate::metrics::{ExtremeMode, OverallErrorKind};
use crate::oracle::OracleParams;
use crate::regression::RidgeParams;
use crate::scoring::StrategyKind;

/// Complete description of one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    // Catalog.
    pub catalog_size: u32,
    pub prob_spec: ProbSpec,
    // Pools.
    pub train_size: usize,
    pub test_size: usize,
    pub features_per_query: usize,
    // Oracle.
    pub p_relevant: f64,
    pub weight_mean: f64,
    pub weight_sd: f64,
    pub noise_sd: f64,
    pub report_prob: f64,
    // Learner.
    pub lambda: f64,
    pub alpha: f64,
    pub ensemble_size: usize,
    pub ci_fallback_half_width: f64,
    // Query loop.
    pub batch_size: usize,
    pub rounds: u32,
    // Experiment grid.
    pub trials: u32,
    pub master_seed: u64,
    pub strategies: Vec<StrategyKind>,
    // Metrics.
    pub extreme_mode: ExtremeMode,
    pub overall_error: OverallErrorKind,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            catalog_size: 200,
            prob_spec: ProbSpec::IndependentUniform { lo: 0.01, hi: 0.2 },
            train_size: 10_000,
            test_size: 2_000,
            features_per_query: 4,
            p_relevant: 0.1,
            weight_mean: 8.0,
            weight_sd: 3.0,
            noise_sd: 6.0,
            report_prob: 1.0,
            lambda: 1.0,
            alpha: 0.1,
            ensemble_size: 10,
            ci_fallback_half_width: 17.0,
            batch_size: 5,
            rounds: 40,
            trials: 30,
            master_seed: 42,
            strategies: StrategyKind::all().to_vec(),
            extreme_mode: ExtremeMode::Range,
            overall_error: OverallErrorKind::Mae,
        }
    }
}

/// Flat TOML shape; every key optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    catalog_size: Option<u32>,
    prob_spec: Option<String>,
    train_size: Option<usize>,
    test_size: Option<usize>,
    features_per_query: Option<usize>,
    p_relevant: Option<f64>,
    weight_mean: Option<f64>,
    weight_sd: Option<f64>,
    noise_sd: Option<f64>,
    report_prob: Option<f64>,
    lambda: Option<f64>,
    alpha: Option<f64>,
    ensemble_size: Option<usize>,
    ci_fallback_half_width: Option<f64>,
    batch_size: Option<usize>,
    rounds: Option<u32>,
    trials: Option<u32>,
    master_seed: Option<u64>,
    strategies: Option<String>,
    extreme_mode: Option<String>,
    overall_error: Option<String>,
}

impl ExperimentConfig {
    /// Parse a flat TOML document, fill gaps with defaults, and validate.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text)
            .map_err(|e| Error::config("config", e.message().to_string()))?;
        let mut cfg = ExperimentConfig::default();
        macro_rules! take {
            ($field:ident) => {
                if let Some(v) = raw.$field {
                    cfg.$field = v;
                }
            };
        }
        take!(catalog_size);
        take!(train_size);
        take!(test_size);
        take!(features_per_query);
        take!(p_relevant);
        take!(weight_mean);
        take!(weight_sd);
        take!(noise_sd);
        take!(report_prob);
        take!(lambda);
        take!(alpha);
        take!(ensemble_size);
        take!(ci_fallback_half_width);
        take!(batch_size);
        take!(rounds);
        take!(trials);
        take!(master_seed);
        if let Some(s) = raw.prob_spec {
            cfg.prob_spec = s.parse()?;
        }
        if let Some(s) = raw.strategies {
            cfg.strategies = parse_strategies(&s)?;
        }
        if let Some(s) = raw.extreme_mode {
            cfg.extreme_mode = s.parse()?;
        }
        if let Some(s) = raw.overall_error {
            cfg.overall_error = s.parse()?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load and validate a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Check every field, reporting the config key of the first offender.
    pub fn validate(&self) -> Result<()> {
        if self.catalog_size == 0 {
            return Err(Error::config("catalog_size", "must be at least 1"));
        }
        self.prob_spec.validate("prob_spec")?;
        if self.train_size == 0 {
            return Err(Error::config("train_size", "must be at least 1"));
        }
        if self.test_size == 0 {
            return Err(Error::config("test_size", "must be at least 1"));
        }
        if self.features_per_query == 0 {
            return Err(Error::config("features_per_query", "must be at least 1"));
        }
        if self.features_per_query > self.catalog_size as usize {
            return Err(Error::config(
                "features_per_query",
                format!("cannot exceed catalog_size ({})", self.catalog_size),
            ));
        }
        self.oracle_params().validate_as_config()?;
        self.ridge_params().validate()?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config("alpha", format!("must be in (0, 1), got {}", self.alpha)));
        }
        if self.ensemble_size == 0 {
            return Err(Error::config("ensemble_size", "must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size", "must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.strategies.is_empty() {
            return Err(Error::config("strategies", "need at least one strategy"));
        }
        let mut sorted = self.strategies.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("strategies", "duplicate strategy label"));
        }
        Ok(())
    }

    /// Oracle-side parameters.
    pub fn oracle_params(&self) -> OracleParams {
        OracleParams {
            p_relevant: self.p_relevant,
            weight_mean: self.weight_mean,
            weight_sd: self.weight_sd,
            noise_sd: self.noise_sd,
            report_prob: self.report_prob,
        }
    }

    /// Learner-side fit parameters.
    pub fn ridge_params(&self) -> RidgeParams {
        RidgeParams {
            lambda: self.lambda,
            ci_fallback_half_width: self.ci_fallback_half_width,
        }
    }

    /// The config as flat TOML, suitable for re-running the experiment.
    pub fn to_toml(&self) -> String {
        let strategies: Vec<&str> = self.strategies.iter().map(|s| s.label()).collect();
        format!(
            "catalog_size = {}\n\
             prob_spec = \"{}\"\n\
             train_size = {}\n\
             test_size = {}\n\
             features_per_query = {}\n\
             p_relevant = {}\n\
             weight_mean = {}\n\
             weight_sd = {}\n\
             noise_sd = {}\n\
             report_prob = {}\n\
             lambda = {}\n\
             alpha = {}\n\
             ensemble_size = {}\n\
             ci_fallback_half_width = {}\n\
             batch_size = {}\n\
             rounds = {}\n\
             trials = {}\n\
             master_seed = {}\n\
             strategies = \"{}\"\n\
             extreme_mode = \"{}\"\n\
             overall_error = \"{}\"\n",
            self.catalog_size,
            self.prob_spec,
            self.train_size,
            self.test_size,
            self.features_per_query,
            self.p_relevant,
            self.weight_mean,
            self.weight_sd,
            self.noise_sd,
            self.report_prob,
            self.lambda,
            self.alpha,
            self.ensemble_size,
            self.ci_fallback_half_width,
            self.batch_size,
            self.rounds,
            self.trials,
            self.master_seed,
            strategies.join(","),
            self.extreme_mode,
            self.overall_error,
        )
    }
}

/// Parse a comma-separated strategy list like `"obus_full,uncertainty,random"`.
pub fn parse_strategies(s: &str) -> Result<Vec<StrategyKind>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(StrategyKind::from_str)
        .collect()
}

impl OracleParams {
    /// Same checks as at oracle construction, surfaced at config time.
    fn validate_as_config(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_relevant) {
            return Err(Error::config("p_relevant", format!("must be in [0, 1], got {}", self.p_relevant)));
        }
        if self.weight_sd < 0.0 {
            return Err(Error::config("weight_sd", format!("must be non-negative, got {}", self.weight_sd)));
        }
        if self.noise_sd < 0.0 {
            return Err(Error::config("noise_sd", format!("must be non-negative, got {}", self.noise_sd)));
        }
        if !(0.0..=1.0).contains(&self.report_prob) {
            return Err(Error::config("report_prob", format!("must be in [0, 1], got {}", self.report_prob)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn empty_document_yields_defaults() {
        let cfg = ExperimentConfig::from_toml_str("").unwrap();
        assert_eq!(cfg.catalog_size, 200);
        assert_eq!(cfg.train_size, 10_000);
        assert_eq!(cfg.batch_size, 5);
        assert_eq!(cfg.strategies.len(), 6);
        assert_eq!(cfg.extreme_mode, ExtremeMode::Range);
        assert_eq!(cfg.overall_error, OverallErrorKind::Mae);
    }

    #[test]
    fn fields_override_defaults() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
            catalog_size = 30
            prob_spec = "zipf(1.0)"
            noise_sd = 0.0
            p_relevant = 1.0
            lambda = 0.0
            rounds = 12
            trials = 3
            strategies = "obus_full, random"
            extreme_mode = "quantile"
            overall_error = "rmse"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.catalog_size, 30);
        assert_eq!(cfg.prob_spec, ProbSpec::Zipf(1.0));
        assert_eq!(cfg.noise_sd, 0.0);
        assert_eq!(cfg.lambda, 0.0);
        assert_eq!(cfg.rounds, 12);
        assert_eq!(cfg.strategies, vec![StrategyKind::ObusFull, StrategyKind::Random]);
        assert_eq!(cfg.extreme_mode, ExtremeMode::Quantile);
        assert_eq!(cfg.overall_error, OverallErrorKind::Rmse);
        // Untouched keys keep defaults.
        assert_eq!(cfg.ensemble_size, 10);
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let err = ExperimentConfig::from_toml_str("catalogue_size = 10\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("catalogue_size"), "error should name the key: {msg}");
    }

    #[test]
    fn invalid_values_name_their_field() {
        let cases = [
            ("p_relevant = 1.5", "p_relevant"),
            ("alpha = 0.0", "alpha"),
            ("lambda = -0.5", "lambda"),
            ("batch_size = 0", "batch_size"),
            ("trials = 0", "trials"),
            ("features_per_query = 500", "features_per_query"),
            ("prob_spec = \"uniform(0)\"", "prob_spec"),
            ("strategies = \"obus_full,obus_full\"", "strategies"),
            ("strategies = \"\"", "strategies"),
            ("extreme_mode = \"weird\"", "extreme_mode"),
            ("overall_error = \"mape\"", "overall_error"),
            ("ensemble_size = 0", "ensemble_size"),
            ("noise_sd = -1.0", "noise_sd"),
        ];
        for (doc, field) in cases {
            let err = ExperimentConfig::from_toml_str(doc).unwrap_err();
            let msg = err.to_string();
            assert!(msg.contains(field), "{doc:?} should blame {field}: {msg}");
        }
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = ExperimentConfig {
            catalog_size: 55,
            prob_spec: ProbSpec::Uniform(0.07),
            lambda: 0.25,
            strategies: vec![StrategyKind::Uncertainty, StrategyKind::Random],
            extreme_mode: ExtremeMode::Quantile,
            ..ExperimentConfig::default()
        };
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml()).unwrap();
        assert_eq!(again.catalog_size, cfg.catalog_size);
        assert_eq!(again.prob_spec, cfg.prob_spec);
        assert_eq!(again.lambda, cfg.lambda);
        assert_eq!(again.strategies, cfg.strategies);
        assert_eq!(again.extreme_mode, cfg.extreme_mode);
        assert_eq!(again.master_seed, cfg.master_seed);
    }

    #[test]
    fn loading_from_disk_reports_the_path_on_failure() {
        let err = ExperimentConfig::load(Path::new("/nonexistent/config.toml")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/config.toml"));
    }

    #[test]
    fn rounds_zero_is_legal() {
        let cfg = ExperimentConfig::from_toml_str("rounds = 0\n").unwrap();
        assert_eq!(cfg.rounds, 0);
    }
}
