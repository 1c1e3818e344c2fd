//! Evaluation metrics and the per-round record they populate.
//!
//! The headline metric is *value-biased* error: absolute prediction error
//! weighted by the magnitude of the true value, so mistakes on strong likes
//! and strong dislikes cost more than mistakes near indifference. It is
//! reported over the extreme region of the test pool — the items whose true
//! values sit in the outer bands of the value range — because those are the
//! items a recommender actually acts on.

use std::fmt;
use std::str::FromStr;

use crate::domain::Query;
use crate::error::Error;
use crate::regression::FittedModel;
use crate::scoring::StrategyKind;

/// Absolute error weighted by the magnitude of the true value:
/// `|y_hat - y_star| * |y_star|`.
pub fn value_biased_error(y_hat: f64, y_star: f64) -> f64 {
    (y_hat - y_star).abs() * y_star.abs()
}

/// How the extreme region of the test pool is delimited.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremeMode {
    /// Band thresholds at 20% / 80% of the observed truth *range*:
    /// extreme = `{y <= min + 0.2*span} ∪ {y >= min + 0.8*span}`, inclusive.
    Range,
    /// Band thresholds at the empirical 20th / 80th *percentiles* of the
    /// truths (nearest-rank), inclusive.
    Quantile,
}

impl fmt::Display for ExtremeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExtremeMode::Range => "range",
            ExtremeMode::Quantile => "quantile",
        })
    }
}

impl FromStr for ExtremeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "range" => Ok(ExtremeMode::Range),
            "quantile" => Ok(ExtremeMode::Quantile),
            other => Err(Error::config("extreme_mode", format!("expected \"range\" or \"quantile\", got {other:?}"))),
        }
    }
}

/// Aggregate used for the overall (non-extreme) error column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverallErrorKind {
    /// Mean absolute error.
    Mae,
    /// Root mean squared error.
    Rmse,
    /// Mean value-biased error.
    MeanVb,
}

impl fmt::Display for OverallErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OverallErrorKind::Mae => "mae",
            OverallErrorKind::Rmse => "rmse",
            OverallErrorKind::MeanVb => "mean_vb",
        })
    }
}

impl FromStr for OverallErrorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "mae" => Ok(OverallErrorKind::Mae),
            "rmse" => Ok(OverallErrorKind::Rmse),
            "mean_vb" => Ok(OverallErrorKind::MeanVb),
            other => Err(Error::config("overall_error", format!("expected \"mae\", \"rmse\", or \"mean_vb\", got {other:?}"))),
        }
    }
}

/// Indices of the extreme-region members of `truths` under `mode`.
/// Thresholds are inclusive, so the minimum and maximum are always members
/// and the region cannot be empty for a nonempty input (constant truths make
/// every item extreme).
pub fn extreme_indices(truths: &[f64], mode: ExtremeMode) -> Vec<usize> {
    if truths.is_empty() {
        return Vec::new();
    }
    let (low_thr, high_thr) = match mode {
        ExtremeMode::Range => {
            let min = truths.iter().copied().fold(f64::INFINITY, f64::min);
            let max = truths.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let span = max - min;
            (min + 0.2 * span, min + 0.8 * span)
        }
        ExtremeMode::Quantile => {
            let mut sorted = truths.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let rank = |frac: f64| {
                let idx = ((sorted.len() - 1) as f64 * frac).round() as usize;
                sorted[idx]
            };
            (rank(0.2), rank(0.8))
        }
    };
    truths
        .iter()
        .enumerate()
        .filter(|(_, &y)| y <= low_thr || y >= high_thr)
        .map(|(i, _)| i)
        .collect()
}

/// Mean value-biased error of the model over the extreme region of the test
/// pool. `truths` are the noise-free values, parallel to `queries`.
pub fn extreme_region_error(
    model: &FittedModel,
    queries: &[Query],
    truths: &[f64],
    mode: ExtremeMode,
) -> f64 {
    assert_eq!(queries.len(), truths.len(), "queries and truths must be parallel");
    let idx = extreme_indices(truths, mode);
    if idx.is_empty() {
        return 0.0;
    }
    let total: f64 = idx
        .iter()
        .map(|&i| value_biased_error(model.predict(&queries[i]), truths[i]))
        .sum();
    total / idx.len() as f64
}

/// Overall error of the model over the whole test pool.
pub fn overall_error(
    model: &FittedModel,
    queries: &[Query],
    truths: &[f64],
    kind: OverallErrorKind,
) -> f64 {
    assert_eq!(queries.len(), truths.len(), "queries and truths must be parallel");
    assert!(!queries.is_empty(), "overall error needs a nonempty test pool");
    let n = queries.len() as f64;
    match kind {
        OverallErrorKind::Mae => {
            queries
                .iter()
                .zip(truths)
                .map(|(q, &y)| (model.predict(q) - y).abs())
                .sum::<f64>()
                / n
        }
        OverallErrorKind::Rmse => {
            let mse = queries
                .iter()
                .zip(truths)
                .map(|(q, &y)| (model.predict(q) - y).powi(2))
                .sum::<f64>()
                / n;
            mse.sqrt()
        }
        OverallErrorKind::MeanVb => {
            queries
                .iter()
                .zip(truths)
                .map(|(q, &y)| value_biased_error(model.predict(q), y))
                .sum::<f64>()
                / n
        }
    }
}

/// One row of experiment output: the state of one strategy arm after one
/// round of one trial. Round 0 is the untrained model.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub strategy: StrategyKind,
    pub trial: u32,
    pub round: u32,
    /// Mean value-biased error over the extreme region of the test pool.
    pub error_vb_extreme: f64,
    /// Overall error over the whole test pool (MAE under the default config).
    pub mae_overall: f64,
    /// Relevant features revealed so far.
    pub n_relevant_discovered: u32,
    /// Distinct features shown to the oracle so far.
    pub n_features_seen: u32,
    /// Train-pool queries still available.
    pub pool_remaining: u32,
}
