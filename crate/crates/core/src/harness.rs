//! Experiment harness: the strategy x trial grid, CSV output, aggregation.
//!
//! Trials are *paired*: every strategy arm of trial `t` runs against the
//! identical catalog, pool, and oracle (noise stream included), so arms differ
//! only through their selections. The grid runs in a dedicated thread pool;
//! records are re-sorted into a canonical order afterward, which makes the
//! emitted CSV byte-identical no matter how many workers ran.

use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::controller::{run_trial, TrialResult};
use crate::error::{Error, Result};
use crate::metrics::RoundRecord;
use crate::scoring::StrategyKind;

/// Exact header of the records CSV.
pub const CSV_HEADER: &str =
    "strategy,trial,round,error_vb_extreme,mae_overall,n_relevant_discovered,n_features_seen,pool_remaining";

/// The four per-round series that can be aggregated and plotted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    ErrorVbExtreme,
    MaeOverall,
    RelevantDiscovered,
    FeaturesSeen,
}

impl MetricKind {
    pub fn all() -> [MetricKind; 4] {
        [
            MetricKind::ErrorVbExtreme,
            MetricKind::MaeOverall,
            MetricKind::RelevantDiscovered,
            MetricKind::FeaturesSeen,
        ]
    }

    /// CSV column name; also the name accepted on the command line.
    pub fn label(self) -> &'static str {
        match self {
            MetricKind::ErrorVbExtreme => "error_vb_extreme",
            MetricKind::MaeOverall => "mae_overall",
            MetricKind::RelevantDiscovered => "n_relevant_discovered",
            MetricKind::FeaturesSeen => "n_features_seen",
        }
    }

    /// Human axis label for plots.
    pub fn axis_label(self) -> &'static str {
        match self {
            MetricKind::ErrorVbExtreme => "value-biased error (extreme region)",
            MetricKind::MaeOverall => "overall error",
            MetricKind::RelevantDiscovered => "relevant features discovered",
            MetricKind::FeaturesSeen => "features seen",
        }
    }

    fn value(self, r: &RoundRecord) -> f64 {
        match self {
            MetricKind::ErrorVbExtreme => r.error_vb_extreme,
            MetricKind::MaeOverall => r.mae_overall,
            MetricKind::RelevantDiscovered => f64::from(r.n_relevant_discovered),
            MetricKind::FeaturesSeen => f64::from(r.n_features_seen),
        }
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricKind::all()
            .into_iter()
            .find(|m| m.label() == s.trim())
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}

/// Per-round aggregate of one metric for one strategy across trials.
#[derive(Debug, Clone)]
pub struct AggregateCurve {
    pub strategy: StrategyKind,
    pub metric: MetricKind,
    /// Round indices, ascending; parallel to the stat vectors.
    pub rounds: Vec<u32>,
    pub mean: Vec<f64>,
    /// Standard error of the mean (0 when only one trial contributed).
    pub sem: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    /// Trials contributing per round (fewer than `trials` only under
    /// truncation).
    pub n: Vec<u32>,
}

/// Everything an experiment run produces.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    /// All records in canonical order: strategy label, then trial, then round.
    pub records: Vec<RoundRecord>,
    /// Mean/SEM/min/max curves per strategy and metric.
    pub curves: Vec<AggregateCurve>,
    /// Number of (strategy, trial) runs that exhausted the pool early.
    pub truncated_runs: u32,
    /// Realized (min, max) of noise-free test values, indexed by trial.
    pub value_ranges: Vec<(f64, f64)>,
}

/// Run the full strategy x trial grid. `workers` sizes the thread pool
/// (0 = one thread per logical CPU); the output is identical for any value.
pub fn run_experiment(config: &ExperimentConfig, workers: usize) -> Result<ExperimentOutput> {
    config.validate()?;
    let tasks: Vec<(StrategyKind, u32)> = config
        .strategies
        .iter()
        .flat_map(|&s| (0..config.trials).map(move |t| (s, t)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Domain(format!("failed to build thread pool: {e}")))?;
    let results: Vec<TrialResult> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(strategy, trial)| run_trial(config, strategy, trial))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut records = Vec::with_capacity(results.iter().map(|r| r.records.len()).sum());
    let mut truncated_runs = 0;
    let mut value_ranges = vec![(f64::NAN, f64::NAN); config.trials as usize];
    for (&(_, trial), result) in tasks.iter().zip(&results) {
        records.extend(result.records.iter().cloned());
        if result.truncated {
            truncated_runs += 1;
        }
        // Identical across arms of the same trial; last writer wins.
        value_ranges[trial as usize] = result.value_range;
    }
    sort_records(&mut records);
    let curves = aggregate(&records);
    Ok(ExperimentOutput { records, curves, truncated_runs, value_ranges })
}

/// Canonical record order: strategy label, then trial, then round.
pub fn sort_records(records: &mut [RoundRecord]) {
    records.sort_by(|a, b| {
        a.strategy
            .label()
            .cmp(b.strategy.label())
            .then(a.trial.cmp(&b.trial))
            .then(a.round.cmp(&b.round))
    });
}

/// Aggregate records into per-strategy mean/SEM/min/max curves for every
/// metric. Records may arrive in any order.
pub fn aggregate(records: &[RoundRecord]) -> Vec<AggregateCurve> {
    let mut strategies: Vec<StrategyKind> = records.iter().map(|r| r.strategy).collect();
    strategies.sort_by_key(|s| s.label());
    strategies.dedup();

    let mut curves = Vec::new();
    for strategy in strategies {
        let mut rounds: Vec<u32> =
            records.iter().filter(|r| r.strategy == strategy).map(|r| r.round).collect();
        rounds.sort_unstable();
        rounds.dedup();
        for metric in MetricKind::all() {
            let mut curve = AggregateCurve {
                strategy,
                metric,
                rounds: rounds.clone(),
                mean: Vec::with_capacity(rounds.len()),
                sem: Vec::with_capacity(rounds.len()),
                min: Vec::with_capacity(rounds.len()),
                max: Vec::with_capacity(rounds.len()),
                n: Vec::with_capacity(rounds.len()),
            };
            for &round in &rounds {
                let values: Vec<f64> = records
                    .iter()
                    .filter(|r| r.strategy == strategy && r.round == round)
                    .map(|r| metric.value(r))
                    .collect();
                let n = values.len() as f64;
                let mean = values.iter().sum::<f64>() / n;
                let sem = if values.len() > 1 {
                    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
                    (var / n).sqrt()
                } else {
                    0.0
                };
                curve.mean.push(mean);
                curve.sem.push(sem);
                curve.min.push(values.iter().copied().fold(f64::INFINITY, f64::min));
                curve.max.push(values.iter().copied().fold(f64::NEG_INFINITY, f64::max));
                curve.n.push(values.len() as u32);
            }
            curves.push(curve);
        }
    }
    curves
}

/// Format a float with 6 significant digits, fixed-point where reasonable and
/// scientific beyond a million. Stable across platforms, so identical runs
/// serialize identically.
pub fn fmt_sig(x: f64) -> String {
    const SIG: i32 = 6;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // Exact decimal exponent via the `{:e}` form (log10 would round badly at
    // power-of-ten boundaries).
    let exp_str = format!("{:e}", x.abs());
    let exp: i32 = exp_str.split('e').nth(1).expect("exponent present").parse().expect("exponent parses");
    if exp >= SIG {
        return format!("{:.*e}", (SIG - 1) as usize, x);
    }
    let decimals = (SIG - 1 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

/// Render records as CSV text (canonical order is the caller's job; see
/// [`sort_records`]).
pub fn records_to_csv(records: &[RoundRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.strategy.label(),
            r.trial,
            r.round,
            fmt_sig(r.error_vb_extreme),
            fmt_sig(r.mae_overall),
            r.n_relevant_discovered,
            r.n_features_seen,
            r.pool_remaining,
        ));
    }
    out
}

/// Write records to a CSV file.
pub fn write_csv(records: &[RoundRecord], path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(records_to_csv(records).as_bytes()).map_err(|e| Error::io(path, e))
}

/// Read records back from a CSV file written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<RoundRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        Some((_, header)) => {
            return Err(Error::parse(path, 1, format!("unexpected header {header:?}")));
        }
        None => return Err(Error::parse(path, 1, "empty file")),
    }
    let mut records = Vec::new();
    for (lineno, line) in lines {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::parse(path, lineno, format!("expected 8 fields, got {}", fields.len())));
        }
        let parse_f64 = |s: &str, what: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::parse(path, lineno, format!("bad {what} {s:?}")))
        };
        let parse_u32 = |s: &str, what: &str| -> Result<u32> {
            s.parse().map_err(|_| Error::parse(path, lineno, format!("bad {what} {s:?}")))
        };
        records.push(RoundRecord {
            strategy: fields[0]
                .parse::<StrategyKind>()
                .map_err(|e| Error::parse(path, lineno, e.to_string()))?,
            trial: parse_u32(fields[1], "trial")?,
            round: parse_u32(fields[2], "round")?,
            error_vb_extreme: parse_f64(fields[3], "error_vb_extreme")?,
            mae_overall: parse_f64(fields[4], "mae_overall")?,
            n_relevant_discovered: parse_u32(fields[5], "n_relevant_discovered")?,
            n_features_seen: parse_u32(fields[6], "n_features_seen")?,
            pool_remaining: parse_u32(fields[7], "pool_remaining")?,
        });
    }
    Ok(records)
}

/// Sidecar text describing a finished run: the exact config plus notes on
/// pairing, truncation, and the realized value ranges.
pub fn meta_text(config: &ExperimentConfig, output: &ExperimentOutput) -> String {
    let mut s = String::new();
    s.push_str("# Paired trials: every strategy arm of trial t shares the same\n");
    s.push_str("# catalog, pool, and oracle (structure and noise stream); arms\n");
    s.push_str("# differ only in which queries they select.\n");
    let (mut lo_sum, mut hi_sum) = (0.0, 0.0);
    let (mut lo_all, mut hi_all) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(lo, hi) in &output.value_ranges {
        lo_sum += lo;
        hi_sum += hi;
        lo_all = lo_all.min(lo);
        hi_all = hi_all.max(hi);
    }
    let n = output.value_ranges.len().max(1) as f64;
    s.push_str(&format!(
        "# Test-pool true-value range: mean over trials [{}, {}], pooled [{}, {}].\n",
        fmt_sig(lo_sum / n),
        fmt_sig(hi_sum / n),
        fmt_sig(lo_all),
        fmt_sig(hi_all),
    ));
    s.push_str(&format!("# Truncated runs (pool exhausted early): {}.\n", output.truncated_runs));
    s.push_str(&config.to_toml());
    s
}

/// Write the sidecar next to the CSV.
pub fn write_meta(config: &ExperimentConfig, output: &ExperimentOutput, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(meta_text(config, output).as_bytes()).map_err(|e| Error::io(path, e))
}
