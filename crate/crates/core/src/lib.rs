//! Simulation laboratory for output-biased uncertainty sampling in active
//! preference learning.
//!
//! The crate builds synthetic preference-learning worlds and runs competing
//! query-selection strategies through them:
//!
//! * [`domain`] — features, catalogs, queries, pools, feedback.
//! * [`poolgen`] — weighted query sampling and the pool text format.
//! * [`oracle`] — the simulated rater with a hidden sparse linear utility.
//! * [`regression`] — ridge fits, coefficient intervals, model ensembles.
//! * [`scoring`] — knowledge state, the score family, and the strategy arms.
//! * [`controller`] — round selection, feedback ingestion, full trials.
//! * [`metrics`] — value-biased error and friends.
//! * [`harness`] — the paired strategy x trial grid, CSV, aggregation.
//! * [`plot`] — self-contained SVG plots of aggregate curves.
//! * [`config`] — flat-TOML experiment configuration.
//!
//! Everything is deterministic given the config's `master_seed`: trials are
//! paired (all strategy arms of a trial share catalog, pool, and oracle), and
//! output is byte-identical regardless of worker count.

pub mod config;
pub mod controller;
pub mod domain;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod numerics;
pub mod oracle;
pub mod plot;
pub mod poolgen;
pub mod regression;
pub mod scoring;
pub mod seeds;

pub use config::ExperimentConfig;
pub use controller::{build_world, run_trial, RoundPlan, TrialResult, TrialWorld};
pub use domain::{FeatureCatalog, FeatureId, Feedback, ProbSpec, Query, QueryPool, Sign};
pub use error::{Error, Result};
pub use harness::{run_experiment, ExperimentOutput, MetricKind};
pub use metrics::{ExtremeMode, OverallErrorKind, RoundRecord};
pub use oracle::{Oracle, OracleParams};
pub use regression::{FittedModel, LabeledExample, ModelEnsemble, RidgeParams};
pub use scoring::{KnowledgeState, StrategyKind};
