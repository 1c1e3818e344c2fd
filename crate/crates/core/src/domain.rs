//! Core vocabulary: features, catalogs, queries, pools, and feedback.
//!
//! A *catalog* is a fixed universe of features, each with an occurrence
//! probability used when sampling queries. A *query* is a small set of
//! distinct features drawn from the catalog. Pools of queries are what the
//! learner selects from; feedback is what the oracle returns for one query.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a feature in the catalog. Plain newtype over `u32`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FeatureId(pub u32);

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Direction of a revealed relevant feature: the oracle tags each one it
/// reports as pushing the preference up or down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    /// +1.0 / -1.0 multiplier form.
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }
}

/// How per-feature occurrence probabilities are assigned at catalog build
/// time. Parsed from strings like `uniform(0.5)`,
/// `independent-uniform(0.01,0.2)`, or `zipf(1.0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProbSpec {
    /// Every feature gets the same probability `p`, with `p` in (0, 1].
    Uniform(f64),
    /// Each probability drawn independently from U(lo, hi), `0 < lo <= hi <= 1`.
    IndependentUniform { lo: f64, hi: f64 },
    /// `p_i = (i + 1)^(-s)` with `s > 0`: strictly decreasing in the index,
    /// always inside (0, 1].
    Zipf(f64),
}

impl ProbSpec {
    /// Validate parameters, with `field` naming the config key for error messages.
    pub fn validate(&self, field: &str) -> Result<()> {
        match *self {
            ProbSpec::Uniform(p) => {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(Error::config(
                        field,
                        format!("uniform probability must be in (0, 1], got {p}"),
                    ));
                }
            }
            ProbSpec::IndependentUniform { lo, hi } => {
                if !(lo > 0.0 && hi <= 1.0 && lo <= hi) {
                    return Err(Error::config(
                        field,
                        format!("independent-uniform bounds need 0 < lo <= hi <= 1, got ({lo}, {hi})"),
                    ));
                }
            }
            ProbSpec::Zipf(s) => {
                if s <= 0.0 || s.is_nan() {
                    return Err(Error::config(
                        field,
                        format!("zipf exponent must be positive, got {s}"),
                    ));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for ProbSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbSpec::Uniform(p) => write!(f, "uniform({p})"),
            ProbSpec::IndependentUniform { lo, hi } => write!(f, "independent-uniform({lo},{hi})"),
            ProbSpec::Zipf(s) => write!(f, "zipf({s})"),
        }
    }
}

impl FromStr for ProbSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || {
            Error::config(
                "prob_spec",
                format!("cannot parse {s:?}; expected uniform(p), independent-uniform(lo,hi), or zipf(s)"),
            )
        };
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        let nums: Vec<f64> = args
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let spec = match (name.trim(), nums.as_slice()) {
            ("uniform", [p]) => ProbSpec::Uniform(*p),
            ("independent-uniform", [lo, hi]) => ProbSpec::IndependentUniform { lo: *lo, hi: *hi },
            ("zipf", [s]) => ProbSpec::Zipf(*s),
            _ => return Err(bad()),
        };
        spec.validate("prob_spec")?;
        Ok(spec)
    }
}

/// Fixed universe of features with their occurrence probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureCatalog {
    probs: Vec<f64>,
}

impl FeatureCatalog {
    /// Build a catalog of `size` features with probabilities assigned per
    /// `spec`. Deterministic in `seed`; the seed only matters for
    /// `independent-uniform`, but the signature is uniform across specs.
    pub fn generate(size: u32, spec: &ProbSpec, seed: u64) -> Result<Self> {
        if size == 0 {
            return Err(Error::config("catalog_size", "catalog must hold at least one feature"));
        }
        spec.validate("prob_spec")?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let probs = match *spec {
            ProbSpec::Uniform(p) => vec![p; size as usize],
            ProbSpec::IndependentUniform { lo, hi } => (0..size)
                .map(|_| if lo == hi { lo } else { rng.gen_range(lo..hi) })
                .collect(),
            ProbSpec::Zipf(s) => (0..size).map(|i| f64::from(i + 1).powf(-s)).collect(),
        };
        Ok(FeatureCatalog { probs })
    }

    /// Build directly from explicit probabilities (each must be in (0, 1]).
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::config("catalog_size", "catalog must hold at least one feature"));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::config(
                    "prob_spec",
                    format!("probability of feature {i} must be in (0, 1], got {p}"),
                ));
            }
        }
        Ok(FeatureCatalog { probs })
    }

    /// Number of features in the catalog.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Occurrence probability of one feature.
    pub fn prob(&self, feature: FeatureId) -> f64 {
        self.probs[feature.0 as usize]
    }

    /// All probabilities, indexed by feature id.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Iterator over all feature ids.
    pub fn feature_ids(&self) -> impl Iterator<Item = FeatureId> + '_ {
        (0..self.probs.len() as u32).map(FeatureId)
    }
}

/// A set of distinct features shown to the oracle as one item. Stored sorted
/// by feature id so equal sets compare equal and iteration order is fixed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Query {
    features: Vec<FeatureId>,
}

impl Query {
    /// Validate and canonicalize: features must be distinct and inside the
    /// catalog. Cardinality is free here; pool generation pins it to `q`.
    pub fn new(mut features: Vec<FeatureId>, catalog: &FeatureCatalog) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::InvalidQuery("query must contain at least one feature".into()));
        }
        for &f in &features {
            if f.0 as usize >= catalog.len() {
                return Err(Error::InvalidQuery(format!(
                    "feature {} outside catalog of size {}",
                    f.0,
                    catalog.len()
                )));
            }
        }
        features.sort_unstable();
        if features.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidQuery("duplicate feature in query".into()));
        }
        Ok(Query { features })
    }

    /// Features in ascending id order.
    pub fn features(&self) -> &[FeatureId] {
        &self.features
    }

    /// Number of features in the query.
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// True if the query contains `feature`.
    pub fn contains(&self, feature: FeatureId) -> bool {
        self.features.binary_search(&feature).is_ok()
    }
}

/// Train and test query pools drawn from one catalog.
#[derive(Debug, Clone)]
pub struct QueryPool {
    pub catalog: Arc<FeatureCatalog>,
    pub train: Vec<Query>,
    pub test: Vec<Query>,
}

/// What the oracle returns for one rated query: a noisy scalar preference plus
/// every relevant feature present in the query, tagged with its direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Feedback {
    pub preference: f64,
    pub relevant_features: Vec<(FeatureId, Sign)>,
}
