//! Simulated rater with a hidden linear utility.
//!
//! At construction each feature independently becomes *relevant* with
//! probability `p_relevant`; a relevant feature gets a weight whose magnitude
//! is Gaussian (clamped at zero) and whose sign is a fair coin. Rating a query
//! returns the sum of its features' weights plus fresh Gaussian noise, along
//! with the identities and directions of the relevant features it contains.
//!
//! Structure and noise use separate seeded streams: two oracles built with the
//! same structure seed share the exact same hidden weights regardless of how
//! many ratings either has produced.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{FeatureCatalog, Feedback, FeatureId, Query, Sign};
use crate::error::{Error, Result};
use crate::numerics::gaussian_sample;

/// Parameters of the hidden utility and of the rating channel.
#[derive(Debug, Clone, Copy)]
pub struct OracleParams {
    /// Probability that a feature is relevant (carries nonzero weight).
    pub p_relevant: f64,
    /// Mean of the weight-magnitude Gaussian.
    pub weight_mean: f64,
    /// Standard deviation of the weight-magnitude Gaussian.
    pub weight_sd: f64,
    /// Standard deviation of the additive rating noise.
    pub noise_sd: f64,
    /// Probability that a relevant feature is ever reported in feedback.
    /// Decided once per feature at construction, so repeated ratings of the
    /// same query always return the same feature list.
    pub report_prob: f64,
}

impl OracleParams {
    fn validate(&self) -> Result<()> {
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

/// The simulated rater. `rate` mutates only the noise stream.
#[derive(Debug, Clone)]
pub struct Oracle {
    /// Hidden weight per feature; zero for irrelevant features.
    weights: Vec<f64>,
    /// Sign tag for relevant features, `None` otherwise.
    signs: Vec<Option<Sign>>,
    /// Whether a relevant feature is reported in feedback (all true unless
    /// `report_prob < 1`).
    reported: Vec<bool>,
    noise_sd: f64,
    noise: ChaCha8Rng,
}

impl Oracle {
    /// Build the hidden utility. `structure_seed` fixes which features are
    /// relevant and their weights; `noise_seed` fixes the rating-noise stream.
    pub fn new(
        catalog: &FeatureCatalog,
        params: &OracleParams,
        structure_seed: u64,
        noise_seed: u64,
    ) -> Result<Self> {
        params.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(structure_seed);
        let n = catalog.len();
        let mut weights = vec![0.0; n];
        let mut signs = vec![None; n];
        let mut reported = vec![false; n];
        for i in 0..n {
            if rng.gen::<f64>() < params.p_relevant {
                let magnitude = gaussian_sample(params.weight_mean, params.weight_sd, &mut rng).max(0.0);
                let sign = if rng.gen::<bool>() { Sign::Positive } else { Sign::Negative };
                weights[i] = sign.as_f64() * magnitude;
                signs[i] = Some(sign);
                reported[i] = params.report_prob >= 1.0 || rng.gen::<f64>() < params.report_prob;
            }
        }
        Ok(Oracle {
            weights,
            signs,
            reported,
            noise_sd: params.noise_sd,
            noise: ChaCha8Rng::seed_from_u64(noise_seed),
        })
    }

    /// Noise-free utility of a query: the sum of its features' hidden weights.
    pub fn true_value(&self, query: &Query) -> f64 {
        query.features().iter().map(|f| self.weights[f.0 as usize]).sum()
    }

    /// Rate a query: noisy preference plus the reportable relevant features it
    /// contains, in ascending feature order. Consumes one noise draw.
    pub fn rate(&mut self, query: &Query) -> Feedback {
        let preference = self.true_value(query) + gaussian_sample(0.0, self.noise_sd, &mut self.noise);
        let relevant_features = query
            .features()
            .iter()
            .filter_map(|&f| {
                let i = f.0 as usize;
                match self.signs[i] {
                    Some(sign) if self.reported[i] => Some((f, sign)),
                    _ => None,
                }
            })
            .collect();
        Feedback { preference, relevant_features }
    }

    /// Ids of all relevant features, ascending.
    pub fn relevant_features(&self) -> Vec<FeatureId> {
        self.signs
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|_| FeatureId(i as u32)))
            .collect()
    }

    /// Number of relevant features.
    pub fn relevant_count(&self) -> usize {
        self.signs.iter().filter(|s| s.is_some()).count()
    }

    /// Hidden weight of one feature (zero if irrelevant).
    pub fn weight(&self, feature: FeatureId) -> f64 {
        self.weights[feature.0 as usize]
    }

    /// Write the hidden profile as `feature,weight` lines (relevant features
    /// only), for inspection alongside generated pools.
    pub fn dump_profile(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        writeln!(out, "feature,weight").map_err(|e| Error::io(path, e))?;
        for (i, &w) in self.weights.iter().enumerate() {
            if self.signs[i].is_some() {
                writeln!(out, "{i},{w}").map_err(|e| Error::io(path, e))?;
            }
        }
        out.flush().map_err(|e| Error::io(path, e))
    }
}
