//! Query scoring: the learner's knowledge state, the score family, and the
//! strategy arms that combine them.
//!
//! Scores, all computed against the pre-round model and knowledge state:
//!
//! * **base** `S_b = sigma + sigma^(|y_hat| / y_hat_max)` — predictive
//!   uncertainty, inflated for queries whose predicted value is large relative
//!   to the current pool; this is what biases sampling toward the output
//!   extremes.
//! * **frequency** `S_f` — sum of catalog occurrence probabilities of the
//!   query's features already revealed as relevant.
//! * **discovery** `S_d` — the same sum over the query's features never shown
//!   to the oracle before.
//! * **exploration** `S_e` — identical form to `S_d`, used on its own to
//!   reserve one exploratory pick per round.
//! * **total** `S_t = S_b * (1 + S_f + S_d)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;

use crate::domain::{FeatureCatalog, FeatureId, Query, Sign};
use crate::error::Error;
use crate::regression::{FittedModel, ModelEnsemble};

/// What the learner has observed so far: which features it has ever shown to
/// the oracle, and which of those were revealed as relevant (with direction).
#[derive(Debug, Clone)]
pub struct KnowledgeState {
    catalog: Arc<FeatureCatalog>,
    seen: Vec<bool>,
    relevant: Vec<Option<Sign>>,
    n_seen: usize,
    n_relevant: usize,
}

impl KnowledgeState {
    pub fn new(catalog: Arc<FeatureCatalog>) -> Self {
        let n = catalog.len();
        KnowledgeState {
            catalog,
            seen: vec![false; n],
            relevant: vec![None; n],
            n_seen: 0,
            n_relevant: 0,
        }
    }

    /// Mark every feature of a presented query as seen.
    pub fn observe_query(&mut self, query: &Query) {
        for &f in query.features() {
            let i = f.0 as usize;
            if !self.seen[i] {
                self.seen[i] = true;
                self.n_seen += 1;
            }
        }
    }

    /// Record a feature revealed as relevant. Revealed implies seen, so the
    /// seen mark is maintained here too; re-recording is a no-op (the oracle
    /// never changes its mind about a sign).
    pub fn record_relevant(&mut self, feature: FeatureId, sign: Sign) {
        let i = feature.0 as usize;
        if !self.seen[i] {
            self.seen[i] = true;
            self.n_seen += 1;
        }
        if self.relevant[i].is_none() {
            self.relevant[i] = Some(sign);
            self.n_relevant += 1;
        }
    }

    pub fn is_seen(&self, feature: FeatureId) -> bool {
        self.seen[feature.0 as usize]
    }

    pub fn sign_of(&self, feature: FeatureId) -> Option<Sign> {
        self.relevant[feature.0 as usize]
    }

    /// Revealed-relevant features in ascending id order: the active set for
    /// model fitting.
    pub fn relevant_features(&self) -> Vec<FeatureId> {
        self.relevant
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|_| FeatureId(i as u32)))
            .collect()
    }

    pub fn n_seen(&self) -> usize {
        self.n_seen
    }

    pub fn n_relevant(&self) -> usize {
        self.n_relevant
    }

    pub fn catalog(&self) -> &Arc<FeatureCatalog> {
        &self.catalog
    }
}

/// Uncertainty score biased toward large predicted outputs.
///
/// The exponent is `|y_hat| / y_hat_max` clamped to [0, 1]; a zero pool
/// maximum makes it 0 (so the score degenerates to `sigma + 1`), and a
/// non-positive `sigma` short-circuits to 0 rather than exponentiating.
pub fn base_score(sigma: f64, y_hat: f64, y_hat_max: f64) -> f64 {
    if sigma <= 0.0 {
        return 0.0;
    }
    let exponent = if y_hat_max > 0.0 {
        (y_hat.abs() / y_hat_max).clamp(0.0, 1.0)
    } else {
        0.0
    };
    sigma + sigma.powf(exponent)
}

/// Sum of occurrence probabilities of the query's revealed-relevant features.
pub fn freq_score(query: &Query, state: &KnowledgeState) -> f64 {
    query
        .features()
        .iter()
        .filter(|&&f| state.sign_of(f).is_some())
        .map(|&f| state.catalog.prob(f))
        .sum()
}

/// Sum of occurrence probabilities of the query's never-seen features.
pub fn discovery_score(query: &Query, state: &KnowledgeState) -> f64 {
    query
        .features()
        .iter()
        .filter(|&&f| !state.is_seen(f))
        .map(|&f| state.catalog.prob(f))
        .sum()
}

/// Exploration score: same quantity as [`discovery_score`], used standalone to
/// pick the one exploratory query each round.
pub fn exploration_score(query: &Query, state: &KnowledgeState) -> f64 {
    discovery_score(query, state)
}

/// Combined score. A zero base annihilates the whole product.
pub fn total_score(base: f64, freq: f64, discovery: f64) -> f64 {
    base * (1.0 + freq + discovery)
}

/// The six selection strategies under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    /// Full scoring: `S_b * (1 + S_f + S_d)`.
    ObusFull,
    /// Frequency term ablated: `S_b * (1 + S_d)`.
    ObusNoFreq,
    /// Discovery term ablated: `S_b * (1 + S_f)`.
    ObusNoDiscovery,
    /// Base score alone: `S_b`.
    ObusBaseOnly,
    /// Plain predictive uncertainty in place of the base score:
    /// `sigma * (1 + S_f + S_d)`.
    Uncertainty,
    /// Uniform random scores.
    Random,
}

impl StrategyKind {
    /// All strategies, in canonical order.
    pub fn all() -> [StrategyKind; 6] {
        [
            StrategyKind::ObusFull,
            StrategyKind::ObusNoFreq,
            StrategyKind::ObusNoDiscovery,
            StrategyKind::ObusBaseOnly,
            StrategyKind::Uncertainty,
            StrategyKind::Random,
        ]
    }

    /// Stable label used in CSV output and on the command line.
    pub fn label(self) -> &'static str {
        match self {
            StrategyKind::ObusFull => "obus_full",
            StrategyKind::ObusNoFreq => "obus_no_freq",
            StrategyKind::ObusNoDiscovery => "obus_no_discovery",
            StrategyKind::ObusBaseOnly => "obus_base_only",
            StrategyKind::Uncertainty => "uncertainty",
            StrategyKind::Random => "random",
        }
    }

    fn uses_freq(self) -> bool {
        matches!(
            self,
            StrategyKind::ObusFull | StrategyKind::ObusNoDiscovery | StrategyKind::Uncertainty
        )
    }

    fn uses_discovery(self) -> bool {
        matches!(
            self,
            StrategyKind::ObusFull | StrategyKind::ObusNoFreq | StrategyKind::Uncertainty
        )
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        StrategyKind::all()
            .into_iter()
            .find(|k| k.label() == s.trim())
            .ok_or_else(|| Error::UnknownStrategy(s.to_string()))
    }
}

/// Score every candidate (indices into `pool`) under one strategy, against the
/// pre-round model, ensemble, and knowledge state.
///
/// The output-bias normalizer `y_hat_max` is the maximum |prediction| over
/// these same candidates. The Random strategy ignores the model entirely and
/// draws one uniform score per candidate from `rng`.
pub fn score_pool<R: Rng + ?Sized>(
    pool: &[Query],
    candidates: &[usize],
    model: &FittedModel,
    ensemble: &ModelEnsemble,
    state: &KnowledgeState,
    strategy: StrategyKind,
    rng: &mut R,
) -> Vec<f64> {
    if strategy == StrategyKind::Random {
        return candidates.iter().map(|_| rng.gen::<f64>()).collect();
    }
    let y_hat_max = candidates
        .iter()
        .map(|&i| model.predict(&pool[i]).abs())
        .fold(0.0_f64, f64::max);
    candidates
        .iter()
        .map(|&i| {
            let q = &pool[i];
            let sigma = ensemble.predictive_sd(q);
            let base = match strategy {
                StrategyKind::Uncertainty => sigma,
                _ => base_score(sigma, model.predict(q), y_hat_max),
            };
            let freq = if strategy.uses_freq() { freq_score(q, state) } else { 0.0 };
            let discovery = if strategy.uses_discovery() { discovery_score(q, state) } else { 0.0 };
            total_score(base, freq, discovery)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::{LabeledExample, RidgeParams};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn catalog(probs: Vec<f64>) -> Arc<FeatureCatalog> {
        Arc::new(FeatureCatalog::from_probs(probs).unwrap())
    }

    fn query(ids: &[u32], cat: &FeatureCatalog) -> Query {
        Query::new(ids.iter().map(|&i| FeatureId(i)).collect(), cat).unwrap()
    }

    #[test]
    fn base_score_hand_cases() {
        // Prediction at the pool maximum: sigma + sigma.
        assert_eq!(base_score(2.0, 4.0, 4.0), 4.0);
        assert_eq!(base_score(2.0, -4.0, 4.0), 4.0);
        // Prediction at zero: sigma + 1.
        assert_eq!(base_score(2.0, 0.0, 4.0), 3.0);
        // Halfway: sigma + sqrt(sigma).
        let s = base_score(2.0, 2.0, 4.0);
        assert!((s - (2.0 + 2.0_f64.sqrt())).abs() < 1e-12);
        // No uncertainty, no score.
        assert_eq!(base_score(0.0, 3.0, 4.0), 0.0);
        assert_eq!(base_score(-1.0, 3.0, 4.0), 0.0);
        // Degenerate pool maximum: exponent pinned to 0.
        assert_eq!(base_score(3.0, 5.0, 0.0), 4.0);
    }

    proptest! {
        #[test]
        fn base_score_is_bracketed_by_sigma_and_twice_sigma(
            sigma in 1.0f64..50.0,
            y in -100.0f64..100.0,
            y_max in 0.1f64..100.0,
        ) {
            let s = base_score(sigma, y, y_max);
            prop_assert!(s >= sigma - 1e-12, "score {} below sigma {}", s, sigma);
            prop_assert!(s <= 2.0 * sigma + 1e-12, "score {} above 2*sigma {}", s, sigma);
        }

        #[test]
        fn base_score_grows_with_prediction_magnitude_when_sigma_exceeds_one(
            sigma in 1.0f64..50.0,
            y in 0.0f64..10.0,
        ) {
            let lo = base_score(sigma, y, 10.0);
            let hi = base_score(sigma, y + 0.5, 10.0);
            prop_assert!(hi >= lo - 1e-12);
        }

        #[test]
        fn small_sigma_scores_stay_positive(sigma in 1e-6f64..1.0, y in -5.0f64..5.0) {
            let s = base_score(sigma, y, 5.0);
            prop_assert!(s > 0.0);
            prop_assert!(s <= sigma + 1.0 + 1e-12);
        }
    }

    #[test]
    fn knowledge_state_tracks_seen_and_relevant() {
        let cat = catalog(vec![0.1, 0.2, 0.3, 0.4]);
        let mut state = KnowledgeState::new(cat.clone());
        assert_eq!(state.n_seen(), 0);
        assert_eq!(state.n_relevant(), 0);

        state.observe_query(&query(&[0, 2], &cat));
        assert_eq!(state.n_seen(), 2);
        assert!(state.is_seen(FeatureId(0)) && state.is_seen(FeatureId(2)));
        assert!(!state.is_seen(FeatureId(1)));

        state.record_relevant(FeatureId(2), Sign::Negative);
        state.record_relevant(FeatureId(2), Sign::Negative); // no-op repeat
        assert_eq!(state.n_relevant(), 1);
        assert_eq!(state.sign_of(FeatureId(2)), Some(Sign::Negative));
        assert_eq!(state.relevant_features(), vec![FeatureId(2)]);

        // Revealed implies seen even without an explicit observe.
        state.record_relevant(FeatureId(3), Sign::Positive);
        assert!(state.is_seen(FeatureId(3)));
        assert_eq!(state.n_seen(), 3);
    }

    #[test]
    fn freq_score_sums_revealed_relevant_probabilities() {
        let cat = catalog(vec![0.1, 0.2, 0.3, 0.4]);
        let mut state = KnowledgeState::new(cat.clone());
        let q = query(&[0, 1, 3], &cat);
        assert_eq!(freq_score(&q, &state), 0.0);

        state.record_relevant(FeatureId(1), Sign::Positive);
        assert!((freq_score(&q, &state) - 0.2).abs() < 1e-12);

        state.record_relevant(FeatureId(3), Sign::Negative);
        assert!((freq_score(&q, &state) - 0.6).abs() < 1e-12);

        // Relevant features outside the query do not count.
        state.record_relevant(FeatureId(2), Sign::Positive);
        assert!((freq_score(&q, &state) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn discovery_score_sums_unseen_probabilities() {
        let cat = catalog(vec![0.1, 0.2, 0.3, 0.4]);
        let mut state = KnowledgeState::new(cat.clone());
        let q = query(&[0, 1, 2], &cat);
        assert!((discovery_score(&q, &state) - 0.6).abs() < 1e-12);
        assert_eq!(discovery_score(&q, &state), exploration_score(&q, &state));

        state.observe_query(&query(&[1], &cat));
        assert!((discovery_score(&q, &state) - 0.4).abs() < 1e-12);

        state.observe_query(&q);
        assert_eq!(discovery_score(&q, &state), 0.0);
    }

    proptest! {
        // Observing more features never increases any query's discovery score.
        #[test]
        fn discovery_score_is_monotone_under_observation(
            seen_mask in prop::collection::vec(any::<bool>(), 6),
            ids in prop::collection::btree_set(0u32..6, 1..4),
        ) {
            let cat = catalog(vec![0.1, 0.15, 0.2, 0.25, 0.3, 0.35]);
            let q = Query::new(ids.iter().map(|&i| FeatureId(i)).collect(), &cat).unwrap();
            let mut state = KnowledgeState::new(cat.clone());
            let before = discovery_score(&q, &state);
            for (i, &seen) in seen_mask.iter().enumerate() {
                if seen {
                    state.observe_query(&query(&[i as u32], &cat));
                }
            }
            let after = discovery_score(&q, &state);
            prop_assert!(after <= before + 1e-12);
        }

        // Revealing more relevant features never decreases a freq score.
        #[test]
        fn freq_score_is_monotone_under_revelation(
            reveal in prop::collection::btree_set(0u32..6, 0..6),
            ids in prop::collection::btree_set(0u32..6, 1..4),
        ) {
            let cat = catalog(vec![0.1, 0.15, 0.2, 0.25, 0.3, 0.35]);
            let q = Query::new(ids.iter().map(|&i| FeatureId(i)).collect(), &cat).unwrap();
            let mut state = KnowledgeState::new(cat.clone());
            let before = freq_score(&q, &state);
            for &f in &reveal {
                state.record_relevant(FeatureId(f), Sign::Positive);
            }
            prop_assert!(freq_score(&q, &state) >= before - 1e-12);
        }
    }

    #[test]
    fn total_score_combines_and_annihilates() {
        assert!((total_score(2.0, 0.3, 0.5) - 3.6).abs() < 1e-12);
        assert_eq!(total_score(0.0, 5.0, 5.0), 0.0);
        assert_eq!(total_score(2.0, 0.0, 0.0), 2.0);
    }

    #[test]
    fn strategy_labels_round_trip() {
        for kind in StrategyKind::all() {
            assert_eq!(kind.label().parse::<StrategyKind>().unwrap(), kind);
        }
        assert!("obus".parse::<StrategyKind>().is_err());
    }

    /// A small fitted world for exercising score_pool: two labeled features
    /// with distinct weights plus untouched ones.
    fn fitted_world() -> (Arc<FeatureCatalog>, Vec<Query>, FittedModel, ModelEnsemble, KnowledgeState) {
        let cat = catalog(vec![0.1, 0.2, 0.3, 0.4, 0.5]);
        let mut examples = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for i in 0..12 {
            let ids: Vec<u32> = match i % 3 {
                0 => vec![0],
                1 => vec![1],
                _ => vec![0, 1],
            };
            let truth = ids.iter().map(|&j| if j == 0 { 10.0 } else { -4.0 }).sum::<f64>();
            examples.push(LabeledExample {
                query: query(&ids, &cat),
                preference: truth + rand::Rng::gen_range(&mut rng, -0.5..0.5),
            });
        }
        let active = vec![FeatureId(0), FeatureId(1)];
        let model = FittedModel::fit(&examples, &active, RidgeParams { lambda: 0.01, ci_fallback_half_width: 17.0 }).unwrap();
        let ensemble = model.sample_ensemble(10, 0.1, &mut rng).unwrap();
        let mut state = KnowledgeState::new(cat.clone());
        for ex in &examples {
            state.observe_query(&ex.query);
        }
        state.record_relevant(FeatureId(0), Sign::Positive);
        state.record_relevant(FeatureId(1), Sign::Negative);
        let pool = vec![
            query(&[0, 2], &cat),    // relevant + unseen
            query(&[1], &cat),       // relevant only
            query(&[3, 4], &cat),    // unseen only
            query(&[0, 1], &cat),    // both relevant
        ];
        (cat, pool, model, ensemble, state)
    }

    #[test]
    fn strategy_arms_zero_out_their_ablated_terms() {
        let (_cat, pool, model, ensemble, state) = fitted_world();
        let candidates: Vec<usize> = (0..pool.len()).collect();
        let score = |kind| {
            score_pool(&pool, &candidates, &model, &ensemble, &state, kind, &mut ChaCha8Rng::seed_from_u64(0))
        };
        let full = score(StrategyKind::ObusFull);
        let no_freq = score(StrategyKind::ObusNoFreq);
        let no_disc = score(StrategyKind::ObusNoDiscovery);
        let base_only = score(StrategyKind::ObusBaseOnly);
        let unc = score(StrategyKind::Uncertainty);

        for (i, &q_idx) in candidates.iter().enumerate() {
            let q = &pool[q_idx];
            let sf = freq_score(q, &state);
            let sd = discovery_score(q, &state);
            let sb = base_only[i];
            assert!((full[i] - sb * (1.0 + sf + sd)).abs() < 1e-9);
            assert!((no_freq[i] - sb * (1.0 + sd)).abs() < 1e-9);
            assert!((no_disc[i] - sb * (1.0 + sf)).abs() < 1e-9);
            let sigma = ensemble.predictive_sd(q);
            assert!((unc[i] - sigma * (1.0 + sf + sd)).abs() < 1e-9);
        }
    }

    #[test]
    fn random_scores_come_from_the_rng_alone() {
        let (_cat, pool, model, ensemble, state) = fitted_world();
        let candidates: Vec<usize> = (0..pool.len()).collect();
        let mut rng_a = ChaCha8Rng::seed_from_u64(5);
        let mut rng_b = ChaCha8Rng::seed_from_u64(5);
        let a = score_pool(&pool, &candidates, &model, &ensemble, &state, StrategyKind::Random, &mut rng_a);
        let b = score_pool(&pool, &candidates, &model, &ensemble, &state, StrategyKind::Random, &mut rng_b);
        assert_eq!(a, b);
        for &s in &a {
            assert!((0.0..1.0).contains(&s));
        }
        let mut rng_c = ChaCha8Rng::seed_from_u64(6);
        let c = score_pool(&pool, &candidates, &model, &ensemble, &state, StrategyKind::Random, &mut rng_c);
        assert_ne!(a, c);
    }

    #[test]
    fn scoring_an_empty_candidate_list_is_empty() {
        let (_cat, pool, model, ensemble, state) = fitted_world();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let scores = score_pool(&pool, &[], &model, &ensemble, &state, StrategyKind::ObusFull, &mut rng);
        assert!(scores.is_empty());
    }
}
