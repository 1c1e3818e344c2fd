//! Query pool generation and the line-oriented pool text format.
//!
//! Each query draws exactly `q` distinct features by sequential weighted
//! sampling without replacement: every draw picks a feature with probability
//! proportional to its catalog occurrence probability among the features not
//! yet in the query. Train and test pools come from the same stream, so a
//! single seed fixes both.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{FeatureCatalog, FeatureId, Query, QueryPool};
use crate::error::{Error, Result};

/// Generate train and test pools of fixed-cardinality queries.
pub fn generate_pool(
    catalog: &Arc<FeatureCatalog>,
    train_size: usize,
    test_size: usize,
    features_per_query: usize,
    seed: u64,
) -> Result<QueryPool> {
    if features_per_query == 0 {
        return Err(Error::config("features_per_query", "queries need at least one feature"));
    }
    if features_per_query > catalog.len() {
        return Err(Error::config(
            "features_per_query",
            format!(
                "cannot draw {features_per_query} distinct features from a catalog of {}",
                catalog.len()
            ),
        ));
    }
    if train_size == 0 {
        return Err(Error::config("train_size", "train pool must hold at least one query"));
    }
    if test_size == 0 {
        return Err(Error::config("test_size", "test pool must hold at least one query"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights: Vec<f64> = catalog.probs().to_vec();
    let total: f64 = weights.iter().sum();

    let mut draw_query = |rng: &mut ChaCha8Rng| -> Query {
        let mut picked: Vec<FeatureId> = Vec::with_capacity(features_per_query);
        let mut remaining = total;
        for _ in 0..features_per_query {
            let mut target = rng.gen::<f64>() * remaining;
            let mut chosen = None;
            for (i, &w) in weights.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                target -= w;
                if target < 0.0 {
                    chosen = Some(i);
                    break;
                }
            }
            // Rounding can push `target` past every weight; fall back to the
            // last positive-weight feature so the draw always succeeds.
            let idx = chosen.unwrap_or_else(|| {
                weights
                    .iter()
                    .rposition(|&w| w > 0.0)
                    .expect("at least one undrawn feature remains")
            });
            picked.push(FeatureId(idx as u32));
            remaining -= weights[idx];
            weights[idx] = 0.0;
        }
        // Restore the scratch weights for the next query.
        for &f in &picked {
            weights[f.0 as usize] = catalog.prob(f);
        }
        picked.sort_unstable();
        Query::new(picked, catalog).expect("drawn features are distinct and in range")
    };

    let train = (0..train_size).map(|_| draw_query(&mut rng)).collect();
    let test = (0..test_size).map(|_| draw_query(&mut rng)).collect();
    Ok(QueryPool { catalog: Arc::clone(catalog), train, test })
}

/// Write queries one per line as comma-separated feature indices.
pub fn write_queries(queries: &[Query], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    for q in queries {
        let line: Vec<String> = q.features().iter().map(|f| f.0.to_string()).collect();
        writeln!(out, "{}", line.join(",")).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Read queries from the line-oriented format, validating each line against
/// the catalog and requiring a uniform cardinality across lines.
pub fn read_queries(path: &Path, catalog: &FeatureCatalog) -> Result<Vec<Query>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut queries = Vec::new();
    let mut cardinality = None;
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut features = Vec::new();
        for tok in line.split(',') {
            let id: u32 = tok
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad feature index {tok:?}")))?;
            features.push(FeatureId(id));
        }
        let q = Query::new(features, catalog)
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        match cardinality {
            None => cardinality = Some(q.len()),
            Some(c) if c != q.len() => {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("query has {} features but earlier lines have {c}", q.len()),
                ));
            }
            Some(_) => {}
        }
        queries.push(q);
    }
    Ok(queries)
}
