//! Ridge regression over binary feature indicators, per-coefficient
//! confidence intervals, and the sampled model ensemble.
//!
//! The model has no intercept: a query's prediction is the sum of the fitted
//! weights of its active features. Fitting minimizes mean squared error plus
//! `lambda * ||w||^2`, i.e. it solves `(X'X + n*lambda*I) w = X'y` where rows
//! of X are the binary feature indicators of the labeled examples.
//!
//! Each coefficient gets a symmetric t-interval from its marginal standard
//! error; when the error is undefined (fewer than three examples, or a feature
//! present in all or none of them) a fixed fallback half-width stands in.
//! The ensemble draws every member weight uniformly from its interval, and the
//! spread of member predictions is the uncertainty signal used by selection.

use rand::Rng;

use crate::domain::{FeatureId, Query};
use crate::error::{Error, Result};
use crate::numerics::{t_quantile, uniform_sample};

/// One rated query: the training unit for the model.
#[derive(Debug, Clone)]
pub struct LabeledExample {
    pub query: Query,
    pub preference: f64,
}

/// Fit-time knobs.
#[derive(Debug, Clone, Copy)]
pub struct RidgeParams {
    /// Ridge penalty weight on the squared coefficients.
    pub lambda: f64,
    /// Half-width used for a coefficient's interval when its standard error
    /// is undefined.
    pub ci_fallback_half_width: f64,
}

impl Default for RidgeParams {
    fn default() -> Self {
        RidgeParams { lambda: 1.0, ci_fallback_half_width: 17.0 }
    }
}

impl RidgeParams {
    pub fn validate(&self) -> Result<()> {
        if self.lambda < 0.0 || !self.lambda.is_finite() {
            return Err(Error::config("lambda", format!("must be finite and non-negative, got {}", self.lambda)));
        }
        if self.ci_fallback_half_width < 0.0 || !self.ci_fallback_half_width.is_finite() {
            return Err(Error::config(
                "ci_fallback_half_width",
                format!("must be finite and non-negative, got {}", self.ci_fallback_half_width),
            ));
        }
        Ok(())
    }
}

/// One fitted coefficient. `std_error` is `None` when the marginal error is
/// undefined and interval construction must fall back to the fixed width.
#[derive(Debug, Clone, Copy)]
pub struct Coefficient {
    pub feature: FeatureId,
    pub weight: f64,
    pub std_error: Option<f64>,
}

/// A fitted ridge model over a fixed set of active features.
#[derive(Debug, Clone)]
pub struct FittedModel {
    /// Coefficients in ascending feature order.
    coeffs: Vec<Coefficient>,
    /// Residual variance `SSE / (n - 2)`; `None` when `n <= 2`.
    residual_var: Option<f64>,
    /// Number of labeled examples behind the fit.
    n: usize,
    params: RidgeParams,
}

impl FittedModel {
    /// The model before any feedback exists: no coefficients, predicts zero.
    pub fn untrained(params: RidgeParams) -> Self {
        FittedModel { coeffs: Vec::new(), residual_var: None, n: 0, params }
    }

    /// Fit on `examples`, estimating one weight per feature in
    /// `active_features` (deduplicated, sorted internally). Features outside
    /// the active set contribute nothing to predictions.
    pub fn fit(
        examples: &[LabeledExample],
        active_features: &[FeatureId],
        params: RidgeParams,
    ) -> Result<Self> {
        params.validate()?;
        if examples.is_empty() {
            return Err(Error::NoExamples);
        }
        let mut active: Vec<FeatureId> = active_features.to_vec();
        active.sort_unstable();
        active.dedup();
        let p = active.len();
        let n = examples.len();

        // Per-example active-feature column indices (binary design rows).
        let rows: Vec<Vec<usize>> = examples
            .iter()
            .map(|ex| {
                ex.query
                    .features()
                    .iter()
                    .filter_map(|f| active.binary_search(f).ok())
                    .collect()
            })
            .collect();

        // Normal equations: (X'X + n*lambda*I) w = X'y.
        let mut xtx = vec![0.0_f64; p * p];
        let mut xty = vec![0.0_f64; p];
        for (row, ex) in rows.iter().zip(examples) {
            for &a in row {
                xty[a] += ex.preference;
                for &b in row {
                    xtx[a * p + b] += 1.0;
                }
            }
        }
        let shift = n as f64 * params.lambda;
        for j in 0..p {
            xtx[j * p + j] += shift;
        }
        let weights = cholesky_solve(&mut xtx, &xty, p);

        // Residuals against the fitted predictions.
        let sse: f64 = rows
            .iter()
            .zip(examples)
            .map(|(row, ex)| {
                let pred: f64 = row.iter().map(|&j| weights[j]).sum();
                (ex.preference - pred).powi(2)
            })
            .sum();
        let residual_var = if n > 2 { Some(sse / (n - 2) as f64) } else { None };

        // Marginal standard error per feature: sqrt(residual_var / S_xx) with
        // S_xx the centered sum of squares of that feature's indicator column.
        // A column that is constant over the examples has S_xx = 0 and no
        // finite error.
        let mut present_counts = vec![0usize; p];
        for row in &rows {
            for &j in row {
                present_counts[j] += 1;
            }
        }
        let coeffs = active
            .iter()
            .zip(&weights)
            .zip(&present_counts)
            .map(|((&feature, &weight), &c)| {
                let std_error = match residual_var {
                    Some(rv) if c > 0 && c < n => {
                        let mean = c as f64 / n as f64;
                        let s_xx = c as f64 * (1.0 - mean);
                        Some((rv / s_xx).sqrt())
                    }
                    _ => None,
                };
                Coefficient { feature, weight, std_error }
            })
            .collect();

        Ok(FittedModel { coeffs, residual_var, n, params })
    }

    /// Coefficients in ascending feature order.
    pub fn coefficients(&self) -> &[Coefficient] {
        &self.coeffs
    }

    /// Number of labeled examples behind the fit.
    pub fn n_examples(&self) -> usize {
        self.n
    }

    /// Residual variance, if defined (`n > 2`).
    pub fn residual_var(&self) -> Option<f64> {
        self.residual_var
    }

    pub fn params(&self) -> RidgeParams {
        self.params
    }

    /// Sum of fitted weights over the query's active features.
    pub fn predict(&self, query: &Query) -> f64 {
        query
            .features()
            .iter()
            .filter_map(|f| {
                self.coeffs
                    .binary_search_by_key(f, |c| c.feature)
                    .ok()
                    .map(|j| self.coeffs[j].weight)
            })
            .sum()
    }

    /// Symmetric confidence interval for the coefficient at `pos`.
    ///
    /// With more than two examples and a defined standard error this is the
    /// t-interval `w ± t(alpha/2, n-2) * se`; otherwise it is the fixed
    /// fallback `w ± ci_fallback_half_width`.
    pub fn confidence_interval(&self, pos: usize, alpha: f64) -> Result<(f64, f64)> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("alpha must be in (0, 1), got {alpha}")));
        }
        let coeff = &self.coeffs[pos];
        let half = match (self.n > 2, coeff.std_error) {
            (true, Some(se)) => {
                let df = (self.n - 2) as u32;
                t_quantile(alpha / 2.0, df)? * se
            }
            _ => self.params.ci_fallback_half_width,
        };
        Ok((coeff.weight - half, coeff.weight + half))
    }

    /// Draw an ensemble: each member samples every weight uniformly from that
    /// coefficient's confidence interval, independently across members and
    /// coefficients.
    pub fn sample_ensemble<R: Rng + ?Sized>(
        &self,
        n_members: usize,
        alpha: f64,
        rng: &mut R,
    ) -> Result<ModelEnsemble> {
        if n_members == 0 {
            return Err(Error::config("ensemble_size", "ensemble needs at least one member"));
        }
        let intervals: Vec<(f64, f64)> = (0..self.coeffs.len())
            .map(|j| self.confidence_interval(j, alpha))
            .collect::<Result<_>>()?;
        let members = (0..n_members)
            .map(|_| {
                intervals
                    .iter()
                    .map(|&(lo, hi)| uniform_sample(lo, hi, rng))
                    .collect()
            })
            .collect();
        Ok(ModelEnsemble {
            features: self.coeffs.iter().map(|c| c.feature).collect(),
            members,
        })
    }
}

/// A bag of weight vectors over a shared active-feature set. The spread of
/// member predictions is the model-uncertainty signal.
#[derive(Debug, Clone)]
pub struct ModelEnsemble {
    /// Active features in ascending order, shared by every member.
    pub features: Vec<FeatureId>,
    /// Member weight vectors, parallel to `features`.
    pub members: Vec<Vec<f64>>,
}

impl ModelEnsemble {
    /// Prediction of one member for a query.
    pub fn predict_member(&self, member: usize, query: &Query) -> f64 {
        let weights = &self.members[member];
        query
            .features()
            .iter()
            .filter_map(|f| self.features.binary_search(f).ok().map(|j| weights[j]))
            .sum()
    }

    /// Population standard deviation of member predictions for a query.
    pub fn predictive_sd(&self, query: &Query) -> f64 {
        let m = self.members.len();
        debug_assert!(m > 0, "ensemble cannot be empty");
        let preds: Vec<f64> = (0..m).map(|i| self.predict_member(i, query)).collect();
        let mean = preds.iter().sum::<f64>() / m as f64;
        let var = preds.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / m as f64;
        var.sqrt()
    }

    /// Number of members.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Solve the symmetric positive semi-definite system `A w = b` (A row-major,
/// `p` x `p`) by Cholesky factorization with a drop tolerance: a pivot that
/// falls below `1e-10 * max(1, max diagonal)` marks its column as linearly
/// dependent and pins that weight to zero. For the (always consistent) normal
/// equations this still returns a least-squares solution, which is what makes
/// an unpenalized fit on rank-deficient designs safe.
fn cholesky_solve(a: &mut [f64], b: &[f64], p: usize) -> Vec<f64> {
    if p == 0 {
        return Vec::new();
    }
    let max_diag = (0..p).map(|j| a[j * p + j]).fold(0.0_f64, f64::max);
    let tol = 1e-10 * max_diag.max(1.0);

    // In-place lower factor; dropped columns keep a zero pivot.
    for j in 0..p {
        let mut d = a[j * p + j];
        for k in 0..j {
            d -= a[j * p + k] * a[j * p + k];
        }
        if d <= tol {
            a[j * p + j] = 0.0;
            for i in (j + 1)..p {
                a[i * p + j] = 0.0;
            }
            continue;
        }
        let l_jj = d.sqrt();
        a[j * p + j] = l_jj;
        for i in (j + 1)..p {
            let mut s = a[i * p + j];
            for k in 0..j {
                s -= a[i * p + k] * a[j * p + k];
            }
            a[i * p + j] = s / l_jj;
        }
    }

    // Forward substitution L y = b, zero pivots produce zero components.
    let mut y = vec![0.0_f64; p];
    for j in 0..p {
        if a[j * p + j] == 0.0 {
            continue;
        }
        let mut s = b[j];
        for k in 0..j {
            s -= a[j * p + k] * y[k];
        }
        y[j] = s / a[j * p + j];
    }
    // Back substitution L' w = y.
    let mut w = vec![0.0_f64; p];
    for j in (0..p).rev() {
        if a[j * p + j] == 0.0 {
            continue;
        }
        let mut s = y[j];
        for i in (j + 1)..p {
            s -= a[i * p + j] * w[i];
        }
        w[j] = s / a[j * p + j];
    }
    w
}
