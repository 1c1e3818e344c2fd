//! Small numeric toolbox: seeded sampling helpers and the Student-t quantile.
//!
//! The t quantile is hand-rolled (log-gamma + regularized incomplete beta +
//! bisection) rather than pulled from a stats crate; the three functions below
//! are short, and the quantile only has to be good to ~1e-4 for interval
//! construction. In practice it is accurate to ~1e-10.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// One draw from N(mean, sd^2). `sd == 0` returns `mean` exactly instead of
/// going through the distribution machinery, so degenerate configs stay exact.
pub fn gaussian_sample<R: Rng + ?Sized>(mean: f64, sd: f64, rng: &mut R) -> f64 {
    if sd == 0.0 {
        return mean;
    }
    // `sd` is validated non-negative by every caller's config, so `unwrap` is
    // unreachable in practice; keep it loud rather than silently clamping.
    Normal::new(mean, sd).expect("gaussian sd must be non-negative").sample(rng)
}

/// One draw from U[lo, hi). A zero-width interval returns `lo` exactly.
pub fn uniform_sample<R: Rng + ?Sized>(lo: f64, hi: f64, rng: &mut R) -> f64 {
    if lo == hi {
        return lo;
    }
    rng.gen_range(lo..hi)
}

/// ln Γ(x) for x > 0, Lanczos approximation (g = 7, n = 9).
/// Good to ~1e-13 relative over the range used here.
pub fn ln_gamma(x: f64) -> f64 {
    // Published coefficients, quoted in full even past f64 resolution.
    #[allow(clippy::excessive_precision)]
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    debug_assert!(x > 0.0, "ln_gamma domain is x > 0");
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1-x) = π / sin(πx).
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta I_x(a, b) via the Lentz continued fraction,
/// using the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) to stay in the region where
/// the fraction converges quickly.
pub fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0, "inc_beta needs positive shape parameters");
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Continued-fraction core of the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        // Even step.
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        // Odd step.
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Upper-tail probability P(T > t) for Student's t with `df` degrees of
/// freedom, valid for t >= 0.
fn t_upper_tail(t: f64, df: f64) -> f64 {
    let x = df / (df + t * t);
    0.5 * inc_beta(0.5 * df, 0.5, x)
}

/// Upper-tail Student-t quantile: the `t >= 0` with P(T > t) = `upper_tail_prob`.
///
/// `upper_tail_prob` must lie in (0, 0.5] (the symmetric-interval use case) and
/// `df >= 1`. Solved by bisection on the monotone tail function; accuracy is
/// far inside the 1e-4 contract the interval code relies on.
pub fn t_quantile(upper_tail_prob: f64, df: u32) -> Result<f64> {
    if df == 0 {
        return Err(Error::Domain("t quantile needs at least 1 degree of freedom".into()));
    }
    if !(upper_tail_prob > 0.0 && upper_tail_prob <= 0.5) {
        return Err(Error::Domain(format!(
            "upper tail probability must be in (0, 0.5], got {upper_tail_prob}"
        )));
    }
    if upper_tail_prob == 0.5 {
        return Ok(0.0);
    }
    let dff = f64::from(df);
    // Bracket the root: tail(0) = 0.5 > p, grow hi until tail(hi) < p.
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    while t_upper_tail(hi, dff) > upper_tail_prob {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Domain(format!(
                "t quantile failed to bracket tail probability {upper_tail_prob}"
            )));
        }
    }
    // Bisection: 200 halvings is overkill but cheap; the tail function is
    // strictly decreasing so this cannot stall.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if t_upper_tail(mid, dff) > upper_tail_prob {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_sd_gaussian_returns_mean_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(gaussian_sample(5.0, 0.0, &mut rng), 5.0);
        assert_eq!(gaussian_sample(-3.25, 0.0, &mut rng), -3.25);
    }

    #[test]
    fn gaussian_moments_match_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let samples: Vec<f64> = (0..n).map(|_| gaussian_sample(0.0, 1.0, &mut rng)).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n as f64;
        // 3-sigma bands for the seeded sample.
        assert!(mean.abs() < 0.02, "sample mean {mean} too far from 0");
        assert!((var.sqrt() - 1.0).abs() < 0.02, "sample sd {} too far from 1", var.sqrt());
    }

    #[test]
    fn gaussian_is_deterministic_in_seed() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..10).map(|_| gaussian_sample(8.0, 3.0, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn uniform_sample_handles_degenerate_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(uniform_sample(2.5, 2.5, &mut rng), 2.5);
        for _ in 0..1000 {
            let v = uniform_sample(-1.0, 1.0, &mut rng);
            assert!((-1.0..1.0).contains(&v));
        }
    }

    #[test]
    fn ln_gamma_matches_known_values() {
        // Γ(1) = Γ(2) = 1, Γ(5) = 24, Γ(0.5) = sqrt(π).
        assert_abs_diff_eq!(ln_gamma(1.0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ln_gamma(2.0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ln_gamma(5.0), 24.0_f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(ln_gamma(0.5), std::f64::consts::PI.sqrt().ln(), epsilon = 1e-12);
    }

    #[test]
    fn inc_beta_matches_closed_forms() {
        // I_x(1, 1) = x; I_x(2, 1) = x^2; I_x(1, 2) = 1 - (1-x)^2.
        for &x in &[0.1, 0.35, 0.5, 0.9] {
            assert_abs_diff_eq!(inc_beta(1.0, 1.0, x), x, epsilon = 1e-12);
            assert_abs_diff_eq!(inc_beta(2.0, 1.0, x), x * x, epsilon = 1e-12);
            assert_abs_diff_eq!(inc_beta(1.0, 2.0, x), 1.0 - (1.0 - x) * (1.0 - x), epsilon = 1e-12);
        }
        assert_eq!(inc_beta(3.0, 4.0, 0.0), 0.0);
        assert_eq!(inc_beta(3.0, 4.0, 1.0), 1.0);
    }

    // Reference quantiles from standard t tables.
    #[test]
    fn t_quantile_matches_reference_tables() {
        let cases = [
            // (upper tail, df, expected)
            (0.05, 1, 6.3138),
            (0.05, 2, 2.9200),
            (0.05, 5, 2.0150),
            (0.05, 10, 1.8125),
            (0.025, 1, 12.7062),
            (0.025, 10, 2.2281),
            (0.025, 30, 2.0423),
            (0.005, 30, 2.7500),
            (0.25, 5, 0.7267),
        ];
        for (p, df, expected) in cases {
            let got = t_quantile(p, df).unwrap();
            assert!(
                (got - expected).abs() < 1e-4,
                "t({p}, {df}) = {got}, expected {expected}"
            );
        }
    }

    #[test]
    fn t_quantile_approaches_normal_quantile_for_large_df() {
        // z_{0.05} = 1.6449 to 4 decimals.
        let got = t_quantile(0.05, 1_000_000).unwrap();
        assert!((got - 1.6449).abs() < 1e-3, "t(0.05, 1e6) = {got}");
    }

    #[test]
    fn t_quantile_rejects_bad_domain() {
        assert!(t_quantile(0.05, 0).is_err());
        assert!(t_quantile(0.0, 5).is_err());
        assert!(t_quantile(0.6, 5).is_err());
        assert!(t_quantile(-0.1, 5).is_err());
        assert_eq!(t_quantile(0.5, 3).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn t_quantile_decreases_as_df_grows(df in 1u32..60) {
            let a = t_quantile(0.05, df).unwrap();
            let b = t_quantile(0.05, df + 1).unwrap();
            prop_assert!(a > b, "t(0.05, {}) = {} should exceed t(0.05, {}) = {}", df, a, df + 1, b);
        }

        #[test]
        fn t_quantile_decreases_as_tail_grows(p in 0.01f64..0.49) {
            let a = t_quantile(p, 7).unwrap();
            let b = t_quantile(p + 0.01, 7).unwrap();
            prop_assert!(a > b);
        }

        #[test]
        fn t_quantile_is_nonnegative(p in 0.001f64..0.5, df in 1u32..200) {
            prop_assert!(t_quantile(p, df).unwrap() >= 0.0);
        }

        #[test]
        fn inc_beta_is_monotone_in_x(a in 0.5f64..20.0, b in 0.5f64..20.0, x in 0.01f64..0.98) {
            let lo = inc_beta(a, b, x);
            let hi = inc_beta(a, b, x + 0.01);
            prop_assert!(hi >= lo - 1e-12);
        }
    }
}
