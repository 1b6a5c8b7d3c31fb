//! Pareto-smoothed importance sampling.

use crate::error::{Error, Result};
use crate::model::log_sum_exp;

const MIN_TAIL: usize = 5;

/// Below this many draws the tail is too short to smooth and plain
/// importance sampling is used instead.
pub const MIN_DRAWS_FOR_SMOOTHING: usize = 50;

/// Profile-likelihood fit of a generalized Pareto distribution to positive
/// exceedances (sorted ascending), following Zhang & Stephens (2009) with
/// the weakly informative shrinkage of the shape towards 0.5 used by
/// PSIS implementations. Returns `(k, sigma)`.
pub fn fit_generalized_pareto(x: &[f64]) -> Result<(f64, f64)> {
    let n = x.len();
    let positive = x.iter().filter(|v| **v > 0.0).count();
    if positive < MIN_TAIL {
        return Err(Error::TooFewTailSamples(positive));
    }
    let prior = 3.0;
    let m = 30 + (n as f64).sqrt().floor() as usize;
    let xstar = x[((n as f64 / 4.0 + 0.5).floor() as usize).max(1) - 1];
    let x_max = x[n - 1];

    let theta: Vec<f64> =
        (1..=m).map(|j| 1.0 / x_max + (1.0 - (m as f64 / (j as f64 - 0.5)).sqrt()) / prior / xstar).collect();
    let profile: Vec<f64> = theta
        .iter()
        .map(|&t| {
            let a = -t;
            let k = x.iter().map(|v| (a * v).ln_1p()).sum::<f64>() / n as f64;
            n as f64 * ((a / k).ln() - k - 1.0)
        })
        .collect();
    let norm = log_sum_exp(&profile);
    let theta_hat: f64 = theta
        .iter()
        .zip(&profile)
        .map(|(t, l)| {
            let w = (l - norm).exp();
            if w.is_finite() {
                t * w
            } else {
                0.0
            }
        })
        .sum();

    let k = x.iter().map(|v| (-theta_hat * v).ln_1p()).sum::<f64>() / n as f64;
    let sigma = -k / theta_hat;
    let k = (k * n as f64 + 0.5 * 10.0) / (n as f64 + 10.0);
    Ok((if k.is_nan() { f64::INFINITY } else { k }, sigma))
}

/// Quantile function of the generalized Pareto distribution (location 0).
fn gpd_quantile(p: f64, k: f64, sigma: f64) -> f64 {
    if k == 0.0 {
        -sigma * (-p).ln_1p()
    } else {
        sigma * (-k * (-p).ln_1p()).exp_m1() / k
    }
}

/// Number of largest ratios replaced by GPD order statistics.
pub fn tail_length(draws: usize) -> usize {
    let s = draws as f64;
    (0.2 * s).min(3.0 * s.sqrt()).ceil() as usize
}

/// Smoothed and truncated log weights, shifted so the largest raw log ratio
/// is 0, plus the Pareto shape estimate (`NaN` when it is undefined).
pub fn smooth_log_ratios(log_ratios: &[f64]) -> (Vec<f64>, f64) {
    let s = log_ratios.len();
    let max = log_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut lw: Vec<f64> = log_ratios.iter().map(|r| r - max).collect();
    let mut khat = f64::NAN;

    let m = tail_length(s);
    if s >= MIN_DRAWS_FOR_SMOOTHING && m >= MIN_TAIL && m < s {
        let mut order: Vec<usize> = (0..s).collect();
        order.sort_by(|&a, &b| lw[a].total_cmp(&lw[b]));
        let tail_ids = &order[s - m..];
        let tail: Vec<f64> = tail_ids.iter().map(|&i| lw[i]).collect();
        let spread = tail[m - 1] - tail[0];
        if spread.abs() >= f64::EPSILON / 100.0 {
            let cutoff = lw[order[s - m - 1]].exp();
            let exceed: Vec<f64> = tail.iter().map(|t| t.exp() - cutoff).collect();
            if let Ok((k, sigma)) = fit_generalized_pareto(&exceed) {
                khat = k;
                if k.is_finite() {
                    for (r, &i) in tail_ids.iter().enumerate() {
                        let p = (r as f64 + 0.5) / m as f64;
                        lw[i] = (gpd_quantile(p, k, sigma) + cutoff).ln();
                    }
                }
            }
        }
    }
    // truncate at the raw maximum
    for w in &mut lw {
        if *w > 0.0 {
            *w = 0.0;
        }
    }
    (lw, khat)
}

/// Normalized PSIS log weights (they log-sum-exp to 0) and `k`.
pub fn psis_log_weights(log_ratios: &[f64]) -> (Vec<f64>, f64) {
    let (mut lw, khat) = smooth_log_ratios(log_ratios);
    let norm = log_sum_exp(&lw);
    for w in &mut lw {
        *w -= norm;
    }
    (lw, khat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gpd_sample(k: f64, sigma: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x: Vec<f64> = (0..n).map(|_| gpd_quantile(rng.random::<f64>(), k, sigma)).collect();
        x.sort_by(f64::total_cmp);
        x
    }

    #[test]
    fn recovers_heavy_tail_shape() {
        let (k, sigma) = fit_generalized_pareto(&gpd_sample(0.5, 1.0, 10_000, 1)).unwrap();
        assert!((k - 0.5).abs() < 0.1, "k = {k}");
        assert!((sigma - 1.0).abs() < 0.15, "sigma = {sigma}");
    }

    #[test]
    fn exponential_tail_has_zero_shape() {
        let (k, _) = fit_generalized_pareto(&gpd_sample(0.0, 2.0, 10_000, 2)).unwrap();
        assert!(k.abs() < 0.1, "k = {k}");
    }

    #[test]
    fn four_points_are_too_few() {
        let err = fit_generalized_pareto(&[0.1, 0.2, 0.3, 0.4]).unwrap_err();
        assert!(matches!(err, Error::TooFewTailSamples(4)));
    }

    #[test]
    fn tail_lengths() {
        assert_eq!(tail_length(100), 20);
        assert_eq!(tail_length(4000), 190);
    }

    #[test]
    fn weights_never_exceed_raw_maximum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ratios: Vec<f64> = (0..1000).map(|_| 3.0 * rng.random::<f64>().powi(3)).collect();
        let (smoothed, k) = smooth_log_ratios(&ratios);
        assert!(k.is_finite());
        assert!(smoothed.iter().all(|w| *w <= 0.0));
        let (lw, _) = psis_log_weights(&ratios);
        assert!(log_sum_exp(&lw).abs() < 1e-12);
    }
}
