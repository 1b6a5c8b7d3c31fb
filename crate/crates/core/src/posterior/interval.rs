use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntervalKind {
    Hpd,
    EqualTailed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub mean: f64,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
    pub kind: IntervalKind,
    pub mass: f64,
}

/// Quantile with linear interpolation between order statistics (R type 7).
pub fn quantile(sorted: &[f64], prob: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * prob;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Narrowest window of `ceil(mass * S)` consecutive sorted draws.
///
/// Among equally narrow windows the one centered closest to the median is
/// chosen, then the one with the smallest lower bound.
pub fn hpd_interval(sorted: &[f64], mass: f64) -> (f64, f64) {
    let n = sorted.len();
    if n < 2 {
        return (sorted[0], sorted[0]);
    }
    let m = ((mass * n as f64).ceil() as usize).clamp(1, n);
    let median = quantile(sorted, 0.5);
    let mut best = 0;
    for i in 1..=n - m {
        let width = sorted[i + m - 1] - sorted[i];
        let best_width = sorted[best + m - 1] - sorted[best];
        if width < best_width {
            best = i;
        } else if width == best_width {
            let off = |j: usize| (0.5 * (sorted[j] + sorted[j + m - 1]) - median).abs();
            if off(i) < off(best) {
                best = i;
            }
        }
    }
    (sorted[best], sorted[best + m - 1])
}

pub fn equal_tailed_interval(sorted: &[f64], mass: f64) -> (f64, f64) {
    let tail = 0.5 * (1.0 - mass);
    (quantile(sorted, tail), quantile(sorted, 1.0 - tail))
}

/// Point summaries and an interval for a set of draws (any order).
pub fn interval_estimate(draws: &[f64], kind: IntervalKind, mass: f64) -> IntervalEstimate {
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    let (lower, upper) = match kind {
        IntervalKind::Hpd => hpd_interval(&sorted, mass),
        IntervalKind::EqualTailed => equal_tailed_interval(&sorted, mass),
    };
    IntervalEstimate { mean, median: quantile(&sorted, 0.5), lower, upper, kind, mass }
}
