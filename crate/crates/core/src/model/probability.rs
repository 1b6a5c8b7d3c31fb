/// `ln(exp(a_1) + ... + exp(a_n))` without overflow.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `ln(1 + exp(x))`.
pub fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Probability that player `i` beats player `j`, with the order effect `gamma`
/// added to `j` when the order indicator `z` is 1.
pub fn bt_win_probability(lambda_i: f64, lambda_j: f64, gamma: Option<f64>, z: u8) -> f64 {
    let shifted_j = match gamma {
        Some(g) if z != 0 => lambda_j + g,
        _ => lambda_j,
    };
    logistic(lambda_i - shifted_j)
}

/// `(P[i beats j], P[j beats i])`. The less likely side is computed directly
/// and the other as its complement, so the pair sums to exactly 1.
pub fn bt_probabilities(lambda_i: f64, lambda_j: f64, gamma: Option<f64>, z: u8) -> (f64, f64) {
    let p = bt_win_probability(lambda_i, lambda_j, gamma, z);
    if p <= 0.5 {
        (p, 1.0 - p)
    } else {
        let q = bt_win_probability(lambda_j, lambda_i, gamma.map(|g| -g), z);
        (1.0 - q, q)
    }
}

/// Log-probabilities `(i wins, j wins, tie)` of the Davidson model.
pub fn davidson_log_probabilities(lambda_i: f64, lambda_j: f64, nu: f64, gamma: Option<f64>, z: u8) -> [f64; 3] {
    let b = match gamma {
        Some(g) if z != 0 => lambda_j + g,
        _ => lambda_j,
    };
    let a = lambda_i;
    let t = nu + 0.5 * (a + b);
    let norm = log_sum_exp(&[a, b, t]);
    [a - norm, b - norm, t - norm]
}

/// Probabilities `(i wins, j wins, tie)` of the Davidson model.
pub fn davidson_probabilities(lambda_i: f64, lambda_j: f64, nu: f64, gamma: Option<f64>, z: u8) -> (f64, f64, f64) {
    let [a, b, t] = davidson_log_probabilities(lambda_i, lambda_j, nu, gamma, z);
    (a.exp(), b.exp(), t.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bt_examples() {
        assert_eq!(bt_win_probability(0.3, 0.3, None, 1), 0.5);
        assert!((bt_win_probability(1.0, 0.0, None, 1) - 0.731_058_578_630_004_9).abs() < 1e-15);
        assert!((bt_win_probability(0.0, 0.0, Some(2f64.ln()), 1) - 1.0 / 3.0).abs() < 1e-15);
        // order indicator 0 switches the effect off
        assert_eq!(bt_win_probability(0.0, 0.0, Some(2f64.ln()), 0), 0.5);
    }

    #[test]
    fn davidson_examples() {
        let (a, b, t) = davidson_probabilities(0.0, 0.0, 0.0, None, 1);
        for p in [a, b, t] {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }

        let (a, b, t) = davidson_probabilities(0.0, 0.0, -30.0, None, 1);
        assert!((a - 0.5).abs() < 1e-9 && (b - 0.5).abs() < 1e-9);
        // exp(-30) / (2 + exp(-30))
        assert!((t - 4.678_811_484_419_868_4e-14).abs() < 1e-26);

        // (e, 1, sqrt(e)) / (e + 1 + sqrt(e))
        let e = std::f64::consts::E;
        let z = e + 1.0 + e.sqrt();
        let (a, b, t) = davidson_probabilities(1.0, 0.0, 0.0, None, 1);
        assert!((a - e / z).abs() < 1e-14 && (b - 1.0 / z).abs() < 1e-14 && (t - e.sqrt() / z).abs() < 1e-14);
        assert!((a - 0.50648).abs() < 1e-5 && (b - 0.18632).abs() < 1e-5 && (t - 0.30719).abs() < 1e-5);
    }

    #[test]
    fn order_effect_shifts_tie_average() {
        let with = davidson_probabilities(0.2, -0.1, 0.3, Some(0.4), 1);
        let manual = davidson_probabilities(0.2, 0.3, 0.3, None, 1);
        assert!((with.2 - manual.2).abs() < 1e-15);
    }

    #[test]
    fn log_sum_exp_handles_large_values() {
        assert!((log_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert!((log1p_exp(800.0) - 800.0).abs() < 1e-12);
        assert!((log1p_exp(0.0) - 2f64.ln()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn bt_pair_sums_to_one(li in -20.0f64..20.0, lj in -20.0f64..20.0, g in -3.0f64..3.0) {
            let (p, q) = bt_probabilities(li, lj, Some(g), 1);
            prop_assert_eq!(p + q, 1.0);
            prop_assert!((p - bt_win_probability(li, lj, Some(g), 1)).abs() < 1e-15);
        }

        #[test]
        fn bt_monotone(li in -5.0f64..5.0, lj in -5.0f64..5.0, d in 0.01f64..1.0) {
            let p = bt_win_probability(li, lj, None, 1);
            prop_assert!(bt_win_probability(li + d, lj, None, 1) > p);
            prop_assert!(bt_win_probability(li, lj + d, None, 1) < p);
        }

        #[test]
        fn zero_gamma_is_neutral(li in -5.0f64..5.0, lj in -5.0f64..5.0, nu in -3.0f64..3.0) {
            prop_assert_eq!(bt_win_probability(li, lj, Some(0.0), 1), bt_win_probability(li, lj, None, 1));
            prop_assert_eq!(davidson_probabilities(li, lj, nu, Some(0.0), 1), davidson_probabilities(li, lj, nu, None, 1));
        }
    }
}
