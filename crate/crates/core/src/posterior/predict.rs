use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{compose_ability, CompiledModel, Extension, Outcome};
use crate::sampler::PosteriorFit;

/// A covariate value given either in the data's original units or directly
/// in standardized units (e.g. `Standardized(2.0)` for "+2 sd").
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CovariateValue {
    Raw(f64),
    Standardized(f64),
}

/// A hypothetical contest. Subject-level random effects are set to the
/// average subject (zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictQuery {
    pub player0: String,
    pub player1: String,
    pub covariates: Vec<(String, CovariateValue)>,
    pub order_indicator: u8,
}

impl PredictQuery {
    pub fn new(player0: impl Into<String>, player1: impl Into<String>) -> Self {
        PredictQuery { player0: player0.into(), player1: player1.into(), covariates: Vec::new(), order_indicator: 1 }
    }

    pub fn with_covariate(mut self, name: impl Into<String>, value: CovariateValue) -> Self {
        self.covariates.push((name.into(), value));
        self
    }

    pub fn with_order_indicator(mut self, z: u8) -> Self {
        self.order_indicator = z;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveDraw {
    /// Index into the pooled draws (chain-major).
    pub draw: usize,
    pub player1_wins: f64,
    pub player0_wins: f64,
    pub tie: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveRecord {
    pub query: PredictQuery,
    pub player1_wins: f64,
    pub player0_wins: f64,
    pub tie: f64,
    pub draws: Vec<PredictiveDraw>,
}

fn standardized_covariates(fit: &PosteriorFit, q: &PredictQuery) -> Result<Vec<f64>> {
    if !fit.info.spec.has(Extension::SubjectPredictors) {
        return Ok(Vec::new());
    }
    let st = &fit.info.subject_standardization;
    st.names
        .iter()
        .enumerate()
        .map(|(k, name)| match q.covariates.iter().find(|(n, _)| n == name) {
            Some((_, CovariateValue::Raw(x))) => Ok(st.apply(k, *x)),
            Some((_, CovariateValue::Standardized(x))) => Ok(*x),
            None => Err(Error::MissingCovariate(name.clone())),
        })
        .collect()
}

/// Evenly spaced indices into `total` draws; all of them when `wanted` is 0
/// or at least `total`.
fn thinned(total: usize, wanted: usize) -> Vec<usize> {
    if wanted == 0 || wanted >= total {
        return (0..total).collect();
    }
    (0..wanted).map(|k| k * total / wanted).collect()
}

/// Posterior predictive distribution of new contests.
pub fn predict(
    fit: &PosteriorFit,
    queries: &[PredictQuery],
    draws_per_row: usize,
    seed: u64,
) -> Result<Vec<PredictiveRecord>> {
    let info = &fit.info;
    let pooled: Vec<&[f64]> = fit.draws().collect();
    let picks = thinned(pooled.len(), draws_per_row);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut out = Vec::with_capacity(queries.len());
    for q in queries {
        let p0 = info.player_index(&q.player0).ok_or_else(|| Error::UnknownPlayer(q.player0.clone()))?;
        let p1 = info.player_index(&q.player1).ok_or_else(|| Error::UnknownPlayer(q.player1.clone()))?;
        let x = standardized_covariates(fit, q)?;
        let mut draws = Vec::with_capacity(picks.len());
        let mut mean = [0.0; 3];
        for &d in &picks {
            let theta = pooled[d];
            let base = info.base_abilities(theta);
            let a = info.ability(theta, &base, p1, None, &x);
            let b = info.ability(theta, &base, p0, None, &x);
            let p = info.outcome_log_probabilities(theta, a, b, q.order_indicator).map(f64::exp);
            let u: f64 = rng.random();
            let outcome = if u < p[0] {
                Outcome::Player1Wins
            } else if u < p[0] + p[1] || p[2] == 0.0 {
                Outcome::Player0Wins
            } else {
                Outcome::Tie
            };
            for (m, v) in mean.iter_mut().zip(p) {
                *m += v;
            }
            draws.push(PredictiveDraw { draw: d, player1_wins: p[0], player0_wins: p[1], tie: p[2], outcome });
        }
        let n = picks.len().max(1) as f64;
        out.push(PredictiveRecord {
            query: q.clone(),
            player1_wins: mean[0] / n,
            player0_wins: mean[1] / n,
            tie: mean[2] / n,
            draws,
        });
    }
    Ok(out)
}

/// Observed outcome frequencies next to their posterior predictive
/// expectations, both as fractions ordered (player1 wins, player0 wins, tie).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRates {
    pub observed: [f64; 3],
    pub predicted: [f64; 3],
}

pub fn predictive_outcome_rates(model: &CompiledModel, fit: &PosteriorFit) -> Result<OutcomeRates> {
    if model.fingerprint != fit.data_fingerprint {
        return Err(Error::DataFingerprintMismatch {
            expected: fit.data_fingerprint.clone(),
            found: model.fingerprint.clone(),
        });
    }
    let n = model.contests.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut observed = [0.0; 3];
    for c in &model.contests {
        observed[CompiledModel::outcome_index(c.outcome)] += 1.0;
    }
    let mut predicted = [0.0; 3];
    let mut count = 0usize;
    for theta in fit.draws() {
        for c in &model.contests {
            let (a, b) = compose_ability(model, theta, c)?;
            let p = model.outcome_log_probabilities(theta, a, b, c.order_indicator);
            for (s, l) in predicted.iter_mut().zip(p) {
                *s += l.exp();
            }
        }
        count += 1;
    }
    let denom = (count * n) as f64;
    Ok(OutcomeRates { observed: observed.map(|x| x / n as f64), predicted: predicted.map(|x| x / denom) })
}

#[cfg(test)]
mod tests {
    use super::super::test_support::fit_from_draws;
    use super::*;

    #[test]
    fn identical_players_are_even() {
        let draws: Vec<Vec<f64>> = (0..50).map(|i| vec![0.1 * i as f64, 0.1 * i as f64]).collect();
        let fit = fit_from_draws(&["a", "b"], "bt", &draws);
        let r = predict(&fit, &[PredictQuery::new("a", "b")], 0, 1).unwrap();
        assert_eq!(r[0].draws.len(), 50);
        assert!((r[0].player1_wins - 0.5).abs() < 1e-12);
    }

    #[test]
    fn seeded_and_thinned() {
        let draws: Vec<Vec<f64>> = (0..100).map(|i| vec![0.01 * i as f64, 0.0]).collect();
        let fit = fit_from_draws(&["a", "b"], "bt", &draws);
        let q = [PredictQuery::new("a", "b")];
        let x = predict(&fit, &q, 10, 9).unwrap();
        let y = predict(&fit, &q, 10, 9).unwrap();
        assert_eq!(x, y);
        let idx: Vec<usize> = x[0].draws.iter().map(|d| d.draw).collect();
        assert_eq!(idx, (0..10).map(|k| 10 * k).collect::<Vec<_>>());
    }

    #[test]
    fn unknown_player_is_an_error() {
        let fit = fit_from_draws(&["a", "b"], "bt", &[vec![0.0, 0.0]]);
        let err = predict(&fit, &[PredictQuery::new("a", "zz")], 0, 0).unwrap_err();
        assert!(matches!(err, Error::UnknownPlayer(p) if p == "zz"));
    }

    #[test]
    fn thinning_bounds() {
        assert_eq!(thinned(5, 0), vec![0, 1, 2, 3, 4]);
        assert_eq!(thinned(5, 9).len(), 5);
        assert_eq!(thinned(10, 4), vec![0, 2, 5, 7]);
    }
}
