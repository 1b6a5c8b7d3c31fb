use serde::{Deserialize, Serialize};

use crate::model::BaseModel;
use crate::sampler::PosteriorFit;
use crate::table::{fixed, Align, Table};

/// How subject-level terms are handled when tabulating probabilities.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubjectMode {
    /// The average subject: random effects and subject covariates at zero.
    #[default]
    Average,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairProbability {
    pub i: String,
    pub j: String,
    pub i_beats_j: f64,
    pub j_beats_i: f64,
    /// Present only for Davidson models.
    pub tie: Option<f64>,
}

impl PairProbability {
    pub fn odds_ratio(&self) -> f64 {
        self.i_beats_j / (1.0 - self.i_beats_j)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityTable {
    pub mode: SubjectMode,
    pub rows: Vec<PairProbability>,
}

/// Posterior mean of the per-draw outcome probabilities for every unordered
/// pair. Player `i` takes the player1 role; the order effect, when fitted,
/// is applied as in a contest with indicator 1.
pub fn probability_table(fit: &PosteriorFit, mode: SubjectMode) -> ProbabilityTable {
    let info = &fit.info;
    let n = info.n_players();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&info.players[a], &info.players[b]);
        x.to_lowercase().cmp(&y.to_lowercase()).then(x.cmp(y))
    });

    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for (k, &a) in order.iter().enumerate() {
        for &b in &order[k + 1..] {
            pairs.push((a, b));
        }
    }

    let mut sums = vec![[0.0f64; 3]; pairs.len()];
    let mut count = 0usize;
    for theta in fit.draws() {
        let base = info.base_abilities(theta);
        for (acc, &(a, b)) in sums.iter_mut().zip(&pairs) {
            let la = info.ability(theta, &base, a, None, &[]);
            let lb = info.ability(theta, &base, b, None, &[]);
            let lp = info.outcome_log_probabilities(theta, la, lb, 1);
            for (s, l) in acc.iter_mut().zip(lp) {
                *s += l.exp();
            }
        }
        count += 1;
    }
    let davidson = info.spec.base == BaseModel::Davidson;
    let rows = pairs
        .iter()
        .zip(sums)
        .map(|(&(a, b), s)| {
            let c = count as f64;
            PairProbability {
                i: info.players[a].clone(),
                j: info.players[b].clone(),
                i_beats_j: s[0] / c,
                j_beats_i: s[1] / c,
                tie: davidson.then(|| s[2] / c),
            }
        })
        .collect();
    ProbabilityTable { mode, rows }
}

impl ProbabilityTable {
    pub fn to_table(&self, decimals: usize) -> Table {
        let davidson = self.rows.first().is_some_and(|r| r.tie.is_some());
        let mut headers = vec!["i", "j", "i_beats_j", "j_beats_i"];
        if davidson {
            headers.push("i_ties_j");
        }
        headers.push("odds_ratio");
        let mut align = vec![Align::Left, Align::Left];
        align.resize(headers.len(), Align::Right);
        let mut t = Table::new(&headers, &align).with_caption("Estimated posterior probabilites");
        for r in &self.rows {
            let mut row = vec![r.i.clone(), r.j.clone(), fixed(r.i_beats_j, decimals), fixed(r.j_beats_i, decimals)];
            if let Some(tie) = r.tie {
                row.push(fixed(tie, decimals));
            }
            row.push(fixed(r.odds_ratio(), decimals));
            t.push(row);
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::fit_from_draws;
    use super::*;

    #[test]
    fn logistic_oracle() {
        let fit = fit_from_draws(&["a", "b"], "bt", &[vec![1.0, 0.0]]);
        let t = probability_table(&fit, SubjectMode::Average);
        assert_eq!(t.rows.len(), 1);
        assert!((t.rows[0].i_beats_j - 0.7310586).abs() < 1e-7);
        assert!((t.rows[0].j_beats_i - 0.2689414).abs() < 1e-7);
        assert!(t.rows[0].tie.is_none());
    }

    #[test]
    fn equal_abilities_are_a_coin_flip() {
        let fit = fit_from_draws(&["a", "b"], "bt", &[vec![0.4, 0.4]]);
        let r = &probability_table(&fit, SubjectMode::Average).rows[0];
        assert_eq!((r.i_beats_j, r.j_beats_i), (0.5, 0.5));
        assert_eq!(r.odds_ratio(), 1.0);
    }

    #[test]
    fn five_players_give_ten_sorted_rows() {
        let names = ["Tombstone", "DiGiorno", "Freschetta", "Red Barron", "aKroger"];
        let fit = fit_from_draws(&names, "davidson", &[vec![0.1, 0.2, 0.3, 0.4, 0.5, -1.0]]);
        let t = probability_table(&fit, SubjectMode::Average);
        assert_eq!(t.rows.len(), 10);
        assert_eq!((t.rows[0].i.as_str(), t.rows[0].j.as_str()), ("aKroger", "DiGiorno"));
        assert_eq!((t.rows[9].i.as_str(), t.rows[9].j.as_str()), ("Red Barron", "Tombstone"));
        for r in &t.rows {
            let total = r.i_beats_j + r.j_beats_i + r.tie.unwrap();
            assert!((total - 1.0).abs() < 1e-12);
        }
        let text = t.to_table(2).to_text();
        assert!(text.contains("i_ties_j"));
    }

    #[test]
    fn invariant_to_draw_order() {
        let draws = vec![vec![1.0, 0.0, -0.5], vec![-0.3, 0.2, 0.9], vec![0.0, 0.1, 0.0]];
        let mut rev = draws.clone();
        rev.reverse();
        let a = probability_table(&fit_from_draws(&["x", "y", "z"], "bt", &draws), SubjectMode::Average);
        let b = probability_table(&fit_from_draws(&["x", "y", "z"], "bt", &rev), SubjectMode::Average);
        for (r, s) in a.rows.iter().zip(&b.rows) {
            assert!((r.i_beats_j - s.i_beats_j).abs() < 1e-12);
        }
    }
}
