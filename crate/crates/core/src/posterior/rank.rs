use serde::{Deserialize, Serialize};

use super::interval::quantile;
use crate::sampler::PosteriorFit;
use crate::table::{fixed, Align, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerRank {
    pub player: String,
    pub median: f64,
    pub mean: f64,
    pub sd: f64,
}

/// Posterior rank distribution, sorted by median then mean rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSummary {
    pub players: Vec<PlayerRank>,
}

/// Ranks (1 = highest) of one draw of abilities; exact ties keep registry order.
pub(crate) fn ranks_of(abilities: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..abilities.len()).collect();
    // stable sort keeps registry order among equal abilities
    order.sort_by(|&a, &b| abilities[b].total_cmp(&abilities[a]));
    let mut ranks = vec![0; abilities.len()];
    for (pos, &p) in order.iter().enumerate() {
        ranks[p] = pos + 1;
    }
    ranks
}

pub fn rank_summary_from_abilities<I, A>(players: &[String], draws: I) -> RankSummary
where
    I: IntoIterator<Item = A>,
    A: AsRef<[f64]>,
{
    let n = players.len();
    let mut per_player: Vec<Vec<f64>> = vec![Vec::new(); n];
    for d in draws {
        for (p, r) in ranks_of(d.as_ref()).into_iter().enumerate() {
            per_player[p].push(r as f64);
        }
    }
    let mut out: Vec<PlayerRank> = players
        .iter()
        .zip(per_player)
        .map(|(name, mut r)| {
            let s = r.len() as f64;
            let mean = r.iter().sum::<f64>() / s;
            let sd =
                if r.len() > 1 { (r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (s - 1.0)).sqrt() } else { 0.0 };
            r.sort_by(f64::total_cmp);
            PlayerRank { player: name.clone(), median: quantile(&r, 0.5), mean, sd }
        })
        .collect();
    out.sort_by(|a, b| a.median.total_cmp(&b.median).then(a.mean.total_cmp(&b.mean)));
    RankSummary { players: out }
}

/// Ranks by the population-level abilities (lambda, or the composed `X beta`).
pub fn rank_distribution(fit: &PosteriorFit) -> RankSummary {
    let info = &fit.info;
    rank_summary_from_abilities(&info.players, fit.draws().map(|d| info.base_abilities(d)))
}

impl RankSummary {
    pub fn to_table(&self, decimals: usize) -> Table {
        let mut t = Table::new(
            &["Parameter", "MedianRank", "MeanRank", "StdRank"],
            &[Align::Left, Align::Right, Align::Right, Align::Right],
        )
        .with_caption("Estimated posterior ranks");
        for p in &self.players {
            t.push(vec![p.player.clone(), format!("{}", p.median), fixed(p.mean, decimals), fixed(p.sd, decimals)]);
        }
        t
    }

    pub fn get(&self, player: &str) -> Option<&PlayerRank> {
        self.players.iter().find(|p| p.player == player)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect()
    }

    #[test]
    fn hand_example() {
        let draws = [[2.0, 1.0, 0.0], [0.0, 1.0, 2.0], [2.0, 1.0, 0.0]];
        let s = rank_summary_from_abilities(&names(3), draws);
        let a = s.get("A").unwrap();
        assert_eq!(a.median, 1.0);
        assert!((a.mean - 1.6667).abs() < 1e-4);
        assert!((a.sd - 1.1547).abs() < 1e-4);
        let b = s.get("B").unwrap();
        assert_eq!((b.median, b.mean, b.sd), (2.0, 2.0, 0.0));
        let total: f64 = s.players.iter().map(|p| p.mean).sum();
        assert!((total - 6.0).abs() < 1e-9);
        assert_eq!(s.players[0].player, "A");
    }

    #[test]
    fn identical_draws_have_zero_sd() {
        let s = rank_summary_from_abilities(&names(3), vec![[0.5, -1.0, 3.0]; 7]);
        assert!(s.players.iter().all(|p| p.sd == 0.0));
        assert_eq!(s.players[0].player, "C");
    }

    #[test]
    fn exact_ties_follow_registry_order() {
        assert_eq!(ranks_of(&[1.0, 1.0, 2.0]), vec![2, 3, 1]);
    }

    proptest! {
        #[test]
        fn per_draw_ranks_are_permutations(xs in proptest::collection::vec(-5.0f64..5.0, 1..30)) {
            let mut r = ranks_of(&xs);
            r.sort_unstable();
            prop_assert_eq!(r, (1..=xs.len()).collect::<Vec<_>>());
        }

        #[test]
        fn mean_ranks_sum_to_triangle(draws in proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 4), 1..40)) {
            let s = rank_summary_from_abilities(&names(4), &draws);
            let total: f64 = s.players.iter().map(|p| p.mean).sum();
            prop_assert!((total - 10.0).abs() < 1e-9);
        }
    }
}
