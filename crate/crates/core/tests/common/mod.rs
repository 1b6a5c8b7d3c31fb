//! Synthetic data shared by the integration tests.
#![allow(dead_code)]

use bpc_core::model::{bt_probabilities, davidson_probabilities};
use bpc_core::{ContestDataset, ContestRecord, Outcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const PIZZAS: [&str; 5] = ["Tombstone", "DiGiorno", "Freschetta", "Red Barron", "aKroger"];

/// Generating process for synthetic contests.
#[derive(Debug, Clone)]
pub struct Truth {
    pub names: Vec<String>,
    pub lambda: Vec<f64>,
    pub nu: Option<f64>,
    pub gamma: Option<f64>,
}

impl Truth {
    pub fn bt(names: &[&str], lambda: &[f64]) -> Self {
        Truth { names: names.iter().map(|s| s.to_string()).collect(), lambda: lambda.to_vec(), nu: None, gamma: None }
    }

    /// `(player1 wins, player0 wins, tie)` probabilities for abilities `a`
    /// (player1) and `b` (player0).
    pub fn probabilities(&self, a: f64, b: f64, z: u8) -> [f64; 3] {
        match self.nu {
            Some(nu) => {
                let (p1, p0, t) = davidson_probabilities(a, b, nu, self.gamma, z);
                [p1, p0, t]
            }
            None => {
                let (p1, p0) = bt_probabilities(a, b, self.gamma, z);
                [p1, p0, 0.0]
            }
        }
    }
}

pub fn draw_outcome<R: Rng>(rng: &mut R, p: [f64; 3]) -> Outcome {
    let u: f64 = rng.random();
    if u < p[0] {
        Outcome::Player1Wins
    } else if u < p[0] + p[1] || p[2] == 0.0 {
        Outcome::Player0Wins
    } else {
        Outcome::Tie
    }
}

fn random_pair<R: Rng>(rng: &mut R, n: usize) -> (usize, usize) {
    let a = rng.random_range(0..n);
    let b = (a + rng.random_range(1..n)) % n;
    (a, b)
}

/// Contests over uniformly chosen pairs with random roles; order indicator 1.
pub fn simulate(truth: &Truth, n_contests: usize, seed: u64) -> ContestDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = truth.lambda.len();
    let records: Vec<ContestRecord> = (0..n_contests)
        .map(|_| {
            let (p1, p0) = random_pair(&mut rng, n);
            let p = truth.probabilities(truth.lambda[p1], truth.lambda[p0], 1);
            let o = draw_outcome(&mut rng, p);
            ContestRecord::new(truth.names[p0].clone(), truth.names[p1].clone(), o)
        })
        .collect();
    ContestDataset::from_records_with_players(truth.names.iter().cloned(), records).unwrap()
}

/// Every subject judges `per_subject` contests; subject `s` shifts player
/// `p` by `u_std * z[p, s]` with standard normal `z`.
pub fn simulate_random_effects(
    truth: &Truth,
    n_subjects: usize,
    per_subject: usize,
    u_std: f64,
    seed: u64,
) -> ContestDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = truth.lambda.len();
    let offsets: Vec<Vec<f64>> = (0..n_subjects)
        .map(|_| (0..n).map(|_| u_std * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect::<Vec<f64>>())
        .collect();
    let mut records = Vec::new();
    for (s, off) in offsets.iter().enumerate() {
        for _ in 0..per_subject {
            let (p1, p0) = random_pair(&mut rng, n);
            let p = truth.probabilities(truth.lambda[p1] + off[p1], truth.lambda[p0] + off[p0], 1);
            let o = draw_outcome(&mut rng, p);
            records.push(
                ContestRecord::new(truth.names[p0].clone(), truth.names[p1].clone(), o).with_subject(format!("s{s}")),
            );
        }
    }
    ContestDataset::from_records_with_players(truth.names.iter().cloned(), records).unwrap()
}

/// A dataset exercising every model feature: ties, mixed order indicators,
/// subjects, two subject covariates and two player covariates.
pub fn feature_rich(n_players: usize, n_contests: usize, seed: u64) -> ContestDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..n_players).map(|i| format!("p{i}")).collect();
    let records: Vec<ContestRecord> = (0..n_contests)
        .map(|k| {
            let (p1, p0) = random_pair(&mut rng, n_players);
            let o = match rng.random_range(0..3u8) {
                0 => Outcome::Player0Wins,
                1 => Outcome::Player1Wins,
                _ => Outcome::Tie,
            };
            ContestRecord::new(names[p0].clone(), names[p1].clone(), o)
                .with_subject(format!("s{}", k % 4))
                .with_order_indicator(rng.random_range(0..2u8))
                .with_covariate("age", rng.random_range(18.0..80.0))
                .with_covariate("score", StandardNormal.sample(&mut rng))
        })
        .collect();
    let mut ds = ContestDataset::from_records_with_players(names.iter().cloned(), records).unwrap();
    let rows: Vec<(String, Vec<f64>)> =
        names.iter().map(|n| (n.clone(), vec![rng.random_range(0.0..10.0), StandardNormal.sample(&mut rng)])).collect();
    ds.set_player_covariates(vec!["price".into(), "crust".into()], &rows).unwrap();
    ds
}
