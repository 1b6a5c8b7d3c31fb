//! Synthetic workloads shared by the benchmarks.

use bpc_core::{build_model, CompiledModel, ContestDataset, ContestRecord, ModelSpec, Outcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n_contests` uniformly paired contests between `n_players` players with
/// evenly spread abilities, fitted under `spec`. Every tenth contest is a tie
/// when the spec is a Davidson model.
pub fn synthetic_model(n_players: usize, n_contests: usize, spec: &str, seed: u64) -> CompiledModel {
    let spec: ModelSpec = spec.parse().expect("valid model string");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lambda: Vec<f64> = (0..n_players).map(|i| i as f64 / n_players as f64 - 0.5).collect();
    let records = (0..n_contests).map(|k| {
        let a = rng.random_range(0..n_players);
        let b = (a + rng.random_range(1..n_players)) % n_players;
        let p = 1.0 / (1.0 + (lambda[b] - lambda[a]).exp());
        let outcome = if spec.is_davidson() && k % 10 == 0 {
            Outcome::Tie
        } else if rng.random::<f64>() < p {
            Outcome::Player1Wins
        } else {
            Outcome::Player0Wins
        };
        ContestRecord::new(format!("p{b}"), format!("p{a}"), outcome)
    });
    let ds = ContestDataset::from_records(records).expect("distinct players");
    build_model(&ds, &spec).expect("buildable model")
}
