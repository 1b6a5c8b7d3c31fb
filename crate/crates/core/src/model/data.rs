use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Result of a single contest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Player0Wins,
    Player1Wins,
    Tie,
}

impl Outcome {
    /// Maps the tabular result encoding: 0 = player0, 1 = player1, 2 = tie.
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Outcome::Player0Wins),
            1 => Some(Outcome::Player1Wins),
            2 => Some(Outcome::Tie),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Outcome::Player0Wins => 0,
            Outcome::Player1Wins => 1,
            Outcome::Tie => 2,
        }
    }
}

/// A contest with players and subject resolved to registry indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Contest {
    pub player0: usize,
    pub player1: usize,
    pub outcome: Outcome,
    pub subject: Option<usize>,
    /// 1 when the order effect applies to this row.
    pub order_indicator: u8,
    /// Subject-level covariates, aligned with [`ContestDataset::covariate_names`].
    pub covariates: Vec<f64>,
}

/// A contest expressed with names, as read from a table.
#[derive(Debug, Clone, PartialEq)]
pub struct ContestRecord {
    pub player0: String,
    pub player1: String,
    pub outcome: Outcome,
    pub subject: Option<String>,
    pub order_indicator: u8,
    pub covariates: Vec<(String, f64)>,
}

impl ContestRecord {
    pub fn new(player0: impl Into<String>, player1: impl Into<String>, outcome: Outcome) -> Self {
        Self {
            player0: player0.into(),
            player1: player1.into(),
            outcome,
            subject: None,
            order_indicator: 1,
            covariates: Vec::new(),
        }
    }

    pub fn with_subject(mut self, subject: impl Into<String>) -> Self {
        self.subject = Some(subject.into());
        self
    }

    pub fn with_order_indicator(mut self, z: u8) -> Self {
        self.order_indicator = z;
        self
    }

    pub fn with_covariate(mut self, name: impl Into<String>, value: f64) -> Self {
        self.covariates.push((name.into(), value));
        self
    }
}

/// Player-level predictors used by the generalized models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerCovariates {
    pub names: Vec<String>,
    /// One row per registered player, in registry order.
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContestDataset {
    pub contests: Vec<Contest>,
    pub players: Vec<String>,
    pub subjects: Vec<String>,
    pub covariate_names: Vec<String>,
    pub player_covariates: Option<PlayerCovariates>,
}

impl ContestDataset {
    /// Builds a dataset, registering players and subjects in order of first appearance.
    pub fn from_records(records: impl IntoIterator<Item = ContestRecord>) -> Result<Self> {
        Self::from_records_with_players(Vec::<String>::new(), records)
    }

    /// Like [`ContestDataset::from_records`], but `players` are registered
    /// first, in the given order; players first seen in `records` follow.
    pub fn from_records_with_players(
        players: impl IntoIterator<Item = impl Into<String>>,
        records: impl IntoIterator<Item = ContestRecord>,
    ) -> Result<Self> {
        let mut ds = ContestDataset::default();
        let mut player_index: HashMap<String, usize> = HashMap::new();
        for p in players {
            let p = p.into();
            if !player_index.contains_key(&p) {
                player_index.insert(p.clone(), ds.players.len());
                ds.players.push(p);
            }
        }
        let mut subject_index: HashMap<String, usize> = HashMap::new();

        for (row, rec) in records.into_iter().enumerate() {
            if rec.player0 == rec.player1 {
                return Err(Error::SelfContest { row, player: rec.player0 });
            }
            if rec.order_indicator > 1 {
                return Err(Error::BadNumber {
                    row,
                    column: "order indicator".into(),
                    value: rec.order_indicator.to_string(),
                });
            }
            let mut intern = |name: &str| -> usize {
                *player_index.entry(name.to_string()).or_insert_with(|| {
                    ds.players.push(name.to_string());
                    ds.players.len() - 1
                })
            };
            let player0 = intern(&rec.player0);
            let player1 = intern(&rec.player1);
            let subject = rec.subject.as_ref().map(|s| {
                *subject_index.entry(s.clone()).or_insert_with(|| {
                    ds.subjects.push(s.clone());
                    ds.subjects.len() - 1
                })
            });

            if row == 0 {
                ds.covariate_names = rec.covariates.iter().map(|(n, _)| n.clone()).collect();
            }
            let names: Vec<&str> = rec.covariates.iter().map(|(n, _)| n.as_str()).collect();
            if names.len() != ds.covariate_names.len() || names.iter().zip(&ds.covariate_names).any(|(a, b)| *a != b) {
                return Err(Error::InvalidSpec(format!("contest {row}: covariate names differ from the first row")));
            }

            ds.contests.push(Contest {
                player0,
                player1,
                outcome: rec.outcome,
                subject,
                order_indicator: rec.order_indicator,
                covariates: rec.covariates.iter().map(|(_, v)| *v).collect(),
            });
        }
        Ok(ds)
    }

    /// Dataset with a fixed player registry and no contests.
    pub fn with_players(players: impl IntoIterator<Item = impl Into<String>>) -> Self {
        ContestDataset { players: players.into_iter().map(Into::into).collect(), ..Default::default() }
    }

    /// Attaches player-level predictors given as `(player name, values)` rows.
    pub fn set_player_covariates(&mut self, names: Vec<String>, rows: &[(String, Vec<f64>)]) -> Result<()> {
        let mut values = vec![None; self.players.len()];
        for (player, row) in rows {
            if row.len() != names.len() {
                return Err(Error::InvalidSpec(format!(
                    "player '{player}' has {} covariate values, expected {}",
                    row.len(),
                    names.len()
                )));
            }
            if let Some(idx) = self.player_index(player) {
                values[idx] = Some(row.clone());
            }
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::MissingCovariate(format!("player '{}'", self.players[i]))))
            .collect::<Result<Vec<_>>>()?;
        self.player_covariates = Some(PlayerCovariates { names, values });
        Ok(())
    }

    pub fn player_index(&self, name: &str) -> Option<usize> {
        self.players.iter().position(|p| p == name)
    }

    pub fn n_players(&self) -> usize {
        self.players.len()
    }

    pub fn tie_count(&self) -> usize {
        self.contests.iter().filter(|c| c.outcome == Outcome::Tie).count()
    }

    /// Content hash over everything the likelihood depends on.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        let put_str = |h: &mut Sha256, s: &str| {
            h.update((s.len() as u64).to_le_bytes());
            h.update(s.as_bytes());
        };
        h.update((self.players.len() as u64).to_le_bytes());
        for p in &self.players {
            put_str(&mut h, p);
        }
        h.update((self.subjects.len() as u64).to_le_bytes());
        for s in &self.subjects {
            put_str(&mut h, s);
        }
        h.update((self.covariate_names.len() as u64).to_le_bytes());
        for c in &self.covariate_names {
            put_str(&mut h, c);
        }
        h.update((self.contests.len() as u64).to_le_bytes());
        for c in &self.contests {
            h.update((c.player0 as u64).to_le_bytes());
            h.update((c.player1 as u64).to_le_bytes());
            h.update([c.outcome.code(), c.order_indicator]);
            h.update(c.subject.map_or(u64::MAX, |s| s as u64).to_le_bytes());
            for v in &c.covariates {
                h.update(v.to_le_bytes());
            }
        }
        if let Some(pc) = &self.player_covariates {
            for n in &pc.names {
                put_str(&mut h, n);
            }
            for row in &pc.values {
                for v in row {
                    h.update(v.to_le_bytes());
                }
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preseeded_registry_comes_first() {
        let ds = ContestDataset::from_records_with_players(
            ["z", "a"],
            vec![ContestRecord::new("b", "a", Outcome::Player1Wins)],
        )
        .unwrap();
        assert_eq!(ds.players, vec!["z", "a", "b"]);
        assert_eq!((ds.contests[0].player0, ds.contests[0].player1), (2, 1));
    }

    #[test]
    fn registers_players_in_first_appearance_order() {
        let ds = ContestDataset::from_records(vec![
            ContestRecord::new("b", "a", Outcome::Player1Wins),
            ContestRecord::new("c", "a", Outcome::Tie),
        ])
        .unwrap();
        assert_eq!(ds.players, vec!["b", "a", "c"]);
        assert_eq!(ds.contests[1].player0, 2);
        assert_eq!(ds.tie_count(), 1);
    }

    #[test]
    fn rejects_self_contest() {
        let err = ContestDataset::from_records(vec![ContestRecord::new("a", "a", Outcome::Tie)]);
        assert!(matches!(err, Err(Error::SelfContest { .. })));
    }

    #[test]
    fn fingerprint_changes_with_outcome() {
        let a = ContestDataset::from_records(vec![ContestRecord::new("a", "b", Outcome::Player0Wins)]).unwrap();
        let b = ContestDataset::from_records(vec![ContestRecord::new("a", "b", Outcome::Player1Wins)]).unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint(), a.clone().fingerprint());
    }
}
