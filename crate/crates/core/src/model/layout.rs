use std::ops::Range;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockKind {
    Lambda,
    Nu,
    Gamma,
    Beta,
    SubjectCoef,
    /// Random-effect scale, stored as its logarithm.
    UStd,
    /// Non-centered random effects; the constrained value is `U_std * raw`.
    URaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub kind: BlockKind,
    pub offset: usize,
    pub len: usize,
}

impl Block {
    pub fn range(&self) -> Range<usize> {
        self.offset..self.offset + self.len
    }
}

/// Bijection between a flat parameter vector and named model parameters.
///
/// Names refer to the constrained parameters (`U_std`, `U[player,subject]`),
/// the flat vector holds their unconstrained counterparts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterLayout {
    blocks: Vec<Block>,
    names: Vec<String>,
    n_players: usize,
    n_subject_covariates: usize,
}

#[derive(Default)]
pub(crate) struct LayoutBuilder {
    blocks: Vec<Block>,
    names: Vec<String>,
    n_players: usize,
    n_subject_covariates: usize,
}

impl LayoutBuilder {
    pub(crate) fn new(n_players: usize, n_subject_covariates: usize) -> Self {
        LayoutBuilder { n_players, n_subject_covariates, ..Default::default() }
    }

    pub(crate) fn push(&mut self, kind: BlockKind, names: Vec<String>) {
        if names.is_empty() {
            return;
        }
        self.blocks.push(Block { kind, offset: self.names.len(), len: names.len() });
        self.names.extend(names);
    }

    pub(crate) fn finish(self) -> ParameterLayout {
        ParameterLayout {
            blocks: self.blocks,
            names: self.names,
            n_players: self.n_players,
            n_subject_covariates: self.n_subject_covariates,
        }
    }
}

impl ParameterLayout {
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, kind: BlockKind) -> Option<&Block> {
        self.blocks.iter().find(|b| b.kind == kind)
    }

    pub fn range(&self, kind: BlockKind) -> Range<usize> {
        self.block(kind).map_or(0..0, Block::range)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn kind_of(&self, index: usize) -> Option<BlockKind> {
        self.blocks.iter().find(|b| b.range().contains(&index)).map(|b| b.kind)
    }

    /// Slot of `U_raw[player, subject]`.
    pub(crate) fn u_index(&self, player: usize, subject: usize) -> Option<usize> {
        self.block(BlockKind::URaw).map(|b| b.offset + subject * self.n_players + player)
    }

    /// Slot of `S[player, k]`.
    pub(crate) fn s_index(&self, player: usize, k: usize) -> Option<usize> {
        self.block(BlockKind::SubjectCoef).map(|b| b.offset + player * self.n_subject_covariates + k)
    }

    /// Maps an unconstrained vector to the constrained scale reported to users.
    pub fn constrain(&self, theta: &[f64]) -> Vec<f64> {
        let mut out = theta.to_vec();
        if let Some(b) = self.block(BlockKind::UStd) {
            let u_std = theta[b.offset].exp();
            out[b.offset] = u_std;
            for i in self.range(BlockKind::URaw) {
                out[i] = u_std * theta[i];
            }
        }
        out
    }
}
