use serde::{Deserialize, Serialize};

use super::data::{Contest, ContestDataset, Outcome};
use super::layout::{BlockKind, LayoutBuilder, ParameterLayout};
use super::spec::{BaseModel, Extension, ModelSpec};
use crate::error::{Error, Result};

/// Column-wise centering and scaling constants (sample standard deviation).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Standardization {
    pub names: Vec<String>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl Standardization {
    /// Standardizes the columns of `rows` in place.
    fn fit(names: &[String], rows: &mut [Vec<f64>]) -> Result<Self> {
        let n = rows.len() as f64;
        let mut st = Standardization { names: names.to_vec(), ..Default::default() };
        for (k, name) in names.iter().enumerate() {
            let mean = rows.iter().map(|r| r[k]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let sd = var.sqrt();
            if !(sd.is_finite() && sd > 1e-12 * (1.0 + mean.abs())) {
                return Err(Error::ConstantCovariate(name.clone()));
            }
            for r in rows.iter_mut() {
                r[k] = (r[k] - mean) / sd;
            }
            st.means.push(mean);
            st.sds.push(sd);
        }
        Ok(st)
    }

    pub fn apply(&self, k: usize, raw: f64) -> f64 {
        (raw - self.means[k]) / self.sds[k]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Everything about a compiled model except the contests themselves.
///
/// This is what a saved fit carries, so posterior summaries and predictions
/// work without the original data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub spec: ModelSpec,
    pub layout: ParameterLayout,
    pub players: Vec<String>,
    pub subjects: Vec<String>,
    /// Standardized player predictors, one row per player (generalized models).
    pub player_design: Vec<Vec<f64>>,
    pub player_standardization: Standardization,
    pub subject_standardization: Standardization,
}

impl ModelInfo {
    pub fn n_players(&self) -> usize {
        self.players.len()
    }

    pub fn player_index(&self, name: &str) -> Option<usize> {
        self.players.iter().position(|p| p == name)
    }

    pub fn nu(&self, theta: &[f64]) -> Option<f64> {
        self.layout.block(BlockKind::Nu).map(|b| theta[b.offset])
    }

    pub fn gamma(&self, theta: &[f64]) -> Option<f64> {
        self.layout.block(BlockKind::Gamma).map(|b| theta[b.offset])
    }

    /// Population-level log-abilities: `lambda`, or `X beta` for generalized models.
    pub fn base_abilities(&self, theta: &[f64]) -> Vec<f64> {
        if let Some(b) = self.layout.block(BlockKind::Lambda) {
            return theta[b.range()].to_vec();
        }
        let beta = &theta[self.layout.range(BlockKind::Beta)];
        self.player_design.iter().map(|row| row.iter().zip(beta).map(|(x, b)| x * b).sum()).collect()
    }

    fn u_std(&self, theta: &[f64]) -> Option<f64> {
        self.layout.block(BlockKind::UStd).map(|b| theta[b.offset].exp())
    }

    /// Effective log-ability of `player` for a given subject and standardized
    /// subject covariates. `subject = None` means the average subject (U = 0).
    pub fn ability(
        &self,
        theta: &[f64],
        base: &[f64],
        player: usize,
        subject: Option<usize>,
        covariates: &[f64],
    ) -> f64 {
        let mut value = base[player];
        if let (Some(u_std), Some(s)) = (self.u_std(theta), subject) {
            if let Some(idx) = self.layout.u_index(player, s) {
                value += u_std * theta[idx];
            }
        }
        if self.spec.has(Extension::SubjectPredictors) {
            for (k, x) in covariates.iter().enumerate() {
                if let Some(idx) = self.layout.s_index(player, k) {
                    value += x * theta[idx];
                }
            }
        }
        value
    }

    /// Log-probabilities `(player1 wins, player0 wins, tie)` for effective
    /// abilities `(a, b)`. The tie entry is `-inf` under Bradley-Terry.
    pub fn outcome_log_probabilities(&self, theta: &[f64], a: f64, b: f64, z: u8) -> [f64; 3] {
        let gamma = self.gamma(theta);
        match self.spec.base {
            BaseModel::Davidson => {
                super::probability::davidson_log_probabilities(a, b, self.nu(theta).unwrap_or(0.0), gamma, z)
            }
            BaseModel::BradleyTerry => {
                let shifted = if z != 0 { b + gamma.unwrap_or(0.0) } else { b };
                let d = a - shifted;
                [-super::probability::log1p_exp(-d), -super::probability::log1p_exp(d), f64::NEG_INFINITY]
            }
        }
    }
}

/// A model bound to its data: the target of the sampler.
#[derive(Debug, Clone)]
pub struct CompiledModel {
    pub info: ModelInfo,
    pub contests: Vec<Contest>,
    /// Standardized subject covariates, one row per contest.
    pub subject_design: Vec<Vec<f64>>,
    pub fingerprint: String,
}

impl std::ops::Deref for CompiledModel {
    type Target = ModelInfo;
    fn deref(&self) -> &ModelInfo {
        &self.info
    }
}

pub fn build_model(dataset: &ContestDataset, spec: &ModelSpec) -> Result<CompiledModel> {
    spec.validate()?;
    let n = dataset.n_players();
    if n < 2 {
        return Err(Error::SinglePlayer(n));
    }
    if spec.base == BaseModel::BradleyTerry {
        let ties = dataset.tie_count();
        if ties > 0 {
            return Err(Error::TieWithoutDavidson { count: ties });
        }
    }

    let (player_design, player_standardization) = if spec.has(Extension::Generalized) {
        let pc = dataset
            .player_covariates
            .as_ref()
            .filter(|pc| !pc.names.is_empty())
            .ok_or_else(|| Error::MissingColumn("player covariates (generalized model)".into()))?;
        let mut rows = pc.values.clone();
        let st = Standardization::fit(&pc.names, &mut rows)?;
        (rows, st)
    } else {
        (Vec::new(), Standardization::default())
    };

    let (subject_design, subject_standardization) = if spec.has(Extension::SubjectPredictors) {
        if dataset.covariate_names.is_empty() {
            return Err(Error::MissingColumn("subject covariates (S model)".into()));
        }
        if dataset.contests.len() < 2 {
            return Err(Error::InvalidSpec("subject predictors need at least two contests".into()));
        }
        let mut rows: Vec<Vec<f64>> = dataset.contests.iter().map(|c| c.covariates.clone()).collect();
        let st = Standardization::fit(&dataset.covariate_names, &mut rows)?;
        (rows, st)
    } else {
        (vec![Vec::new(); dataset.contests.len()], Standardization::default())
    };

    if spec.has(Extension::RandomEffects) {
        if dataset.subjects.is_empty() && !dataset.contests.is_empty() {
            return Err(Error::MissingColumn("subject (random-effects model)".into()));
        }
        if let Some(row) = dataset.contests.iter().position(|c| c.subject.is_none()) {
            return Err(Error::UnknownSubject(row));
        }
    }

    let players = &dataset.players;
    let n_subject_cov = subject_standardization.names.len();
    let mut lb = LayoutBuilder::new(n, n_subject_cov);
    if !spec.has(Extension::Generalized) {
        lb.push(BlockKind::Lambda, players.iter().map(|p| format!("lambda[{p}]")).collect());
    }
    if spec.base == BaseModel::Davidson {
        lb.push(BlockKind::Nu, vec!["nu".into()]);
    }
    if spec.has(Extension::OrderEffect) {
        lb.push(BlockKind::Gamma, vec!["gamma".into()]);
    }
    if spec.has(Extension::Generalized) {
        lb.push(BlockKind::Beta, player_standardization.names.iter().map(|k| format!("beta[{k}]")).collect());
    }
    if spec.has(Extension::SubjectPredictors) {
        let names = players
            .iter()
            .flat_map(|p| subject_standardization.names.iter().map(move |k| format!("S[{p},{k}]")))
            .collect();
        lb.push(BlockKind::SubjectCoef, names);
    }
    if spec.has(Extension::RandomEffects) {
        lb.push(BlockKind::UStd, vec!["U_std".into()]);
        let names = dataset.subjects.iter().flat_map(|s| players.iter().map(move |p| format!("U[{p},{s}]"))).collect();
        lb.push(BlockKind::URaw, names);
    }
    let layout = lb.finish();

    Ok(CompiledModel {
        info: ModelInfo {
            spec: spec.clone(),
            layout,
            players: players.clone(),
            subjects: dataset.subjects.clone(),
            player_design,
            player_standardization,
            subject_standardization,
        },
        contests: dataset.contests.clone(),
        subject_design,
        fingerprint: dataset.fingerprint(),
    })
}

impl CompiledModel {
    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn n_observations(&self) -> usize {
        self.contests.len()
    }

    pub fn outcome_index(outcome: Outcome) -> usize {
        match outcome {
            Outcome::Player1Wins => 0,
            Outcome::Player0Wins => 1,
            Outcome::Tie => 2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ContestRecord, Outcome};

    fn dataset(n: usize) -> ContestDataset {
        let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        let recs =
            (0..n).map(|i| ContestRecord::new(names[i].clone(), names[(i + 1) % n].clone(), Outcome::Player1Wins));
        ContestDataset::from_records(recs).unwrap()
    }

    #[test]
    fn plain_bt_layout() {
        let m = build_model(&dataset(5), &"bt".parse().unwrap()).unwrap();
        assert_eq!(m.dim(), 5);
        assert_eq!(m.layout.names()[0], "lambda[p0]");
    }

    #[test]
    fn davidson_order_effect_layout() {
        let m = build_model(&dataset(6), &"davidson-ordereffect".parse().unwrap()).unwrap();
        assert_eq!(m.dim(), 8);
        assert_eq!(m.layout.index_of("nu"), Some(6));
        assert_eq!(m.layout.index_of("gamma"), Some(7));
    }

    #[test]
    fn generalized_replaces_lambda() {
        let mut ds = dataset(4);
        let rows: Vec<(String, Vec<f64>)> =
            (0..4).map(|i| (format!("p{i}"), vec![i as f64, (i * i) as f64, (i % 2) as f64])).collect();
        ds.set_player_covariates(vec!["a".into(), "b".into(), "c".into()], &rows).unwrap();
        let m = build_model(&ds, &"bt-generalized".parse().unwrap()).unwrap();
        assert_eq!(m.dim(), 3);
        assert!(m.layout.block(BlockKind::Lambda).is_none());
        for k in 0..3 {
            let col: Vec<f64> = m.player_design.iter().map(|r| r[k]).collect();
            let mean = col.iter().sum::<f64>() / 4.0;
            let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 3.0;
            assert!(mean.abs() < 1e-9 && (var - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_covariate_rejected() {
        let mut ds = dataset(3);
        let rows: Vec<(String, Vec<f64>)> = (0..3).map(|i| (format!("p{i}"), vec![2.0])).collect();
        ds.set_player_covariates(vec!["flat".into()], &rows).unwrap();
        let err = build_model(&ds, &"bt-generalized".parse().unwrap()).unwrap_err();
        assert!(matches!(err, Error::ConstantCovariate(ref n) if n == "flat"));
    }

    #[test]
    fn ties_need_davidson() {
        let ds = ContestDataset::from_records(vec![
            ContestRecord::new("a", "b", Outcome::Tie),
            ContestRecord::new("a", "b", Outcome::Tie),
            ContestRecord::new("a", "b", Outcome::Player0Wins),
        ])
        .unwrap();
        let err = build_model(&ds, &"bt".parse().unwrap()).unwrap_err();
        assert!(matches!(err, Error::TieWithoutDavidson { count: 2 }));
        assert!(build_model(&ds, &"davidson".parse().unwrap()).is_ok());
    }

    #[test]
    fn single_player_rejected() {
        let ds = ContestDataset::with_players(["only"]);
        assert!(matches!(build_model(&ds, &"bt".parse().unwrap()), Err(Error::SinglePlayer(1))));
    }

    #[test]
    fn missing_columns_reported() {
        let ds = dataset(3);
        assert!(matches!(build_model(&ds, &"bt-generalized".parse().unwrap()), Err(Error::MissingColumn(_))));
        assert!(matches!(build_model(&ds, &"bt-S".parse().unwrap()), Err(Error::MissingColumn(_))));
        assert!(matches!(build_model(&ds, &"bt-U".parse().unwrap()), Err(Error::MissingColumn(_))));
    }

    #[test]
    fn random_effect_layout_is_subject_major() {
        let ds = ContestDataset::from_records(vec![
            ContestRecord::new("a", "b", Outcome::Player1Wins).with_subject("s1"),
            ContestRecord::new("b", "c", Outcome::Player0Wins).with_subject("s2"),
        ])
        .unwrap();
        let m = build_model(&ds, &"bt-U".parse().unwrap()).unwrap();
        assert_eq!(m.dim(), 3 + 1 + 6);
        assert_eq!(m.layout.index_of("U[b,s2]"), m.layout.u_index(1, 1));
    }
}
