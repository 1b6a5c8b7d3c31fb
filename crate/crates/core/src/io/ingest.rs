use std::collections::HashMap;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ContestDataset, ContestRecord, Outcome};

/// What to do with tied contests before modelling.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum TieStrategy {
    /// Keep ties; only Davidson models accept them.
    #[default]
    None,
    /// Give each tie to one side by a fair, seeded coin.
    Random,
    /// Drop tied rows.
    Remove,
}

impl std::str::FromStr for TieStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(TieStrategy::None),
            "random" => Ok(TieStrategy::Random),
            "remove" => Ok(TieStrategy::Remove),
            _ => Err(Error::InvalidSpec(format!("unknown tie strategy '{s}'; expected none, random or remove"))),
        }
    }
}

/// Where the outcome of each contest comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResultSource {
    /// 0 = player0 wins, 1 = player1 wins, 2 = tie.
    Column(String),
    /// Higher score wins; equal scores tie.
    Scores { score0: String, score1: String },
}

/// A table of player-level predictors, one row per player.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerCovariateSource {
    pub path: PathBuf,
    pub player_column: String,
    /// Predictor columns; empty means every column except the player column.
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSpec {
    pub path: PathBuf,
    pub player0: String,
    pub player1: String,
    pub result: ResultSource,
    pub subject: Option<String>,
    pub order_indicator: Option<String>,
    pub covariates: Vec<String>,
    pub player_covariates: Option<PlayerCovariateSource>,
    pub solve_ties: TieStrategy,
    pub seed: u64,
    pub delimiter: u8,
}

impl IngestSpec {
    /// Defaults matching the conventional column names.
    pub fn new(path: impl Into<PathBuf>) -> Self {
        IngestSpec {
            path: path.into(),
            player0: "player0".into(),
            player1: "player1".into(),
            result: ResultSource::Column("y".into()),
            subject: None,
            order_indicator: None,
            covariates: Vec::new(),
            player_covariates: None,
            solve_ties: TieStrategy::None,
            seed: 0,
            delimiter: b',',
        }
    }
}

struct Header(HashMap<String, usize>);

impl Header {
    fn read(reader: &mut csv::Reader<std::fs::File>) -> Result<Self> {
        let map = reader.headers()?.iter().enumerate().map(|(i, h)| (h.trim().to_string(), i)).collect();
        Ok(Header(map))
    }

    fn col(&self, name: &str) -> Result<usize> {
        self.0.get(name).copied().ok_or_else(|| Error::MissingColumn(name.to_string()))
    }
}

fn open(path: &std::path::Path, delimiter: u8) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| super::with_path(e, path))?;
    Ok(csv::ReaderBuilder::new().delimiter(delimiter).trim(csv::Trim::All).from_reader(file))
}

fn number(row: usize, column: &str, value: &str) -> Result<f64> {
    value.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::BadNumber {
        row,
        column: column.to_string(),
        value: value.to_string(),
    })
}

fn result_code(row: usize, value: &str) -> Result<Outcome> {
    let bad = || Error::BadResultValue { row, value: value.to_string() };
    let v: f64 = value.parse().map_err(|_| bad())?;
    if v.fract() != 0.0 || !(0.0..=2.0).contains(&v) {
        return Err(bad());
    }
    Outcome::from_code(v as u8).ok_or_else(bad)
}

/// Reads a delimited file with a header row into a dataset. Row numbers in
/// errors count data rows from 1.
pub fn load_dataset(spec: &IngestSpec) -> Result<ContestDataset> {
    let mut reader = open(&spec.path, spec.delimiter)?;
    let header = Header::read(&mut reader)?;
    let p0 = header.col(&spec.player0)?;
    let p1 = header.col(&spec.player1)?;
    enum Source<'a> {
        Code(usize),
        Scores((&'a str, usize), (&'a str, usize)),
    }
    let result = match &spec.result {
        ResultSource::Column(c) => Source::Code(header.col(c)?),
        ResultSource::Scores { score0, score1 } => {
            Source::Scores((score0, header.col(score0)?), (score1, header.col(score1)?))
        }
    };
    let subject = spec.subject.as_deref().map(|c| header.col(c)).transpose()?;
    let order = spec.order_indicator.as_deref().map(|c| header.col(c)).transpose()?;
    let covariates: Vec<(String, usize)> =
        spec.covariates.iter().map(|c| Ok((c.clone(), header.col(c)?))).collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut records = Vec::new();
    let mut seen = 0usize;
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        seen += 1;
        let field = |idx: usize| rec.get(idx).unwrap_or("");
        let outcome = match result {
            Source::Code(c) => result_code(row, field(c))?,
            Source::Scores((n0, c0), (n1, c1)) => {
                let s0 = number(row, n0, field(c0))?;
                let s1 = number(row, n1, field(c1))?;
                match s1.partial_cmp(&s0) {
                    Some(std::cmp::Ordering::Greater) => Outcome::Player1Wins,
                    Some(std::cmp::Ordering::Less) => Outcome::Player0Wins,
                    _ => Outcome::Tie,
                }
            }
        };
        let outcome = match (outcome, spec.solve_ties) {
            (Outcome::Tie, TieStrategy::Remove) => continue,
            (Outcome::Tie, TieStrategy::Random) => {
                if rng.random_bool(0.5) {
                    Outcome::Player1Wins
                } else {
                    Outcome::Player0Wins
                }
            }
            (o, _) => o,
        };
        let mut r = ContestRecord::new(field(p0), field(p1), outcome);
        if let Some(c) = subject {
            r = r.with_subject(field(c));
        }
        if let Some(c) = order {
            let name = spec.order_indicator.as_deref().unwrap_or_default();
            let z = number(row, name, field(c))?;
            if z != 0.0 && z != 1.0 {
                return Err(Error::BadNumber { row, column: name.to_string(), value: field(c).to_string() });
            }
            r = r.with_order_indicator(z as u8);
        }
        for (name, c) in &covariates {
            r = r.with_covariate(name.clone(), number(row, name, field(*c))?);
        }
        records.push(r);
    }
    if seen == 0 {
        return Err(Error::EmptyDataset);
    }
    if records.is_empty() {
        return Err(Error::EmptyAfterTieRemoval);
    }
    let mut ds = ContestDataset::from_records(records)?;
    if let Some(pc) = &spec.player_covariates {
        let (names, rows) = load_player_covariates(pc, spec.delimiter)?;
        ds.set_player_covariates(names, &rows)?;
    }
    Ok(ds)
}

/// Predictor names and one `(player, values)` row per player.
type PlayerRows = (Vec<String>, Vec<(String, Vec<f64>)>);

fn load_player_covariates(src: &PlayerCovariateSource, delimiter: u8) -> Result<PlayerRows> {
    let mut reader = open(&src.path, delimiter)?;
    let header = Header::read(&mut reader)?;
    let pcol = header.col(&src.player_column)?;
    let names: Vec<String> = if src.columns.is_empty() {
        let mut all: Vec<(&String, &usize)> = header.0.iter().filter(|(_, i)| **i != pcol).collect();
        all.sort_by_key(|(_, i)| **i);
        all.into_iter().map(|(n, _)| n.clone()).collect()
    } else {
        src.columns.clone()
    };
    let cols: Vec<usize> = names.iter().map(|n| header.col(n)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let values = names
            .iter()
            .zip(&cols)
            .map(|(n, &c)| number(i + 1, n, rec.get(c).unwrap_or("")))
            .collect::<Result<Vec<f64>>>()?;
        rows.push((rec.get(pcol).unwrap_or("").to_string(), values));
    }
    Ok((names, rows))
}
