//! Predictive model comparison: WAIC and PSIS-LOO from the pointwise
//! log-likelihood matrix.

mod psis;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use psis::{fit_generalized_pareto, psis_log_weights, smooth_log_ratios, tail_length, MIN_DRAWS_FOR_SMOOTHING};

use crate::error::{Error, Result};
use crate::model::{log_sum_exp, CompiledModel};
use crate::sampler::PosteriorFit;

/// Log-likelihood of every observation under every posterior draw, stored
/// row-major (one row per draw).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseLogLik {
    pub n_draws: usize,
    pub n_obs: usize,
    pub values: Vec<f64>,
}

impl PointwiseLogLik {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n_obs = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == n_obs), "ragged log-likelihood rows");
        PointwiseLogLik { n_draws: rows.len(), n_obs, values: rows.concat() }
    }

    pub fn get(&self, draw: usize, obs: usize) -> f64 {
        self.values[draw * self.n_obs + obs]
    }

    pub fn column(&self, obs: usize) -> Vec<f64> {
        (0..self.n_draws).map(|s| self.get(s, obs)).collect()
    }
}

pub fn pointwise_loglik(model: &CompiledModel, fit: &PosteriorFit) -> Result<PointwiseLogLik> {
    if model.fingerprint != fit.data_fingerprint {
        return Err(Error::DataFingerprintMismatch {
            expected: fit.data_fingerprint.clone(),
            found: model.fingerprint.clone(),
        });
    }
    if model.dim() != fit.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: fit.dim() });
    }
    let n_obs = model.n_observations();
    let draws: Vec<&[f64]> = fit.draws().collect();
    let mut values = vec![0.0; draws.len() * n_obs];
    if n_obs > 0 {
        values.par_chunks_mut(n_obs).zip(draws.par_iter()).for_each(|(row, theta)| model.pointwise_log_lik(theta, row));
    }
    Ok(PointwiseLogLik { n_draws: draws.len(), n_obs, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criterion {
    Waic,
    Loo,
}

impl Criterion {
    fn labels(self) -> [&'static str; 3] {
        match self {
            Criterion::Waic => ["elpd_waic", "p_waic", "waic"],
            Criterion::Loo => ["elpd_loo", "p_loo", "looic"],
        }
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "waic" => Ok(Criterion::Waic),
            "loo" | "psis-loo" | "looic" => Ok(Criterion::Loo),
            "aic" | "bic" | "dic" => Err(Error::UnsupportedCriterion(s.to_ascii_uppercase())),
            _ => Err(Error::InvalidSpec(format!("unknown criterion '{s}'; expected waic or loo"))),
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Waic => "waic",
            Criterion::Loo => "loo",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParetoBand {
    Good,
    Ok,
    Bad,
    /// The shape could not be estimated (e.g. a constant tail).
    Undefined,
}

impl ParetoBand {
    pub fn of(k: f64) -> Self {
        if !k.is_finite() {
            ParetoBand::Undefined
        } else if k < 0.5 {
            ParetoBand::Good
        } else if k <= 0.7 {
            ParetoBand::Ok
        } else {
            ParetoBand::Bad
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcEstimate {
    pub criterion: Criterion,
    pub n_draws: usize,
    pub n_obs: usize,
    pub elpd: f64,
    pub elpd_se: f64,
    pub p_eff: f64,
    pub p_eff_se: f64,
    /// `-2 * elpd`.
    pub ic: f64,
    pub ic_se: f64,
    /// Per-observation elpd contributions.
    pub pointwise: Vec<f64>,
    /// Per-observation Pareto shape estimates (LOO only).
    pub pareto_k: Option<Vec<f64>>,
    /// Monte Carlo standard error of elpd (LOO only; `None` when unreliable).
    pub mcse: Option<f64>,
    /// False when LOO fell back to plain importance sampling.
    pub smoothed: bool,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with the n-1 denominator; 0 for fewer than two values.
fn variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

/// `sqrt(n * var(x))`: standard error of a sum of pointwise terms.
fn sum_se(x: &[f64]) -> f64 {
    (x.len() as f64 * variance(x)).sqrt()
}

fn check_draws(ll: &PointwiseLogLik, needed: usize) -> Result<()> {
    if ll.n_draws < needed {
        return Err(Error::DegenerateDraws { needed, found: ll.n_draws });
    }
    if ll.n_obs == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(())
}

fn assemble(criterion: Criterion, ll: &PointwiseLogLik, pointwise: Vec<f64>, lppd: &[f64]) -> IcEstimate {
    let elpd: f64 = pointwise.iter().sum();
    let p: Vec<f64> = lppd.iter().zip(&pointwise).map(|(l, e)| l - e).collect();
    let elpd_se = sum_se(&pointwise);
    IcEstimate {
        criterion,
        n_draws: ll.n_draws,
        n_obs: ll.n_obs,
        elpd,
        elpd_se,
        p_eff: p.iter().sum(),
        p_eff_se: sum_se(&p),
        ic: -2.0 * elpd,
        ic_se: 2.0 * elpd_se,
        pointwise,
        pareto_k: None,
        mcse: None,
        smoothed: true,
    }
}

fn lppd(column: &[f64]) -> f64 {
    log_sum_exp(column) - (column.len() as f64).ln()
}

/// Widely applicable information criterion.
pub fn waic(ll: &PointwiseLogLik) -> Result<IcEstimate> {
    check_draws(ll, 2)?;
    let (pointwise, lppds): (Vec<f64>, Vec<f64>) = (0..ll.n_obs)
        .into_par_iter()
        .map(|n| {
            let col = ll.column(n);
            let l = lppd(&col);
            (l - variance(&col), l)
        })
        .unzip();
    Ok(assemble(Criterion::Waic, ll, pointwise, &lppds))
}

/// Leave-one-out cross-validation by Pareto-smoothed importance sampling.
///
/// With fewer than [`MIN_DRAWS_FOR_SMOOTHING`] draws the raw importance
/// ratios are used unsmoothed and `smoothed` is false.
pub fn psis_loo(ll: &PointwiseLogLik) -> Result<IcEstimate> {
    check_draws(ll, 2)?;
    let smoothed = ll.n_draws >= MIN_DRAWS_FOR_SMOOTHING;
    let per_obs: Vec<(f64, f64, f64, f64)> = (0..ll.n_obs)
        .into_par_iter()
        .map(|n| {
            let col = ll.column(n);
            let ratios: Vec<f64> = col.iter().map(|l| -l).collect();
            let (lw, k) = psis_log_weights(&ratios);
            let terms: Vec<f64> = lw.iter().zip(&col).map(|(w, l)| w + l).collect();
            let elpd = log_sum_exp(&terms);
            // delta-method variance of log(sum w * lik)
            let epd = elpd.exp();
            let var_epd: f64 = lw.iter().zip(&col).map(|(w, l)| (2.0 * w).exp() * (l.exp() - epd).powi(2)).sum();
            (elpd, lppd(&col), k, var_epd / (epd * epd))
        })
        .collect();

    let pointwise: Vec<f64> = per_obs.iter().map(|t| t.0).collect();
    let lppds: Vec<f64> = per_obs.iter().map(|t| t.1).collect();
    let ks: Vec<f64> = per_obs.iter().map(|t| t.2).collect();
    let mut est = assemble(Criterion::Loo, ll, pointwise, &lppds);
    let reliable = smoothed && ks.iter().all(|k| matches!(ParetoBand::of(*k), ParetoBand::Good | ParetoBand::Ok));
    est.mcse = reliable.then(|| per_obs.iter().map(|t| t.3).sum::<f64>().sqrt());
    est.pareto_k = Some(ks);
    est.smoothed = smoothed;
    Ok(est)
}

pub fn information_criterion(ll: &PointwiseLogLik, criterion: Criterion) -> Result<IcEstimate> {
    match criterion {
        Criterion::Waic => waic(ll),
        Criterion::Loo => psis_loo(ll),
    }
}

impl IcEstimate {
    /// Counts of observations per Pareto band: good, ok, bad, undefined.
    pub fn pareto_counts(&self) -> Option<[usize; 4]> {
        self.pareto_k.as_ref().map(|ks| {
            let mut c = [0; 4];
            for k in ks {
                c[ParetoBand::of(*k) as usize] += 1;
            }
            c
        })
    }
}

impl fmt::Display for IcEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Computed from {} by {} log-likelihood matrix", self.n_draws, self.n_obs)?;
        writeln!(f)?;
        let labels = self.criterion.labels();
        let rows = [(self.elpd, self.elpd_se), (self.p_eff, self.p_eff_se), (self.ic, self.ic_se)];
        let est: Vec<String> = rows.iter().map(|r| format!("{:.1}", r.0)).collect();
        let se: Vec<String> = rows.iter().map(|r| format!("{:.1}", r.1)).collect();
        let wn = labels.iter().map(|l| l.len()).max().unwrap_or(0);
        let we = est.iter().map(String::len).chain(["Estimate".len()]).max().unwrap_or(0);
        let ws = se.iter().map(String::len).chain(["SE".len()]).max().unwrap_or(0);
        writeln!(f, "{:wn$} {:>we$} {:>ws$}", "", "Estimate", "SE")?;
        for i in 0..3 {
            writeln!(f, "{:<wn$} {:>we$} {:>ws$}", labels[i], est[i], se[i])?;
        }
        if let Some(counts) = self.pareto_counts() {
            writeln!(f, "------")?;
            match self.mcse {
                Some(m) => writeln!(f, "Monte Carlo SE of elpd_loo is {m:.1}.")?,
                None => writeln!(f, "Monte Carlo SE of elpd_loo is NA.")?,
            }
            writeln!(f)?;
            if !self.smoothed {
                writeln!(f, "Too few draws for Pareto smoothing; plain importance sampling was used.")?;
            } else if counts[0] == self.n_obs {
                writeln!(f, "All Pareto k estimates are good (k < 0.5).")?;
            } else {
                writeln!(f, "Pareto k diagnostic values:")?;
                writeln!(f, "  (-Inf, 0.5]  (good)       {}", counts[0])?;
                writeln!(f, "   (0.5, 0.7]  (ok)         {}", counts[1])?;
                writeln!(f, "   (0.7, Inf)  (bad)        {}", counts[2])?;
                if counts[3] > 0 {
                    writeln!(f, "   undefined               {}", counts[3])?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: String,
    pub elpd: f64,
    pub elpd_diff: f64,
    pub se_diff: f64,
    pub ic: f64,
}

/// Models ordered from best (highest elpd) to worst.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub criterion: Criterion,
    pub rows: Vec<ComparisonRow>,
}

/// Orders models by elpd and reports differences from the best model with
/// the standard error of the pointwise differences.
pub fn compare(estimates: &[(String, IcEstimate)]) -> Result<Comparison> {
    let Some((_, first)) = estimates.first() else {
        return Err(Error::InvalidSpec("compare needs at least one model".into()));
    };
    for (name, e) in estimates {
        if e.criterion != first.criterion {
            return Err(Error::InvalidSpec("cannot compare waic with loo estimates".into()));
        }
        if e.n_obs != first.n_obs {
            return Err(Error::InvalidSpec(format!(
                "model '{name}' has {} observations, expected {}; models must be fitted to the same data",
                e.n_obs, first.n_obs
            )));
        }
    }
    let mut order: Vec<usize> = (0..estimates.len()).collect();
    order.sort_by(|&a, &b| estimates[b].1.elpd.total_cmp(&estimates[a].1.elpd));
    let best = &estimates[order[0]].1;
    let rows = order
        .iter()
        .map(|&i| {
            let (name, e) = &estimates[i];
            let diff: Vec<f64> = e.pointwise.iter().zip(&best.pointwise).map(|(a, b)| a - b).collect();
            ComparisonRow {
                model: name.clone(),
                elpd: e.elpd,
                elpd_diff: e.elpd - best.elpd,
                se_diff: sum_se(&diff),
                ic: e.ic,
            }
        })
        .collect();
    Ok(Comparison { criterion: first.criterion, rows })
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [elpd, _, ic] = self.criterion.labels();
        let mut t = crate::table::Table::new(
            &["model", "elpd_diff", "se_diff", elpd, ic],
            &[
                crate::table::Align::Left,
                crate::table::Align::Right,
                crate::table::Align::Right,
                crate::table::Align::Right,
                crate::table::Align::Right,
            ],
        );
        for r in &self.rows {
            t.push(vec![
                r.model.clone(),
                format!("{:.1}", r.elpd_diff),
                format!("{:.1}", r.se_diff),
                format!("{:.1}", r.elpd),
                format!("{:.1}", r.ic),
            ]);
        }
        f.write_str(&t.to_text())
    }
}
