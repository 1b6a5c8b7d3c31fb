//! Posterior summaries: parameter tables, rank distributions, pairwise
//! probability tables and predictions for new contests.

mod interval;
mod predict;
mod probability;
mod rank;

use serde::{Deserialize, Serialize};

pub use interval::{equal_tailed_interval, hpd_interval, interval_estimate, quantile, IntervalEstimate, IntervalKind};
pub use predict::{
    predict, predictive_outcome_rates, CovariateValue, OutcomeRates, PredictQuery, PredictiveDraw, PredictiveRecord,
};
pub use probability::{probability_table, PairProbability, ProbabilityTable, SubjectMode};
pub use rank::{rank_distribution, rank_summary_from_abilities, PlayerRank, RankSummary};

use crate::diagnostics::effective_sample_size;
use crate::sampler::PosteriorFit;
use crate::table::{fixed, Align, Table};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalSpec {
    pub kind: IntervalKind,
    pub mass: f64,
}

impl Default for IntervalSpec {
    fn default() -> Self {
        IntervalSpec { kind: IntervalKind::Hpd, mass: 0.95 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterRow {
    pub parameter: String,
    pub mean: f64,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
    /// `NaN` when undefined (constant draws or too few draws).
    pub ess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterTable {
    pub interval: IntervalSpec,
    pub rows: Vec<ParameterRow>,
}

/// One row per parameter on the constrained scale.
pub fn summarize(fit: &PosteriorFit, interval: IntervalSpec) -> ParameterTable {
    let by_param = fit.constrained_by_param();
    let rows = fit
        .info
        .layout
        .names()
        .iter()
        .zip(&by_param)
        .map(|(name, chains)| {
            let pooled: Vec<f64> = chains.iter().flatten().copied().collect();
            let est = interval_estimate(&pooled, interval.kind, interval.mass);
            ParameterRow {
                parameter: name.clone(),
                mean: est.mean,
                median: est.median,
                lower: est.lower,
                upper: est.upper,
                ess: effective_sample_size(chains).unwrap_or(f64::NAN),
            }
        })
        .collect();
    ParameterTable { interval, rows }
}

impl ParameterTable {
    pub fn bound_headers(&self) -> (&'static str, &'static str) {
        match self.interval.kind {
            IntervalKind::Hpd => ("HPD_lower", "HPD_higher"),
            IntervalKind::EqualTailed => ("q_lower", "q_higher"),
        }
    }

    pub fn to_table(&self, decimals: usize) -> Table {
        let (lo, hi) = self.bound_headers();
        let mut t = Table::new(
            &["Parameter", "Mean", "Median", lo, hi, "ESS"],
            &[Align::Left, Align::Right, Align::Right, Align::Right, Align::Right, Align::Right],
        )
        .with_caption("Parameters estimates");
        for r in &self.rows {
            t.push(vec![
                r.parameter.clone(),
                fixed(r.mean, decimals),
                fixed(r.median, decimals),
                fixed(r.lower, decimals),
                fixed(r.upper, decimals),
                fixed(r.ess, 0),
            ]);
        }
        t
    }

    pub fn heading(&self) -> String {
        let pct = self.interval.mass * 100.0;
        let kind = match self.interval.kind {
            IntervalKind::Hpd => "HPD",
            IntervalKind::EqualTailed => "equal-tailed",
        };
        format!("Estimated baseline parameters with {pct}% {kind} intervals:")
    }
}

/// The combined report: parameters, pairwise probabilities and ranks.
pub fn summary_text(fit: &PosteriorFit, interval: IntervalSpec) -> String {
    let params = summarize(fit, interval);
    let probs = probability_table(fit, SubjectMode::Average);
    let ranks = rank_distribution(fit);
    let mut out = String::new();
    out.push_str(&params.heading());
    out.push_str("\n\n");
    out.push_str(&params.to_table(2).to_text());
    out.push_str("NOTES:\n* A higher lambda indicates a higher team ability\n\n");
    out.push_str("Posterior probabilities:\n");
    out.push_str("These probabilities are calculated from the predictive posterior distribution\n");
    out.push_str("for all player combinations\n\n\n");
    out.push_str(&probs.to_table(2).to_text());
    out.push('\n');
    out.push_str("Rank of the players' abilities:\n");
    out.push_str("The rank is based on the posterior rank distribution of the lambda parameter\n\n");
    out.push_str(&ranks.to_table(2).to_text());
    out
}


#[cfg(test)]
mod tests {
    use super::test_support::fit_from_draws;
    use super::*;

    #[test]
    fn single_draw_summary_is_degenerate() {
        let fit = fit_from_draws(&["a", "b"], "bt", &[vec![0.3, -0.3]]);
        let t = summarize(&fit, IntervalSpec::default());
        let r = &t.rows[0];
        assert_eq!((r.mean, r.median, r.lower, r.upper), (0.3, 0.3, 0.3, 0.3));
        assert!(r.ess.is_nan());
    }

    #[test]
    fn summary_headers_are_stable() {
        let draws: Vec<Vec<f64>> = (0..20).map(|i| vec![0.01 * i as f64, -0.02 * i as f64]).collect();
        let fit = fit_from_draws(&["Tombstone", "Red Barron"], "bt", &draws);
        let text = summarize(&fit, IntervalSpec::default()).to_table(2).to_text();
        let header = text.lines().nth(2).unwrap();
        assert!(header.starts_with("Parameter              Mean   Median   HPD_lower   HPD_higher"), "{header}");
    }

    #[test]
    fn constrained_scale_for_random_effects() {
        use crate::model::{build_model, ContestDataset, ContestRecord, Outcome};
        let ds =
            ContestDataset::from_records(vec![ContestRecord::new("a", "b", Outcome::Player1Wins).with_subject("s")])
                .unwrap();
        let model = build_model(&ds, &"bt-U".parse().unwrap()).unwrap();
        let theta = vec![0.0, 0.0, 2f64.ln(), 0.5, -0.25];
        let c = model.layout.constrain(&theta);
        assert_eq!(c[2], 2.0);
        assert_eq!(&c[3..], &[1.0, -0.5]);
    }
}
