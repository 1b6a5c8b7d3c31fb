//! Convergence and sampler-health checks.

// `!(x > 0.0)` is deliberate throughout: NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::{PosteriorFit, TransitionStats};

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Truncates chains to a common even length.
fn common_length<T: AsRef<[f64]>>(chains: &[T]) -> Result<usize> {
    let n = chains.iter().map(|c| c.as_ref().len()).min().unwrap_or(0);
    let n = n - n % 2;
    if chains.is_empty() || n < 4 {
        return Err(Error::DegenerateDraws { needed: 4, found: n });
    }
    Ok(n)
}

/// Split R-hat of one parameter.
///
/// Each chain is cut in half and the potential scale reduction is computed
/// over the half-chains.
pub fn split_rhat<T: AsRef<[f64]>>(chains: &[T]) -> Result<f64> {
    let n = common_length(chains)?;
    let half = n / 2;
    let halves: Vec<&[f64]> = chains
        .iter()
        .flat_map(|c| {
            let c = &c.as_ref()[..n];
            [&c[..half], &c[half..]]
        })
        .collect();
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let w = halves.iter().map(|h| sample_variance(h)).sum::<f64>() / halves.len() as f64;
    if !(w > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let b = half as f64 * sample_variance(&means);
    let n = half as f64;
    let var_plus = (n - 1.0) / n * w + b / n;
    Ok((var_plus / w).sqrt())
}

struct Autocov<'a> {
    chain: &'a [f64],
    mean: f64,
}

impl Autocov<'_> {
    /// Biased (1/n) autocovariance at `lag`.
    fn at(&self, lag: usize) -> f64 {
        let n = self.chain.len();
        if lag >= n {
            return 0.0;
        }
        let c = self.chain;
        (0..n - lag).map(|i| (c[i] - self.mean) * (c[i + lag] - self.mean)).sum::<f64>() / n as f64
    }
}

/// Multi-chain effective sample size with Geyer's initial monotone sequence.
///
/// Autocovariances are summed directly lag by lag until the truncation point,
/// so cost stays linear in the chain length for fast-mixing chains.
pub fn effective_sample_size<T: AsRef<[f64]>>(chains: &[T]) -> Result<f64> {
    let n = common_length(chains)?;
    let m = chains.len();
    let acovs: Vec<Autocov<'_>> = chains
        .iter()
        .map(|c| {
            let c = &c.as_ref()[..n];
            Autocov { chain: c, mean: mean(c) }
        })
        .collect();
    let nf = n as f64;
    let chain_means: Vec<f64> = acovs.iter().map(|a| a.mean).collect();
    let mean_var = acovs.iter().map(|a| a.at(0) * nf / (nf - 1.0)).sum::<f64>() / m as f64;
    let mut var_plus = mean_var * (nf - 1.0) / nf;
    if m > 1 {
        var_plus += sample_variance(&chain_means);
    }
    if !(var_plus > 0.0) || !(mean_var > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let rho = |lag: usize| 1.0 - (mean_var - acovs.iter().map(|a| a.at(lag)).sum::<f64>() / m as f64) / var_plus;

    // rho_hat[t] for t beyond the truncation point stays 0
    let mut rho_hat = vec![0.0; 8];
    let set = |v: &mut Vec<f64>, i: usize, x: f64| {
        if i >= v.len() {
            v.resize(2 * i + 1, 0.0);
        }
        v[i] = x;
    };
    rho_hat[0] = 1.0;
    let (mut even, mut odd) = (1.0, rho(1));
    rho_hat[1] = odd;
    let mut t = 1;
    while t + 5 < n && even + odd > 0.0 {
        even = rho(t + 1);
        odd = rho(t + 2);
        if even + odd >= 0.0 {
            set(&mut rho_hat, t + 1, even);
            set(&mut rho_hat, t + 2, odd);
        }
        t += 2;
    }
    let max_t = t;
    set(&mut rho_hat, max_t + 1, if even > 0.0 { even } else { 0.0 });

    // initial monotone sequence: pair sums must not increase
    let mut t = 1;
    while t + 2 <= max_t {
        let prev = rho_hat[t - 1] + rho_hat[t];
        if rho_hat[t + 1] + rho_hat[t + 2] > prev {
            rho_hat[t + 1] = prev / 2.0;
            rho_hat[t + 2] = prev / 2.0;
        }
        t += 2;
    }

    let total = (m * n) as f64;
    let tau = (-1.0 + 2.0 * rho_hat[..max_t].iter().sum::<f64>() + rho_hat[max_t + 1]).max(1.0 / 1.5);
    Ok(total / tau)
}

/// Energy Bayesian fraction of missing information of one chain.
pub fn ebfmi(energies: &[f64]) -> Result<f64> {
    if energies.len() < 3 {
        return Err(Error::DegenerateDraws { needed: 3, found: energies.len() });
    }
    let m = mean(energies);
    let num: f64 = energies.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    let den: f64 = energies.iter().map(|e| (e - m).powi(2)).sum();
    if !(den > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub max_rhat: f64,
    pub min_ess: f64,
    pub min_ebfmi: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { max_rhat: 1.01, min_ess: 200.0, min_ebfmi: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterDiagnostics {
    pub name: String,
    /// `None` when the statistic is undefined (zero variance).
    pub rhat: Option<f64>,
    pub ess: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub parameters: Vec<ParameterDiagnostics>,
    pub ebfmi: Vec<Option<f64>>,
    pub divergent: usize,
    pub treedepth_hits: usize,
    pub max_treedepth: u32,
    pub transitions: usize,
    pub thresholds: Thresholds,
    pub verdict: Verdict,
}

impl ConvergenceReport {
    /// Builds a report from per-parameter chains (`[param][chain][draw]`) and
    /// per-chain transition statistics.
    pub fn from_chains(
        names: &[String],
        chains_by_param: &[Vec<Vec<f64>>],
        stats: &[&[TransitionStats]],
        max_treedepth: u32,
        thresholds: Thresholds,
    ) -> Self {
        let parameters = names
            .iter()
            .zip(chains_by_param)
            .map(|(name, chains)| ParameterDiagnostics {
                name: name.clone(),
                rhat: split_rhat(chains).ok(),
                ess: effective_sample_size(chains).ok(),
            })
            .collect();
        let ebfmi = stats.iter().map(|s| ebfmi(&s.iter().map(|t| t.energy).collect::<Vec<_>>()).ok()).collect();
        let all = || stats.iter().flat_map(|s| s.iter());
        let mut report = ConvergenceReport {
            parameters,
            ebfmi,
            divergent: all().filter(|t| t.divergent).count(),
            treedepth_hits: all().filter(|t| t.treedepth >= max_treedepth).count(),
            max_treedepth,
            transitions: all().count(),
            thresholds,
            verdict: Verdict::Pass,
        };
        report.verdict = report.compute_verdict();
        report
    }

    pub fn rhat_failures(&self) -> Vec<&ParameterDiagnostics> {
        self.parameters.iter().filter(|p| p.rhat.is_none_or(|r| !(r < self.thresholds.max_rhat))).collect()
    }

    pub fn ess_failures(&self) -> Vec<&ParameterDiagnostics> {
        self.parameters.iter().filter(|p| p.ess.is_none_or(|e| !(e >= self.thresholds.min_ess))).collect()
    }

    pub fn ebfmi_failures(&self) -> Vec<(usize, Option<f64>)> {
        self.ebfmi
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_none_or(|e| !(e >= self.thresholds.min_ebfmi)))
            .map(|(c, e)| (c, *e))
            .collect()
    }

    /// Pass only when every threshold is met.
    pub fn compute_verdict(&self) -> Verdict {
        let ok = self.divergent == 0
            && self.treedepth_hits == 0
            && self.rhat_failures().is_empty()
            && self.ess_failures().is_empty()
            && self.ebfmi_failures().is_empty();
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

pub fn convergence_report(fit: &PosteriorFit) -> ConvergenceReport {
    convergence_report_with(fit, Thresholds::default())
}

pub fn convergence_report_with(fit: &PosteriorFit, thresholds: Thresholds) -> ConvergenceReport {
    let stats: Vec<&[TransitionStats]> = fit.chains.iter().map(|c| c.stats.as_slice()).collect();
    ConvergenceReport::from_chains(
        fit.info.layout.names(),
        &fit.constrained_by_param(),
        &stats,
        fit.config.max_treedepth,
        thresholds,
    )
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.3}"))
}

impl fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let th = &self.thresholds;
        writeln!(f, "Checking sampler transitions treedepth.")?;
        if self.treedepth_hits == 0 {
            writeln!(f, "Treedepth satisfactory for all transitions.")?;
        } else {
            writeln!(
                f,
                "{} of {} iterations saturated the maximum tree depth of {}.",
                self.treedepth_hits, self.transitions, self.max_treedepth
            )?;
        }
        writeln!(f)?;

        writeln!(f, "Checking sampler transitions for divergences.")?;
        if self.divergent == 0 {
            writeln!(f, "No divergent transitions found.")?;
        } else {
            writeln!(f, "{} of {} iterations ended with a divergence.", self.divergent, self.transitions)?;
        }
        writeln!(f)?;

        writeln!(f, "Checking E-BFMI - sampler transitions HMC potential energy.")?;
        let low = self.ebfmi_failures();
        if low.is_empty() {
            writeln!(f, "E-BFMI satisfactory for all transitions.")?;
        } else {
            for (c, e) in low {
                writeln!(f, "Chain {}: E-BFMI = {}.", c + 1, fmt_opt(e))?;
            }
            writeln!(
                f,
                "E-BFMI below {} indicates the sampler explored the energy distribution poorly.",
                th.min_ebfmi
            )?;
        }
        writeln!(f)?;

        let ess = self.ess_failures();
        if ess.is_empty() {
            writeln!(f, "Effective sample size satisfactory.")?;
        } else {
            writeln!(f, "The following parameters had fewer than {} effective draws:", th.min_ess)?;
            for p in ess {
                writeln!(f, "  {} (ESS = {})", p.name, fmt_opt(p.ess))?;
            }
        }
        writeln!(f)?;

        let rhat = self.rhat_failures();
        if rhat.is_empty() {
            writeln!(f, "Split R-hat values satisfactory all parameters.")?;
        } else {
            writeln!(f, "The following parameters had split R-hat greater than {}:", th.max_rhat)?;
            for p in rhat {
                writeln!(f, "  {} (R-hat = {})", p.name, fmt_opt(p.rhat))?;
            }
        }
        writeln!(f)?;

        match self.verdict {
            Verdict::Pass => writeln!(f, "Processing complete, no problems detected."),
            Verdict::Fail => writeln!(f, "Processing complete, problems detected."),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normal_chains(m: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m).map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()).collect()
    }

    #[test]
    fn rhat_hand_example() {
        let r = split_rhat(&[vec![1.0, 2.0, 3.0, 4.0], vec![1.0, 2.0, 3.0, 4.0]]).unwrap();
        // W = 0.5, B = 8/3, n = 2
        let expected = ((0.5 * 0.5 + (8.0 / 3.0) / 2.0) / 0.5f64).sqrt();
        assert!((r - expected).abs() < 1e-14);
        assert!((r - 1.77951).abs() < 1e-5);
    }

    #[test]
    fn rhat_iid_near_one() {
        let chains = normal_chains(4, 10_000, 1);
        let r = split_rhat(&chains).unwrap();
        assert!(r < 1.01 && r > 1.0 - 1e-12, "{r}");
    }

    #[test]
    fn rhat_drops_odd_draw() {
        let a = split_rhat(&[vec![1.0, 2.0, 3.0, 4.0, 100.0], vec![1.0, 2.0, 3.0, 4.0]]).unwrap();
        let b = split_rhat(&[vec![1.0, 2.0, 3.0, 4.0], vec![1.0, 2.0, 3.0, 4.0]]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_inputs_flagged() {
        assert!(matches!(split_rhat(&[vec![1.0; 10], vec![2.0; 10]]), Err(Error::ZeroVariance)));
        assert!(matches!(effective_sample_size(&[vec![3.0; 10]]), Err(Error::ZeroVariance)));
        assert!(matches!(ebfmi(&[1.0, 1.0, 1.0]), Err(Error::ZeroVariance)));
        assert!(split_rhat(&[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn ess_of_iid_draws() {
        let chains = normal_chains(4, 4000, 2);
        let ess = effective_sample_size(&chains).unwrap();
        assert!((ess - 16_000.0).abs() < 0.15 * 16_000.0, "{ess}");
        assert!(ess <= 1.5 * 16_000.0);
    }

    #[test]
    fn ess_of_ar1_chain() {
        let rho = 0.9;
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut x = 0.0;
        let chain: Vec<f64> = (0..n)
            .map(|_| {
                let e: f64 = StandardNormal.sample(&mut rng);
                x = rho * x + (1.0f64 - rho * rho).sqrt() * e;
                x
            })
            .collect();
        let expected = n as f64 * (1.0 - rho) / (1.0 + rho);
        let ess = effective_sample_size(&[chain]).unwrap();
        assert!((ess - expected).abs() < 0.2 * expected, "{ess} vs {expected}");
    }

    #[test]
    fn ebfmi_examples() {
        assert_eq!(ebfmi(&[1.0, 2.0, 1.0, 2.0]).unwrap(), 3.0);
        let e = &normal_chains(1, 50_000, 4)[0];
        let v = ebfmi(e).unwrap();
        assert!((v - 2.0).abs() < 0.2, "{v}");
    }

    #[test]
    fn chain_permutation_invariance() {
        let chains = normal_chains(3, 500, 5);
        let rev: Vec<Vec<f64>> = chains.iter().rev().cloned().collect();
        assert!((split_rhat(&chains).unwrap() - split_rhat(&rev).unwrap()).abs() < 1e-12);
        let a = effective_sample_size(&chains).unwrap();
        let b = effective_sample_size(&rev).unwrap();
        assert!((a - b).abs() < 1e-9 * a);
    }

    fn stats(n: usize, divergent_at: Option<usize>, seed: u64) -> Vec<TransitionStats> {
        let e = &normal_chains(1, n, seed)[0];
        (0..n)
            .map(|i| TransitionStats {
                divergent: divergent_at == Some(i),
                treedepth: 3,
                accept_stat: 0.9,
                energy: e[i],
                n_leapfrog: 7,
            })
            .collect()
    }

    #[test]
    fn report_pass_and_fail() {
        let names = vec!["a".to_string(), "b".to_string()];
        let good = vec![normal_chains(2, 1000, 6), normal_chains(2, 1000, 7)];
        let s1 = stats(1000, None, 8);
        let s2 = stats(1000, None, 9);
        let report = ConvergenceReport::from_chains(&names, &good, &[&s1, &s2], 10, Thresholds::default());
        assert_eq!(report.verdict, Verdict::Pass);
        assert!(report.to_string().contains("Processing complete, no problems detected."));

        let s2 = stats(1000, Some(10), 9);
        let report = ConvergenceReport::from_chains(&names, &good, &[&s1, &s2], 10, Thresholds::default());
        assert_eq!(report.verdict, Verdict::Fail);
        assert!(report.to_string().contains("1 of 2000 iterations ended with a divergence."));

        let mut bad = good.clone();
        bad[1] = vec![vec![0.0; 1000], vec![5.0; 1000]];
        let s2 = stats(1000, None, 9);
        let report = ConvergenceReport::from_chains(&names, &bad, &[&s1, &s2], 10, Thresholds::default());
        let failed: Vec<&str> = report.rhat_failures().iter().map(|p| p.name.as_str()).collect();
        assert_eq!(failed, vec!["b"]);
        assert_eq!(report.verdict, Verdict::Fail);
    }
}
