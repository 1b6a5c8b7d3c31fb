use std::f64::consts::{LN_2, PI};

use super::compile::CompiledModel;
use super::data::{Contest, Outcome};
use super::layout::BlockKind;
use super::probability::log1p_exp;
use crate::error::{Error, Result};

/// An unnormalized log density over `R^dim` with its gradient.
///
/// Implementations must be pure: the sampler calls them concurrently from
/// several chains.
pub trait LogDensity: Sync {
    fn dim(&self) -> usize;

    /// Writes the gradient into `grad` and returns the log density. A
    /// non-finite return value marks the point as outside the support.
    fn log_density_grad(&self, theta: &[f64], grad: &mut [f64]) -> f64;
}

fn normal_log_pdf(x: f64, variance: f64) -> f64 {
    -0.5 * x * x / variance - 0.5 * (2.0 * PI * variance).ln()
}

/// Effective log-abilities `(player1, player0)` of a contest. The order effect
/// is not included here.
pub fn compose_ability(model: &CompiledModel, theta: &[f64], contest: &Contest) -> Result<(f64, f64)> {
    model.check_dim(theta)?;
    if model.spec.has(super::Extension::RandomEffects) && contest.subject.is_none() {
        let row = model.contests.iter().position(|c| c == contest).unwrap_or(usize::MAX);
        return Err(Error::UnknownSubject(row));
    }
    let base = model.base_abilities(theta);
    let covariates: Vec<f64> = if model.spec.has(super::Extension::SubjectPredictors) {
        contest.covariates.iter().enumerate().map(|(k, &x)| model.subject_standardization.apply(k, x)).collect()
    } else {
        Vec::new()
    };
    Ok((
        model.ability(theta, &base, contest.player1, contest.subject, &covariates),
        model.ability(theta, &base, contest.player0, contest.subject, &covariates),
    ))
}

impl CompiledModel {
    fn check_dim(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: theta.len() });
        }
        Ok(())
    }

    pub fn log_posterior(&self, theta: &[f64]) -> Result<f64> {
        self.check_dim(theta)?;
        let value = self.evaluate(theta, None, None);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFiniteDensity)
        }
    }

    pub fn grad_log_posterior(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(theta)?;
        let mut grad = vec![0.0; theta.len()];
        self.evaluate(theta, Some(&mut grad), None);
        if grad.iter().all(|g| g.is_finite()) {
            Ok(grad)
        } else {
            Err(Error::NonFiniteGradient)
        }
    }

    /// Log-likelihood of every contest under `theta`.
    pub fn pointwise_log_lik(&self, theta: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.contests.len());
        self.evaluate(theta, None, Some(out));
    }

    fn log_prior(&self, theta: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let priors = &self.spec.priors;
        let mut lp = 0.0;
        for block in self.layout.blocks() {
            let variance = match block.kind {
                BlockKind::Lambda => priors.lambda,
                BlockKind::Nu => priors.nu,
                BlockKind::Gamma => priors.gamma,
                BlockKind::Beta => priors.beta,
                BlockKind::SubjectCoef => priors.s,
                BlockKind::URaw => 1.0,
                BlockKind::UStd => {
                    // half-normal on exp(eta), plus log-Jacobian eta
                    let eta = theta[block.offset];
                    let u = eta.exp();
                    lp += LN_2 + normal_log_pdf(u, priors.u_std) + eta;
                    if let Some(g) = grad.as_deref_mut() {
                        g[block.offset] += 1.0 - u * u / priors.u_std;
                    }
                    continue;
                }
            };
            for i in block.range() {
                lp += normal_log_pdf(theta[i], variance);
                if let Some(g) = grad.as_deref_mut() {
                    g[i] -= theta[i] / variance;
                }
            }
        }
        lp
    }

    /// Shared likelihood pass. Fills `grad` (zeroed first) and `pointwise` when given.
    fn evaluate(&self, theta: &[f64], mut grad: Option<&mut [f64]>, mut pointwise: Option<&mut [f64]>) -> f64 {
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
        let info = &self.info;
        let layout = &info.layout;
        let base = info.base_abilities(theta);
        let gamma = info.gamma(theta);
        let nu_slot = layout.block(BlockKind::Nu).map(|b| b.offset);
        let gamma_slot = layout.block(BlockKind::Gamma).map(|b| b.offset);
        let u_std_slot = layout.block(BlockKind::UStd).map(|b| b.offset);
        let u_std = u_std_slot.map(|i| theta[i].exp());
        let has_s = info.spec.has(super::Extension::SubjectPredictors);
        let davidson = info.spec.is_davidson();
        let nu = info.nu(theta).unwrap_or(0.0);

        let mut base_grad = vec![0.0; info.n_players()];
        let mut ll_total = 0.0;

        for (n, contest) in self.contests.iter().enumerate() {
            let x = &self.subject_design[n];
            let effective = |p: usize| -> f64 {
                let mut v = base[p];
                if let (Some(us), Some(s)) = (u_std, contest.subject) {
                    v += us * theta[layout.u_index(p, s).unwrap()];
                }
                if has_s {
                    for (k, xk) in x.iter().enumerate() {
                        v += xk * theta[layout.s_index(p, k).unwrap()];
                    }
                }
                v
            };
            let a = effective(contest.player1);
            let z = f64::from(contest.order_indicator);
            let b = effective(contest.player0) + z * gamma.unwrap_or(0.0);

            // log-likelihood and its partials w.r.t. a, b and nu
            let (ll, d_a, d_b, d_nu) = if davidson {
                let t = nu + 0.5 * (a + b);
                let norm = super::probability::log_sum_exp(&[a, b, t]);
                let (pa, pb, pt) = ((a - norm).exp(), (b - norm).exp(), (t - norm).exp());
                let (chosen, ca, cb, ct) = match contest.outcome {
                    Outcome::Player1Wins => (a, 1.0, 0.0, 0.0),
                    Outcome::Player0Wins => (b, 0.0, 1.0, 0.0),
                    Outcome::Tie => (t, 0.5, 0.5, 1.0),
                };
                (chosen - norm, ca - pa - 0.5 * pt, cb - pb - 0.5 * pt, ct - pt)
            } else {
                let d = a - b;
                match contest.outcome {
                    // d/dd log sigma(d) = sigma(-d)
                    Outcome::Player1Wins => {
                        let q = super::probability::bt_win_probability(b, a, None, 0);
                        (-log1p_exp(-d), q, -q, 0.0)
                    }
                    Outcome::Player0Wins => {
                        let p = super::probability::bt_win_probability(a, b, None, 0);
                        (-log1p_exp(d), -p, p, 0.0)
                    }
                    Outcome::Tie => (f64::NEG_INFINITY, 0.0, 0.0, 0.0),
                }
            };
            ll_total += ll;
            if let Some(pw) = pointwise.as_deref_mut() {
                pw[n] = ll;
            }

            if let Some(g) = grad.as_deref_mut() {
                if let Some(i) = nu_slot {
                    g[i] += d_nu;
                }
                if let Some(i) = gamma_slot {
                    g[i] += z * d_b;
                }
                for (p, d) in [(contest.player1, d_a), (contest.player0, d_b)] {
                    base_grad[p] += d;
                    if let (Some(us), Some(s), Some(slot)) = (u_std, contest.subject, u_std_slot) {
                        let idx = layout.u_index(p, s).unwrap();
                        g[idx] += d * us;
                        g[slot] += d * us * theta[idx];
                    }
                    if has_s {
                        for (k, xk) in x.iter().enumerate() {
                            g[layout.s_index(p, k).unwrap()] += d * xk;
                        }
                    }
                }
            }
        }

        let lp = self.log_prior(theta, grad.as_deref_mut());
        if let Some(g) = grad {
            if let Some(block) = layout.block(BlockKind::Lambda) {
                for (p, d) in base_grad.iter().enumerate() {
                    g[block.offset + p] += d;
                }
            } else if let Some(block) = layout.block(BlockKind::Beta) {
                for (p, d) in base_grad.iter().enumerate() {
                    for (k, xk) in info.player_design[p].iter().enumerate() {
                        g[block.offset + k] += d * xk;
                    }
                }
            }
        }
        ll_total + lp
    }
}

impl LogDensity for CompiledModel {
    fn dim(&self) -> usize {
        self.layout.dim()
    }

    fn log_density_grad(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let lp = self.evaluate(theta, Some(grad), None);
        if grad.iter().all(|g| g.is_finite()) {
            lp
        } else {
            f64::NAN
        }
    }
}
