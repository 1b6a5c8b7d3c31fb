//! No-U-Turn Hamiltonian Monte Carlo with step-size and diagonal metric
//! adaptation.

mod adapt;
mod leapfrog;
mod nuts;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use adapt::{find_reasonable_step_size, metric_windows, DualAveraging, RunningVariance};
pub use leapfrog::{leapfrog, leapfrog_step, PhasePoint};
pub use nuts::{Nuts, TransitionInfo, DIVERGENCE_THRESHOLD};

use crate::error::{Error, Result};
use crate::model::{CompiledModel, LogDensity, ModelInfo};

const MAX_INIT_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub chains: usize,
    pub warmup: usize,
    pub draws: usize,
    pub target_accept: f64,
    pub max_treedepth: u32,
    pub seed: u64,
    pub init_radius: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            chains: 4,
            warmup: 1000,
            draws: 2000,
            target_accept: 0.8,
            max_treedepth: 10,
            seed: 0,
            init_radius: 2.0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.chains == 0 {
            return fail("chains must be at least 1");
        }
        if self.draws == 0 {
            return fail("draws must be at least 1");
        }
        if self.warmup > 0 && self.warmup < 150 {
            return fail("warmup must be 0 (no adaptation) or at least 150");
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return fail("target_accept must lie in (0, 1)");
        }
        if self.max_treedepth == 0 {
            return fail("max_treedepth must be at least 1");
        }
        if !(self.init_radius >= 0.0 && self.init_radius.is_finite()) {
            return fail("init_radius must be finite and non-negative");
        }
        Ok(())
    }
}

/// Post-warmup output of one chain. Draws are stored row-major on the
/// unconstrained scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainDraws {
    pub dim: usize,
    pub draws: Vec<f64>,
    pub stats: Vec<TransitionStats>,
    pub step_size: f64,
    pub inv_mass: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionStats {
    pub divergent: bool,
    pub treedepth: u32,
    pub accept_stat: f64,
    pub energy: f64,
    pub n_leapfrog: u32,
}

impl From<TransitionInfo> for TransitionStats {
    fn from(t: TransitionInfo) -> Self {
        TransitionStats {
            divergent: t.divergent,
            treedepth: t.treedepth,
            accept_stat: t.accept_stat,
            energy: t.energy,
            n_leapfrog: t.n_leapfrog,
        }
    }
}

impl ChainDraws {
    pub fn n_draws(&self) -> usize {
        self.stats.len()
    }

    pub fn draw(&self, i: usize) -> &[f64] {
        &self.draws[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, param: usize) -> Vec<f64> {
        (0..self.n_draws()).map(|i| self.draws[i * self.dim + param]).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.stats.iter().map(|s| s.energy).collect()
    }
}

/// Random generator for a chain: ChaCha8 keyed by `seed ^ chain`.
pub fn chain_rng(seed: u64, chain: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ chain as u64)
}

fn initial_point<D: LogDensity + ?Sized, R: Rng>(density: &D, rng: &mut R, radius: f64) -> Result<PhasePoint> {
    let dim = density.dim();
    for _ in 0..MAX_INIT_ATTEMPTS {
        let q: Vec<f64> =
            (0..dim).map(|_| if radius > 0.0 { rng.random_range(-radius..=radius) } else { 0.0 }).collect();
        let point = PhasePoint::new(density, q);
        if point.log_density.is_finite() && point.grad.iter().all(|g| g.is_finite()) {
            return Ok(point);
        }
    }
    Err(Error::NonFiniteInit(MAX_INIT_ATTEMPTS))
}

/// Runs warmup and sampling for a single chain.
pub fn run_chain<D: LogDensity + ?Sized>(density: &D, config: &SamplerConfig, chain: usize) -> Result<ChainDraws> {
    let dim = density.dim();
    let mut rng = chain_rng(config.seed, chain);
    let mut point = initial_point(density, &mut rng, config.init_radius)?;
    let mut kernel = Nuts { density, step_size: 1.0, inv_mass: vec![1.0; dim], max_treedepth: config.max_treedepth };

    if config.warmup > 0 {
        kernel.step_size = find_reasonable_step_size(&kernel, &mut rng, &point, 1.0);
        let mut da = DualAveraging::new(kernel.step_size, config.target_accept);
        let windows = metric_windows(config.warmup);
        let mut variance = RunningVariance::new(dim);
        for it in 0..config.warmup {
            let info = kernel.transition(&mut rng, &mut point);
            kernel.step_size = da.update(info.accept_stat);
            if let Some(&(_, end)) = windows.iter().find(|(s, e)| (*s..*e).contains(&it)) {
                variance.add(&point.position);
                if it + 1 == end {
                    kernel.inv_mass = variance.regularized();
                    variance.reset();
                    kernel.step_size = find_reasonable_step_size(&kernel, &mut rng, &point, kernel.step_size);
                    da.restart(kernel.step_size);
                }
            }
        }
        kernel.step_size = da.final_step();
    }

    let mut draws = Vec::with_capacity(config.draws * dim);
    let mut stats = Vec::with_capacity(config.draws);
    for _ in 0..config.draws {
        let info = kernel.transition(&mut rng, &mut point);
        draws.extend_from_slice(&point.position);
        stats.push(TransitionStats::from(info));
    }

    let divergent = stats.iter().filter(|s| s.divergent).count();
    if divergent * 10 > stats.len() * 9 {
        return Err(Error::AllDivergent { chain, divergent, total: stats.len() });
    }

    Ok(ChainDraws { dim, draws, stats, step_size: kernel.step_size, inv_mass: kernel.inv_mass })
}

/// Runs all chains (in parallel when a thread pool is available) and returns
/// them in chain-index order.
pub fn run_chains<D: LogDensity + ?Sized>(density: &D, config: &SamplerConfig) -> Result<Vec<ChainDraws>> {
    config.validate()?;
    if density.dim() == 0 {
        return Err(Error::InvalidConfig("model has no parameters".into()));
    }
    (0..config.chains).into_par_iter().map(|c| run_chain(density, config, c)).collect()
}

/// A fitted model: sampler output plus everything needed to interpret it.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorFit {
    pub info: ModelInfo,
    pub config: SamplerConfig,
    pub chains: Vec<ChainDraws>,
    pub data_fingerprint: String,
}

pub fn sample(model: &CompiledModel, config: &SamplerConfig) -> Result<PosteriorFit> {
    let chains = run_chains(model, config)?;
    Ok(PosteriorFit {
        info: model.info.clone(),
        config: config.clone(),
        chains,
        data_fingerprint: model.fingerprint.clone(),
    })
}

impl PosteriorFit {
    pub fn dim(&self) -> usize {
        self.info.layout.dim()
    }

    pub fn n_chains(&self) -> usize {
        self.chains.len()
    }

    pub fn total_draws(&self) -> usize {
        self.chains.iter().map(ChainDraws::n_draws).sum()
    }

    /// Unconstrained draws of every chain in chain order.
    pub fn draws(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.chains.iter().flat_map(|c| (0..c.n_draws()).map(move |i| c.draw(i)))
    }

    /// Per-chain sequences of one parameter on the constrained scale.
    pub fn constrained_chains(&self, param: usize) -> Vec<Vec<f64>> {
        let layout = &self.info.layout;
        self.chains.iter().map(|c| (0..c.n_draws()).map(|i| layout.constrain(c.draw(i))[param]).collect()).collect()
    }

    /// Every constrained parameter as per-chain sequences: `[param][chain][draw]`.
    pub fn constrained_by_param(&self) -> Vec<Vec<Vec<f64>>> {
        let dim = self.dim();
        let layout = &self.info.layout;
        let mut out = vec![vec![Vec::new(); self.n_chains()]; dim];
        for (c, chain) in self.chains.iter().enumerate() {
            for i in 0..chain.n_draws() {
                let v = layout.constrain(chain.draw(i));
                for (p, x) in v.into_iter().enumerate() {
                    out[p][c].push(x);
                }
            }
        }
        out
    }

    pub fn divergent_count(&self) -> usize {
        self.chains.iter().flat_map(|c| &c.stats).filter(|s| s.divergent).count()
    }

    pub fn treedepth_hits(&self) -> usize {
        let max = self.config.max_treedepth;
        self.chains.iter().flat_map(|c| &c.stats).filter(|s| s.treedepth >= max).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) struct StdNormal(pub usize);

    impl LogDensity for StdNormal {
        fn dim(&self) -> usize {
            self.0
        }
        fn log_density_grad(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
            for (g, x) in grad.iter_mut().zip(theta) {
                *g = -x;
            }
            -0.5 * theta.iter().map(|x| x * x).sum::<f64>()
        }
    }

    #[test]
    fn config_validation() {
        assert!(SamplerConfig::default().validate().is_ok());
        for bad in [
            SamplerConfig { chains: 0, ..Default::default() },
            SamplerConfig { warmup: 100, ..Default::default() },
            SamplerConfig { target_accept: 1.0, ..Default::default() },
            SamplerConfig { draws: 0, ..Default::default() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn seeded_runs_are_identical() {
        let cfg = SamplerConfig { chains: 2, warmup: 150, draws: 100, seed: 7, ..Default::default() };
        let a = run_chains(&StdNormal(3), &cfg).unwrap();
        let b = run_chains(&StdNormal(3), &cfg).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0].draws, a[1].draws);
    }

    #[test]
    fn one_energy_per_transition() {
        let cfg = SamplerConfig { chains: 1, warmup: 150, draws: 57, ..Default::default() };
        let run = run_chains(&StdNormal(2), &cfg).unwrap();
        assert_eq!(run[0].stats.len(), 57);
        assert_eq!(run[0].draws.len(), 57 * 2);
        assert!(run[0].stats.iter().all(|s| s.energy.is_finite() && (0.0..=1.0).contains(&s.accept_stat)));
    }

    #[test]
    fn adapted_metric_tracks_scale() {
        struct Scaled;
        impl LogDensity for Scaled {
            fn dim(&self) -> usize {
                2
            }
            fn log_density_grad(&self, t: &[f64], g: &mut [f64]) -> f64 {
                g[0] = -t[0] / 100.0;
                g[1] = -t[1] / 0.01;
                -0.5 * (t[0] * t[0] / 100.0 + t[1] * t[1] / 0.01)
            }
        }
        let cfg = SamplerConfig { chains: 1, warmup: 1000, draws: 10, ..Default::default() };
        let run = run_chains(&Scaled, &cfg).unwrap();
        let m = &run[0].inv_mass;
        assert!(m[0] > 30.0 && m[0] < 300.0, "{m:?}");
        assert!(m[1] > 0.003 && m[1] < 0.03, "{m:?}");
    }

    #[test]
    fn non_finite_density_fails_init() {
        struct Nowhere;
        impl LogDensity for Nowhere {
            fn dim(&self) -> usize {
                1
            }
            fn log_density_grad(&self, _: &[f64], g: &mut [f64]) -> f64 {
                g[0] = 0.0;
                f64::NEG_INFINITY
            }
        }
        let cfg = SamplerConfig { chains: 1, warmup: 0, draws: 1, ..Default::default() };
        assert!(matches!(run_chains(&Nowhere, &cfg), Err(Error::NonFiniteInit(100))));
    }
}
