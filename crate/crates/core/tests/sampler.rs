use bpc_core::diagnostics::effective_sample_size;
use bpc_core::model::LogDensity;
use bpc_core::sampler::{chain_rng, run_chains, Nuts, PhasePoint};
use bpc_core::SamplerConfig;

/// Independent normals with standard deviations `1, 2, ..., dim`.
struct Gaussian {
    sd: Vec<f64>,
}

impl LogDensity for Gaussian {
    fn dim(&self) -> usize {
        self.sd.len()
    }

    fn log_density_grad(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let mut lp = 0.0;
        for ((g, &x), &s) in grad.iter_mut().zip(theta).zip(&self.sd) {
            *g = -x / (s * s);
            lp -= 0.5 * x * x / (s * s);
        }
        lp
    }
}

fn gaussian(dim: usize) -> Gaussian {
    Gaussian { sd: (1..=dim).map(|k| k as f64).collect() }
}

#[test]
fn recovers_ten_dimensional_normal() {
    let target = gaussian(10);
    let config = SamplerConfig { chains: 4, warmup: 1000, draws: 1000, seed: 3, ..SamplerConfig::default() };
    let chains = run_chains(&target, &config).unwrap();
    for (k, &s) in target.sd.iter().enumerate() {
        let per_chain: Vec<Vec<f64>> = chains.iter().map(|c| c.column(k)).collect();
        let all = per_chain.concat();
        let n = all.len() as f64;
        let mean = all.iter().sum::<f64>() / n;
        let var = all.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let ess = effective_sample_size(&per_chain).unwrap();
        assert!(mean.abs() < 4.0 * s / ess.sqrt(), "coordinate {k}: mean {mean}, ess {ess}");
        assert!((var.sqrt() / s - 1.0).abs() < 0.1, "coordinate {k}: sd {} vs {s}", var.sqrt());
    }
    let divergent: usize = chains.iter().map(|c| c.stats.iter().filter(|s| s.divergent).count()).sum();
    assert_eq!(divergent, 0);
}

#[test]
fn adapted_metric_matches_target_variance() {
    let target = gaussian(10);
    let config = SamplerConfig { chains: 2, warmup: 1000, draws: 200, seed: 5, ..SamplerConfig::default() };
    for chain in run_chains(&target, &config).unwrap() {
        for (m, s) in chain.inv_mass.iter().zip(&target.sd) {
            let ratio = m / (s * s);
            assert!((0.5..2.0).contains(&ratio), "inverse mass {m} for sd {s}");
        }
    }
}

fn divergences(step_size: f64) -> usize {
    let target = gaussian(10);
    let nuts = Nuts { density: &target, step_size, inv_mass: vec![1.0; 10], max_treedepth: 8 };
    let mut rng = chain_rng(9, 0);
    let mut point = PhasePoint::new(&target, vec![0.5; 10]);
    (0..300).filter(|_| nuts.transition(&mut rng, &mut point).divergent).count()
}

#[test]
fn oversized_steps_diverge_more() {
    // leapfrog is stable below twice the smallest scale (here 1)
    let small = divergences(0.3);
    let large = divergences(3.0);
    assert_eq!(small, 0);
    assert!(large > 100, "{large} divergences at 10x step size");
}
