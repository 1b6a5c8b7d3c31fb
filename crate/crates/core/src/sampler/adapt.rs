use rand::Rng;

use super::leapfrog::{leapfrog_step, PhasePoint};
use super::nuts::Nuts;
use crate::model::LogDensity;

/// Nesterov dual averaging of `log(step_size)` toward a target acceptance.
#[derive(Debug, Clone)]
pub struct DualAveraging {
    target: f64,
    mu: f64,
    gamma: f64,
    t0: f64,
    kappa: f64,
    counter: f64,
    s_bar: f64,
    x_bar: f64,
    log_step: f64,
}

impl DualAveraging {
    pub fn new(initial_step: f64, target: f64) -> Self {
        let mut da = DualAveraging {
            target,
            mu: 0.0,
            gamma: 0.05,
            t0: 10.0,
            kappa: 0.75,
            counter: 0.0,
            s_bar: 0.0,
            x_bar: 0.0,
            log_step: initial_step.ln(),
        };
        da.restart(initial_step);
        da
    }

    pub fn restart(&mut self, step: f64) {
        self.mu = (10.0 * step).ln();
        self.counter = 0.0;
        self.s_bar = 0.0;
        self.x_bar = 0.0;
        self.log_step = step.ln();
    }

    pub fn update(&mut self, accept_stat: f64) -> f64 {
        self.counter += 1.0;
        let stat = accept_stat.min(1.0);
        let eta = 1.0 / (self.counter + self.t0);
        self.s_bar = (1.0 - eta) * self.s_bar + eta * (self.target - stat);
        let x = self.mu - self.s_bar * self.counter.sqrt() / self.gamma;
        let x_eta = self.counter.powf(-self.kappa);
        self.x_bar = (1.0 - x_eta) * self.x_bar + x_eta * x;
        self.log_step = x;
        x.exp()
    }

    pub fn current(&self) -> f64 {
        self.log_step.exp()
    }

    /// Step size to use once adaptation ends.
    pub fn final_step(&self) -> f64 {
        if self.counter == 0.0 {
            self.current()
        } else {
            self.x_bar.exp()
        }
    }
}

/// Streaming per-coordinate variance (Welford).
#[derive(Debug, Clone)]
pub struct RunningVariance {
    n: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningVariance {
    pub fn new(dim: usize) -> Self {
        RunningVariance { n: 0.0, mean: vec![0.0; dim], m2: vec![0.0; dim] }
    }

    pub fn add(&mut self, x: &[f64]) {
        self.n += 1.0;
        for ((m, s), v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let delta = v - *m;
            *m += delta / self.n;
            *s += delta * (v - *m);
        }
    }

    pub fn count(&self) -> usize {
        self.n as usize
    }

    /// Sample variance shrunk toward `1e-3`, as used for the inverse metric.
    pub fn regularized(&self) -> Vec<f64> {
        let n = self.n;
        self.m2
            .iter()
            .map(|s| {
                let var = s / (n - 1.0);
                (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0))
            })
            .collect()
    }

    pub fn reset(&mut self) {
        *self = RunningVariance::new(self.mean.len());
    }
}

pub const INIT_BUFFER: usize = 75;
pub const TERM_BUFFER: usize = 50;
pub const BASE_WINDOW: usize = 25;

/// Slow adaptation windows `[start, end)` for the metric: doubling windows
/// between a 75-iteration initial buffer and a 50-iteration terminal buffer.
pub fn metric_windows(warmup: usize) -> Vec<(usize, usize)> {
    let mut windows = Vec::new();
    if warmup < INIT_BUFFER + TERM_BUFFER + BASE_WINDOW {
        return windows;
    }
    let last = warmup - TERM_BUFFER;
    let mut start = INIT_BUFFER;
    let mut size = BASE_WINDOW;
    while start < last {
        let mut end = start + size;
        if end + 2 * size > last {
            end = last;
        }
        windows.push((start, end));
        start = end;
        size *= 2;
    }
    windows
}

/// Doubles or halves the step size until the one-step acceptance crosses 0.8.
pub fn find_reasonable_step_size<D: LogDensity + ?Sized, R: Rng>(
    kernel: &Nuts<'_, D>,
    rng: &mut R,
    start: &PhasePoint,
    initial: f64,
) -> f64 {
    let log_target = 0.8f64.ln();
    let mut step = initial;
    let mut direction = 0.0;
    for _ in 0..100 {
        let mut z = start.clone();
        kernel.sample_momentum(rng, &mut z);
        let h0 = z.hamiltonian(&kernel.inv_mass);
        leapfrog_step(kernel.density, &mut z, step, &kernel.inv_mass);
        let delta = h0 - z.hamiltonian(&kernel.inv_mass);
        let up = delta > log_target;
        if direction == 0.0 {
            direction = if up { 1.0 } else { -1.0 };
        } else if (direction > 0.0) != up {
            break;
        }
        let next = if direction > 0.0 { step * 2.0 } else { step * 0.5 };
        if !(1e-10..=1e7).contains(&next) {
            break;
        }
        step = next;
    }
    step
}
