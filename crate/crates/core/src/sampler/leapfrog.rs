use crate::model::LogDensity;

/// A point in phase space with cached density and gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub position: Vec<f64>,
    pub momentum: Vec<f64>,
    pub grad: Vec<f64>,
    pub log_density: f64,
}

impl PhasePoint {
    pub fn new<D: LogDensity + ?Sized>(density: &D, position: Vec<f64>) -> Self {
        let mut grad = vec![0.0; position.len()];
        let log_density = density.log_density_grad(&position, &mut grad);
        let momentum = vec![0.0; position.len()];
        PhasePoint { position, momentum, grad, log_density }
    }

    pub fn kinetic_energy(&self, inv_mass: &[f64]) -> f64 {
        0.5 * self.momentum.iter().zip(inv_mass).map(|(p, m)| p * p * m).sum::<f64>()
    }

    /// Total energy `H = -log p(q) + K(p)`; infinite outside the support.
    pub fn hamiltonian(&self, inv_mass: &[f64]) -> f64 {
        let h = -self.log_density + self.kinetic_energy(inv_mass);
        if h.is_nan() {
            f64::INFINITY
        } else {
            h
        }
    }

    /// Velocity `M^{-1} p`.
    pub fn velocity(&self, inv_mass: &[f64]) -> Vec<f64> {
        self.momentum.iter().zip(inv_mass).map(|(p, m)| p * m).collect()
    }
}

/// One leapfrog step of size `step` (negative integrates backward in time).
pub fn leapfrog_step<D: LogDensity + ?Sized>(density: &D, point: &mut PhasePoint, step: f64, inv_mass: &[f64]) {
    let half = 0.5 * step;
    for (p, g) in point.momentum.iter_mut().zip(&point.grad) {
        *p += half * g;
    }
    for ((q, p), m) in point.position.iter_mut().zip(&point.momentum).zip(inv_mass) {
        *q += step * m * p;
    }
    point.log_density = density.log_density_grad(&point.position, &mut point.grad);
    for (p, g) in point.momentum.iter_mut().zip(&point.grad) {
        *p += half * g;
    }
}

/// Standalone leapfrog over a gradient closure: half momentum step, full
/// position step, half momentum step.
pub fn leapfrog(
    position: &[f64],
    momentum: &[f64],
    step: f64,
    grad: impl Fn(&[f64]) -> Vec<f64>,
    inv_mass: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let g0 = grad(position);
    let half: Vec<f64> = momentum.iter().zip(&g0).map(|(r, g)| r + 0.5 * step * g).collect();
    let q: Vec<f64> = position.iter().zip(&half).zip(inv_mass).map(|((q, r), m)| q + step * m * r).collect();
    let g1 = grad(&q);
    let r = half.iter().zip(&g1).map(|(r, g)| r + 0.5 * step * g).collect();
    (q, r)
}
