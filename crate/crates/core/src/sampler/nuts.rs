//! Multinomial No-U-Turn transition with the generalized (momentum-sum)
//! termination criterion, including the extra checks across subtree
//! boundaries.

use rand::Rng;
use rand_distr::StandardNormal;

use super::leapfrog::{leapfrog_step, PhasePoint};
use crate::model::{log_sum_exp, LogDensity};

/// Energy error beyond which a trajectory is declared divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionInfo {
    pub divergent: bool,
    pub treedepth: u32,
    pub accept_stat: f64,
    pub energy: f64,
    pub n_leapfrog: u32,
}

/// Fixed-parameter NUTS kernel.
pub struct Nuts<'a, D: ?Sized> {
    pub density: &'a D,
    pub step_size: f64,
    pub inv_mass: Vec<f64>,
    pub max_treedepth: u32,
}

struct Tree<'a, 'b, D: ?Sized, R> {
    density: &'a D,
    inv_mass: &'b [f64],
    step: f64,
    h0: f64,
    rng: &'b mut R,
    n_leapfrog: u32,
    sum_metro_prob: f64,
    divergent: bool,
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn no_u_turn(v_minus: &[f64], v_plus: &[f64], rho: &[f64]) -> bool {
    dot(v_plus, rho) > 0.0 && dot(v_minus, rho) > 0.0
}

struct Edge {
    /// Momentum and velocity at the first (`beg`) and last (`end`) leaf in integration order.
    p_beg: Vec<f64>,
    p_end: Vec<f64>,
    v_beg: Vec<f64>,
    v_end: Vec<f64>,
}

impl<D: LogDensity + ?Sized, R: Rng> Tree<'_, '_, D, R> {
    /// Grows a subtree of `2^depth` leaves from `z`. Returns `None` when the
    /// subtree diverged or turned back on itself.
    fn build(
        &mut self,
        depth: u32,
        z: &mut PhasePoint,
        proposal: &mut PhasePoint,
        rho: &mut [f64],
        log_sum_weight: &mut f64,
    ) -> Option<Edge> {
        if depth == 0 {
            leapfrog_step(self.density, z, self.step, self.inv_mass);
            self.n_leapfrog += 1;
            let h = z.hamiltonian(self.inv_mass);
            if h - self.h0 > DIVERGENCE_THRESHOLD || !h.is_finite() {
                self.divergent = true;
                return None;
            }
            let log_w = self.h0 - h;
            *log_sum_weight = log_sum_exp(&[*log_sum_weight, log_w]);
            self.sum_metro_prob += if log_w > 0.0 { 1.0 } else { log_w.exp() };
            proposal.clone_from(z);
            for (r, p) in rho.iter_mut().zip(&z.momentum) {
                *r += p;
            }
            let v = z.velocity(self.inv_mass);
            return Some(Edge { p_beg: z.momentum.clone(), p_end: z.momentum.clone(), v_beg: v.clone(), v_end: v });
        }

        let dim = rho.len();
        let mut rho_init = vec![0.0; dim];
        let mut lsw_init = f64::NEG_INFINITY;
        let init = self.build(depth - 1, z, proposal, &mut rho_init, &mut lsw_init)?;

        let mut proposal_final = z.clone();
        let mut rho_final = vec![0.0; dim];
        let mut lsw_final = f64::NEG_INFINITY;
        let fin = self.build(depth - 1, z, &mut proposal_final, &mut rho_final, &mut lsw_final)?;

        let lsw_subtree = log_sum_exp(&[lsw_init, lsw_final]);
        *log_sum_weight = log_sum_exp(&[*log_sum_weight, lsw_subtree]);
        if lsw_final > lsw_subtree || self.rng.random::<f64>() < (lsw_final - lsw_subtree).exp() {
            proposal.clone_from(&proposal_final);
        }

        let rho_subtree = add(&rho_init, &rho_final);
        for (r, s) in rho.iter_mut().zip(&rho_subtree) {
            *r += s;
        }
        let mut persist = no_u_turn(&init.v_beg, &fin.v_end, &rho_subtree);
        persist &= no_u_turn(&init.v_beg, &fin.v_beg, &add(&rho_init, &fin.p_beg));
        persist &= no_u_turn(&init.v_end, &fin.v_end, &add(&rho_final, &init.p_end));
        if !persist {
            return None;
        }
        Some(Edge { p_beg: init.p_beg, p_end: fin.p_end, v_beg: init.v_beg, v_end: fin.v_end })
    }
}

impl<D: LogDensity + ?Sized> Nuts<'_, D> {
    pub fn sample_momentum<R: Rng>(&self, rng: &mut R, point: &mut PhasePoint) {
        for (p, m) in point.momentum.iter_mut().zip(&self.inv_mass) {
            let z: f64 = rng.sample(StandardNormal);
            *p = z / m.sqrt();
        }
    }

    /// One transition from `current`, which is replaced by the selected point.
    pub fn transition<R: Rng>(&self, rng: &mut R, current: &mut PhasePoint) -> TransitionInfo {
        self.sample_momentum(rng, current);
        let inv_mass = self.inv_mass.as_slice();
        let h0 = current.hamiltonian(inv_mass);

        let mut z_fwd = current.clone();
        let mut z_bck = current.clone();
        let mut sample = current.clone();
        let mut proposal = current.clone();

        let p0 = current.momentum.clone();
        let v0 = current.velocity(inv_mass);
        // boundary momenta/velocities of the whole trajectory and of the
        // leaves adjacent to the most recent join
        let (mut p_fwd_fwd, mut p_fwd_bck, mut p_bck_fwd, mut p_bck_bck) =
            (p0.clone(), p0.clone(), p0.clone(), p0.clone());
        let (mut v_fwd_fwd, mut v_fwd_bck, mut v_bck_fwd, mut v_bck_bck) = (v0.clone(), v0.clone(), v0.clone(), v0);
        let mut rho = p0;
        let mut log_sum_weight = 0.0;
        let mut depth = 0;

        let mut tree = Tree {
            density: self.density,
            inv_mass,
            step: self.step_size,
            h0,
            rng,
            n_leapfrog: 0,
            sum_metro_prob: 0.0,
            divergent: false,
        };

        while depth < self.max_treedepth {
            let dim = rho.len();
            let mut rho_fwd = vec![0.0; dim];
            let mut rho_bck = vec![0.0; dim];
            let mut lsw_subtree = f64::NEG_INFINITY;

            let forward = tree.rng.random::<f64>() > 0.5;
            let edge = if forward {
                rho_bck = rho.clone();
                p_bck_fwd = p_fwd_fwd.clone();
                v_bck_fwd = v_fwd_fwd.clone();
                tree.step = self.step_size;
                let e = tree.build(depth, &mut z_fwd, &mut proposal, &mut rho_fwd, &mut lsw_subtree);
                e.map(|e| {
                    p_fwd_bck = e.p_beg;
                    v_fwd_bck = e.v_beg;
                    p_fwd_fwd = e.p_end;
                    v_fwd_fwd = e.v_end;
                })
            } else {
                rho_fwd = rho.clone();
                p_fwd_bck = p_bck_bck.clone();
                v_fwd_bck = v_bck_bck.clone();
                tree.step = -self.step_size;
                let e = tree.build(depth, &mut z_bck, &mut proposal, &mut rho_bck, &mut lsw_subtree);
                e.map(|e| {
                    p_bck_fwd = e.p_beg;
                    v_bck_fwd = e.v_beg;
                    p_bck_bck = e.p_end;
                    v_bck_bck = e.v_end;
                })
            };
            if edge.is_none() {
                break;
            }
            depth += 1;

            if lsw_subtree > log_sum_weight || tree.rng.random::<f64>() < (lsw_subtree - log_sum_weight).exp() {
                sample.clone_from(&proposal);
            }
            log_sum_weight = log_sum_exp(&[log_sum_weight, lsw_subtree]);

            rho = add(&rho_bck, &rho_fwd);
            let mut persist = no_u_turn(&v_bck_bck, &v_fwd_fwd, &rho);
            persist &= no_u_turn(&v_bck_bck, &v_fwd_bck, &add(&rho_bck, &p_fwd_bck));
            persist &= no_u_turn(&v_bck_fwd, &v_fwd_fwd, &add(&rho_fwd, &p_bck_fwd));
            if !persist {
                break;
            }
        }

        let n_leapfrog = tree.n_leapfrog;
        let accept_stat = if n_leapfrog > 0 { tree.sum_metro_prob / f64::from(n_leapfrog) } else { 0.0 };
        let divergent = tree.divergent;
        let energy = sample.hamiltonian(inv_mass);
        *current = sample;
        TransitionInfo { divergent, treedepth: depth, accept_stat, energy, n_leapfrog }
    }
}
