//! Backhaul-aware WMMSE beamforming under a fixed association.
//!
//! Users have a single antenna, so receivers `u`, MSEs `e` and MSE weights
//! `rho` are scalars. Each HAPS user carries a binary weight `lambda` that is
//! 1 while its RF rate is the binding term of `min(RF, FSO)` and 0 when the
//! backhaul caps it; ground users always have `lambda = 1`. With `lambda`
//! fixed, one iteration is block coordinate descent on
//!
//! ```text
//! J(u, rho, w) = sum_j lambda_j (rho_j e_j - ln rho_j)
//! ```
//!
//! and never decreases `sum_j lambda_j ln(1 + SINR_j)`.
//!
//! Only active links are updated. Beams of inactive pairs are left as they
//! are so the next association stage still sees candidate beams.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::rates::{self, received_power, Association, BeamformerSet};
use crate::CVector;

/// Lower clamp on the MSE before inversion.
pub const MSE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamformParams {
    /// Stop when the true sum-rate moves by at most this fraction.
    pub eps_rel: f64,
    pub max_iters: usize,
}

impl Default for BeamformParams {
    fn default() -> Self {
        BeamformParams { eps_rel: 1e-4, max_iters: 100 }
    }
}

/// Per-user WMMSE variables. Every user has at most one active link, so the
/// vectors are indexed by user; entries of unserved users are unused.
#[derive(Debug, Clone, PartialEq)]
pub struct WmmseState {
    pub u: Vec<Complex64>,
    pub rho: Vec<f64>,
    /// `tau_0j = min(RF, FSO)` for HAPS users, 0 elsewhere.
    pub tau: Vec<f64>,
    pub lambda: Vec<bool>,
    /// Power multiplier found by the last transmit update of each transmitter.
    pub mu: Vec<f64>,
}

impl WmmseState {
    pub fn new(n_transmitters: usize, n_users: usize) -> Self {
        WmmseState {
            u: vec![Complex64::ZERO; n_users],
            rho: vec![1.0; n_users],
            tau: vec![0.0; n_users],
            lambda: vec![true; n_users],
            mu: vec![0.0; n_transmitters],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamformingTrace {
    /// `sum_j lambda_j R_j^RF` after each iteration, bit/s.
    pub weighted_sum_rates: Vec<f64>,
    /// True network sum-rate after each iteration, bit/s.
    pub sum_rates: Vec<f64>,
    pub initial_sum_rate: f64,
    pub best_sum_rate: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// `tau_0j` and `lambda_0j` for every HAPS user under the current beams.
/// A tie between the RF and backhaul rates keeps `lambda = 1`.
pub fn update_tau_lambda(ch: &ChannelSet, a: &Association, b: &BeamformerSet) -> (Vec<f64>, Vec<bool>) {
    (0..a.n_users())
        .map(|j| match a.serving(j) {
            Some(0) => {
                let rf = rates::rf_rate(ch, a, b, 0, j);
                let tau = rf.min(ch.fso_rate_bps);
                (tau, tau == rf)
            }
            _ => (0.0, true),
        })
        .unzip()
}

/// `|h_ij^H w_ij|` numerator term `h_ij^H w_ij`.
fn gain_term(ch: &ChannelSet, b: &BeamformerSet, i: usize, j: usize) -> Complex64 {
    b.get(i, j).map_or(Complex64::ZERO, |w| ch.h(i, j).dotc(w))
}

/// Power user `j` receives from every active link, itself included.
fn total_received(ch: &ChannelSet, a: &Association, b: &BeamformerSet, j: usize) -> f64 {
    a.links().map(|(bt, l)| received_power(ch, b, bt, l, j)).sum()
}

/// MMSE receive coefficient of link `(i, j)`.
pub fn mmse_receiver(ch: &ChannelSet, a: &Association, b: &BeamformerSet, i: usize, j: usize) -> Complex64 {
    gain_term(ch, b, i, j) / (total_received(ch, a, b, j) + ch.noise_power_watts)
}

/// MSE of link `(i, j)` with receiver `u`.
pub fn mse(ch: &ChannelSet, a: &Association, b: &BeamformerSet, u: Complex64, i: usize, j: usize) -> f64 {
    let s = gain_term(ch, b, i, j);
    let others: f64 = a.links().filter(|&link| link != (i, j)).map(|(bt, l)| received_power(ch, b, bt, l, j)).sum();
    (Complex64::ONE - u.conj() * s).norm_sqr() + u.norm_sqr() * (others + ch.noise_power_watts)
}

pub fn mse_weight(e: f64) -> f64 {
    1.0 / e.max(MSE_FLOOR)
}

/// Minimizes the weighted MSE over the beams of transmitter `i` subject to
/// its power budget and writes them into `b`. Returns the multiplier `mu`.
pub fn transmit_update(
    ch: &ChannelSet,
    a: &Association,
    b: &mut BeamformerSet,
    st: &WmmseState,
    i: usize,
    p_max: f64,
) -> f64 {
    let users: Vec<usize> = a.users_of(i).collect();
    if users.is_empty() {
        return 0.0;
    }
    let n = ch.n_antennas(i);
    let mut am = DMatrix::<Complex64>::zeros(n, n);
    for (l, serving) in a.served_by().iter().enumerate() {
        if serving.is_none() || !st.lambda[l] {
            continue;
        }
        let c = st.rho[l] * st.u[l].norm_sqr();
        if c > 0.0 {
            let h = ch.h(i, l);
            am.gerc(Complex64::from(c), h, h, Complex64::ONE);
        }
    }
    let eig = SymmetricEigen::new(am);
    let d: Vec<f64> = eig.eigenvalues.iter().map(|x| x.max(0.0)).collect();
    let v = eig.eigenvectors;

    // rhs of each beam in the eigenbasis
    let q: Vec<CVector> = users
        .iter()
        .map(|&j| {
            let scale = if st.lambda[j] { st.u[j] * st.rho[j] } else { Complex64::ZERO };
            v.ad_mul(&(ch.h(i, j) * scale))
        })
        .collect();
    let c: Vec<f64> = (0..n).map(|k| q.iter().map(|qj| qj[k].norm_sqr()).sum()).collect();
    let d_max = d.iter().copied().fold(0.0, f64::max);
    let null = d_max * n as f64 * 1e2 * f64::EPSILON;
    let power =
        |mu: f64| -> f64 { (0..n).filter(|&k| mu > 0.0 || d[k] > null).map(|k| c[k] / (d[k] + mu).powi(2)).sum() };

    let mu = if power(0.0) <= p_max {
        0.0
    } else {
        // P(mu) is squeezed between c_tot / (d_max + mu)^2 and
        // c_tot / (d_min + mu)^2, which brackets the root.
        let s = (c.iter().sum::<f64>() / p_max).sqrt();
        let d_min = d.iter().copied().fold(f64::INFINITY, f64::min);
        let (mut lo, mut hi) = ((s - d_max).max(0.0), s - d_min);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if power(mid) > p_max {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // the upper end is always feasible
        hi
    };

    for (&j, qj) in users.iter().zip(&q) {
        let scaled =
            CVector::from_fn(n, |k, _| if mu > 0.0 || d[k] > null { qj[k] / (d[k] + mu) } else { Complex64::ZERO });
        b.set(i, j, &v * scaled);
    }
    mu
}

/// Stepwise WMMSE solver; [`algorithm2_beamform`] drives it, tests call the
/// individual block updates.
#[derive(Debug, Clone)]
pub struct Wmmse<'a> {
    ch: &'a ChannelSet,
    a: &'a Association,
    budgets: Vec<f64>,
    pub beams: BeamformerSet,
    pub state: WmmseState,
}

impl<'a> Wmmse<'a> {
    /// Active links whose beam is exactly zero would never move under the
    /// updates (their receiver is zero), so they are seeded with a matched
    /// filter sharing whatever budget the other active links leave.
    pub fn new(ch: &'a ChannelSet, a: &'a Association, budgets: &[f64], init: BeamformerSet) -> Self {
        let mut beams = init;
        for i in 0..ch.n_transmitters() {
            let zero: Vec<usize> = a.users_of(i).filter(|&j| beams.power(i, j) == 0.0 && ch.gain(i, j) > 0.0).collect();
            if zero.is_empty() {
                continue;
            }
            let left = budgets[i] - beams.transmit_power(i, a);
            if left <= 0.0 {
                continue;
            }
            let amp = (left / zero.len() as f64).sqrt();
            for j in zero {
                let h = ch.h(i, j);
                beams.set(i, j, h * Complex64::from(amp / h.norm()));
            }
        }
        Wmmse { ch, a, budgets: budgets.to_vec(), beams, state: WmmseState::new(ch.n_transmitters(), ch.n_users()) }
    }

    pub fn update_tau_lambda(&mut self) {
        let (tau, lambda) = update_tau_lambda(self.ch, self.a, &self.beams);
        self.state.tau = tau;
        self.state.lambda = lambda;
    }

    pub fn update_receivers(&mut self) {
        for (i, j) in self.a.links() {
            self.state.u[j] = mmse_receiver(self.ch, self.a, &self.beams, i, j);
        }
    }

    pub fn update_weights(&mut self) {
        for (i, j) in self.a.links() {
            self.state.rho[j] = mse_weight(mse(self.ch, self.a, &self.beams, self.state.u[j], i, j));
        }
    }

    pub fn update_transmitters(&mut self) {
        for i in 0..self.ch.n_transmitters() {
            self.state.mu[i] = transmit_update(self.ch, self.a, &mut self.beams, &self.state, i, self.budgets[i]);
        }
    }

    /// One full pass: receivers, weights, beams.
    pub fn step(&mut self) {
        self.update_receivers();
        self.update_weights();
        self.update_transmitters();
    }

    /// WMMSE objective `sum lambda (rho e - ln rho)` at the current variables.
    pub fn objective(&self) -> f64 {
        self.a
            .links()
            .filter(|&(_, j)| self.state.lambda[j])
            .map(|(i, j)| {
                let rho = self.state.rho[j];
                rho * mse(self.ch, self.a, &self.beams, self.state.u[j], i, j) - rho.ln()
            })
            .sum()
    }

    /// `sum lambda ln(1 + SINR)` in nats.
    pub fn utility(&self) -> f64 {
        utility(self.ch, self.a, &self.beams, &self.state.lambda)
    }

    /// `sum lambda R^RF` in bit/s.
    pub fn weighted_sum_rate(&self) -> f64 {
        self.utility() * self.ch.bandwidth_hz / std::f64::consts::LN_2
    }

    pub fn sum_rate(&self) -> f64 {
        rates::sum_rate(self.ch, self.a, &self.beams)
    }
}

/// `sum_j lambda_j ln(1 + SINR_j)` over the active links, in nats.
pub fn utility(ch: &ChannelSet, a: &Association, b: &BeamformerSet, lambda: &[bool]) -> f64 {
    a.links().filter(|&(_, j)| lambda[j]).map(|(i, j)| rates::sinr(ch, a, b, i, j).ln_1p()).sum()
}

/// WMMSE iterations from `init`; returns the best beams seen under the true
/// sum-rate.
pub fn algorithm2_beamform(
    ch: &ChannelSet,
    a: &Association,
    init: BeamformerSet,
    budgets: &[f64],
    params: &BeamformParams,
) -> (BeamformerSet, BeamformingTrace) {
    let initial = rates::sum_rate(ch, a, &init);
    let mut best = (initial, init.clone());
    let mut solver = Wmmse::new(ch, a, budgets, init);
    let seeded = solver.sum_rate();
    if seeded > best.0 {
        best = (seeded, solver.beams.clone());
    }
    let mut trace = BeamformingTrace {
        weighted_sum_rates: Vec::new(),
        sum_rates: Vec::new(),
        initial_sum_rate: initial,
        best_sum_rate: initial,
        converged: false,
        iterations: 0,
    };
    let mut previous = seeded;
    for _ in 0..params.max_iters {
        solver.update_tau_lambda();
        solver.step();
        let r = solver.sum_rate();
        trace.iterations += 1;
        trace.sum_rates.push(r);
        trace.weighted_sum_rates.push(solver.weighted_sum_rate());
        if r > best.0 {
            best = (r, solver.beams.clone());
        }
        if (r - previous).abs() <= params.eps_rel * r.abs() {
            trace.converged = true;
            break;
        }
        previous = r;
    }
    trace.best_sum_rate = best.0;
    (best.1, trace)
}
