//! Closed-form SINR and rate evaluation for an (association, beamformer)
//! pair, together with the relaxed rates used by the association stage.
//!
//! All rates are in bit/s. Only active links (those selected by the
//! association) radiate, so only they appear as interference in the true
//! rates; the full-interference rate counts every stored beamformer instead.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::CVector;

/// Binary user association, stored as the serving transmitter of each user.
/// At most one transmitter per user holds by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Association {
    n_transmitters: usize,
    serving: Vec<Option<usize>>,
}

impl Association {
    pub fn empty(n_transmitters: usize, n_users: usize) -> Self {
        Association { n_transmitters, serving: vec![None; n_users] }
    }

    pub fn from_serving(n_transmitters: usize, serving: Vec<Option<usize>>) -> Result<Self> {
        if let Some(i) = serving.iter().flatten().find(|&&i| i >= n_transmitters) {
            return Err(Error::validation("association", format!("transmitter {i} out of range")));
        }
        Ok(Association { n_transmitters, serving })
    }

    pub fn n_transmitters(&self) -> usize {
        self.n_transmitters
    }

    pub fn n_users(&self) -> usize {
        self.serving.len()
    }

    /// `alpha_ij`.
    pub fn alpha(&self, i: usize, j: usize) -> bool {
        self.serving[j] == Some(i)
    }

    pub fn serving(&self, j: usize) -> Option<usize> {
        self.serving[j]
    }

    pub fn served_by(&self) -> &[Option<usize>] {
        &self.serving
    }

    /// Serves user `j` from `i`, or leaves it unserved with `None`.
    pub fn assign(&mut self, j: usize, i: Option<usize>) {
        assert!(i.is_none_or(|i| i < self.n_transmitters));
        self.serving[j] = i;
    }

    pub fn users_of(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.serving.iter().enumerate().filter(move |(_, s)| **s == Some(i)).map(|(j, _)| j)
    }

    pub fn count(&self, i: usize) -> usize {
        self.serving.iter().filter(|s| **s == Some(i)).count()
    }

    /// Active `(transmitter, user)` links.
    pub fn links(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.serving.iter().enumerate().filter_map(|(j, s)| s.map(|i| (i, j)))
    }

    pub fn to_matrix(&self) -> Vec<Vec<bool>> {
        (0..self.n_transmitters).map(|i| (0..self.n_users()).map(|j| self.alpha(i, j)).collect()).collect()
    }

    /// Checks the HAPS payload cap and data availability.
    pub fn validate(&self, gamma: &[Vec<bool>], haps_cap: usize) -> Result<()> {
        if gamma.len() != self.n_transmitters {
            return Err(Error::validation("association", "transmitter count mismatch"));
        }
        for (i, j) in self.links() {
            if !gamma[i][j] {
                return Err(Error::validation(
                    "association",
                    format!("user {j} served by {i} without data availability"),
                ));
            }
        }
        let haps = self.count(0);
        if haps > haps_cap {
            return Err(Error::validation("association", format!("HAPS serves {haps} users, cap is {haps_cap}")));
        }
        Ok(())
    }

    pub fn validate_for(&self, s: &Scenario) -> Result<()> {
        if self.n_users() != s.n_users() {
            return Err(Error::validation("association", "user count mismatch"));
        }
        self.validate(&s.gamma, s.haps_user_cap)
    }
}

/// Transmit beamformers, one per pair with data availability.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    w: Vec<Vec<Option<CVector>>>,
}

impl BeamformerSet {
    /// Zero beams on every pair with `gamma_ij = 1`.
    pub fn zeros(ch: &ChannelSet, gamma: &[Vec<bool>]) -> Self {
        let w = (0..ch.n_transmitters())
            .map(|i| (0..ch.n_users()).map(|j| gamma[i][j].then(|| CVector::zeros(ch.n_antennas(i)))).collect())
            .collect();
        BeamformerSet { w }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<&CVector> {
        self.w[i][j].as_ref()
    }

    pub fn set(&mut self, i: usize, j: usize, v: CVector) {
        let slot = self.w[i][j].as_mut().expect("no beamformer slot for this pair");
        assert_eq!(slot.len(), v.len(), "beam length must match the antenna count");
        *slot = v;
    }

    /// `||w_ij||^2`, zero for missing pairs.
    pub fn power(&self, i: usize, j: usize) -> f64 {
        self.get(i, j).map_or(0.0, |w| w.norm_squared())
    }

    /// Power radiated by transmitter `i` over its active links.
    pub fn transmit_power(&self, i: usize, a: &Association) -> f64 {
        a.users_of(i).map(|j| self.power(i, j)).sum()
    }

    pub fn n_transmitters(&self) -> usize {
        self.w.len()
    }
}

/// `|h_bj^H w_bl|^2`: power user `j` receives from the beam of link `(b, l)`.
#[inline]
pub fn received_power(ch: &ChannelSet, b: &BeamformerSet, tx: usize, beam_user: usize, j: usize) -> f64 {
    b.get(tx, beam_user).map_or(0.0, |w| ch.h(tx, j).dotc(w).norm_sqr())
}

#[inline]
pub fn rate_from_sinr(bandwidth_hz: f64, sinr: f64) -> f64 {
    bandwidth_hz * (1.0 + sinr).log2()
}

/// SINR of user `j` when served by `i`; interference comes from the active
/// links of every other user.
pub fn sinr(ch: &ChannelSet, a: &Association, b: &BeamformerSet, i: usize, j: usize) -> f64 {
    let signal = received_power(ch, b, i, j, j);
    let interference: f64 = a.links().filter(|&(_, u)| u != j).map(|(bt, u)| received_power(ch, b, bt, u, j)).sum();
    signal / (interference + ch.noise_power_watts)
}

pub fn rf_rate(ch: &ChannelSet, a: &Association, b: &BeamformerSet, i: usize, j: usize) -> f64 {
    rate_from_sinr(ch.bandwidth_hz, sinr(ch, a, b, i, j))
}

/// Rate of user `j` through the HAPS, capped by the backhaul.
pub fn haps_rate(ch: &ChannelSet, a: &Association, b: &BeamformerSet, j: usize) -> f64 {
    rf_rate(ch, a, b, 0, j).min(ch.fso_rate_bps)
}

/// Rate of user `j` under its current association (0 when unserved).
pub fn user_rate(ch: &ChannelSet, a: &Association, b: &BeamformerSet, j: usize) -> f64 {
    match a.serving(j) {
        None => 0.0,
        Some(0) => haps_rate(ch, a, b, j),
        Some(i) => rf_rate(ch, a, b, i, j),
    }
}

/// Rate with every stored beamformer of other users counted as interference,
/// whatever the association.
pub fn full_interference_rate(ch: &ChannelSet, b: &BeamformerSet, i: usize, j: usize) -> f64 {
    let signal = received_power(ch, b, i, j, j);
    let mut interference = 0.0;
    for bt in 0..ch.n_transmitters() {
        for u in (0..ch.n_users()).filter(|&u| u != j) {
            interference += received_power(ch, b, bt, u, j);
        }
    }
    rate_from_sinr(ch.bandwidth_hz, signal / (interference + ch.noise_power_watts))
}

/// Single-link rate with no interference at all.
pub fn interference_free_rate(ch: &ChannelSet, b: &BeamformerSet, i: usize, j: usize) -> f64 {
    let signal = received_power(ch, b, i, j, j);
    rate_from_sinr(ch.bandwidth_hz, signal / ch.noise_power_watts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateBreakdown {
    pub per_user_rate_bps: Vec<f64>,
    pub sum_rate_bps: f64,
    pub served_by: Vec<Option<usize>>,
    /// Power radiated by each transmitter over its active links.
    pub per_transmitter_power_watts: Vec<f64>,
}

impl RateBreakdown {
    /// Transmitters whose radiated power exceeds `budget * (1 + rel_tol)`.
    pub fn power_violations(&self, budgets: &[f64], rel_tol: f64) -> Vec<usize> {
        self.per_transmitter_power_watts
            .iter()
            .zip(budgets)
            .enumerate()
            .filter(|(_, (p, cap))| **p > **cap * (1.0 + rel_tol))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Network sum-rate: ground users at their RF rate, HAPS users at the
/// backhaul-capped rate, unserved users at zero.
pub fn network_sum_rate(ch: &ChannelSet, a: &Association, b: &BeamformerSet) -> RateBreakdown {
    let per_user_rate_bps: Vec<f64> = (0..a.n_users()).map(|j| user_rate(ch, a, b, j)).collect();
    RateBreakdown {
        sum_rate_bps: per_user_rate_bps.iter().sum(),
        per_user_rate_bps,
        served_by: a.served_by().to_vec(),
        per_transmitter_power_watts: (0..ch.n_transmitters()).map(|i| b.transmit_power(i, a)).collect(),
    }
}

/// Shorthand for the scalar objective.
pub fn sum_rate(ch: &ChannelSet, a: &Association, b: &BeamformerSet) -> f64 {
    (0..a.n_users()).map(|j| user_rate(ch, a, b, j)).sum()
}
