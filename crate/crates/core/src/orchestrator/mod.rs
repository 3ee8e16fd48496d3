//! Alternating association and beamforming, and Monte-Carlo sweeps over it.
//!
//! Six methods share one outer loop. `IG_*` re-run the ILP/GAP association
//! stage every outer iteration; `CD_*` and `DD_*` use a greedy association
//! computed once (it depends only on geometry or channel gains). `*_WMMSE`
//! refine the beams after each association step, `*_only` keep the initial
//! matched-filter beams.

mod sweep;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use sweep::{monte_carlo_sweep, trial_seeds, Axis, CellSummary, SweepResult, SweepRow, SweepSpec};

use crate::association::{algorithm1_associate, baseline_channel, baseline_distance, AssociationParams};
use crate::beamforming::{algorithm2_beamform, BeamformParams};
use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::rates::{self, Association, BeamformerSet, RateBreakdown};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "IG_WMMSE")]
    IgWmmse,
    #[serde(rename = "CD_WMMSE")]
    CdWmmse,
    #[serde(rename = "DD_WMMSE")]
    DdWmmse,
    #[serde(rename = "IG_only")]
    IgOnly,
    #[serde(rename = "CD_only")]
    CdOnly,
    #[serde(rename = "DD_only")]
    DdOnly,
}

impl Method {
    pub const ALL: [Method; 6] =
        [Method::IgWmmse, Method::CdWmmse, Method::DdWmmse, Method::IgOnly, Method::CdOnly, Method::DdOnly];

    pub fn name(self) -> &'static str {
        match self {
            Method::IgWmmse => "IG_WMMSE",
            Method::CdWmmse => "CD_WMMSE",
            Method::DdWmmse => "DD_WMMSE",
            Method::IgOnly => "IG_only",
            Method::CdOnly => "CD_only",
            Method::DdOnly => "DD_only",
        }
    }

    pub fn uses_wmmse(self) -> bool {
        matches!(self, Method::IgWmmse | Method::CdWmmse | Method::DdWmmse)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    /// Case-insensitive; `-` and `_` are interchangeable.
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().replace('-', "_").to_ascii_uppercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name().to_ascii_uppercase() == key)
            .ok_or_else(|| Error::Unknown { kind: "method", value: s.to_string() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub eps_outer: f64,
    pub eps_assoc: f64,
    pub eps_beam: f64,
    pub max_outer: usize,
    pub max_assoc: usize,
    pub max_beam: usize,
    pub seed: u64,
    pub method: Method,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            eps_outer: 1e-4,
            eps_assoc: 1e-4,
            eps_beam: 1e-4,
            max_outer: 10,
            max_assoc: 20,
            max_beam: 100,
            seed: 0,
            method: Method::IgWmmse,
        }
    }
}

impl SolverParams {
    pub fn with_method(self, method: Method) -> Self {
        SolverParams { method, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, eps) in [("eps_outer", self.eps_outer), ("eps_assoc", self.eps_assoc), ("eps_beam", self.eps_beam)] {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(Error::validation(name, "tolerance must be positive"));
            }
        }
        for (name, cap) in [("max_outer", self.max_outer), ("max_assoc", self.max_assoc), ("max_beam", self.max_beam)] {
            if cap == 0 {
                return Err(Error::validation(name, "iteration cap must be >= 1"));
            }
        }
        Ok(())
    }

    pub fn association_params(&self) -> AssociationParams {
        AssociationParams { eps_rel: self.eps_assoc, max_iters: self.max_assoc, ..Default::default() }
    }

    pub fn beam_params(&self) -> BeamformParams {
        BeamformParams { eps_rel: self.eps_beam, max_iters: self.max_beam }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub method: Method,
    pub sum_rate_bps: f64,
    /// Fraction of users served by the HAPS.
    pub delta: f64,
    pub association: Association,
    pub rates: RateBreakdown,
    /// True sum-rate after each outer iteration.
    pub outer_sum_rates: Vec<f64>,
    pub assoc_iterations: Vec<usize>,
    pub beam_iterations: Vec<usize>,
    /// False when a branch-and-bound call ran out of nodes.
    pub assoc_proven_optimal: bool,
    #[serde(skip)]
    pub beams: BeamformerSet,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl SolveReport {
    pub fn outer_iterations(&self) -> usize {
        self.outer_sum_rates.len()
    }
}

/// Matched-filter beams splitting each budget evenly over the links the
/// transmitter could serve: at most `min(#gamma, slot limit)` of them.
pub fn init_beamformers(ch: &ChannelSet, s: &Scenario) -> BeamformerSet {
    let mut b = BeamformerSet::zeros(ch, &s.gamma);
    for i in 0..ch.n_transmitters() {
        let n_pot = s.gamma[i].iter().filter(|&&g| g).count().min(s.slot_limit(i));
        if n_pot == 0 {
            continue;
        }
        let amp = (s.transmitters[i].p_max_watts / n_pot as f64).sqrt();
        for j in (0..ch.n_users()).filter(|&j| s.gamma[i][j]) {
            let h = ch.h(i, j);
            let norm = h.norm();
            if norm > 0.0 {
                b.set(i, j, h * Complex64::from(amp / norm));
            }
        }
    }
    b
}

pub fn compute_delta(a: &Association, s: &Scenario) -> f64 {
    if s.n_users() == 0 {
        return 0.0;
    }
    a.count(0) as f64 / s.n_users() as f64
}

fn check_shapes(s: &Scenario, ch: &ChannelSet) -> Result<()> {
    if ch.n_transmitters() != s.n_transmitters() || ch.n_users() != s.n_users() {
        return Err(Error::validation("channels", "channel set does not match the scenario"));
    }
    for (i, t) in s.transmitters.iter().enumerate() {
        if ch.n_users() > 0 && ch.n_antennas(i) != t.n_antennas {
            return Err(Error::validation(format!("channels[{i}]"), "antenna count mismatch"));
        }
    }
    Ok(())
}

/// Alternates association and beamforming until the true sum-rate settles
/// and returns the best pair seen.
///
/// Each outer iteration starts from the best pair so far. A new association
/// replaces it only if it wins after beamforming; otherwise the incumbent's
/// beams are refined further. `outer_sum_rates` is therefore non-decreasing.
pub fn algorithm3_solve(s: &Scenario, ch: &ChannelSet, p: &SolverParams) -> Result<SolveReport> {
    let start = Instant::now();
    s.validate()?;
    p.validate()?;
    check_shapes(s, ch)?;
    let budgets: Vec<f64> = s.transmitters.iter().map(|t| t.p_max_watts).collect();
    let assoc_params = p.association_params();
    let beam_params = p.beam_params();

    let frozen = match p.method {
        Method::DdWmmse | Method::DdOnly => Some(baseline_distance(s)),
        Method::CdWmmse | Method::CdOnly => Some(baseline_channel(ch, s)),
        Method::IgWmmse | Method::IgOnly => None,
    };

    let mut outer_sum_rates = Vec::new();
    let mut assoc_iterations = Vec::new();
    let mut beam_iterations = Vec::new();
    let mut proven = true;
    let mut beamform = |a: &Association, init: BeamformerSet| -> (f64, BeamformerSet) {
        let b = if p.method.uses_wmmse() {
            let (b, t) = algorithm2_beamform(ch, a, init, &budgets, &beam_params);
            beam_iterations.push(t.iterations);
            b
        } else {
            init
        };
        (rates::sum_rate(ch, a, &b), b)
    };

    // (sum-rate, association, beams) of the best pair so far; every outer
    // iteration starts from it, so the recorded trace never decreases
    let mut best: Option<(f64, Association, BeamformerSet)> = None;
    for _ in 0..p.max_outer {
        let beams = best.as_ref().map_or_else(|| init_beamformers(ch, s), |(_, _, b)| b.clone());
        let proposal = match &frozen {
            Some(a) => a.clone(),
            None => {
                let t = algorithm1_associate(s, ch, &beams, &assoc_params)?;
                proven &= t.proven_optimal;
                assoc_iterations.push(t.sum_rates.len());
                t.association
            }
        };
        let previous = best.as_ref().map(|(r, _, _)| *r);
        let (r, b) = beamform(&proposal, beams);
        let improved = previous.is_none_or(|prev| r > prev);
        if improved {
            best = Some((r, proposal, b));
        } else if let Some((prev, a, b)) = best.take() {
            // a new association lost after beamforming; refine the incumbent
            let refined = (proposal != a).then(|| beamform(&a, b.clone()));
            best = Some(match refined {
                Some((r, b2)) if r > prev => (r, a, b2),
                _ => (prev, a, b),
            });
        }
        let (r, _, _) = best.as_ref().expect("set above");
        outer_sum_rates.push(*r);
        // without WMMSE nothing changes between outer iterations
        if !p.method.uses_wmmse() {
            break;
        }
        if let Some(prev) = previous {
            if (r - prev).abs() <= p.eps_outer * r.abs() {
                break;
            }
        }
    }

    let (sum_rate_bps, association, beams) = best.expect("max_outer >= 1");
    let rates = rates::network_sum_rate(ch, &association, &beams);
    Ok(SolveReport {
        method: p.method,
        sum_rate_bps,
        delta: compute_delta(&association, s),
        association,
        rates,
        outer_sum_rates,
        assoc_iterations,
        beam_iterations,
        assoc_proven_optimal: proven,
        beams,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests;
