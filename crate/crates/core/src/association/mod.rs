//! User association under fixed beamformers.
//!
//! The proposed scheme seeds with an integer program whose ground-BS profits
//! are the pessimistic full-interference rates, then iterates a generalized
//! assignment problem (GAP) whose ground-BS profits are the optimistic
//! interference-free rates and whose HAPS profits are the backhaul-capped
//! true rates `t_0j` of the previous association. Both problems are solved
//! exactly by [`solve_assignment_bnb`]. The best association seen under the
//! true sum-rate is returned.
//!
//! The big-M coupling between beams and association is not materialised:
//! a link with `alpha_ij = 0` simply neither draws power nor radiates in any
//! true-rate evaluation.

mod baselines;
pub mod bnb;
mod flow;

use serde::{Deserialize, Serialize};

pub use baselines::{baseline_channel, baseline_distance};
pub use bnb::{BnbOptions, BnbSolution, CAPACITY_REL_TOL};

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::rates::{self, Association, BeamformerSet};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentInstance {
    /// `profit[i][j]`, bit/s.
    pub profit: Vec<Vec<f64>>,
    /// `weight[i][j]`: power the link would draw, W.
    pub weight: Vec<Vec<f64>>,
    /// Per-transmitter power budget, W.
    pub capacity: Vec<f64>,
    pub haps_cap: usize,
    pub gamma: Vec<Vec<bool>>,
}

impl AssignmentInstance {
    pub fn n_transmitters(&self) -> usize {
        self.capacity.len()
    }

    pub fn n_users(&self) -> usize {
        self.profit.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let (n_tx, n_u) = (self.n_transmitters(), self.n_users());
        fn shape_ok<T>(m: &[Vec<T>], rows: usize, cols: usize) -> bool {
            m.len() == rows && m.iter().all(|r| r.len() == cols)
        }
        if n_tx == 0
            || !shape_ok(&self.profit, n_tx, n_u)
            || !shape_ok(&self.weight, n_tx, n_u)
            || !shape_ok(&self.gamma, n_tx, n_u)
        {
            return Err(Error::Instance(format!("matrices must all be {n_tx} x {n_u}")));
        }
        if self.profit.iter().flatten().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Instance("profits must be finite and >= 0".into()));
        }
        if self.weight.iter().flatten().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Instance("weights must be finite and >= 0".into()));
        }
        if self.capacity.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::Instance("capacities must be positive".into()));
        }
        Ok(())
    }

    pub fn objective(&self, a: &Association) -> f64 {
        a.links().map(|(i, j)| self.profit[i][j]).sum()
    }
}

/// Exact optimum of the assignment instance. Zero-profit links are never
/// selected, so ties with non-assignment resolve toward leaving users out.
pub fn solve_assignment_bnb(inst: &AssignmentInstance) -> Result<Association> {
    Ok(solve_assignment_bnb_with(inst, BnbOptions::default())?.association)
}

pub fn solve_assignment_bnb_with(inst: &AssignmentInstance, opts: BnbOptions) -> Result<BnbSolution> {
    inst.validate()?;
    Ok(bnb::solve(inst, opts))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssociationParams {
    /// Stop when the true sum-rate moves by at most this fraction.
    pub eps_rel: f64,
    pub max_iters: usize,
    pub max_nodes: u64,
}

impl Default for AssociationParams {
    fn default() -> Self {
        AssociationParams { eps_rel: 1e-4, max_iters: 20, max_nodes: BnbOptions::default().max_nodes }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssociationTrace {
    /// True sum-rate of the ILP seed followed by every GAP iterate.
    pub sum_rates: Vec<f64>,
    /// Best entry of `sum_rates`, attained by `association`.
    pub best_sum_rate: f64,
    /// Backhaul-capped HAPS rates `t_0j` after each entry of `sum_rates`.
    pub t0: Vec<Vec<f64>>,
    pub association: Association,
    /// False when any branch-and-bound call hit its node budget.
    pub proven_optimal: bool,
}

fn weights(ch: &ChannelSet, b: &BeamformerSet) -> Vec<Vec<f64>> {
    (0..ch.n_transmitters()).map(|i| (0..ch.n_users()).map(|j| b.power(i, j)).collect()).collect()
}

fn instance(s: &Scenario, ch: &ChannelSet, b: &BeamformerSet, profit: Vec<Vec<f64>>) -> AssignmentInstance {
    AssignmentInstance {
        profit,
        weight: weights(ch, b),
        capacity: s.transmitters.iter().map(|t| t.p_max_watts).collect(),
        haps_cap: s.haps_user_cap,
        gamma: s.gamma.clone(),
    }
}

/// Integer program with full-interference profits; the HAPS profit is the
/// full-interference rate capped by the backhaul.
pub fn ilp_seed_instance(s: &Scenario, ch: &ChannelSet, b: &BeamformerSet) -> AssignmentInstance {
    let profit = (0..ch.n_transmitters())
        .map(|i| {
            (0..ch.n_users())
                .map(|j| {
                    if !s.gamma[i][j] {
                        return 0.0;
                    }
                    let r = rates::full_interference_rate(ch, b, i, j);
                    if i == 0 {
                        r.min(ch.fso_rate_bps)
                    } else {
                        r
                    }
                })
                .collect()
        })
        .collect();
    instance(s, ch, b, profit)
}

pub fn solve_ilp_seed(
    s: &Scenario,
    ch: &ChannelSet,
    b: &BeamformerSet,
    params: &AssociationParams,
) -> Result<BnbSolution> {
    solve_assignment_bnb_with(&ilp_seed_instance(s, ch, b), BnbOptions { max_nodes: params.max_nodes })
}

/// GAP instance: interference-free ground-BS profits, HAPS profits `t0`.
pub fn gap_instance(s: &Scenario, ch: &ChannelSet, b: &BeamformerSet, t0: &[f64]) -> AssignmentInstance {
    let profit = (0..ch.n_transmitters())
        .map(|i| {
            (0..ch.n_users())
                .map(|j| match (s.gamma[i][j], i) {
                    (false, _) => 0.0,
                    (true, 0) => t0[j],
                    (true, _) => rates::interference_free_rate(ch, b, i, j),
                })
                .collect()
        })
        .collect();
    instance(s, ch, b, profit)
}

/// `t_0j = min(R_0j^RF, R^FSO)` under the true interference of `a`.
pub fn haps_rate_terms(s: &Scenario, ch: &ChannelSet, a: &Association, b: &BeamformerSet) -> Vec<f64> {
    (0..ch.n_users()).map(|j| if s.gamma[0][j] { rates::haps_rate(ch, a, b, j) } else { 0.0 }).collect()
}

/// ILP seed followed by GAP iterations with refreshed HAPS profits.
pub fn algorithm1_associate(
    s: &Scenario,
    ch: &ChannelSet,
    b: &BeamformerSet,
    params: &AssociationParams,
) -> Result<AssociationTrace> {
    let seed = solve_ilp_seed(s, ch, b, params)?;
    let mut proven = seed.proven_optimal;
    let mut current = seed.association;
    let initial = rates::sum_rate(ch, &current, b);
    let mut t0 = haps_rate_terms(s, ch, &current, b);

    let mut trace = AssociationTrace {
        sum_rates: vec![initial],
        best_sum_rate: initial,
        t0: vec![t0.clone()],
        association: current.clone(),
        proven_optimal: true,
    };
    let mut previous = initial;
    let opts = BnbOptions { max_nodes: params.max_nodes };
    for _ in 0..params.max_iters {
        let sol = solve_assignment_bnb_with(&gap_instance(s, ch, b, &t0), opts)?;
        proven &= sol.proven_optimal;
        current = sol.association;
        let r = rates::sum_rate(ch, &current, b);
        t0 = haps_rate_terms(s, ch, &current, b);
        trace.sum_rates.push(r);
        trace.t0.push(t0.clone());
        if r > trace.best_sum_rate {
            trace.best_sum_rate = r;
            trace.association = current.clone();
        }
        if (r - previous).abs() <= params.eps_rel * r.abs() {
            break;
        }
        previous = r;
    }
    trace.proven_optimal = proven;
    Ok(trace)
}

#[cfg(test)]
mod tests;
