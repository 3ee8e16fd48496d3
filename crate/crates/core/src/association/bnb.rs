//! Exact branch-and-bound for the capacitated assignment problem
//!
//! ```text
//! max  sum_ij p_ij x_ij
//! s.t. sum_j w_ij x_ij <= C_i        (per-transmitter knapsack)
//!      sum_j x_0j      <= K0         (HAPS cardinality)
//!      sum_i x_ij      <= 1          (one transmitter per user)
//!      x_ij in {0,1},  x_ij = 0 where gamma_ij = 0
//! ```
//!
//! Users are branched in decreasing order of profit spread (best minus second
//! best candidate). Every node is bounded by a chain of relaxations, each one
//! tried only when the previous one fails to prune:
//!
//! 1. every remaining user takes its best individually-feasible profit;
//! 2. each knapsack is replaced by the counting constraints it implies on
//!    its heaviest items. These constraints are nested, so together with
//!    one-transmitter-per-user they form a flow network whose max-profit flow
//!    is computed exactly;
//! 3. a few subgradient steps on the Lagrangian relaxation of the
//!    one-transmitter-per-user constraints, with fractional knapsacks.

use super::flow::FlowNet;
use super::AssignmentInstance;
use crate::rates::Association;

/// Relative slack on knapsack capacities, matching the power tolerance used
/// elsewhere.
pub const CAPACITY_REL_TOL: f64 = 1e-9;

const LAGRANGE_STEPS: usize = 12;

#[derive(Debug, Clone, Copy)]
pub struct BnbOptions {
    /// Node budget; when exhausted the incumbent is returned unproven.
    pub max_nodes: u64,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions { max_nodes: 2_000_000 }
    }
}

#[derive(Debug, Clone)]
pub struct BnbSolution {
    pub association: Association,
    pub objective: f64,
    pub nodes: u64,
    pub proven_optimal: bool,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    tx: usize,
    profit: f64,
    weight: f64,
}

struct Search<'a> {
    inst: &'a AssignmentInstance,
    /// Users in branching order with their candidates (profit-descending).
    users: Vec<(usize, Vec<Candidate>)>,
    remaining: Vec<f64>,
    haps_left: usize,
    value: f64,
    current: Vec<Option<usize>>,
    best_value: f64,
    best: Vec<Option<usize>>,
    nodes: u64,
    max_nodes: u64,
    aborted: bool,
    // scratch for the Lagrangian bound
    multipliers: Vec<f64>,
    buckets: Vec<Vec<(f64, f64, usize)>>,
    // scratch for the flow bound: (user offset, weight, profit) per transmitter
    items: Vec<Vec<(usize, f64, f64)>>,
    limits: Vec<usize>,
    net: FlowNet,
}

impl Search<'_> {
    #[inline]
    fn room(&self, i: usize) -> f64 {
        self.remaining[i] + CAPACITY_REL_TOL * self.inst.capacity[i]
    }

    #[inline]
    fn fits(&self, c: &Candidate) -> bool {
        (c.tx != 0 || self.haps_left > 0) && c.weight <= self.room(c.tx)
    }

    fn dfs(&mut self, depth: usize) {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            self.aborted = true;
            return;
        }
        if depth == self.users.len() {
            if self.value > self.best_value {
                self.best_value = self.value;
                self.best.clone_from(&self.current);
            }
            return;
        }
        if self.value + self.upper_bound(depth) <= self.best_value {
            return;
        }
        let (user, n_cands) = (self.users[depth].0, self.users[depth].1.len());
        for k in 0..n_cands {
            let c = self.users[depth].1[k];
            if !self.fits(&c) {
                continue;
            }
            self.remaining[c.tx] -= c.weight;
            if c.tx == 0 {
                self.haps_left -= 1;
            }
            self.value += c.profit;
            self.current[user] = Some(c.tx);

            self.dfs(depth + 1);

            self.current[user] = None;
            self.value -= c.profit;
            if c.tx == 0 {
                self.haps_left += 1;
            }
            self.remaining[c.tx] += c.weight;
            if self.aborted {
                return;
            }
        }
        self.dfs(depth + 1);
    }

    /// Upper bound on the profit still collectable by users `depth..`.
    fn upper_bound(&mut self, depth: usize) -> f64 {
        let n = self.users.len() - depth;
        self.multipliers.clear();
        for (_, cands) in &self.users[depth..] {
            let best = cands.iter().find(|c| self.fits(c)).map_or(0.0, |c| c.profit);
            self.multipliers.push(best);
        }
        let per_user: f64 = self.multipliers.iter().sum();
        let gap = self.best_value - self.value;
        if per_user <= gap || n < 2 {
            return per_user;
        }
        let mut best = self.flow_bound(depth).min(per_user);
        if best <= gap {
            return best;
        }

        let mut theta = 1.0;
        let mut usage = vec![0.0; n];
        for _ in 0..LAGRANGE_STEPS {
            let bound = self.lagrangian(depth, &mut usage);
            if bound < best {
                best = bound;
            } else {
                theta *= 0.5;
            }
            if best <= gap {
                break;
            }
            // subgradient g_k = 1 - sum_i x_ik; step toward the incumbent gap
            let norm2: f64 = usage.iter().map(|x| (1.0 - x) * (1.0 - x)).sum();
            if norm2 <= 0.0 {
                break;
            }
            let step = theta * (bound - gap) / norm2;
            for (v, x) in self.multipliers.iter_mut().zip(&usage) {
                *v = (*v - step * (1.0 - x)).max(0.0);
            }
        }
        best
    }

    /// Max-profit flow source -> user -> transmitter chain -> sink.
    ///
    /// On transmitter `i` the items are ranked heaviest first and the `t`
    /// heaviest may contribute at most `c_t` picks: no more of them than fit
    /// together, and no more than the size of any feasible set holding the
    /// `t`-th item (besides it, only what fits in `room - w_t` can join).
    /// These prefix limits are nested, so they become a chain of nodes ending
    /// in the sink. The chain also carries K0 on the HAPS.
    fn flow_bound(&mut self, depth: usize) -> f64 {
        const SOURCE: usize = 0;
        const SINK: usize = 1;
        let n = self.users.len() - depth;

        let mut items = std::mem::take(&mut self.items);
        items.iter_mut().for_each(Vec::clear);
        for (k, (_, cands)) in self.users[depth..].iter().enumerate() {
            for c in cands {
                if c.profit > 0.0 && self.fits(c) {
                    items[c.tx].push((k, c.weight, c.profit));
                }
            }
        }

        self.net.reset(2 + n);
        for k in 0..n {
            self.net.add_edge(SOURCE, 2 + k, 1, 0.0);
        }
        for (i, its) in items.iter_mut().enumerate() {
            if its.is_empty() {
                continue;
            }
            let room = self.room(i);
            // heaviest first
            its.sort_unstable_by(|a, b| b.1.total_cmp(&a.1));
            let m = its.len();
            let cap_all = if i == 0 { self.haps_left.min(m) } else { m };
            self.limits.clear();
            for t in 0..m {
                let w = its[t].1;
                // others in ascending weight that fit next to item t
                let mut left = room - w;
                let mut with = 1;
                for s in (0..m).rev() {
                    if s == t {
                        continue;
                    }
                    if its[s].1 > left || with >= cap_all {
                        break;
                    }
                    left -= its[s].1;
                    with += 1;
                }
                // most of the t+1 heaviest that fit together: lightest first
                let mut left = room;
                let mut fit = 0;
                for s in (0..=t).rev() {
                    if its[s].1 > left {
                        break;
                    }
                    left -= its[s].1;
                    fit += 1;
                }
                self.limits.push(with.min(fit));
            }
            for t in (0..m - 1).rev() {
                self.limits[t] = self.limits[t].min(self.limits[t + 1]);
            }
            if self.limits[m - 1] == 0 {
                continue;
            }
            let mut node = self.net.add_node();
            for t in 0..m {
                if t > 0 && self.limits[t] != self.limits[t - 1] {
                    let next = self.net.add_node();
                    self.net.add_edge(node, next, self.limits[t - 1] as u32, 0.0);
                    node = next;
                }
                let (k, _, p) = its[t];
                self.net.add_edge(2 + k, node, 1, p);
            }
            self.net.add_edge(node, SINK, self.limits[m - 1] as u32, 0.0);
        }
        self.items = items;
        self.net.max_profit(SOURCE, SINK)
    }

    /// `sum_k v_k + sum_i knapsack_i(p - v)` with each knapsack relaxed to its
    /// fractional bound; `usage[k]` receives the fractional assignment of
    /// user `depth + k`.
    fn lagrangian(&mut self, depth: usize, usage: &mut [f64]) -> f64 {
        usage.iter_mut().for_each(|x| *x = 0.0);
        let mut buckets = std::mem::take(&mut self.buckets);
        buckets.iter_mut().for_each(Vec::clear);
        for (k, (_, cands)) in self.users[depth..].iter().enumerate() {
            for c in cands {
                let reduced = c.profit - self.multipliers[k];
                if reduced > 0.0 && self.fits(c) {
                    buckets[c.tx].push((reduced, c.weight, k));
                }
            }
        }
        let mut total: f64 = self.multipliers.iter().sum();
        for (tx, items) in buckets.iter_mut().enumerate() {
            if items.is_empty() {
                continue;
            }
            // zero-weight items first, then by reduced profit per watt
            items.sort_by(|a, b| (b.0 * a.1).total_cmp(&(a.0 * b.1)));
            let mut room = self.remaining[tx] + CAPACITY_REL_TOL * self.inst.capacity[tx];
            let mut knap = 0.0;
            for &(p, w, k) in items.iter() {
                if room <= 0.0 && w > 0.0 {
                    break;
                }
                let frac = if w <= room { 1.0 } else { room / w };
                knap += frac * p;
                room -= frac * w;
                usage[k] += frac;
            }
            if tx == 0 {
                // the cardinality cap gives a second bound on the HAPS row
                let mut profits: Vec<f64> = items.iter().map(|it| it.0).collect();
                profits.sort_by(|a, b| b.total_cmp(a));
                let top: f64 = profits.iter().take(self.haps_left).sum();
                knap = knap.min(top);
            }
            total += knap;
        }
        self.buckets = buckets;
        total
    }
}

/// Solves the instance exactly (unless the node budget runs out).
pub fn solve(inst: &AssignmentInstance, opts: BnbOptions) -> BnbSolution {
    let n_tx = inst.capacity.len();
    let n_users = inst.n_users();
    let mut users: Vec<(usize, Vec<Candidate>)> = (0..n_users)
        .map(|j| {
            let mut cands: Vec<Candidate> = (0..n_tx)
                .filter(|&i| inst.gamma[i][j] && inst.profit[i][j] > 0.0)
                .filter(|&i| i != 0 || inst.haps_cap > 0)
                .filter(|&i| inst.weight[i][j] <= inst.capacity[i] * (1.0 + CAPACITY_REL_TOL))
                .map(|i| Candidate { tx: i, profit: inst.profit[i][j], weight: inst.weight[i][j] })
                .collect();
            cands.sort_by(|a, b| b.profit.total_cmp(&a.profit).then(a.tx.cmp(&b.tx)));
            (j, cands)
        })
        .filter(|(_, c)| !c.is_empty())
        .collect();
    let spread = |c: &[Candidate]| c[0].profit - c.get(1).map_or(0.0, |s| s.profit);
    users.sort_by(|a, b| spread(&b.1).total_cmp(&spread(&a.1)).then(a.0.cmp(&b.0)));

    let (greedy, greedy_value) = greedy_incumbent(inst, &users);
    let n_order = users.len();
    let mut search = Search {
        inst,
        users,
        remaining: inst.capacity.clone(),
        haps_left: inst.haps_cap,
        value: 0.0,
        current: vec![None; n_users],
        best_value: greedy_value,
        best: greedy,
        nodes: 0,
        max_nodes: opts.max_nodes,
        aborted: false,
        multipliers: Vec::with_capacity(n_order),
        buckets: vec![Vec::new(); n_tx],
        items: vec![Vec::new(); n_tx],
        limits: Vec::new(),
        net: FlowNet::default(),
    };
    search.dfs(0);

    BnbSolution {
        association: Association::from_serving(n_tx, search.best).expect("solver only assigns existing transmitters"),
        objective: search.best_value,
        nodes: search.nodes,
        proven_optimal: !search.aborted,
    }
}

/// Highest-profit-first feasible assignment used as the starting incumbent.
fn greedy_incumbent(inst: &AssignmentInstance, users: &[(usize, Vec<Candidate>)]) -> (Vec<Option<usize>>, f64) {
    let mut pairs: Vec<(usize, Candidate)> =
        users.iter().flat_map(|(j, cs)| cs.iter().map(move |c| (*j, *c))).collect();
    pairs.sort_by(|a, b| b.1.profit.total_cmp(&a.1.profit).then(a.1.tx.cmp(&b.1.tx)).then(a.0.cmp(&b.0)));
    let mut remaining = inst.capacity.clone();
    let mut haps_left = inst.haps_cap;
    let mut serving = vec![None; inst.n_users()];
    let mut value = 0.0;
    for (j, c) in pairs {
        let fits = c.weight <= remaining[c.tx] + CAPACITY_REL_TOL * inst.capacity[c.tx];
        if serving[j].is_some() || !fits || (c.tx == 0 && haps_left == 0) {
            continue;
        }
        serving[j] = Some(c.tx);
        remaining[c.tx] -= c.weight;
        if c.tx == 0 {
            haps_left -= 1;
        }
        value += c.profit;
    }
    (serving, value)
}
