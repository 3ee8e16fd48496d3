//! Greedy reference associations: nearest transmitter first, or strongest
//! channel first. Each transmitter accepts at most [`Scenario::slot_limit`]
//! users.

use std::cmp::Ordering;

use crate::channel::ChannelSet;
use crate::rates::Association;
use crate::scenario::Scenario;

/// Walks pairs in `order` (ties by transmitter, then user) and keeps every
/// pair whose user is still free and whose transmitter has a slot left.
fn greedy(s: &Scenario, key: impl Fn(usize, usize) -> f64, order: impl Fn(f64, f64) -> Ordering) -> Association {
    let (n_tx, n_u) = (s.n_transmitters(), s.n_users());
    let mut pairs: Vec<(f64, usize, usize)> = (0..n_tx)
        .flat_map(|i| (0..n_u).map(move |j| (i, j)))
        .filter(|&(i, j)| s.gamma[i][j] && s.slot_limit(i) > 0)
        .map(|(i, j)| (key(i, j), i, j))
        .collect();
    pairs.sort_by(|a, b| order(a.0, b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut slots: Vec<usize> = (0..n_tx).map(|i| s.slot_limit(i)).collect();
    let mut a = Association::empty(n_tx, n_u);
    let mut left = n_u;
    for (_, i, j) in pairs {
        if left == 0 {
            break;
        }
        if a.serving(j).is_some() || slots[i] == 0 {
            continue;
        }
        a.assign(j, Some(i));
        slots[i] -= 1;
        left -= 1;
    }
    a
}

/// Distance-based association (DD).
pub fn baseline_distance(s: &Scenario) -> Association {
    greedy(s, |i, j| s.distance(i, j), |a, b| a.total_cmp(&b))
}

/// Channel-gain-based association (CD) on `||h_ij||^2`.
pub fn baseline_channel(ch: &ChannelSet, s: &Scenario) -> Association {
    greedy(s, |i, j| ch.gain(i, j), |a, b| b.total_cmp(&a))
}
