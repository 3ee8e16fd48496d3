use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::channel::draw_channels;
use crate::orchestrator::init_beamformers;
use crate::rates::tests::two_by_two;
use crate::scenario::{generate_medium_scenario, Overrides};

/// Brute force over every per-user choice (unserved or one transmitter).
fn exhaustive(inst: &AssignmentInstance) -> f64 {
    let (n_tx, n_u) = (inst.n_transmitters(), inst.n_users());
    let mut choice = vec![0usize; n_u];
    let mut best = 0.0f64;
    loop {
        let mut load = vec![0.0; n_tx];
        let mut haps = 0;
        let mut value = 0.0;
        let mut ok = true;
        for (j, &c) in choice.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let i = c - 1;
            if !inst.gamma[i][j] {
                ok = false;
                break;
            }
            load[i] += inst.weight[i][j];
            haps += usize::from(i == 0);
            value += inst.profit[i][j];
        }
        ok &= haps <= inst.haps_cap;
        ok &= (0..n_tx).all(|i| load[i] <= inst.capacity[i] * (1.0 + CAPACITY_REL_TOL));
        if ok {
            best = best.max(value);
        }
        // odometer increment
        let mut k = 0;
        loop {
            if k == n_u {
                return best;
            }
            choice[k] += 1;
            if choice[k] <= n_tx {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

fn random_instance(rng: &mut impl Rng, n_tx: usize, n_u: usize) -> AssignmentInstance {
    let mut m = |f: &mut dyn FnMut(&mut dyn rand::RngCore) -> f64| -> Vec<Vec<f64>> {
        (0..n_tx).map(|_| (0..n_u).map(|_| f(&mut *rng)).collect()).collect()
    };
    let profit = m(&mut |r| if r.random_bool(0.1) { 0.0 } else { r.random_range(0.0..10.0) });
    let weight = m(&mut |r| r.random_range(0.0..1.0));
    let capacity = (0..n_tx).map(|_| rng.random_range(0.3..2.0)).collect();
    let gamma = (0..n_tx).map(|_| (0..n_u).map(|_| rng.random_bool(0.85)).collect()).collect();
    AssignmentInstance { profit, weight, capacity, haps_cap: rng.random_range(0..=n_u.min(3)), gamma }
}

/// Shaped like the instances the solver meets after beamforming: every stored
/// beam draws the full budget except a few light or switched-off ones.
fn one_slot_instance(rng: &mut impl Rng, n_tx: usize, n_u: usize) -> AssignmentInstance {
    let mut capacity = vec![1.0; n_tx];
    capacity[0] = 100.0;
    let weight: Vec<Vec<f64>> = capacity
        .iter()
        .map(|&cap| {
            (0..n_u)
                .map(|_| match rng.random_range(0..10) {
                    0 => 0.0,
                    1 | 2 => cap * rng.random_range(0.05..0.6),
                    3 => cap * (1.0 + 4e-16),
                    _ if cap > 1.0 => rng.random_range(5.0..40.0),
                    _ => cap,
                })
                .collect()
        })
        .collect();
    let profit = (0..n_tx)
        .map(|i| {
            (0..n_u)
                .map(|j| if weight[i][j] == 0.0 && rng.random_bool(0.5) { 0.0 } else { rng.random_range(1e5..2e8) })
                .collect()
        })
        .collect();
    let gamma = (0..n_tx).map(|_| (0..n_u).map(|_| rng.random_bool(0.9)).collect()).collect();
    AssignmentInstance { profit, weight, capacity, haps_cap: rng.random_range(1..=n_u), gamma }
}

fn assert_feasible(inst: &AssignmentInstance, a: &Association) {
    a.validate(&inst.gamma, inst.haps_cap).unwrap();
    for i in 0..inst.n_transmitters() {
        let load: f64 = a.users_of(i).map(|j| inst.weight[i][j]).sum();
        assert!(load <= inst.capacity[i] * (1.0 + CAPACITY_REL_TOL), "knapsack {i} overfull");
    }
}

fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn single_pair_is_assigned() {
    let inst = AssignmentInstance {
        profit: vec![vec![0.0], vec![3.5]],
        weight: vec![vec![0.0], vec![0.5]],
        capacity: vec![1.0, 1.0],
        haps_cap: 1,
        gamma: vec![vec![true], vec![true]],
    };
    let a = solve_assignment_bnb(&inst).unwrap();
    assert_eq!(a.served_by(), &[Some(1)]);
    assert_eq!(inst.objective(&a), 3.5);
}

#[test]
fn zero_haps_cap_blocks_haps() {
    let inst = AssignmentInstance {
        profit: vec![vec![9.0, 9.0], vec![1.0, 0.0]],
        weight: vec![vec![0.1, 0.1], vec![0.1, 0.1]],
        capacity: vec![1.0, 1.0],
        haps_cap: 0,
        gamma: vec![vec![true; 2]; 2],
    };
    let a = solve_assignment_bnb(&inst).unwrap();
    assert_eq!(a.count(0), 0);
    assert_eq!(a.served_by(), &[Some(1), None]);
}

#[test]
fn knapsack_binds() {
    // BS1 can afford only one of the two heavy users; HAPS takes the other.
    let inst = AssignmentInstance {
        profit: vec![vec![2.0, 1.0], vec![5.0, 4.0]],
        weight: vec![vec![0.5, 0.5], vec![0.8, 0.8]],
        capacity: vec![1.0, 1.0],
        haps_cap: 2,
        gamma: vec![vec![true; 2]; 2],
    };
    let a = solve_assignment_bnb(&inst).unwrap();
    assert_eq!(inst.objective(&a), 6.0);
    assert_eq!(a.served_by(), &[Some(1), Some(0)]);
}

#[test]
fn invalid_instances_rejected() {
    let good = AssignmentInstance {
        profit: vec![vec![1.0]],
        weight: vec![vec![1.0]],
        capacity: vec![1.0],
        haps_cap: 1,
        gamma: vec![vec![true]],
    };
    assert!(good.validate().is_ok());
    let bad = [
        AssignmentInstance { profit: vec![vec![-1.0]], ..good.clone() },
        AssignmentInstance { weight: vec![vec![f64::NAN]], ..good.clone() },
        AssignmentInstance { capacity: vec![0.0], ..good.clone() },
        AssignmentInstance { gamma: vec![vec![true, false]], ..good.clone() },
    ];
    for inst in bad {
        assert!(matches!(solve_assignment_bnb(&inst), Err(Error::Instance(_))));
    }
}

#[test]
fn matches_exhaustive_on_three_by_five() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..150 {
        let inst = random_instance(&mut rng, 3, 5);
        let a = solve_assignment_bnb(&inst).unwrap();
        assert_feasible(&inst, &a);
        let (got, want) = (inst.objective(&a), exhaustive(&inst));
        assert!(rel_eq(got, want), "bnb {got} vs exhaustive {want}");
    }
}

#[test]
fn one_slot_instances_match_exhaustive() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let inst = one_slot_instance(&mut rng, 4, 6);
        let sol = solve_assignment_bnb_with(&inst, BnbOptions::default()).unwrap();
        assert!(sol.proven_optimal);
        assert_feasible(&inst, &sol.association);
        let want = exhaustive(&inst);
        assert!(rel_eq(sol.objective, want), "bnb {} vs exhaustive {want}", sol.objective);
    }
}

#[test]
fn thirteen_by_twenty_is_proven_quickly() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let inst = one_slot_instance(&mut rng, 13, 20);
        let sol = solve_assignment_bnb_with(&inst, BnbOptions { max_nodes: 200_000 }).unwrap();
        assert!(sol.proven_optimal, "needed more than 200k nodes");
        assert_feasible(&inst, &sol.association);
    }
}

#[test]
fn tiny_node_budget_still_feasible() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut unproven = 0;
    for _ in 0..20 {
        let inst = random_instance(&mut rng, 4, 6);
        let sol = solve_assignment_bnb_with(&inst, BnbOptions { max_nodes: 1 }).unwrap();
        unproven += usize::from(!sol.proven_optimal);
        assert_feasible(&inst, &sol.association);
        assert!(rel_eq(sol.objective, inst.objective(&sol.association)));
    }
    assert!(unproven > 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bnb_equals_enumeration(seed in any::<u64>(), n_tx in 1usize..=4, n_u in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, n_tx, n_u);
        let sol = solve_assignment_bnb_with(&inst, BnbOptions::default()).unwrap();
        prop_assert!(sol.proven_optimal);
        assert_feasible(&inst, &sol.association);
        let want = exhaustive(&inst);
        prop_assert!(rel_eq(sol.objective, want), "bnb {} vs exhaustive {}", sol.objective, want);
        prop_assert!(rel_eq(inst.objective(&sol.association), want));
    }
}

#[test]
fn ilp_seed_matches_exhaustive_on_numeric_instance() {
    let (ch, b) = two_by_two();
    let s = toy_scenario(2, 2);
    let inst = ilp_seed_instance(&s, &ch, &b);
    let a = solve_assignment_bnb(&inst).unwrap();
    assert!(rel_eq(inst.objective(&a), exhaustive(&inst)));
    let sol = solve_ilp_seed(&s, &ch, &b, &AssociationParams::default()).unwrap();
    assert_eq!(sol.association, a);
}

/// Scenario shell whose only role is to carry gamma, budgets and K0 for the
/// hand-made channel sets.
fn toy_scenario(n_tx: usize, n_u: usize) -> Scenario {
    let mut s = generate_medium_scenario(0, n_u, &Overrides::default()).unwrap();
    s.transmitters.truncate(n_tx);
    for t in &mut s.transmitters {
        t.p_max_watts = 10.0;
    }
    s.gamma = vec![vec![true; n_u]; n_tx];
    s.haps_user_cap = n_u;
    s
}

#[test]
fn zero_beams_give_empty_seed() {
    let (ch, _) = two_by_two();
    let s = toy_scenario(2, 2);
    let b = BeamformerSet::zeros(&ch, &s.gamma);
    let sol = solve_ilp_seed(&s, &ch, &b, &AssociationParams::default()).unwrap();
    assert_eq!(sol.association.links().count(), 0);
    assert_eq!(sol.objective, 0.0);
}

#[test]
fn zero_backhaul_seed_avoids_haps() {
    let (ch, b) = two_by_two();
    let ch = ch.with_fso_rate(0.0);
    let s = toy_scenario(2, 2);
    let sol = solve_ilp_seed(&s, &ch, &b, &AssociationParams::default()).unwrap();
    assert_eq!(sol.association.count(0), 0);
}

#[test]
fn single_user_single_bs_converges_fast() {
    let mut s = generate_medium_scenario(1, 1, &Overrides::default()).unwrap();
    s.transmitters.truncate(2);
    s.gamma = vec![vec![false], vec![true]];
    let ch = draw_channels(&s, 4);
    let b = init_beamformers(&ch, &s);
    let t = algorithm1_associate(&s, &ch, &b, &AssociationParams::default()).unwrap();
    assert_eq!(t.association.served_by(), &[Some(1)]);
    assert!(t.sum_rates.len() <= 3, "{:?}", t.sum_rates);
}

#[test]
fn trace_best_is_max_and_attained() {
    for seed in 0..10 {
        let s = generate_medium_scenario(seed, 8, &Overrides { haps_antennas: Some(4), ..Default::default() }).unwrap();
        let ch = draw_channels(&s, seed + 100);
        let b = init_beamformers(&ch, &s);
        let t = algorithm1_associate(&s, &ch, &b, &AssociationParams::default()).unwrap();
        let max = t.sum_rates.iter().copied().fold(f64::MIN, f64::max);
        assert_eq!(t.best_sum_rate, max);
        assert_eq!(rates::sum_rate(&ch, &t.association, &b), t.best_sum_rate);
        assert_eq!(t.sum_rates.len(), t.t0.len());
        assert!(t.sum_rates.len() <= 1 + AssociationParams::default().max_iters);
        t.association.validate_for(&s).unwrap();
    }
}

#[test]
fn zero_backhaul_never_uses_haps() {
    for seed in 0..10 {
        let ov = Overrides { haps_antennas: Some(4), fso_rate_bps: Some(0.0), ..Default::default() };
        let s = generate_medium_scenario(seed, 8, &ov).unwrap();
        let ch = draw_channels(&s, seed);
        assert_eq!(ch.fso_rate_bps, 0.0);
        let b = init_beamformers(&ch, &s);
        let t = algorithm1_associate(&s, &ch, &b, &AssociationParams::default()).unwrap();
        assert_eq!(t.association.count(0), 0);
    }
}

#[test]
fn beats_baselines_on_most_seeds() {
    let mut wins = 0;
    for seed in 0..100u64 {
        // HAPS plus two single-antenna ground BSs
        let ov = Overrides { haps_antennas: Some(2), ..Default::default() };
        let mut s = generate_medium_scenario(seed, 6, &ov).unwrap();
        s.transmitters.truncate(3);
        s.gamma.truncate(3);
        let ch = draw_channels(&s, seed);
        let b = init_beamformers(&ch, &s);
        let t = algorithm1_associate(&s, &ch, &b, &AssociationParams::default()).unwrap();
        let dd = rates::sum_rate(&ch, &baseline_distance(&s), &b);
        let cd = rates::sum_rate(&ch, &baseline_channel(&ch, &s), &b);
        if t.best_sum_rate >= dd.max(cd) * (1.0 - 1e-12) {
            wins += 1;
        }
    }
    assert!(wins >= 90, "won {wins} of 100");
}
