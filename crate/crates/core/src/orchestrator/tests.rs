use super::*;
use crate::channel::draw_channels;
use crate::scenario::{generate_medium_scenario, Layout, Overrides, ScenarioSpec};

fn small(seed: u64, n_users: usize, ov: Overrides) -> (Scenario, ChannelSet) {
    let mut s = generate_medium_scenario(seed, n_users, &ov).unwrap();
    s.transmitters.truncate(4);
    s.gamma.truncate(4);
    let ch = draw_channels(&s, seed + 7);
    (s, ch)
}

fn two_antennas() -> Overrides {
    Overrides { haps_antennas: Some(2), bs_antennas: Some(2), ..Default::default() }
}

#[test]
fn method_names_round_trip() {
    for m in Method::ALL {
        assert_eq!(m.name().parse::<Method>().unwrap(), m);
        assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
    }
    assert_eq!("ig-wmmse".parse::<Method>().unwrap(), Method::IgWmmse);
    assert_eq!("dd_ONLY".parse::<Method>().unwrap(), Method::DdOnly);
    assert!(matches!("IG_FP".parse::<Method>(), Err(Error::Unknown { kind: "method", .. })));
}

#[test]
fn params_validation() {
    assert!(SolverParams::default().validate().is_ok());
    assert!(SolverParams { eps_beam: 0.0, ..Default::default() }.validate().is_err());
    assert!(SolverParams { max_outer: 0, ..Default::default() }.validate().is_err());
}

#[test]
fn init_beams_use_full_budget_evenly() {
    let (s, ch) = small(2, 5, two_antennas());
    let b = init_beamformers(&ch, &s);
    for i in 0..s.n_transmitters() {
        let n_pot = s.gamma[i].iter().filter(|&&g| g).count().min(s.slot_limit(i));
        let powers: Vec<f64> = (0..5).map(|j| b.power(i, j)).collect();
        let p = s.transmitters[i].p_max_watts;
        for (j, &pw) in powers.iter().enumerate() {
            assert!((pw - p / n_pot as f64).abs() < 1e-12 * p);
            let (h, w) = (ch.h(i, j), b.get(i, j).unwrap());
            assert!((h.dotc(w).norm() - h.norm() * w.norm()).abs() < 1e-12 * h.norm() * w.norm());
        }
        // n_pot links at equal power sum to the budget
        assert!((powers[0] * n_pot as f64 - p).abs() < 1e-12 * p);
    }
}

#[test]
fn init_beams_zero_without_candidates() {
    let (mut s, ch) = small(2, 3, two_antennas());
    s.gamma[1] = vec![false; 3];
    s.haps_user_cap = 0;
    let b = init_beamformers(&ch, &s);
    for j in 0..3 {
        assert_eq!(b.power(0, j), 0.0);
        assert!(b.get(1, j).is_none());
    }
}

#[test]
fn delta_values() {
    let (s, _) = small(1, 8, two_antennas());
    let mut a = Association::empty(4, 8);
    assert_eq!(compute_delta(&a, &s), 0.0);
    a.assign(0, Some(0));
    a.assign(5, Some(0));
    assert_eq!(compute_delta(&a, &s), 0.25);
    for j in 0..8 {
        a.assign(j, Some(0));
    }
    assert_eq!(compute_delta(&a, &s), 1.0);
}

#[test]
fn single_bs_single_user_hits_closed_form() {
    let (mut s, _) = small(3, 1, Overrides { bs_antennas: Some(3), ..Default::default() });
    s.transmitters.truncate(2);
    s.gamma = vec![vec![false], vec![true]];
    let ch = draw_channels(&s, 9);
    for method in Method::ALL {
        let r = algorithm3_solve(&s, &ch, &SolverParams::default().with_method(method)).unwrap();
        let p = s.transmitters[1].p_max_watts;
        let want = s.bandwidth_hz * (1.0 + p * ch.gain(1, 0) / ch.noise_power_watts).log2();
        assert!((r.sum_rate_bps / want - 1.0).abs() < 1e-6, "{method}: {} vs {want}", r.sum_rate_bps);
    }
}

#[test]
fn reports_are_feasible_and_best_of_trace() {
    for seed in 0..4 {
        let (s, ch) = small(seed, 6, two_antennas());
        for method in Method::ALL {
            let r = algorithm3_solve(&s, &ch, &SolverParams::default().with_method(method)).unwrap();
            r.association.validate_for(&s).unwrap();
            let budgets: Vec<f64> = s.transmitters.iter().map(|t| t.p_max_watts).collect();
            assert!(r.rates.power_violations(&budgets, 1e-9).is_empty());
            let max = r.outer_sum_rates.iter().copied().fold(f64::MIN, f64::max);
            assert_eq!(max, r.sum_rate_bps);
            assert_eq!(r.rates.sum_rate_bps, r.sum_rate_bps);
            assert!(r.outer_iterations() <= 10);
            assert!((0.0..=1.0).contains(&r.delta));
        }
    }
}

#[test]
fn outer_trace_never_decreases() {
    for seed in 0..6 {
        let (s, ch) = small(seed, 8, Overrides::default());
        let p = SolverParams { max_beam: 20, ..Default::default() };
        let r = algorithm3_solve(&s, &ch, &p.with_method(Method::IgWmmse)).unwrap();
        assert!(r.outer_sum_rates.windows(2).all(|w| w[1] >= w[0]), "{:?}", r.outer_sum_rates);
        assert_eq!(r.outer_sum_rates.last(), Some(&r.sum_rate_bps));
    }
}

#[test]
fn wmmse_never_loses_to_fixed_beams() {
    for seed in 0..6 {
        let (s, ch) = small(seed, 6, two_antennas());
        let p = SolverParams::default();
        for (with, without) in
            [(Method::IgWmmse, Method::IgOnly), (Method::CdWmmse, Method::CdOnly), (Method::DdWmmse, Method::DdOnly)]
        {
            let a = algorithm3_solve(&s, &ch, &p.with_method(with)).unwrap();
            let b = algorithm3_solve(&s, &ch, &p.with_method(without)).unwrap();
            assert!(a.sum_rate_bps >= b.sum_rate_bps * (1.0 - 1e-12), "seed {seed} {with}");
        }
    }
}

#[test]
fn mismatched_channels_rejected() {
    let (s, _) = small(1, 3, two_antennas());
    let (_, other) = small(1, 4, two_antennas());
    assert!(algorithm3_solve(&s, &other, &SolverParams::default()).is_err());
}

fn sweep_spec(axis: Axis, values: Vec<f64>, trials: usize, jobs: usize) -> SweepSpec {
    SweepSpec {
        base: ScenarioSpec {
            layout: Layout::Medium,
            n_users: 6,
            overrides: Overrides { haps_antennas: Some(4), ..Default::default() },
        },
        axis,
        values,
        n_trials: trials,
        methods: vec![Method::IgWmmse, Method::DdOnly],
        params: SolverParams { seed: 42, max_outer: 3, max_beam: 20, ..Default::default() },
        jobs,
        record_wall_time: false,
    }
}

#[test]
fn sweep_rows_and_determinism() {
    let spec = sweep_spec(Axis::Users, vec![4.0, 6.0], 3, 1);
    let a = monte_carlo_sweep(&spec).unwrap();
    assert_eq!(a.rows.len(), 2 * 2 * 3);
    assert!(a.rows.iter().all(|r| r.wall_ms == 0));
    let b = monte_carlo_sweep(&SweepSpec { jobs: 4, ..spec }).unwrap();
    assert_eq!(a, b);
    let mut csv_a = Vec::new();
    a.write_csv(&mut csv_a).unwrap();
    let text = String::from_utf8(csv_a).unwrap();
    assert_eq!(text.lines().next().unwrap(), "method,axis_value,trial,sum_rate_bps,delta,iters,wall_ms");
    assert_eq!(a.summary_json(), b.summary_json());
    assert_eq!(a.summary().len(), 4);
}

#[test]
fn single_trial_matches_direct_solve() {
    let spec = sweep_spec(Axis::HapsPower, vec![50.0], 1, 1);
    let res = monte_carlo_sweep(&spec).unwrap();
    let (ss, cs) = trial_seeds(42, 0);
    let s = Axis::HapsPower.apply(&spec.base, 50.0).unwrap().generate(ss).unwrap();
    let ch = draw_channels(&s, cs);
    let r = algorithm3_solve(&s, &ch, &spec.params.with_method(Method::IgWmmse)).unwrap();
    let row = &res.cell(Method::IgWmmse, 50.0)[0];
    assert_eq!(row.sum_rate_bps, r.sum_rate_bps);
    assert_eq!(row.delta, r.delta);
}

#[test]
fn backhaul_capacity_helps_on_average() {
    let mut spec = sweep_spec(Axis::FsoRate, vec![0.0, 1e9], 20, 0);
    spec.methods = vec![Method::IgWmmse];
    let res = monte_carlo_sweep(&spec).unwrap();
    let cells = res.summary();
    assert!(cells[1].mean_sum_rate_bps >= cells[0].mean_sum_rate_bps);
    assert_eq!(cells[0].mean_delta, 0.0);
}

#[test]
fn sweep_rejects_bad_input() {
    assert!(monte_carlo_sweep(&sweep_spec(Axis::Users, vec![], 1, 1)).is_err());
    assert!(monte_carlo_sweep(&sweep_spec(Axis::Users, vec![2.5], 1, 1)).is_err());
    assert!(monte_carlo_sweep(&sweep_spec(Axis::HapsPower, vec![-1.0], 1, 1)).is_err());
    assert!("altitude".parse::<Axis>().is_err());
    assert_eq!("fso_rate".parse::<Axis>().unwrap(), Axis::FsoRate);
}

#[test]
fn mean_stderr_values() {
    assert_eq!(sweep::mean_stderr(&[2.0]), (2.0, 0.0));
    let (m, se) = sweep::mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(m, 2.5);
    // sample variance 5/3, se = sqrt(5/12)
    assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
}
