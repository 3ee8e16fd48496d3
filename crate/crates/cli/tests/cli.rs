use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hapsnet::channel::draw_channels;
use hapsnet::scenario::{generate_medium_scenario, serialize_scenario};
use hapsnet::Overrides;

fn hapsnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hapsnet")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = hapsnet(args);
    assert!(out.status.success(), "hapsnet {args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn generate_medium_writes_thirteen_transmitters() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let stdout = ok(&["generate", "--layout", "medium", "--users", "50", "--seed", "7", "-o", path.to_str().unwrap()]);
    assert!(stdout.contains("transmitters: 13"), "{stdout}");
    let doc = json(&path);
    assert_eq!(doc["transmitters"].as_array().unwrap().len(), 13);
    assert_eq!(doc["users"].as_array().unwrap().len(), 50);
}

#[test]
fn generate_large_to_stdout() {
    let out = hapsnet(&["generate", "--layout", "large", "--users", "200", "--seed", "1"]);
    assert!(out.status.success());
    // summary on stderr, scenario JSON alone on stdout
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("transmitters: 99"), "{stderr}");
    assert!(stderr.contains("users per subarea: 120,60,20"), "{stderr}");
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["transmitters"].as_array().unwrap().len(), 99);
}

#[test]
fn usage_errors_exit_nonzero() {
    for args in [
        vec!["generate", "--layout", "medium"],
        vec!["generate", "--layout", "tiny", "--users", "5"],
        vec!["generate", "--layout", "medium", "--users", "5", "--set", "haps_antennas=-2"],
        vec!["solve", "--scenario", "/nonexistent/s.json"],
        vec!["sweep", "--axis", "altitude", "--values", "1", "-o", "/tmp"],
        vec!["sweep", "--axis", "users", "--values", "", "-o", "/tmp"],
    ] {
        let out = hapsnet(&args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(out.stdout.is_empty(), "{args:?} wrote to stdout");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn unknown_method_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    ok(&["generate", "--layout", "medium", "--users", "3", "-o", path.to_str().unwrap()]);
    let out = hapsnet(&["solve", "--scenario", path.to_str().unwrap(), "--method", "IG_FP"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("IG_FP"));
}

#[test]
fn toy_solve_matches_closed_form() {
    let mut s = generate_medium_scenario(4, 1, &Overrides { bs_antennas: Some(2), ..Default::default() }).unwrap();
    s.transmitters.truncate(2);
    s.gamma = vec![vec![false], vec![true]];
    let dir = tempfile::tempdir().unwrap();
    let (scen, report) = (dir.path().join("toy.json"), dir.path().join("r.json"));
    fs::write(&scen, serialize_scenario(&s)).unwrap();

    let stdout = ok(&["solve", "--scenario", scen.to_str().unwrap(), "--seed", "5", "-o", report.to_str().unwrap()]);
    let ch = draw_channels(&s, 5);
    let p = s.transmitters[1].p_max_watts;
    let want = s.bandwidth_hz * (1.0 + p * ch.gain(1, 0) / ch.noise_power_watts).log2();
    let got = json(&report)["sum_rate_bps"].as_f64().unwrap();
    assert!((got / want - 1.0).abs() < 1e-6, "{got} vs {want}");
    assert!(stdout.contains(&format!("sum-rate: {:.3} Mbit/s", want / 1e6)), "{stdout}");
    assert!(stdout.contains("delta: 0.000"));
}

#[test]
fn zero_backhaul_gives_zero_delta() {
    let dir = tempfile::tempdir().unwrap();
    let (scen, report) = (dir.path().join("s.json"), dir.path().join("r.json"));
    ok(&["generate", "--layout", "medium", "--users", "12", "--seed", "2", "-o", scen.to_str().unwrap()]);
    let stdout = ok(&[
        "solve",
        "--scenario",
        scen.to_str().unwrap(),
        "--method",
        "IG_WMMSE",
        "--seed",
        "3",
        "--fso-rate",
        "0",
        "-o",
        report.to_str().unwrap(),
    ]);
    assert!(stdout.contains("delta: 0.000"), "{stdout}");
    let doc = json(&report);
    assert_eq!(doc["delta"].as_f64(), Some(0.0));
    assert_eq!(doc["fso_rate_bps"].as_f64(), Some(0.0));
}

#[test]
fn repeated_solve_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let scen = dir.path().join("s.json");
    ok(&["generate", "--layout", "medium", "--users", "10", "--seed", "9", "-o", scen.to_str().unwrap()]);
    let run = |name: &str| {
        let path = dir.path().join(name);
        ok(&["solve", "--scenario", scen.to_str().unwrap(), "--seed", "1", "-o", path.to_str().unwrap()]);
        fs::read(path).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

fn sweep(dir: &Path, extra: &[&str]) -> (String, String) {
    let mut args = vec!["sweep", "-o", dir.to_str().unwrap(), "--max-outer", "3", "--max-beam", "30"];
    args.extend_from_slice(extra);
    ok(&args);
    (fs::read_to_string(dir.join("sweep.csv")).unwrap(), fs::read_to_string(dir.join("summary.json")).unwrap())
}

#[test]
fn sweep_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, summary) = sweep(dir.path(), &["--axis", "users", "--values", "10,20", "--trials", "2", "--seed", "4"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "method,axis_value,trial,sum_rate_bps,delta,iters,wall_ms");
    assert_eq!(lines.len() - 1, 6 * 2 * 2);
    let doc: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(doc["axis"], "users");
    assert_eq!(doc["cells"].as_array().unwrap().len(), 12);
}

#[test]
fn sweep_backhaul_helps() {
    let dir = tempfile::tempdir().unwrap();
    let (_, summary) = sweep(
        dir.path(),
        &["--axis", "fso_rate", "--values", "0,1e9", "--methods", "IG_WMMSE", "--users", "10", "--trials", "4"],
    );
    let doc: serde_json::Value = serde_json::from_str(&summary).unwrap();
    let cells = doc["cells"].as_array().unwrap();
    let mean = |c: &serde_json::Value| c["mean_sum_rate_bps"].as_f64().unwrap();
    assert!(mean(&cells[1]) >= mean(&cells[0]));
}

#[test]
fn sweep_output_independent_of_jobs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let flags =
        ["--axis", "haps_power", "--values", "1,100", "--methods", "IG_WMMSE,DD_only", "--users", "8", "--trials", "4"];
    let one = sweep(a.path(), &[&flags[..], &["--jobs", "1"]].concat());
    let eight = sweep(b.path(), &[&flags[..], &["--jobs", "8"]].concat());
    assert_eq!(one, eight);
}
