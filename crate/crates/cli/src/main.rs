//! `hapsnet` command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hapsnet::channel::draw_channels;
use hapsnet::orchestrator::{algorithm3_solve, monte_carlo_sweep, Axis, SweepSpec};
use hapsnet::scenario::{parse_scenario, serialize_scenario};
use hapsnet::{Layout, Method, Overrides, ScenarioSpec, SolveReport, SolverParams};

#[derive(Parser)]
#[command(
    name = "hapsnet",
    version,
    about = "Joint user association and beamforming for satellite-HAPS-ground networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random scenario and write it as JSON.
    Generate(GenerateArgs),
    /// Draw channels for a scenario and run one solve.
    Solve(SolveArgs),
    /// Monte-Carlo sweep over one scenario parameter.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_parser = parse_layout)]
    layout: Layout,
    #[arg(long)]
    users: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; JSON goes to stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Override a layout default, e.g. `--set haps_power_dbw=30`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct IterationArgs {
    #[arg(long, default_value_t = 10)]
    max_outer: usize,
    #[arg(long, default_value_t = 20)]
    max_assoc: usize,
    #[arg(long, default_value_t = 100)]
    max_beam: usize,
    /// Relative tolerance shared by the three loops.
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
}

impl IterationArgs {
    fn params(&self, seed: u64, method: Method) -> SolverParams {
        SolverParams {
            eps_outer: self.eps,
            eps_assoc: self.eps,
            eps_beam: self.eps,
            max_outer: self.max_outer,
            max_assoc: self.max_assoc,
            max_beam: self.max_beam,
            seed,
            method,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_parser = parse_method, default_value = "IG_WMMSE")]
    method: Method,
    /// Seed of the channel draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replace the backhaul rate (bit/s).
    #[arg(long)]
    fso_rate: Option<f64>,
    /// Report JSON path.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    iters: IterationArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_parser = parse_layout, default_value = "medium")]
    layout: Layout,
    /// Users per scenario (overridden by `--axis users`).
    #[arg(long, default_value_t = 20)]
    users: usize,
    #[arg(long, value_parser = parse_axis)]
    axis: Axis,
    /// Comma-separated axis values.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// Comma-separated methods; all six when omitted.
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Fill the wall_ms column (makes output run-dependent).
    #[arg(long)]
    timing: bool,
    /// Output directory for sweep.csv and summary.json.
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    iters: IterationArgs,
}

fn parse_layout(s: &str) -> Result<Layout, String> {
    s.parse().map_err(|e: hapsnet::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: hapsnet::Error| e.to_string())
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    s.parse().map_err(|e: hapsnet::Error| e.to_string())
}

fn overrides(pairs: &[String]) -> Result<Overrides> {
    let mut ov = Overrides::default();
    for p in pairs {
        ov.set_pair(p).with_context(|| format!("bad --set `{p}`"))?;
    }
    Ok(ov)
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn generate(args: GenerateArgs) -> Result<()> {
    let spec = ScenarioSpec { layout: args.layout, n_users: args.users, overrides: overrides(&args.set)? };
    let s = spec.generate(args.seed)?;
    let json = serialize_scenario(&s);
    let counts = args.layout.subarea_counts(&s.users);
    let summary = format!(
        "transmitters: {}\nusers per subarea: {}\n",
        s.n_transmitters(),
        counts.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
    );
    match args.output {
        Some(path) => {
            write_file(&path, json.as_bytes())?;
            print!("{summary}");
        }
        None => {
            println!("{json}");
            eprint!("{summary}");
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SolveDoc<'a> {
    channel_seed: u64,
    fso_rate_bps: f64,
    #[serde(flatten)]
    report: &'a SolveReport,
}

fn solve(args: SolveArgs) -> Result<()> {
    let text =
        fs::read_to_string(&args.scenario).with_context(|| format!("cannot read {}", args.scenario.display()))?;
    let s = parse_scenario(&text).with_context(|| format!("invalid scenario {}", args.scenario.display()))?;
    let mut ch = draw_channels(&s, args.seed);
    if let Some(r) = args.fso_rate {
        if !(r.is_finite() && r >= 0.0) {
            bail!("--fso-rate must be a finite rate >= 0");
        }
        ch = ch.with_fso_rate(r);
    }
    let report = algorithm3_solve(&s, &ch, &args.iters.params(args.seed, args.method))?;
    if let Some(path) = &args.output {
        let doc = SolveDoc { channel_seed: args.seed, fso_rate_bps: ch.fso_rate_bps, report: &report };
        let json = serde_json::to_string_pretty(&doc)?;
        write_file(path, json.as_bytes())?;
    }
    println!("method: {}", report.method);
    println!("sum-rate: {:.3} Mbit/s", report.sum_rate_bps / 1e6);
    println!("delta: {:.3}", report.delta);
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let methods = if args.methods.is_empty() { Method::ALL.to_vec() } else { args.methods };
    let spec = SweepSpec {
        base: ScenarioSpec { layout: args.layout, n_users: args.users, overrides: overrides(&args.set)? },
        axis: args.axis,
        values: args.values,
        n_trials: args.trials,
        methods,
        params: args.iters.params(args.seed, Method::IgWmmse),
        jobs: args.jobs,
        record_wall_time: args.timing,
    };
    let result = monte_carlo_sweep(&spec)?;
    fs::create_dir_all(&args.output).with_context(|| format!("cannot create {}", args.output.display()))?;
    let mut csv = Vec::new();
    result.write_csv(&mut csv)?;
    write_file(&args.output.join("sweep.csv"), &csv)?;
    write_file(&args.output.join("summary.json"), result.summary_json().as_bytes())?;

    let mut out = std::io::stdout().lock();
    for c in result.summary() {
        writeln!(
            out,
            "{:<9} {}={:<12} sum-rate {:>10.3} Mbit/s (se {:.3})  delta {:.3}",
            c.method.name(),
            spec.axis,
            c.axis_value,
            c.mean_sum_rate_bps / 1e6,
            c.stderr_sum_rate_bps / 1e6,
            c.mean_delta
        )?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
