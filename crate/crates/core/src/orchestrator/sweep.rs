//! Monte-Carlo sweeps over one scenario parameter.
//!
//! Trial `t` of a sweep draws its scenario and channels from seeds derived
//! from the master seed and `t` alone, so every axis value and every method
//! sees the same realizations (common random numbers). Trials run on a
//! dedicated thread pool and are collected in index order, which keeps the
//! output independent of the worker count.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{algorithm3_solve, Method, SolverParams};
use crate::channel::draw_channels;
use crate::error::{Error, Result};
use crate::scenario::ScenarioSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Users,
    FsoRate,
    HapsAntennas,
    HapsPower,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Users => "users",
            Axis::FsoRate => "fso_rate",
            Axis::HapsAntennas => "haps_antennas",
            Axis::HapsPower => "haps_power",
        }
    }

    /// `base` with this axis set to `value`.
    pub fn apply(self, base: &ScenarioSpec, value: f64) -> Result<ScenarioSpec> {
        let count = |what: &'static str| -> Result<usize> {
            if value.is_finite() && value >= 1.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(Error::validation(what, format!("`{value}` is not a positive integer")))
            }
        };
        let mut spec = base.clone();
        match self {
            Axis::Users => spec.n_users = count("users")?,
            Axis::HapsAntennas => spec.overrides.haps_antennas = Some(count("haps_antennas")?),
            Axis::FsoRate => {
                if !(value.is_finite() && value >= 0.0) {
                    return Err(Error::validation("fso_rate", "must be >= 0"));
                }
                spec.overrides.fso_rate_bps = Some(value);
            }
            Axis::HapsPower => {
                if !(value.is_finite() && value > 0.0) {
                    return Err(Error::validation("haps_power", "must be positive"));
                }
                spec.overrides.haps_power_watts = Some(value);
            }
        }
        Ok(spec)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "users" => Ok(Axis::Users),
            "fso_rate" => Ok(Axis::FsoRate),
            "haps_antennas" => Ok(Axis::HapsAntennas),
            "haps_power" => Ok(Axis::HapsPower),
            other => Err(Error::Unknown { kind: "axis", value: other.to_string() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ScenarioSpec,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub n_trials: usize,
    pub methods: Vec<Method>,
    /// Master seed lives in `params.seed`; `params.method` is ignored.
    pub params: SolverParams,
    /// Worker threads; 0 lets the pool pick.
    pub jobs: usize,
    /// Fill the `wall_ms` column. Off by default so output is reproducible.
    pub record_wall_time: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: Method,
    pub axis_value: f64,
    pub trial: usize,
    pub sum_rate_bps: f64,
    pub delta: f64,
    pub iters: usize,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub method: Method,
    pub axis_value: f64,
    pub n_trials: usize,
    pub mean_sum_rate_bps: f64,
    pub stderr_sum_rate_bps: f64,
    pub mean_delta: f64,
    pub stderr_delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: Axis,
    pub master_seed: u64,
    /// Ordered by axis value, then method, then trial.
    pub rows: Vec<SweepRow>,
}

/// Sample mean and standard error of the mean.
pub(crate) fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl SweepResult {
    pub fn cell(&self, method: Method, axis_value: f64) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.method == method && r.axis_value == axis_value).collect()
    }

    /// One entry per (axis value, method), in row order.
    pub fn summary(&self) -> Vec<CellSummary> {
        let mut cells: Vec<(Method, f64)> = Vec::new();
        for r in &self.rows {
            if !cells.contains(&(r.method, r.axis_value)) {
                cells.push((r.method, r.axis_value));
            }
        }
        cells
            .into_iter()
            .map(|(method, axis_value)| {
                let rows = self.cell(method, axis_value);
                let rates: Vec<f64> = rows.iter().map(|r| r.sum_rate_bps).collect();
                let deltas: Vec<f64> = rows.iter().map(|r| r.delta).collect();
                let (mean_sum_rate_bps, stderr_sum_rate_bps) = mean_stderr(&rates);
                let (mean_delta, stderr_delta) = mean_stderr(&deltas);
                CellSummary {
                    method,
                    axis_value,
                    n_trials: rows.len(),
                    mean_sum_rate_bps,
                    stderr_sum_rate_bps,
                    mean_delta,
                    stderr_delta,
                }
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            axis: Axis,
            master_seed: u64,
            cells: &'a [CellSummary],
        }
        let cells = self.summary();
        serde_json::to_string_pretty(&Doc { axis: self.axis, master_seed: self.master_seed, cells: &cells })
            .expect("summary is plain data")
    }
}

/// `(scenario seed, channel seed)` of one trial.
pub fn trial_seeds(master_seed: u64, trial: usize) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial as u64);
    (rng.next_u64(), rng.next_u64())
}

pub fn monte_carlo_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    if spec.values.is_empty() {
        return Err(Error::validation("values", "at least one axis value is required"));
    }
    if spec.methods.is_empty() {
        return Err(Error::validation("methods", "at least one method is required"));
    }
    if spec.n_trials == 0 {
        return Err(Error::validation("trials", "must be at least 1"));
    }
    spec.params.validate()?;
    let specs: Vec<ScenarioSpec> =
        spec.values.iter().map(|&v| spec.axis.apply(&spec.base, v)).collect::<Result<_>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| Error::validation("jobs", e.to_string()))?;

    let work: Vec<(usize, usize)> = (0..specs.len()).flat_map(|v| (0..spec.n_trials).map(move |t| (v, t))).collect();
    let results: Vec<Vec<SweepRow>> = pool.install(|| {
        work.par_iter().map(|&(v, t)| run_trial(spec, &specs[v], spec.values[v], t)).collect::<Result<_>>()
    })?;

    // (value, trial) major -> (value, method, trial)
    let mut rows = Vec::with_capacity(results.len() * spec.methods.len());
    for v in 0..specs.len() {
        for m in 0..spec.methods.len() {
            for t in 0..spec.n_trials {
                rows.push(results[v * spec.n_trials + t][m].clone());
            }
        }
    }
    Ok(SweepResult { axis: spec.axis, master_seed: spec.params.seed, rows })
}

fn run_trial(spec: &SweepSpec, scenario: &ScenarioSpec, value: f64, trial: usize) -> Result<Vec<SweepRow>> {
    let (scenario_seed, channel_seed) = trial_seeds(spec.params.seed, trial);
    let s = scenario.generate(scenario_seed)?;
    let ch = draw_channels(&s, channel_seed);
    spec.methods
        .iter()
        .map(|&method| {
            let report = algorithm3_solve(&s, &ch, &spec.params.with_method(method))?;
            Ok(SweepRow {
                method,
                axis_value: value,
                trial,
                sum_rate_bps: report.sum_rate_bps,
                delta: report.delta,
                iters: report.outer_iterations(),
                wall_ms: if spec.record_wall_time { report.wall_time.as_millis() as u64 } else { 0 },
            })
        })
        .collect()
}
