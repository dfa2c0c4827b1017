//! Runs every test trajectory under every gain kind and aggregates the results.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use nalgebra::Point2;
use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, OrderStatistics};

use crate::gain::GainKind;
use crate::planner::{replan_loop, GridSpec, Scenario};

use super::config::{BenchmarkConfig, Prepared};
use super::metrics::{evaluate_trace, MetricsReport};
use super::HarnessError;

/// One tracking experiment, or why it could not be completed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub gain_kind: GainKind,
    pub seed: u64,
    pub target_id: String,
    pub report: Option<MetricsReport>,
    pub error: Option<String>,
    /// Sensing attempts after `t = 0`.
    pub visits: Vec<Point2<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Quartiles {
    /// `None` for an empty sample.
    pub fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let mut d = Data::new(xs.to_vec());
        Some(Self {
            q1: d.lower_quartile(),
            median: d.median(),
            q3: d.upper_quartile(),
        })
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainSummary {
    pub gain_kind: GainKind,
    pub runs: usize,
    pub failures: usize,
    pub success_rate: f64,
    pub measurements: Option<Quartiles>,
    pub ade: Option<Quartiles>,
    /// Sum of per-experiment wall-clock times (s).
    pub runtime_total_s: f64,
    pub initial_occupancy: Option<Quartiles>,
    /// Share of sensing attempts in the five most visited grid cells.
    pub top5_visit_fraction: f64,
}

/// One point of a per-index curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub gain_kind: GainKind,
    /// `kld`, `dvar` (indexed by measurement) or `de` (indexed by timestep).
    pub series: String,
    pub index: usize,
    pub n: usize,
    pub stats: Quartiles,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config_hash: String,
    pub grid: GridSpec,
    pub records: Vec<RunRecord>,
    pub summaries: Vec<GainSummary>,
    pub curves: Vec<CurvePoint>,
    /// Sensing attempts per grid cell (`iy * nx + ix`), per gain kind.
    pub visitation: BTreeMap<String, Vec<u32>>,
}

impl BenchmarkReport {
    pub fn summary(&self, kind: GainKind) -> Option<&GainSummary> {
        self.summaries.iter().find(|s| s.gain_kind == kind)
    }
}

/// Seed of one experiment, shared across gain kinds.
pub fn experiment_seed(run_seed: u64, test_index: usize) -> u64 {
    run_seed
        .wrapping_mul(0x2545_F491_4F6C_DD1D)
        .wrapping_add(test_index as u64)
}

/// Loads data, fits models, and runs the benchmark.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchmarkReport, HarnessError> {
    let prepared = super::config::prepare(config)?;
    Ok(run_prepared(&prepared, config))
}

/// Runs the benchmark on already prepared data; per-run failures are recorded, not raised.
pub fn run_prepared(prepared: &Prepared, config: &BenchmarkConfig) -> BenchmarkReport {
    let tracker = config.tracker();
    let grid = GridSpec::uniform(*prepared.env.bounds(), tracker.planner.grid_cells);
    let limit = config.run.max_test.unwrap_or(usize::MAX);
    let tests: Vec<_> = prepared.test.trajectories().iter().take(limit).collect();
    let mut records = Vec::new();
    for &kind in &config.run.gains {
        for &run_seed in &config.run.seeds {
            for (i, target) in tests.iter().enumerate() {
                let seed = experiment_seed(run_seed, i);
                let scenario = Scenario {
                    env: &prepared.env,
                    rays: &prepared.rays,
                    prior: &prepared.gmm,
                    model: &prepared.vomp,
                    target,
                    robot_speed: prepared.robot_speed,
                    step_duration: prepared.step_duration,
                };
                let outcome = replan_loop(scenario, kind, &tracker, seed)
                    .map_err(HarnessError::from)
                    .and_then(|trace| {
                        let report =
                            evaluate_trace(&trace, &prepared.gmm, target, tracker.sensor.sigma_z)?;
                        Ok((report, trace.sensing_locations()))
                    });
                let (report, error, visits) = match outcome {
                    Ok((r, v)) => (Some(r), None, v),
                    Err(e) => {
                        log::warn!("{kind} run on {} failed: {e}", target.id);
                        (None, Some(e.to_string()), Vec::new())
                    }
                };
                records.push(RunRecord {
                    gain_kind: kind,
                    seed,
                    target_id: target.id.clone(),
                    report,
                    error,
                    visits,
                });
            }
        }
    }
    aggregate(records, grid, config.hash(), &config.run.gains)
}

fn per_index(series: impl Iterator<Item = Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for s in series {
        for (k, v) in s.into_iter().enumerate() {
            if out.len() <= k {
                out.push(Vec::new());
            }
            out[k].push(v);
        }
    }
    out
}

/// Summaries, curves, and visitation histograms of finished records.
pub fn aggregate(
    records: Vec<RunRecord>,
    grid: GridSpec,
    config_hash: String,
    gains: &[GainKind],
) -> BenchmarkReport {
    let mut summaries = Vec::new();
    let mut curves = Vec::new();
    let mut visitation = BTreeMap::new();
    for &kind in gains {
        let mine: Vec<&RunRecord> = records.iter().filter(|r| r.gain_kind == kind).collect();
        let reports: Vec<&MetricsReport> = mine.iter().filter_map(|r| r.report.as_ref()).collect();
        let mut counts = vec![0u32; grid.len()];
        for r in &mine {
            for v in &r.visits {
                let (ix, iy) = grid.cell_of(v);
                counts[grid.cell_index(ix, iy)] += 1;
            }
        }
        let total: u32 = counts.iter().sum();
        let mut sorted = counts.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let top5 = if total > 0 {
            sorted.iter().take(5).sum::<u32>() as f64 / total as f64
        } else {
            0.0
        };
        let field = |f: &dyn Fn(&MetricsReport) -> f64| -> Vec<f64> {
            reports.iter().map(|r| f(r)).collect()
        };
        summaries.push(GainSummary {
            gain_kind: kind,
            runs: mine.len(),
            failures: mine.len() - reports.len(),
            success_rate: if mine.is_empty() {
                0.0
            } else {
                reports.iter().filter(|r| r.success).count() as f64 / mine.len() as f64
            },
            measurements: Quartiles::of(&field(&|r| r.measurements as f64)),
            ade: Quartiles::of(&field(&|r| r.ade)),
            runtime_total_s: reports.iter().map(|r| r.runtime_s).sum(),
            initial_occupancy: Quartiles::of(&field(&|r| r.initial_occupancy)),
            top5_visit_fraction: top5,
        });
        let series: [(&str, fn(&MetricsReport) -> Vec<f64>); 3] = [
            ("kld", |r| r.kld.clone()),
            ("dvar", |r| r.dvar.clone()),
            ("de", |r| r.de.clone()),
        ];
        for (name, get) in series {
            for (index, values) in per_index(reports.iter().map(|r| get(r))).into_iter().enumerate() {
                if let Some(stats) = Quartiles::of(&values) {
                    curves.push(CurvePoint {
                        gain_kind: kind,
                        series: name.to_string(),
                        index,
                        n: values.len(),
                        stats,
                    });
                }
            }
        }
        visitation.insert(kind.name().to_string(), counts);
    }
    BenchmarkReport {
        config_hash,
        grid,
        records,
        summaries,
        curves,
        visitation,
    }
}

fn opt(q: Option<Quartiles>) -> [String; 3] {
    match q {
        Some(q) => [q.q1.to_string(), q.median.to_string(), q.q3.to_string()],
        None => [String::new(), String::new(), String::new()],
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool_version: &'static str,
    config_hash: &'a str,
    config: &'a BenchmarkConfig,
    outputs: [&'static str; 4],
}

/// Writes `metrics.csv`, `summary.csv`, `curves.csv`, `visitation.csv` and `manifest.json`.
pub fn write_report(
    report: &BenchmarkReport,
    config: &BenchmarkConfig,
    dir: impl AsRef<Path>,
) -> Result<(), HarnessError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;

    let mut w = csv::Writer::from_writer(File::create(dir.join("metrics.csv"))?);
    w.write_record([
        "gain", "seed", "target_id", "success", "measurements", "ade", "final_kld", "final_dvar",
        "runtime_s", "initial_occupancy", "error",
    ])?;
    for r in &report.records {
        let mut row = vec![r.gain_kind.to_string(), r.seed.to_string(), r.target_id.clone()];
        match &r.report {
            Some(m) => row.extend([
                m.success.to_string(),
                m.measurements.to_string(),
                m.ade.to_string(),
                m.kld.last().map_or(String::new(), f64::to_string),
                m.dvar.last().map_or(String::new(), f64::to_string),
                m.runtime_s.to_string(),
                m.initial_occupancy.to_string(),
                String::new(),
            ]),
            None => {
                row.extend(std::iter::repeat_n(String::new(), 7));
                row.push(r.error.clone().unwrap_or_default());
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_writer(File::create(dir.join("summary.csv"))?);
    w.write_record([
        "gain", "runs", "failures", "success_rate", "measurements_q1", "measurements_median",
        "measurements_q3", "ade_q1", "ade_median", "ade_q3", "runtime_total_s",
        "initial_occupancy_median", "top5_visit_fraction",
    ])?;
    for s in &report.summaries {
        let mut row = vec![
            s.gain_kind.to_string(),
            s.runs.to_string(),
            s.failures.to_string(),
            s.success_rate.to_string(),
        ];
        row.extend(opt(s.measurements));
        row.extend(opt(s.ade));
        row.push(s.runtime_total_s.to_string());
        row.push(s.initial_occupancy.map_or(String::new(), |q| q.median.to_string()));
        row.push(s.top5_visit_fraction.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_writer(File::create(dir.join("curves.csv"))?);
    w.write_record(["gain", "series", "index", "n", "q1", "median", "q3"])?;
    for c in &report.curves {
        w.write_record([
            c.gain_kind.to_string(),
            c.series.clone(),
            c.index.to_string(),
            c.n.to_string(),
            c.stats.q1.to_string(),
            c.stats.median.to_string(),
            c.stats.q3.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_writer(File::create(dir.join("visitation.csv"))?);
    w.write_record(["gain", "ix", "iy", "x", "y", "count"])?;
    let g = report.grid;
    for (gain, counts) in &report.visitation {
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                let p = g.location(ix, iy);
                w.write_record([
                    gain.clone(),
                    ix.to_string(),
                    iy.to_string(),
                    p.x.to_string(),
                    p.y.to_string(),
                    counts[g.cell_index(ix, iy)].to_string(),
                ])?;
            }
        }
    }
    w.flush()?;

    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION"),
        config_hash: &report.config_hash,
        config,
        outputs: ["metrics.csv", "summary.csv", "curves.csv", "visitation.csv"],
    };
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}
