//! Command-line front end: fit models, run single experiments, benchmark, and dump heatcubes.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};

use homotopic_tracking::gain::GainKind;
use homotopic_tracking::gmm::{condition, fit, marginalized_belief, GmmFitConfig, Measurement, MeasurementSet};
use homotopic_tracking::harness::{
    evaluate_trace, mean_step_duration, prepare, run_prepared, three_obstacle_environment,
    three_obstacle_templates, write_report, BenchmarkConfig, ModelBundle,
};
use homotopic_tracking::planner::{extract_with_fallback, gain_cube, replan_loop, Scenario};
use homotopic_tracking::topology::{build_rays, Environment};
use homotopic_tracking::trajectory::{
    canonicalize, load_csv, save_csv, split, synthesize_dataset, BoundaryMode, SynthParams,
    Trajectory, CANONICAL_LEN,
};
use homotopic_tracking::vomp::VompModel;

#[derive(Parser)]
#[command(name = "hitrack", version, about = "Active target tracking with homotopic information gain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the trajectory mixture and the word model.
    Fit {
        #[arg(long)]
        env: PathBuf,
        #[arg(long)]
        train: PathBuf,
        /// Components per homotopy class.
        #[arg(long, default_value_t = 1)]
        nc: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_order: usize,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-6)]
        jitter: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Track one trajectory and write the trace as JSON.
    Track {
        #[arg(long)]
        env: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        traj: PathBuf,
        /// Trajectory id inside the CSV; the first one when omitted.
        #[arg(long)]
        id: Option<String>,
        #[arg(long, default_value = "homotopic")]
        gain: GainKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Benchmark config supplying sensor and planner settings.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the full benchmark described by a config file.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the gain heatcube seen after observing the trajectory at the given timesteps.
    Heatcube {
        #[arg(long)]
        env: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        id: Option<String>,
        /// First timestep of the cube.
        #[arg(long)]
        t: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "homotopic")]
        gain: GainKind,
        /// Timesteps at which the target was observed, all before `t`.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        observed: Vec<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write the thresholded orienteering nodes as JSON.
        #[arg(long)]
        optw_out: Option<PathBuf>,
    },
    /// Write the built-in three-obstacle environment and a synthetic train/test split.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        include_empty_class: bool,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load_config(path: Option<&Path>) -> Result<BenchmarkConfig> {
    match path {
        Some(p) => BenchmarkConfig::load(p).with_context(|| format!("reading {}", p.display())),
        None => Ok(BenchmarkConfig::default()),
    }
}

fn pick_trajectory(path: &Path, env: &Environment, id: Option<&str>, t_len: usize) -> Result<Trajectory> {
    let data = load_csv(path, env, BoundaryMode::Strict)?;
    let traj = match id {
        Some(id) => data
            .trajectories()
            .iter()
            .find(|t| t.id == id)
            .ok_or_else(|| anyhow!("no trajectory {id:?} in {}", path.display()))?,
        None => data
            .trajectories()
            .first()
            .ok_or_else(|| anyhow!("{} has no trajectories", path.display()))?,
    };
    Ok(canonicalize(traj, t_len)?)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Fit {
            env,
            train,
            nc,
            out,
            max_order,
            alpha,
            jitter,
            seed,
        } => {
            let env = Environment::load(&env)?;
            let rays = build_rays(&env)?;
            let data = load_csv(&train, &env, BoundaryMode::WarnAndSkip)?.canonicalized(CANONICAL_LEN, &rays)?;
            let gmm = fit(
                &data,
                &GmmFitConfig {
                    n_c: nc,
                    jitter,
                    seed,
                    ..GmmFitConfig::default()
                },
            )?;
            let vomp = VompModel::fit(&data.word_counts(), max_order, alpha)?;
            let bundle = ModelBundle {
                gmm,
                vomp,
                mean_speed: data.mean_speed(),
                step_duration: mean_step_duration(&data),
            };
            bundle.save(&out)?;
            println!(
                "fitted {} components over {} classes from {} trajectories",
                bundle.gmm.len(),
                data.class_count(),
                data.len()
            );
        }
        Command::Track {
            env,
            model,
            traj,
            id,
            gain,
            seed,
            out,
            config,
        } => {
            let config = load_config(config.as_deref())?;
            let tracker = config.tracker();
            let env = Environment::load(&env)?;
            let rays = build_rays(&env)?;
            let bundle = ModelBundle::load(&model)?;
            let target = pick_trajectory(&traj, &env, id.as_deref(), bundle.gmm.t_len)?;
            let robot_speed = tracker
                .planner
                .robot_speed
                .unwrap_or(tracker.planner.speed_factor * bundle.mean_speed);
            let scenario = Scenario {
                env: &env,
                rays: &rays,
                prior: &bundle.gmm,
                model: &bundle.vomp,
                target: &target,
                robot_speed,
                step_duration: bundle.step_duration,
            };
            let trace = replan_loop(scenario, gain, &tracker, seed)?;
            let report = evaluate_trace(&trace, &bundle.gmm, &target, tracker.sensor.sigma_z)?;
            serde_json::to_writer_pretty(BufWriter::new(File::create(&out)?), &trace)?;
            println!(
                "{}: {} measurements, success {}, ADE {:.3} m, {:.2} s",
                target.id, report.measurements, report.success, report.ade, report.runtime_s
            );
        }
        Command::Evaluate { config, out } => {
            let cfg = load_config(Some(&config))?;
            let prepared = prepare(&cfg)?;
            let report = run_prepared(&prepared, &cfg);
            write_report(&report, &cfg, &out)?;
            for s in &report.summaries {
                println!(
                    "{}: runs {}, success {:.3}, median measurements {}, median ADE {}, runtime {:.1} s",
                    s.gain_kind,
                    s.runs,
                    s.success_rate,
                    s.measurements.map_or("-".into(), |q| q.median.to_string()),
                    s.ade.map_or("-".into(), |q| format!("{:.3}", q.median)),
                    s.runtime_total_s
                );
            }
        }
        Command::Heatcube {
            env,
            model,
            traj,
            id,
            t,
            out,
            gain,
            observed,
            config,
            optw_out,
        } => {
            let config = load_config(config.as_deref())?;
            let tracker = config.tracker();
            let env = Environment::load(&env)?;
            let rays = build_rays(&env)?;
            let bundle = ModelBundle::load(&model)?;
            let target = pick_trajectory(&traj, &env, id.as_deref(), bundle.gmm.t_len)?;
            if t == 0 || t >= bundle.gmm.t_len {
                bail!("--t must lie in 1..{}", bundle.gmm.t_len);
            }
            let mut obs = observed;
            obs.sort_unstable();
            obs.dedup();
            if obs.iter().any(|&k| k >= t) {
                bail!("observed timesteps must precede --t");
            }
            let items = obs
                .iter()
                .map(|&k| Measurement {
                    t: k,
                    z: target.positions[k],
                    x: target.positions[k],
                })
                .collect();
            let m = MeasurementSet::new(items, tracker.sensor.sigma_z)?;
            let posterior = condition(&bundle.gmm, &m)?;
            let belief = marginalized_belief(&posterior, &rays, &bundle.vomp, m.last_t().unwrap_or(0));
            let scenario = Scenario {
                env: &env,
                rays: &rays,
                prior: &bundle.gmm,
                model: &bundle.vomp,
                target: &target,
                robot_speed: bundle.mean_speed * tracker.planner.speed_factor,
                step_duration: bundle.step_duration,
            };
            let cube = gain_cube(gain, &posterior, &belief, &scenario, &tracker, t)?;
            cube.write_csv(BufWriter::new(File::create(&out)?))?;
            println!("heatcube max {:.4}, {} cells", cube.max(), cube.values().len());
            if let Some(path) = optw_out {
                let (nodes, fallback) = extract_with_fallback(&cube, &tracker.planner.threshold);
                serde_json::to_writer_pretty(
                    BufWriter::new(File::create(&path)?),
                    &serde_json::json!({ "fallback": fallback, "nodes": nodes }),
                )?;
                println!("{} orienteering nodes", nodes.len());
            }
        }
        Command::Generate {
            out,
            include_empty_class,
            config,
        } => {
            let cfg = load_config(config.as_deref())?;
            let ds = &cfg.dataset;
            std::fs::create_dir_all(&out)?;
            let env = three_obstacle_environment();
            env.save(out.join("environment.json"))?;
            let all = synthesize_dataset(
                &env,
                &three_obstacle_templates(include_empty_class),
                &SynthParams {
                    samples_per_template: ds.samples_per_class,
                    length_scale: ds.length_scale,
                    amplitude: ds.amplitude,
                    seed: ds.seed,
                },
            )?;
            let (train, test) = split(&all, ds.train_per_class, ds.test_per_class, ds.split_seed)?;
            save_csv(&train, out.join("train.csv"))?;
            save_csv(&test, out.join("test.csv"))?;
            println!(
                "wrote {} train and {} test trajectories to {}",
                train.len(),
                test.len(),
                out.display()
            );
        }
    }
    Ok(())
}
