//! Trajectory CSV files: header `id,t,x,y`, rows of one id contiguous and time-sorted.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use crate::topology::{build_rays, Environment};

use super::{Dataset, Trajectory, TrajectoryError};

#[derive(Serialize, Deserialize)]
struct Row {
    id: String,
    t: f64,
    x: f64,
    y: f64,
}

/// What to do with trajectories whose endpoints are far from the boundary.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    #[default]
    Strict,
    WarnAndSkip,
}

/// Reads trajectories without any environment checks.
pub fn read_trajectories(path: impl AsRef<Path>) -> Result<Vec<Trajectory>, TrajectoryError> {
    let mut rdr = csv::Reader::from_path(path)?;
    parse_rows(&mut rdr)
}

fn parse_rows<R: std::io::Read>(rdr: &mut csv::Reader<R>) -> Result<Vec<Trajectory>, TrajectoryError> {
    let mut out: Vec<Trajectory> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    let mut record = csv::StringRecord::new();
    let headers = rdr.headers()?.clone();
    while rdr.read_record(&mut record)? {
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let row: Row = record
            .deserialize(Some(&headers))
            .map_err(|e| TrajectoryError::ParseError {
                line,
                message: e.to_string(),
            })?;
        match out.last_mut() {
            Some(cur) if cur.id == row.id => {
                let prev = *cur.timestamps.last().unwrap();
                if row.t <= prev {
                    return Err(TrajectoryError::ParseError {
                        line,
                        message: format!(
                            "timestamp {} of {:?} does not increase (previous {prev})",
                            row.t, row.id
                        ),
                    });
                }
                cur.positions.push(Point2::new(row.x, row.y));
                cur.timestamps.push(row.t);
            }
            _ => {
                if !seen.insert(row.id.clone()) {
                    return Err(TrajectoryError::ParseError {
                        line,
                        message: format!("rows of {:?} are not contiguous", row.id),
                    });
                }
                out.push(Trajectory::new(
                    row.id,
                    vec![Point2::new(row.x, row.y)],
                    vec![row.t],
                ));
            }
        }
    }
    Ok(out)
}

/// Loads and labels a dataset, enforcing the boundary-endpoint rule.
pub fn load_csv(
    path: impl AsRef<Path>,
    env: &Environment,
    mode: BoundaryMode,
) -> Result<Dataset, TrajectoryError> {
    let rays = build_rays(env)?;
    let mut kept = Vec::new();
    for traj in read_trajectories(path)? {
        match traj.check_boundary(env) {
            Ok(()) => kept.push(traj),
            Err(e) if mode == BoundaryMode::WarnAndSkip => {
                log::warn!("skipping: {e}");
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Dataset::from_trajectories(kept, &rays))
}

pub fn write_trajectories<'a>(
    trajectories: impl IntoIterator<Item = &'a Trajectory>,
    path: impl AsRef<Path>,
) -> Result<(), TrajectoryError> {
    let mut wtr = csv::Writer::from_path(path)?;
    let mut any = false;
    for traj in trajectories {
        for (p, &t) in traj.positions.iter().zip(&traj.timestamps) {
            wtr.serialize(Row {
                id: traj.id.clone(),
                t,
                x: p.x,
                y: p.y,
            })?;
            any = true;
        }
    }
    if !any {
        wtr.write_record(["id", "t", "x", "y"])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<(), TrajectoryError> {
    write_trajectories(dataset.trajectories(), path)
}

/// Provenance of a generated or split dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub environment: PathBuf,
    pub csv: Vec<PathBuf>,
    pub split_seed: u64,
    /// Class word (display form) to member count.
    pub class_counts: BTreeMap<String, usize>,
}

impl DatasetManifest {
    pub fn new(environment: PathBuf, csv: Vec<PathBuf>, split_seed: u64, dataset: &Dataset) -> Self {
        let class_counts = dataset
            .classes()
            .iter()
            .map(|(h, ids)| (h.to_string(), ids.len()))
            .collect();
        Self {
            environment,
            csv,
            split_seed,
            class_counts,
        }
    }
}
