//! Expected gain sampled on a (location x time) lattice.

use std::io::Write;
use std::ops::Range;

use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use crate::gain::GainField;
use crate::topology::Bounds;

/// Uniform grid of sensing locations at cell centers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub bounds: Bounds,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    /// `n` cells per axis.
    pub fn uniform(bounds: Bounds, n: usize) -> Self {
        Self { bounds, nx: n, ny: n }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        self.bounds.width() / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.bounds.height() / self.ny as f64
    }

    /// Center of cell `(ix, iy)`.
    pub fn location(&self, ix: usize, iy: usize) -> Point2<f64> {
        Point2::new(
            self.bounds.xmin + (ix as f64 + 0.5) * self.dx(),
            self.bounds.ymin + (iy as f64 + 0.5) * self.dy(),
        )
    }

    /// Cell containing `p`, clamped to the grid.
    pub fn cell_of(&self, p: &Point2<f64>) -> (usize, usize) {
        let fx = ((p.x - self.bounds.xmin) / self.dx()).floor();
        let fy = ((p.y - self.bounds.ymin) / self.dy()).floor();
        (
            (fx.max(0.0) as usize).min(self.nx - 1),
            (fy.max(0.0) as usize).min(self.ny - 1),
        )
    }

    pub fn cell_index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Heatcube {
    grid: GridSpec,
    t_start: usize,
    t_len: usize,
    /// Indexed `[t][iy][ix]`.
    values: Vec<f64>,
}

impl Heatcube {
    /// All-zero cube.
    pub fn zeros(grid: GridSpec, horizon: Range<usize>) -> Self {
        let t_len = horizon.len();
        Self {
            grid,
            t_start: horizon.start,
            t_len,
            values: vec![0.0; grid.len() * t_len],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn t_start(&self) -> usize {
        self.t_start
    }

    /// Number of timesteps.
    pub fn t_len(&self) -> usize {
        self.t_len
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn index(&self, ix: usize, iy: usize, it: usize) -> usize {
        (it * self.grid.ny + iy) * self.grid.nx + ix
    }

    /// Value at cell `(ix, iy)` and horizon offset `it` (absolute time `t_start + it`).
    pub fn get(&self, ix: usize, iy: usize, it: usize) -> f64 {
        self.values[self.index(ix, iy, it)]
    }

    pub fn set(&mut self, ix: usize, iy: usize, it: usize, v: f64) {
        let i = self.index(ix, iy, it);
        self.values[i] = v;
    }

    /// `(ix, iy, it)` of a flat index.
    pub fn coords(&self, i: usize) -> (usize, usize, usize) {
        let plane = self.grid.len();
        (i % self.grid.nx, (i % plane) / self.grid.nx, i / plane)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Flat index of the largest cell (lowest index on ties).
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &v) in self.values.iter().enumerate() {
            if best.is_none_or(|b| v > self.values[b]) {
                best = Some(i);
            }
        }
        best
    }

    /// Fraction of cells strictly above `rel * max` (zero for an all-zero cube).
    pub fn occupancy_fraction(&self, rel: f64) -> f64 {
        let m = self.max();
        if m <= 0.0 || self.values.is_empty() {
            return 0.0;
        }
        let thr = rel * m;
        self.values.iter().filter(|&&v| v > thr).count() as f64 / self.values.len() as f64
    }

    /// Writes `x,y,t,gain` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["x", "y", "t", "gain"])?;
        for it in 0..self.t_len {
            for iy in 0..self.grid.ny {
                for ix in 0..self.grid.nx {
                    let p = self.grid.location(ix, iy);
                    wtr.write_record(&[
                        p.x.to_string(),
                        p.y.to_string(),
                        (self.t_start + it).to_string(),
                        self.get(ix, iy, it).to_string(),
                    ])?;
                }
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Evaluates `field` on every grid location and timestep of `horizon`;
/// negative or non-finite values become 0.
pub fn build_heatcube<F: GainField + ?Sized>(field: &F, grid: GridSpec, horizon: Range<usize>) -> Heatcube {
    let mut cube = Heatcube::zeros(grid, horizon.clone());
    let locations: Vec<Point2<f64>> = (0..grid.ny)
        .flat_map(|iy| (0..grid.nx).map(move |ix| (ix, iy)))
        .map(|(ix, iy)| grid.location(ix, iy))
        .collect();
    let plane = grid.len();
    for (it, t) in horizon.enumerate() {
        for (k, p) in locations.iter().enumerate() {
            let v = field.gain(p, t);
            cube.values[it * plane + k] = if v.is_finite() && v > 0.0 { v } else { 0.0 };
        }
    }
    cube
}
