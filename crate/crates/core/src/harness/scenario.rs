//! Built-in three-obstacle scenario for synthetic benchmarks.
//!
//! A 30 m x 10 m corridor with three equal obstacles in a row. The first and
//! third cast rays downward, the middle one upward, so every class except the
//! optional empty one crosses at least one ray:
//!
//! | class | route (O1, O2, O3) | word |
//! |-------|--------------------|------|
//! | a | below, below, above | `(+1)` |
//! | b | above, above, above | `(-2)` |
//! | c | above, below, below | `(+3)` |
//! | d | below, below, below | `(+1,+3)` |
//! | e | above, below, above | `()` |
//!
//! Class `c` moves faster through the middle so that it reaches the third
//! obstacle well before class `d`.

use nalgebra::Point2;

use crate::topology::{Bounds, Environment, Obstacle};
use crate::trajectory::Trajectory;

/// Timesteps per template.
pub const TEMPLATE_LEN: usize = 100;

pub fn three_obstacle_environment() -> Environment {
    let rect = |x0: f64, x1: f64, ray: Option<Point2<f64>>| {
        Obstacle::new(
            vec![
                Point2::new(x0, 3.5),
                Point2::new(x1, 3.5),
                Point2::new(x1, 6.5),
                Point2::new(x0, 6.5),
            ],
            None,
            ray,
        )
        .expect("valid rectangle")
    };
    Environment::new(
        Bounds::new(0.0, 0.0, 30.0, 10.0),
        vec![
            rect(6.0, 9.0, None),
            rect(12.0, 15.0, Some(Point2::new(13.5, 10.0))),
            rect(22.0, 25.0, None),
        ],
    )
    .expect("valid environment")
}

const LOW: f64 = 1.5;
const HIGH: f64 = 8.5;
const MID: f64 = 5.0;

struct Template {
    id: &'static str,
    /// Waypoints with increasing x.
    waypoints: Vec<(f64, f64)>,
    /// `(t, x)` knots of the progress along x.
    progress: Vec<(f64, f64)>,
}

fn interp(knots: &[(f64, f64)], u: f64) -> f64 {
    let i = knots.partition_point(|k| k.0 <= u).clamp(1, knots.len() - 1);
    let (u0, v0) = knots[i - 1];
    let (u1, v1) = knots[i];
    v0 + (v1 - v0) * (u - u0) / (u1 - u0)
}

impl Template {
    fn render(&self) -> Trajectory {
        let positions = (0..TEMPLATE_LEN)
            .map(|t| {
                let x = interp(&self.progress, t as f64);
                Point2::new(x, interp(&self.waypoints, x))
            })
            .collect();
        Trajectory::from_positions(self.id, positions)
    }
}

/// Template paths, one per class; the empty class is included on request.
pub fn three_obstacle_templates(include_empty: bool) -> Vec<Trajectory> {
    let last = (TEMPLATE_LEN - 1) as f64;
    let uniform = vec![(0.0, 0.3), (last, 29.7)];
    let start = (0.3, MID);
    let end = (29.7, MID);
    let mut templates = vec![
        Template {
            id: "a",
            waypoints: vec![start, (4.5, LOW), (15.5, LOW), (20.5, HIGH), (26.5, HIGH), end],
            progress: uniform.clone(),
        },
        Template {
            id: "b",
            waypoints: vec![start, (4.5, HIGH), (26.5, HIGH), end],
            progress: uniform.clone(),
        },
        Template {
            id: "c",
            waypoints: vec![start, (4.5, HIGH), (9.5, HIGH), (11.5, LOW), (26.5, LOW), end],
            progress: vec![(0.0, 0.3), (70.0, 23.5), (last, 29.7)],
        },
        Template {
            id: "d",
            waypoints: vec![start, (4.5, LOW), (26.5, LOW), end],
            progress: uniform.clone(),
        },
    ];
    if include_empty {
        templates.push(Template {
            id: "e",
            waypoints: vec![
                start,
                (4.5, HIGH),
                (9.5, HIGH),
                (11.5, LOW),
                (15.5, LOW),
                (20.5, HIGH),
                (26.5, HIGH),
                end,
            ],
            progress: uniform,
        });
    }
    templates.iter().map(Template::render).collect()
}
