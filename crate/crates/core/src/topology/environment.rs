//! Workspace geometry: the bounding rectangle and the convex obstacles inside it.

use std::path::Path;

use nalgebra::{Point2, Vector2};
use serde::{Deserialize, Serialize};

use super::TopologyError;

/// 2D cross product `a.x * b.y - a.y * b.x`.
#[inline]
pub fn cross(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Axis-aligned domain rectangle, in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl Bounds {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Self {
        Self {
            xmin,
            ymin,
            xmax,
            ymax,
        }
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn min_extent(&self) -> f64 {
        self.width().min(self.height())
    }

    pub fn contains(&self, p: &Point2<f64>) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }

    pub fn contains_strict(&self, p: &Point2<f64>) -> bool {
        p.x > self.xmin && p.x < self.xmax && p.y > self.ymin && p.y < self.ymax
    }

    /// Distance from an interior point to the nearest edge (0 outside).
    pub fn distance_to_boundary(&self, p: &Point2<f64>) -> f64 {
        if !self.contains(p) {
            return 0.0;
        }
        (p.x - self.xmin)
            .min(self.xmax - p.x)
            .min(p.y - self.ymin)
            .min(self.ymax - p.y)
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * (self.width() + self.height())
    }

    /// Counter-clockwise corners starting at `(xmin, ymin)`.
    pub fn corners(&self) -> [Point2<f64>; 4] {
        [
            Point2::new(self.xmin, self.ymin),
            Point2::new(self.xmax, self.ymin),
            Point2::new(self.xmax, self.ymax),
            Point2::new(self.xmin, self.ymax),
        ]
    }

    /// Closest point on the boundary rectangle.
    pub fn project_to_boundary(&self, p: &Point2<f64>) -> Point2<f64> {
        let x = p.x.clamp(self.xmin, self.xmax);
        let y = p.y.clamp(self.ymin, self.ymax);
        let q = Point2::new(x, y);
        if !self.contains_strict(&q) {
            return q;
        }
        let candidates = [
            (x - self.xmin, Point2::new(self.xmin, y)),
            (self.xmax - x, Point2::new(self.xmax, y)),
            (y - self.ymin, Point2::new(x, self.ymin)),
            (self.ymax - y, Point2::new(x, self.ymax)),
        ];
        candidates
            .into_iter()
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, q)| q)
            .unwrap()
    }

    /// Counter-clockwise arc-length coordinate of a boundary point, starting at `(xmin, ymin)`.
    pub fn perimeter_param(&self, p: &Point2<f64>) -> f64 {
        let (w, h) = (self.width(), self.height());
        let dx = [
            (p.y - self.ymin).abs(),
            (p.x - self.xmax).abs(),
            (p.y - self.ymax).abs(),
            (p.x - self.xmin).abs(),
        ];
        let edge = (0..4).min_by(|&a, &b| dx[a].total_cmp(&dx[b])).unwrap();
        match edge {
            0 => p.x - self.xmin,
            1 => w + (p.y - self.ymin),
            2 => w + h + (self.xmax - p.x),
            _ => 2.0 * w + h + (self.ymax - p.y),
        }
    }

    /// Boundary point at a counter-clockwise arc-length coordinate.
    pub fn point_at_param(&self, s: f64) -> Point2<f64> {
        let (w, h) = (self.width(), self.height());
        let s = s.rem_euclid(self.perimeter());
        if s <= w {
            Point2::new(self.xmin + s, self.ymin)
        } else if s <= w + h {
            Point2::new(self.xmax, self.ymin + (s - w))
        } else if s <= 2.0 * w + h {
            Point2::new(self.xmax - (s - w - h), self.ymax)
        } else {
            Point2::new(self.xmin, self.ymax - (s - 2.0 * w - h))
        }
    }
}

/// A convex polygonal obstacle.
#[derive(Clone, Debug, PartialEq)]
pub struct Obstacle {
    /// Counter-clockwise vertex loop.
    vertices: Vec<Point2<f64>>,
    rep_point: Point2<f64>,
    ray_endpoint: Option<Point2<f64>>,
}

impl Obstacle {
    /// Builds an obstacle; the representative point defaults to the polygon centroid.
    pub fn new(
        vertices: Vec<Point2<f64>>,
        rep_point: Option<Point2<f64>>,
        ray_endpoint: Option<Point2<f64>>,
    ) -> Result<Self, TopologyError> {
        if vertices.len() < 3 {
            return Err(TopologyError::InvalidEnvironment(
                "obstacle needs at least 3 vertices".into(),
            ));
        }
        let mut vertices = vertices;
        let area = signed_area(&vertices);
        if area.abs() < 1e-12 {
            return Err(TopologyError::InvalidEnvironment(
                "obstacle has zero area".into(),
            ));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if cross(&(b - a), &(c - b)) < -1e-12 {
                return Err(TopologyError::InvalidEnvironment(
                    "obstacle polygon is not convex".into(),
                ));
            }
        }
        let rep_point = rep_point.unwrap_or_else(|| polygon_centroid(&vertices));
        let obstacle = Self {
            vertices,
            rep_point,
            ray_endpoint,
        };
        if !obstacle.contains_strict(&rep_point) {
            return Err(TopologyError::InvalidEnvironment(format!(
                "representative point ({}, {}) is not strictly inside its obstacle",
                rep_point.x, rep_point.y
            )));
        }
        Ok(obstacle)
    }

    /// Axis-aligned rectangle obstacle.
    pub fn rectangle(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self, TopologyError> {
        Self::new(
            vec![
                Point2::new(xmin, ymin),
                Point2::new(xmax, ymin),
                Point2::new(xmax, ymax),
                Point2::new(xmin, ymax),
            ],
            None,
            None,
        )
    }

    pub fn vertices(&self) -> &[Point2<f64>] {
        &self.vertices
    }

    pub fn rep_point(&self) -> Point2<f64> {
        self.rep_point
    }

    pub fn ray_endpoint(&self) -> Option<Point2<f64>> {
        self.ray_endpoint
    }

    fn edges(&self) -> impl Iterator<Item = (Point2<f64>, Point2<f64>)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn contains_strict(&self, p: &Point2<f64>) -> bool {
        self.edges().all(|(a, b)| cross(&(b - a), &(p - a)) > 0.0)
    }

    pub fn contains(&self, p: &Point2<f64>) -> bool {
        self.edges().all(|(a, b)| cross(&(b - a), &(p - a)) >= 0.0)
    }

    /// True when the closed segment `a`-`b` touches the closed polygon.
    pub fn intersects_segment(&self, a: &Point2<f64>, b: &Point2<f64>) -> bool {
        if self.contains(a) || self.contains(b) {
            return true;
        }
        self.edges().any(|(p, q)| segments_intersect(a, b, &p, &q))
    }

    /// Euclidean distance from a point outside the polygon to the polygon (0 inside).
    pub fn distance_to(&self, p: &Point2<f64>) -> f64 {
        if self.contains(p) {
            return 0.0;
        }
        self.edges()
            .map(|(a, b)| point_segment_distance(p, &a, &b))
            .fold(f64::INFINITY, f64::min)
    }

    fn intersects_obstacle(&self, other: &Obstacle) -> bool {
        other.vertices.iter().any(|v| self.contains(v))
            || self.vertices.iter().any(|v| other.contains(v))
            || self
                .edges()
                .any(|(a, b)| other.edges().any(|(c, d)| segments_intersect(&a, &b, &c, &d)))
    }
}

fn signed_area(vertices: &[Point2<f64>]) -> f64 {
    let n = vertices.len();
    (0..n)
        .map(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        / 2.0
}

fn polygon_centroid(vertices: &[Point2<f64>]) -> Point2<f64> {
    let n = vertices.len();
    let area = signed_area(vertices);
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let f = a.x * b.y - b.x * a.y;
        cx += (a.x + b.x) * f;
        cy += (a.y + b.y) * f;
    }
    Point2::new(cx / (6.0 * area), cy / (6.0 * area))
}

/// Closed-segment intersection test, including collinear overlap.
pub fn segments_intersect(
    a: &Point2<f64>,
    b: &Point2<f64>,
    c: &Point2<f64>,
    d: &Point2<f64>,
) -> bool {
    let d1 = cross(&(d - c), &(a - c));
    let d2 = cross(&(d - c), &(b - c));
    let d3 = cross(&(b - a), &(c - a));
    let d4 = cross(&(b - a), &(d - a));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on_segment = |p: &Point2<f64>, q: &Point2<f64>, r: &Point2<f64>| {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

pub fn point_segment_distance(p: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * s)).norm()
}

/// Bounds plus an ordered obstacle list; obstacle `i` carries letter `i + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    bounds: Bounds,
    obstacles: Vec<Obstacle>,
}

#[derive(Serialize, Deserialize)]
struct EnvironmentFile {
    bounds: [f64; 4],
    obstacles: Vec<ObstacleFile>,
}

#[derive(Serialize, Deserialize)]
struct ObstacleFile {
    vertices: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rep_point: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ray_endpoint: Option<[f64; 2]>,
}

impl Environment {
    pub fn new(bounds: Bounds, obstacles: Vec<Obstacle>) -> Result<Self, TopologyError> {
        if !(bounds.width() > 0.0 && bounds.height() > 0.0) {
            return Err(TopologyError::InvalidEnvironment(
                "bounds must have positive extent".into(),
            ));
        }
        for (i, obs) in obstacles.iter().enumerate() {
            if !obs.vertices.iter().all(|v| bounds.contains_strict(v)) {
                return Err(TopologyError::InvalidEnvironment(format!(
                    "obstacle {} is not strictly inside the bounds",
                    i + 1
                )));
            }
            for (j, other) in obstacles.iter().enumerate().skip(i + 1) {
                if obs.intersects_obstacle(other) {
                    return Err(TopologyError::InvalidEnvironment(format!(
                        "obstacles {} and {} overlap",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self { bounds, obstacles })
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    /// Boundary tolerance for trajectory endpoints: 5% of the smaller extent.
    pub fn boundary_tolerance(&self) -> f64 {
        0.05 * self.bounds.min_extent()
    }

    /// Within the boundary tolerance of the rectangle outline, from either side.
    pub fn is_near_boundary(&self, p: &Point2<f64>) -> bool {
        let b = &self.bounds;
        let d = if b.contains(p) {
            b.distance_to_boundary(p)
        } else {
            let dx = (b.xmin - p.x).max(p.x - b.xmax).max(0.0);
            let dy = (b.ymin - p.y).max(p.y - b.ymax).max(0.0);
            dx.hypot(dy)
        };
        d <= self.boundary_tolerance()
    }

    /// Index of the first obstacle touched by the segment, if any.
    pub fn segment_hits_obstacle(&self, a: &Point2<f64>, b: &Point2<f64>) -> Option<usize> {
        self.obstacles.iter().position(|o| o.intersects_segment(a, b))
    }

    pub fn polyline_hits_obstacle(&self, points: &[Point2<f64>]) -> bool {
        if points.len() == 1 {
            return self.obstacles.iter().any(|o| o.contains(&points[0]));
        }
        points
            .windows(2)
            .any(|w| self.segment_hits_obstacle(&w[0], &w[1]).is_some())
    }

    pub fn from_json(text: &str) -> Result<Self, TopologyError> {
        let file: EnvironmentFile = serde_json::from_str(text)?;
        let [xmin, ymin, xmax, ymax] = file.bounds;
        let obstacles = file
            .obstacles
            .into_iter()
            .map(|o| {
                Obstacle::new(
                    o.vertices.iter().map(|v| Point2::new(v[0], v[1])).collect(),
                    o.rep_point.map(|p| Point2::new(p[0], p[1])),
                    o.ray_endpoint.map(|p| Point2::new(p[0], p[1])),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(Bounds::new(xmin, ymin, xmax, ymax), obstacles)
    }

    pub fn to_json(&self) -> String {
        let file = EnvironmentFile {
            bounds: [
                self.bounds.xmin,
                self.bounds.ymin,
                self.bounds.xmax,
                self.bounds.ymax,
            ],
            obstacles: self
                .obstacles
                .iter()
                .map(|o| ObstacleFile {
                    vertices: o.vertices.iter().map(|v| [v.x, v.y]).collect(),
                    rep_point: Some([o.rep_point.x, o.rep_point.y]),
                    ray_endpoint: o.ray_endpoint.map(|p| [p.x, p.y]),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("environment serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TopologyError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TopologyError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box() -> Bounds {
        Bounds::new(0.0, 0.0, 1.0, 1.0)
    }

    #[test]
    fn centroid_is_default_rep_point() {
        let o = Obstacle::rectangle(0.2, 0.4, 0.6, 0.8).unwrap();
        assert!((o.rep_point() - Point2::new(0.4, 0.6)).norm() < 1e-12);
    }

    #[test]
    fn rejects_rep_point_outside() {
        let err = Obstacle::new(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.0, 1.0),
            ],
            Some(Point2::new(0.9, 0.9)),
            None,
        );
        assert!(matches!(err, Err(TopologyError::InvalidEnvironment(_))));
    }

    #[test]
    fn clockwise_input_is_normalized() {
        let o = Obstacle::new(
            vec![
                Point2::new(0.2, 0.2),
                Point2::new(0.2, 0.4),
                Point2::new(0.4, 0.4),
                Point2::new(0.4, 0.2),
            ],
            None,
            None,
        )
        .unwrap();
        assert!(o.contains_strict(&Point2::new(0.3, 0.3)));
    }

    #[test]
    fn rejects_overlap_and_out_of_bounds() {
        let a = Obstacle::rectangle(0.1, 0.1, 0.5, 0.5).unwrap();
        let b = Obstacle::rectangle(0.4, 0.4, 0.8, 0.8).unwrap();
        assert!(Environment::new(unit_box(), vec![a.clone(), b]).is_err());
        let c = Obstacle::rectangle(0.5, 0.5, 1.2, 0.9).unwrap();
        assert!(Environment::new(unit_box(), vec![c]).is_err());
        // Nested obstacle: no edge crossings but still overlapping.
        let inner = Obstacle::rectangle(0.2, 0.2, 0.3, 0.3).unwrap();
        assert!(Environment::new(unit_box(), vec![a, inner]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"bounds":[0,0,10,5],"obstacles":[{"vertices":[[1,1],[2,1],[2,2],[1,2]]},{"vertices":[[5,1],[6,1],[6,3]],"ray_endpoint":[5.6,5]}]}"#;
        let env = Environment::from_json(text).unwrap();
        assert_eq!(env.obstacles().len(), 2);
        assert_eq!(env.obstacles()[1].ray_endpoint(), Some(Point2::new(5.6, 5.0)));
        let again = Environment::from_json(&env.to_json()).unwrap();
        assert_eq!(env, again);
    }

    #[test]
    fn perimeter_param_round_trip() {
        let b = Bounds::new(-1.0, 2.0, 3.0, 5.0);
        for s in [0.0, 1.5, 4.0, 5.5, 8.0, 9.9, 12.5] {
            let p = b.point_at_param(s);
            assert!((b.perimeter_param(&p) - s).abs() < 1e-12, "s={s}");
        }
    }

    #[test]
    fn segment_polygon_intersection() {
        let o = Obstacle::rectangle(0.4, 0.4, 0.6, 0.6).unwrap();
        assert!(o.intersects_segment(&Point2::new(0.0, 0.5), &Point2::new(1.0, 0.5)));
        assert!(!o.intersects_segment(&Point2::new(0.0, 0.7), &Point2::new(1.0, 0.7)));
        // Touching a corner counts.
        let sq = Obstacle::rectangle(0.25, 0.25, 0.75, 0.75).unwrap();
        assert!(sq.intersects_segment(&Point2::new(0.0, 0.5), &Point2::new(0.5, 1.0)));
        assert!((o.distance_to(&Point2::new(0.5, 0.9)) - 0.3).abs() < 1e-12);
    }
}
