//! Rays, signed crossing letters, and h-signature words.
//!
//! Every obstacle gets a ray from its representative point to the domain
//! boundary. Tracing a path and appending `+k` / `-k` each time it crosses
//! ray `k` yields the path's word; cancelling adjacent inverse letters gives
//! the reduced word, which identifies the homotopy class.

use std::fmt;

use nalgebra::{Point2, Vector2};
use serde::{Deserialize, Serialize};

use super::environment::{cross, Environment};
use super::TopologyError;

/// A segment from an obstacle's representative point to the domain boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    /// Positive letter, `1..=n`.
    pub letter: i32,
    pub origin: Point2<f64>,
    pub endpoint: Point2<f64>,
}

impl Ray {
    pub fn direction(&self) -> Vector2<f64> {
        self.endpoint - self.origin
    }

    pub fn length(&self) -> f64 {
        self.direction().norm()
    }

    /// Unit direction from origin to endpoint.
    pub fn unit(&self) -> Vector2<f64> {
        self.direction() / self.length()
    }
}

/// A word of signed obstacle letters.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HWord(pub Vec<i32>);

impl HWord {
    pub fn new(letters: Vec<i32>) -> Self {
        Self(letters)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// No adjacent `(k, -k)` pair.
    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != -w[1])
    }

    pub fn push(&mut self, letter: i32) {
        self.0.push(letter);
    }

    /// This word followed by `letter`.
    pub fn extended(&self, letter: i32) -> Self {
        let mut w = self.clone();
        w.0.push(letter);
        w
    }

    /// First `n` letters (or the whole word).
    pub fn prefix(&self, n: usize) -> Self {
        Self(self.0[..n.min(self.0.len())].to_vec())
    }

    /// Net signed count of letter `k` (occurrences of `+k` minus occurrences of `-k`).
    pub fn net_count(&self, k: i32) -> i32 {
        self.0
            .iter()
            .map(|&l| {
                if l == k {
                    1
                } else if l == -k {
                    -1
                } else {
                    0
                }
            })
            .sum()
    }
}

impl fmt::Display for HWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l:+}")?;
        }
        write!(f, ")")
    }
}

impl std::str::FromStr for HWord {
    type Err = String;

    /// Parses `"(+1,+2,-2)"`, `"()"`, or a bare `"1 2 -2"` list.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        inner
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                let v: i32 = t
                    .trim_start_matches('+')
                    .parse()
                    .map_err(|_| format!("bad letter {t:?}"))?;
                if v == 0 {
                    Err("letter 0 is not allowed".to_string())
                } else {
                    Ok(v)
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(HWord)
    }
}

impl From<Vec<i32>> for HWord {
    fn from(v: Vec<i32>) -> Self {
        Self(v)
    }
}

/// Builds one ray per obstacle: explicit endpoint if given, else straight down, else straight up.
pub fn build_rays(env: &Environment) -> Result<Vec<Ray>, TopologyError> {
    let b = env.bounds();
    let obstacles = env.obstacles();
    let mut rays = Vec::with_capacity(obstacles.len());
    for (i, obs) in obstacles.iter().enumerate() {
        let letter = i as i32 + 1;
        let origin = obs.rep_point();
        let others_clear = |end: &Point2<f64>| {
            obstacles
                .iter()
                .enumerate()
                .all(|(j, o)| j == i || !o.intersects_segment(&origin, end))
        };
        let endpoint = match obs.ray_endpoint() {
            Some(end) => {
                let on_boundary =
                    b.contains(&end) && b.distance_to_boundary(&end) <= 1e-9 * b.min_extent();
                if !on_boundary {
                    return Err(TopologyError::ConstructionFailed {
                        letter,
                        reason: "explicit ray endpoint is not on the domain boundary".into(),
                    });
                }
                if !others_clear(&end) {
                    return Err(TopologyError::ConstructionFailed {
                        letter,
                        reason: "explicit ray passes through another obstacle".into(),
                    });
                }
                end
            }
            None => {
                let down = Point2::new(origin.x, b.ymin);
                let up = Point2::new(origin.x, b.ymax);
                if others_clear(&down) {
                    down
                } else if others_clear(&up) {
                    up
                } else {
                    return Err(TopologyError::ConstructionFailed {
                        letter,
                        reason: "both vertical rays pass through another obstacle; \
                                 supply ray_endpoint"
                            .into(),
                    });
                }
            }
        };
        rays.push(Ray {
            letter,
            origin,
            endpoint,
        });
    }
    for i in 0..rays.len() {
        for j in i + 1..rays.len() {
            if super::environment::segments_intersect(
                &rays[i].origin,
                &rays[i].endpoint,
                &rays[j].origin,
                &rays[j].endpoint,
            ) {
                return Err(TopologyError::ConstructionFailed {
                    letter: rays[j].letter,
                    reason: format!("ray intersects ray {}", rays[i].letter),
                });
            }
        }
    }
    Ok(rays)
}

/// Signed letters crossed by the half-open segment `[p0, p1)`, in order along the segment.
pub fn segment_crossings(p0: &Point2<f64>, p1: &Point2<f64>, rays: &[Ray]) -> Vec<i32> {
    let seg = p1 - p0;
    let mut hits: Vec<(f64, i32)> = Vec::new();
    for ray in rays {
        let d = ray.direction();
        let denom = cross(&seg, &d);
        if denom == 0.0 {
            continue;
        }
        let w = ray.origin - p0;
        let s = cross(&w, &d) / denom;
        let u = cross(&w, &seg) / denom;
        if (0.0..1.0).contains(&s) && (0.0..=1.0).contains(&u) {
            let sign = if cross(&d, &seg) > 0.0 { 1 } else { -1 };
            hits.push((s, sign * ray.letter));
        }
    }
    hits.sort_by(|a, b| a.0.total_cmp(&b.0));
    hits.into_iter().map(|(_, l)| l).collect()
}

/// Unreduced word of a polyline.
pub fn h_signature(path: &[Point2<f64>], rays: &[Ray]) -> HWord {
    let mut letters = Vec::new();
    for w in path.windows(2) {
        letters.extend(segment_crossings(&w[0], &w[1], rays));
    }
    HWord(letters)
}

/// Word of the polyline through time-ordered measurement positions; one point gives `()`.
pub fn partial_h_signature(measurements: &[Point2<f64>], rays: &[Ray]) -> HWord {
    h_signature(measurements, rays)
}

/// Cancels adjacent `(k, -k)` pairs until none remain.
pub fn reduce(w: &HWord) -> HWord {
    let mut stack: Vec<i32> = Vec::with_capacity(w.len());
    for &l in w.letters() {
        if stack.last() == Some(&-l) {
            stack.pop();
        } else {
            stack.push(l);
        }
    }
    HWord(stack)
}

/// `partial` is a letter-exact prefix of `full`.
pub fn is_compatible(full: &HWord, partial: &HWord) -> bool {
    full.letters().starts_with(partial.letters())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{Bounds, Obstacle};

    fn two_obstacles() -> (Environment, Vec<Ray>) {
        let env = Environment::new(
            Bounds::new(0.0, 0.0, 10.0, 6.0),
            vec![
                Obstacle::rectangle(2.0, 2.0, 4.0, 4.0).unwrap(),
                Obstacle::rectangle(6.0, 2.0, 8.0, 4.0).unwrap(),
            ],
        )
        .unwrap();
        let rays = build_rays(&env).unwrap();
        (env, rays)
    }

    #[test]
    fn display_and_parse() {
        let w = HWord::new(vec![1, 2, -2]);
        assert_eq!(w.to_string(), "(+1,+2,-2)");
        assert_eq!("(+1,+2,-2)".parse::<HWord>().unwrap(), w);
        assert_eq!("()".parse::<HWord>().unwrap(), HWord::empty());
        assert!("(0)".parse::<HWord>().is_err());
    }

    #[test]
    fn default_rays_point_down() {
        let (_, rays) = two_obstacles();
        assert_eq!(rays.len(), 2);
        assert_eq!(rays[0].endpoint, Point2::new(3.0, 0.0));
        assert_eq!(rays[1].letter, 2);
    }

    #[test]
    fn crossing_at_shared_vertex_counts_once() {
        let (_, rays) = two_obstacles();
        let path = [
            Point2::new(1.0, 1.0),
            Point2::new(3.0, 1.0),
            Point2::new(5.0, 1.0),
        ];
        assert_eq!(h_signature(&path, &rays), HWord::new(vec![1]));
    }

    #[test]
    fn tangent_motion_is_not_a_crossing() {
        let (_, rays) = two_obstacles();
        assert!(segment_crossings(&Point2::new(3.0, 0.5), &Point2::new(3.0, 1.5), &rays).is_empty());
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(reduce(&HWord::new(vec![1, 2, -2])), HWord::new(vec![1]));
        assert_eq!(reduce(&HWord::new(vec![1, -1, 1])), HWord::new(vec![1]));
        assert_eq!(reduce(&HWord::new(vec![1, 2, -2, -1])), HWord::empty());
        assert!(reduce(&HWord::new(vec![3, 1, -1, -3, 2])).is_reduced());
    }

    #[test]
    fn compatibility_is_prefix() {
        let full = HWord::new(vec![1, 2, -2]);
        assert!(is_compatible(&full, &HWord::new(vec![1])));
        assert!(is_compatible(&full, &HWord::empty()));
        assert!(!is_compatible(&HWord::new(vec![1]), &HWord::new(vec![-1])));
        assert!(!is_compatible(&HWord::new(vec![1]), &HWord::new(vec![1, 2])));
    }
}
