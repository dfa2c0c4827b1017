//! Winding numbers of boundary-closed paths, used to cross-check reduced words.

use std::f64::consts::PI;

use nalgebra::Point2;

use super::environment::{cross, point_segment_distance, Environment};
use super::signature::Ray;
use super::TopologyError;

/// Minimum clearance between the path and the winding center.
pub const WINDING_EPS: f64 = 1e-9;

/// Winding number of the closed polygon `path` (last point joins the first) around `center`.
pub fn winding_number(path: &[Point2<f64>], center: &Point2<f64>) -> Result<i32, TopologyError> {
    let n = path.len();
    if n == 0 {
        return Ok(0);
    }
    let mut total = 0.0;
    for i in 0..n {
        let a = path[i];
        let b = path[(i + 1) % n];
        if point_segment_distance(center, &a, &b) < WINDING_EPS {
            return Err(TopologyError::UndefinedWinding);
        }
        let va = a - center;
        let vb = b - center;
        total += cross(&va, &vb).atan2(va.dot(&vb));
    }
    Ok((total / (2.0 * PI)).round() as i32)
}

/// Winding number of a closed path around obstacle `obstacle_index`'s representative point.
pub fn winding_oracle(
    closed_path: &[Point2<f64>],
    env: &Environment,
    obstacle_index: usize,
) -> Result<i32, TopologyError> {
    let obs = env
        .obstacles()
        .get(obstacle_index)
        .ok_or(TopologyError::UnknownObstacle(obstacle_index))?;
    winding_number(closed_path, &obs.rep_point())
}

/// Closes a boundary-to-boundary path by walking the domain boundary from its end
/// back to its start, in whichever direction passes no ray endpoint.
///
/// Endpoints not on the boundary are first joined to their nearest boundary point.
pub fn quotient_closure(
    path: &[Point2<f64>],
    env: &Environment,
    rays: &[Ray],
) -> Result<Vec<Point2<f64>>, TopologyError> {
    let b = env.bounds();
    let (Some(first), Some(last)) = (path.first(), path.last()) else {
        return Ok(Vec::new());
    };
    let start = b.project_to_boundary(first);
    let end = b.project_to_boundary(last);
    let per = b.perimeter();
    let s_end = b.perimeter_param(&end);
    let s_start = b.perimeter_param(&start);
    let ccw_len = (s_start - s_end).rem_euclid(per);
    let ray_params: Vec<f64> = rays.iter().map(|r| b.perimeter_param(&r.endpoint)).collect();
    // Offsets of ray endpoints along the counter-clockwise walk from `end`.
    let blocked_ccw = ray_params.iter().any(|&s| {
        let off = (s - s_end).rem_euclid(per);
        off <= ccw_len
    });
    let blocked_cw = ray_params.iter().any(|&s| {
        let off = (s_end - s).rem_euclid(per);
        off <= per - ccw_len
    });
    let corner_params = {
        let (w, h) = (b.width(), b.height());
        [0.0, w, w + h, 2.0 * w + h]
    };
    let mut walk = vec![end];
    if !blocked_ccw {
        let mut corners: Vec<f64> = corner_params
            .iter()
            .map(|&c| (c - s_end).rem_euclid(per))
            .filter(|&off| off > 0.0 && off < ccw_len)
            .collect();
        corners.sort_by(f64::total_cmp);
        walk.extend(corners.iter().map(|off| b.point_at_param(s_end + off)));
    } else if !blocked_cw {
        let cw_len = per - ccw_len;
        let mut corners: Vec<f64> = corner_params
            .iter()
            .map(|&c| (s_end - c).rem_euclid(per))
            .filter(|&off| off > 0.0 && off < cw_len)
            .collect();
        corners.sort_by(f64::total_cmp);
        walk.extend(corners.iter().map(|off| b.point_at_param(s_end - off)));
    } else {
        return Err(TopologyError::NoClosure);
    }
    walk.push(start);

    let mut closed = path.to_vec();
    for p in walk {
        if closed.last() != Some(&p) {
            closed.push(p);
        }
    }
    if closed.len() > 1 && closed.first() == closed.last() {
        closed.pop();
    }
    Ok(closed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_rays, Bounds, Obstacle};

    #[test]
    fn circle_winds_once() {
        let c = Point2::new(0.3, -0.2);
        let circle: Vec<_> = (0..64)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 64.0;
                Point2::new(c.x + a.cos(), c.y + a.sin())
            })
            .collect();
        assert_eq!(winding_number(&circle, &c).unwrap(), 1);
        let reversed: Vec<_> = circle.iter().rev().cloned().collect();
        assert_eq!(winding_number(&reversed, &c).unwrap(), -1);
        assert_eq!(winding_number(&circle, &Point2::new(5.0, 5.0)).unwrap(), 0);
    }

    #[test]
    fn near_center_is_undefined() {
        let tri = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ];
        assert!(matches!(
            winding_number(&tri, &Point2::new(0.5, 0.0)),
            Err(TopologyError::UndefinedWinding)
        ));
    }

    #[test]
    fn closure_avoids_ray_endpoints() {
        let env = Environment::new(
            Bounds::new(0.0, 0.0, 10.0, 6.0),
            vec![Obstacle::rectangle(4.0, 2.0, 6.0, 4.0).unwrap()],
        )
        .unwrap();
        let rays = build_rays(&env).unwrap();
        // Passes below the obstacle left to right; closure must go over the top.
        let path = [Point2::new(0.0, 1.0), Point2::new(10.0, 1.0)];
        let closed = quotient_closure(&path, &env, &rays).unwrap();
        assert!(closed.iter().all(|p| p.y >= 1.0));
        assert_eq!(winding_oracle(&closed, &env, 0).unwrap(), 1);
        let above = [Point2::new(0.0, 5.0), Point2::new(10.0, 5.0)];
        let closed = quotient_closure(&above, &env, &rays).unwrap();
        assert_eq!(winding_oracle(&closed, &env, 0).unwrap(), 0);
    }
}
