mod common;

use nalgebra::Point2;
use rand::Rng;

use homotopic_tracking::topology::{
    build_rays, h_signature, is_compatible, partial_h_signature, quotient_closure, reduce,
    segment_crossings, winding_number, winding_oracle, Bounds, Environment, HWord, Obstacle,
    TopologyError,
};

use common::{exact_crossings, net, random_polyline, row_environment, rng, stack_reduce};

fn w(s: &str) -> HWord {
    s.parse().unwrap()
}

fn p(x: f64, y: f64) -> Point2<f64> {
    Point2::new(x, y)
}

/// Two obstacles side by side with downward rays, like the textbook word example.
fn two_obstacles() -> Environment {
    Environment::new(
        Bounds::new(0.0, 0.0, 14.0, 10.0),
        vec![
            Obstacle::rectangle(2.0, 4.0, 4.0, 6.0).unwrap(),
            Obstacle::rectangle(8.0, 4.0, 10.0, 6.0).unwrap(),
        ],
    )
    .unwrap()
}

fn gamma() -> Vec<Point2<f64>> {
    vec![p(0.0, 1.0), p(11.0, 1.0), p(11.0, 2.0), p(6.5, 2.0), p(6.5, 10.0)]
}

#[test]
fn single_square_gets_a_downward_ray() {
    let env = Environment::new(
        Bounds::new(0.0, 0.0, 1.0, 1.0),
        vec![Obstacle::rectangle(0.4, 0.4, 0.6, 0.6).unwrap()],
    )
    .unwrap();
    let rays = build_rays(&env).unwrap();
    assert_eq!(rays.len(), 1);
    assert_eq!(rays[0].letter, 1);
    assert!((rays[0].origin - p(0.5, 0.5)).norm() < 1e-12);
    assert!((rays[0].endpoint.x - rays[0].origin.x).abs() < 1e-12);
    assert_eq!(rays[0].endpoint.y, 0.0);
}

#[test]
fn two_obstacle_rays_are_labeled_and_disjoint() {
    let env = two_obstacles();
    let rays = build_rays(&env).unwrap();
    assert_eq!(rays.iter().map(|r| r.letter).collect::<Vec<_>>(), vec![1, 2]);
    assert!(exact_crossings(&rays[0].origin, &rays[0].endpoint, &[(2, rays[1].origin, rays[1].endpoint)]).is_empty());
}

#[test]
fn blocked_downward_ray_turns_upward() {
    let env = Environment::new(
        Bounds::new(0.0, 0.0, 10.0, 10.0),
        vec![
            Obstacle::rectangle(4.0, 6.0, 6.0, 8.0).unwrap(),
            Obstacle::rectangle(3.0, 1.0, 7.0, 3.0).unwrap(),
        ],
    )
    .unwrap();
    let rays = build_rays(&env).unwrap();
    assert_eq!(rays[0].endpoint, p(5.0, 10.0));
    assert_eq!(rays[1].endpoint, p(5.0, 0.0));
    // Oracle: the downward segment from obstacle 1 really does pierce obstacle 2.
    assert!(env.obstacles()[1].intersects_segment(&p(5.0, 7.0), &p(5.0, 0.0)));
    for r in &rays {
        for (i, o) in env.obstacles().iter().enumerate() {
            if i as i32 + 1 != r.letter {
                assert!(!o.intersects_segment(&r.origin, &r.endpoint));
            }
        }
    }
}

#[test]
fn boxed_in_obstacle_fails_construction() {
    let env = Environment::new(
        Bounds::new(0.0, 0.0, 10.0, 10.0),
        vec![
            Obstacle::rectangle(4.0, 4.0, 6.0, 6.0).unwrap(),
            Obstacle::rectangle(3.0, 7.0, 7.0, 8.0).unwrap(),
            Obstacle::rectangle(3.0, 1.0, 7.0, 2.0).unwrap(),
        ],
    )
    .unwrap();
    assert!(matches!(
        build_rays(&env),
        Err(TopologyError::ConstructionFailed { letter: 1, .. })
    ));
}

#[test]
fn crossing_examples() {
    let rays = build_rays(&two_obstacles()).unwrap();
    // Parallel to both (vertical) rays.
    assert!(segment_crossings(&p(1.0, 0.5), &p(1.0, 3.0), &rays).is_empty());
    assert_eq!(segment_crossings(&p(0.0, 1.0), &p(12.0, 1.0), &rays), vec![1, 2]);
    assert_eq!(segment_crossings(&p(12.0, 1.0), &p(0.0, 1.0), &rays), vec![-2, -1]);
}

#[test]
fn same_ray_twice_with_opposite_orientation() {
    let env = two_obstacles();
    let rays = build_rays(&env).unwrap();
    let path = [p(1.0, 2.0), p(5.0, 1.0), p(1.5, 0.5)];
    let oracle: Vec<(i32, Point2<f64>, Point2<f64>)> =
        rays.iter().map(|r| (r.letter, r.origin, r.endpoint)).collect();
    let mut expected = Vec::new();
    for s in path.windows(2) {
        expected.extend(exact_crossings(&s[0], &s[1], &oracle));
    }
    assert_eq!(expected, vec![1, -1]);
    assert_eq!(h_signature(&path, &rays), w("(+1,-1)"));
}

#[test]
fn crossings_match_rational_oracle() {
    let env = row_environment(false);
    let rays = build_rays(&env).unwrap();
    let oracle: Vec<(i32, Point2<f64>, Point2<f64>)> =
        rays.iter().map(|r| (r.letter, r.origin, r.endpoint)).collect();
    let mut g = rng(3);
    for _ in 0..2000 {
        let a = p(g.random_range(0.0..20.0), g.random_range(0.0..10.0));
        let b = p(g.random_range(0.0..20.0), g.random_range(0.0..10.0));
        assert_eq!(segment_crossings(&a, &b, &rays), exact_crossings(&a, &b, &oracle));
    }
    // Grid-aligned endpoints exercise exact hits on ray lines and origins.
    for _ in 0..2000 {
        let a = p(g.random_range(0..41) as f64 * 0.5, g.random_range(0..21) as f64 * 0.5);
        let b = p(g.random_range(0..41) as f64 * 0.5, g.random_range(0..21) as f64 * 0.5);
        assert_eq!(
            segment_crossings(&a, &b, &rays),
            exact_crossings(&a, &b, &oracle),
            "segment {a} -> {b}"
        );
    }
}

#[test]
fn gamma_word_and_reduction() {
    let env = two_obstacles();
    let rays = build_rays(&env).unwrap();
    let h = h_signature(&gamma(), &rays);
    assert_eq!(h, w("(+1,+2,-2)"));
    assert_eq!(reduce(&h), w("(+1)"));
}

#[test]
fn gamma_winding_matches_reduced_counts() {
    let env = two_obstacles();
    let rays = build_rays(&env).unwrap();
    let closed = quotient_closure(&gamma(), &env, &rays).unwrap();
    let reduced = reduce(&h_signature(&gamma(), &rays));
    assert_eq!(winding_oracle(&closed, &env, 0).unwrap(), reduced.net_count(1));
    assert_eq!(winding_oracle(&closed, &env, 1).unwrap(), reduced.net_count(2));
    assert_eq!(reduced.net_count(1), 1);
}

#[test]
fn path_without_crossings_has_empty_word() {
    let rays = build_rays(&two_obstacles()).unwrap();
    let path = [p(0.0, 8.0), p(7.0, 9.0), p(14.0, 8.0)];
    assert_eq!(h_signature(&path, &rays), HWord::empty());
}

#[test]
fn densified_paths_keep_their_word() {
    let env = row_environment(false);
    let rays = build_rays(&env).unwrap();
    let mut g = rng(5);
    for _ in 0..200 {
        let path = random_polyline(&mut g, &env, false, 5);
        let mut dense = Vec::new();
        for s in path.windows(2) {
            for k in 0..10 {
                dense.push(s[0] + (s[1] - s[0]) * (k as f64 / 10.0));
            }
        }
        dense.push(*path.last().unwrap());
        assert_eq!(h_signature(&dense, &rays), h_signature(&path, &rays));
    }
}

#[test]
fn reduce_examples() {
    assert_eq!(reduce(&w("(+1,+2,-2)")), w("(+1)"));
    assert_eq!(reduce(&HWord::empty()), HWord::empty());
    assert_eq!(reduce(&w("(+1,-1,+1)")), w("(+1)"));
    assert!(reduce(&w("(+3,+1,-1,-3,+2)")).is_reduced());
    assert_eq!(reduce(&w("(+3,+1,-1,-3,+2)")).letters(), stack_reduce(&[3, 1, -1, -3, 2]).as_slice());
}

#[test]
fn partial_signature_examples() {
    let rays = build_rays(&two_obstacles()).unwrap();
    assert_eq!(partial_h_signature(&[p(1.0, 1.0)], &rays), HWord::empty());
    assert_eq!(partial_h_signature(&[p(1.0, 1.0), p(5.0, 1.5)], &rays), w("(+1)"));
}

#[test]
fn sparse_measurements_can_miss_crossings() {
    let rays = build_rays(&two_obstacles()).unwrap();
    // The dense path dips below obstacle 2 and comes back; two samples skip that.
    let dense = [p(6.0, 8.0), p(6.0, 1.0), p(9.0, 1.0), p(11.0, 1.0), p(11.0, 2.0), p(7.0, 2.0), p(6.5, 8.0)];
    let sparse = [dense[0], dense[6]];
    let full = h_signature(&dense, &rays);
    let approx = partial_h_signature(&sparse, &rays);
    assert_eq!(full, w("(+2,-2)"));
    assert_eq!(approx, HWord::empty());
    // The sparse word is what the dense one reduces to.
    assert_eq!(reduce(&full), reduce(&approx));
}

#[test]
fn compatibility_examples() {
    assert!(is_compatible(&w("(+1,+2,-2)"), &w("(+1)")));
    assert!(is_compatible(&w("(+1,+2,-2)"), &HWord::empty()));
    assert!(!is_compatible(&w("(+1)"), &w("(-1)")));
    assert!(!is_compatible(&w("(+1)"), &w("(+1,+2)")));
}

#[test]
fn winding_examples() {
    let c = p(0.0, 0.0);
    let circle: Vec<_> = (0..64)
        .map(|k| {
            let a = k as f64 / 64.0 * std::f64::consts::TAU;
            p(a.cos(), a.sin())
        })
        .collect();
    assert_eq!(winding_number(&circle, &c).unwrap(), 1);
    assert_eq!(winding_number(&circle, &p(3.0, 0.0)).unwrap(), 0);
    assert!(matches!(
        winding_number(&circle, &circle[5]),
        Err(TopologyError::UndefinedWinding)
    ));
}

#[test]
fn reduced_counts_equal_winding_on_random_paths() {
    for up in [false, true] {
        let env = row_environment(up);
        let rays = build_rays(&env).unwrap();
        let mut g = rng(if up { 11 } else { 12 });
        for _ in 0..150 {
            let n = g.random_range(1..7);
            let path = random_polyline(&mut g, &env, up, n);
            let reduced = reduce(&h_signature(&path, &rays));
            let closed = quotient_closure(&path, &env, &rays).unwrap();
            for k in 1..=3 {
                assert_eq!(
                    winding_oracle(&closed, &env, k as usize - 1).unwrap(),
                    net(reduced.letters(), k)
                );
            }
        }
    }
}
