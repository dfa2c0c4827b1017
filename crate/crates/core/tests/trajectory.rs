mod common;

use nalgebra::Point2;
use rand::Rng;

use homotopic_tracking::harness::{three_obstacle_environment, three_obstacle_templates};
use homotopic_tracking::topology::{build_rays, h_signature, reduce, HWord};
use homotopic_tracking::trajectory::{
    canonicalize, cluster_by_signature, load_csv, save_csv, split, synthesize_dataset,
    write_trajectories, BoundaryMode, Dataset, GpSampler, SynthParams, Trajectory,
    TrajectoryError, CANONICAL_LEN,
};

use common::{random_polyline, rng, row_environment};

fn p(x: f64, y: f64) -> Point2<f64> {
    Point2::new(x, y)
}

fn synthetic(samples: usize, seed: u64) -> Dataset {
    synthesize_dataset(
        &three_obstacle_environment(),
        &three_obstacle_templates(false),
        &SynthParams {
            samples_per_template: samples,
            length_scale: 25.0,
            amplitude: 0.25,
            seed,
        },
    )
    .unwrap()
}

#[test]
fn two_point_trajectory_resamples_to_a_line() {
    let t = Trajectory::new("a", vec![p(0.0, 0.0), p(9.9, 4.95)], vec![0.0, 3.0]);
    let c = canonicalize(&t, 100).unwrap();
    assert_eq!(c.len(), 100);
    assert_eq!(c.positions[0], t.positions[0]);
    assert_eq!(c.positions[99], t.positions[1]);
    for k in 0..100 {
        let expected = p(0.1 * k as f64, 0.05 * k as f64);
        assert!((c.positions[k] - expected).norm() < 1e-12);
    }
}

#[test]
fn resampling_twice_changes_nothing() {
    let env = row_environment(false);
    let mut g = rng(1);
    let path = random_polyline(&mut g, &env, false, 8);
    let t = Trajectory::from_positions("r", path);
    let once = canonicalize(&t, 100).unwrap();
    let twice = canonicalize(&once, 100).unwrap();
    for (a, b) in once.positions.iter().zip(&twice.positions) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn resampling_uses_elapsed_time_not_arc_length() {
    // A slow first half and a fast second half.
    let t = Trajectory::new("s", vec![p(0.0, 0.0), p(1.0, 0.0), p(10.0, 0.0)], vec![0.0, 5.0, 10.0]);
    let c = canonicalize(&t, 3).unwrap();
    assert!((c.positions[1] - p(1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn zero_duration_is_rejected() {
    let t = Trajectory::new("z", vec![p(0.0, 0.0), p(1.0, 0.0)], vec![2.0, 2.0]);
    assert!(matches!(canonicalize(&t, 100), Err(TrajectoryError::DegenerateTrajectory(_))));
}

#[test]
fn resampling_keeps_reduced_signature_on_random_paths() {
    let env = row_environment(false);
    let rays = build_rays(&env).unwrap();
    let mut g = rng(2);
    for i in 0..300 {
        // 37-point polylines made of a few straight legs with collinear fill.
        let n = g.random_range(1..5);
        let legs = random_polyline(&mut g, &env, false, n);
        let mut pts = Vec::new();
        let per = 36 / (legs.len() - 1);
        for s in legs.windows(2) {
            for k in 0..per {
                pts.push(s[0] + (s[1] - s[0]) * (k as f64 / per as f64));
            }
        }
        while pts.len() < 36 {
            pts.push(legs[legs.len() - 2] + (legs[legs.len() - 1] - legs[legs.len() - 2]) * 0.999);
        }
        pts.truncate(36);
        pts.push(*legs.last().unwrap());
        let t = Trajectory::from_positions(format!("p{i}"), pts);
        let c = canonicalize(&t, CANONICAL_LEN).unwrap();
        // Resampled chords can cut obstacle corners; only obstacle-free outputs are comparable.
        if env.polyline_hits_obstacle(&c.positions) {
            continue;
        }
        assert_eq!(reduce(&h_signature(&c.positions, &rays)), reduce(&h_signature(&t.positions, &rays)));
    }
}

#[test]
fn header_only_file_is_an_empty_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    std::fs::write(&path, "id,t,x,y\n").unwrap();
    let data = load_csv(&path, &three_obstacle_environment(), BoundaryMode::Strict).unwrap();
    assert!(data.is_empty());
}

#[test]
fn interleaved_ids_are_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "id,t,x,y\na,0,0.1,5\nb,0,0.1,5\na,1,29.9,5\n").unwrap();
    assert!(matches!(
        load_csv(&path, &three_obstacle_environment(), BoundaryMode::Strict),
        Err(TrajectoryError::ParseError { line: 4, .. })
    ));
}

#[test]
fn boundary_violations_fail_or_are_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inner.csv");
    std::fs::write(&path, "id,t,x,y\nin,0,10,9\nin,1,11,9\nok,0,0.1,9\nok,1,29.9,9\n").unwrap();
    let env = three_obstacle_environment();
    assert!(matches!(
        load_csv(&path, &env, BoundaryMode::Strict),
        Err(TrajectoryError::BoundaryViolation { .. })
    ));
    let kept = load_csv(&path, &env, BoundaryMode::WarnAndSkip).unwrap();
    assert_eq!(kept.len(), 1);
    assert_eq!(kept.trajectories()[0].id, "ok");
}

#[test]
fn csv_round_trip_of_a_synthetic_set() {
    let env = three_obstacle_environment();
    let data = synthetic(12, 4);
    assert_eq!(data.len(), 48);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("set.csv");
    save_csv(&data, &path).unwrap();
    let back = load_csv(&path, &env, BoundaryMode::Strict).unwrap();
    assert_eq!(back.len(), data.len());
    for (a, b) in data.trajectories().iter().zip(back.trajectories()) {
        assert_eq!(a.id, b.id);
        for (pa, pb) in a.positions.iter().zip(&b.positions) {
            assert!((pa - pb).norm() < 1e-9);
        }
    }
    assert_eq!(back.signatures(), data.signatures());
    let path2 = dir.path().join("again.csv");
    write_trajectories(back.trajectories(), &path2).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
}

#[test]
fn synthetic_layout_has_four_pure_classes() {
    let env = three_obstacle_environment();
    let rays = build_rays(&env).unwrap();
    let data = synthetic(48, 9);
    let classes = cluster_by_signature(&data, &rays);
    assert_eq!(classes.len(), 4);
    assert!(classes.values().all(|ids| ids.len() == 48));
    for (t, h) in data.iter() {
        assert_eq!(&h_signature(&t.positions, &rays), h);
        assert!(!env.polyline_hits_obstacle(&t.positions));
    }
}

#[test]
fn zero_amplitude_reproduces_templates() {
    let env = three_obstacle_environment();
    let templates = three_obstacle_templates(false);
    let data = synthesize_dataset(
        &env,
        &templates,
        &SynthParams {
            samples_per_template: 3,
            length_scale: 25.0,
            amplitude: 0.0,
            seed: 1,
        },
    )
    .unwrap();
    for (k, t) in data.trajectories().iter().enumerate() {
        assert_eq!(t.positions, templates[k / 3].positions);
    }
}

#[test]
fn generator_is_deterministic() {
    let a = synthetic(5, 21);
    let b = synthetic(5, 21);
    assert_eq!(a.trajectories(), b.trajectories());
    assert_ne!(a.trajectories(), synthetic(5, 22).trajectories());
}

#[test]
fn offset_process_has_the_requested_spread() {
    let sampler = GpSampler::new(100, 25.0, 0.25).unwrap();
    let mut g = rng(8);
    let n = 10_000;
    let mut sq = vec![0.0; 100];
    for _ in 0..n {
        let d = sampler.sample(&mut g);
        for (s, v) in sq.iter_mut().zip(d.iter()) {
            *s += v * v;
        }
    }
    for s in sq {
        let sd = (s / n as f64).sqrt();
        assert!((sd - 0.25).abs() < 0.05 * 0.25, "pointwise sd {sd}");
    }
}

#[test]
fn hand_built_paths_cluster_by_word() {
    let env = row_environment(false);
    let rays = build_rays(&env).unwrap();
    // Below or above each of the three obstacles (rays point down).
    let route = |below: [bool; 3]| {
        let y = |b: bool| if b { 1.0 } else { 9.0 };
        vec![
            p(0.0, 5.0),
            p(2.0, y(below[0])),
            p(6.5, y(below[0])),
            p(7.0, y(below[1])),
            p(12.0, y(below[1])),
            p(12.5, y(below[2])),
            p(18.0, y(below[2])),
            p(20.0, 5.0),
        ]
    };
    let specs = [
        ([true, false, false], "(+1)"),
        ([false, true, false], "(+2)"),
        ([false, false, true], "(+3)"),
        ([true, true, false], "(+1,+2)"),
        ([true, false, false], "(+1)"),
        ([false, false, false], "()"),
    ];
    let trajs: Vec<Trajectory> = specs
        .iter()
        .enumerate()
        .map(|(i, (b, _))| Trajectory::from_positions(format!("t{i}"), route(*b)))
        .collect();
    let data = Dataset::from_trajectories(trajs, &rays);
    for (k, (_, word)) in specs.iter().enumerate() {
        assert_eq!(data.signatures()[k], word.parse::<HWord>().unwrap());
    }
    let classes = cluster_by_signature(&data, &rays);
    assert_eq!(classes.len(), 5);
    assert_eq!(classes[&"(+1)".parse::<HWord>().unwrap()], vec!["t0".to_string(), "t4".to_string()]);
}

#[test]
fn split_sizes_and_determinism() {
    let data = synthetic(60, 3);
    let (train, test) = split(&data, 48, 12, 5).unwrap();
    for members in train.classes().values() {
        assert_eq!(members.len(), 48);
    }
    for members in test.classes().values() {
        assert_eq!(members.len(), 12);
    }
    let train_ids: std::collections::HashSet<_> = train.trajectories().iter().map(|t| &t.id).collect();
    assert!(test.trajectories().iter().all(|t| !train_ids.contains(&t.id)));
    let (train2, test2) = split(&data, 48, 12, 5).unwrap();
    assert_eq!(train.trajectories(), train2.trajectories());
    assert_eq!(test.trajectories(), test2.trajectories());

    let (empty, rest) = split(&data, 0, 12, 5).unwrap();
    assert!(empty.is_empty());
    assert_eq!(rest.len(), 48);
    assert!(matches!(
        split(&data, 50, 12, 5),
        Err(TrajectoryError::InsufficientClassMembers { .. })
    ));
}
