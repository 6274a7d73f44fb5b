use sparsetrace::fixtures;
use sparsetrace::mixedvol::mixed_volume;
use sparsetrace::polysys::{random_system, SegmentFamily, SparseSystem, TorusPoint};
use sparsetrace::scalar::C;
use sparsetrace::solver::{is_bernstein_generic, solve_torus, SolverConfig};
use sparsetrace::supports::{tal_candidate, SupportCollection};
use sparsetrace::tracker::{loop_waypoints, match_points, track_edge, track_set, TrackerConfig};
use sparsetrace::{Point, System};

fn same_set(a: &[Point], b: &[Point], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter()
            .all(|p| b.iter().any(|q| p.distance(q) <= tol * p.norm().max(1.0)))
        && b.iter()
            .all(|q| a.iter().any(|p| p.distance(q) <= tol * q.norm().max(1.0)))
}

fn max_residual(f: &System, pts: &[Point]) -> f64 {
    pts.iter()
        .map(|p| {
            f.evaluate(p)
                .unwrap()
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

#[test]
fn solution_count_matches_mixed_volume_across_corpus() {
    let cfg = SolverConfig::default();
    for (name, c) in fixtures::corpus() {
        let mv = mixed_volume(&c).unwrap();
        for seed in 0..4 {
            let f = random_system::<f64>(&c, seed);
            let s = solve_torus(&f, seed, &cfg).unwrap();
            assert_eq!(s.len().to_string(), mv.to_string(), "{name} seed {seed}");
            assert!(is_bernstein_generic(&f, &s), "{name} seed {seed}");
            assert!(
                s.residuals.iter().all(|&r| r <= 1e-12),
                "{name} seed {seed}"
            );
            assert!(max_residual(&f, &s.points) < 1e-8, "{name} seed {seed}");
        }
    }
}

#[test]
fn resolving_with_another_seed_gives_the_same_set() {
    let f = fixtures::hexagon_rectangle_f();
    let cfg = SolverConfig::default();
    let a = solve_torus(&f, 1, &cfg).unwrap();
    let b = solve_torus(&f, 99, &cfg).unwrap();
    assert_eq!(a.len(), 17);
    assert!(same_set(&a.points, &b.points, 1e-10));
}

#[test]
fn halving_the_step_bound_does_not_change_endpoints() {
    let c = fixtures::dilated_simplices(2, 3);
    let f = random_system::<f64>(&c, 5);
    let g = random_system::<f64>(&c, 6);
    let cfg = SolverConfig::default();
    let start = solve_torus(&g, 0, &cfg).unwrap().points;
    let fam = SegmentFamily::new(f, g).unwrap();
    let coarse = TrackerConfig::<f64>::default();
    let fine = TrackerConfig {
        max_step: 0.05,
        initial_step: 0.01,
        ..coarse.clone()
    };
    let a = track_set(&fam, &start, 0.0, 1.0, &coarse)
        .unwrap()
        .endpoints()
        .unwrap();
    let b = track_set(&fam, &start, 0.0, 1.0, &fine)
        .unwrap()
        .endpoints()
        .unwrap();
    for (p, q) in a.iter().zip(&b) {
        assert!(p.distance(q) < 1e-10 * p.norm().max(1.0));
    }
}

#[test]
fn tracking_between_systems_lands_on_their_solutions() {
    // Endpoints of the edge from F to G are exactly V(G), solved independently.
    let c = fixtures::hexagon_rectangle();
    let f = fixtures::hexagon_rectangle_f();
    let b = tal_candidate(&c).unwrap();
    let cfg = SolverConfig::default();
    let fibre = solve_torus(&f, 0, &cfg).unwrap().points;
    let [w1, w2] = loop_waypoints(&f, &b, 3).unwrap();
    let v1 = solve_torus(&w1, 1, &cfg).unwrap().points;
    let v2 = solve_torus(&w2, 2, &cfg).unwrap().points;

    let e1 = track_edge(&f, &w1, &fibre, &cfg.tracker).unwrap();
    let p1 = match_points(&e1, &v1).unwrap();
    let e2 = track_edge(&w1, &w2, &v1, &cfg.tracker).unwrap();
    let p2 = match_points(&e2, &v2).unwrap();
    let e3 = track_edge(&w2, &f, &v2, &cfg.tracker).unwrap();
    let p3 = match_points(&e3, &fibre).unwrap();
    // The loop permutation is the composite of the three edge bijections.
    let composite: Vec<usize> = (0..fibre.len()).map(|i| p3[p2[p1[i]]]).collect();
    let direct =
        sparsetrace::tracker::monodromy_loop_through(&f, &[w1, w2], &fibre, &cfg.tracker).unwrap();
    assert_eq!(composite, direct);
}

#[test]
fn lacunary_solutions_come_in_sign_pairs() {
    // L = ℤ × 2ℤ: (x, y) ↦ (x, -y) preserves V(F).
    let c = fixtures::lacunary_diagonal();
    let cfg = SolverConfig::default();
    for seed in 0..5 {
        let f = random_system::<f64>(&c, seed);
        let s = solve_torus(&f, seed, &cfg).unwrap();
        assert_eq!(s.len(), 4);
        for p in &s.points {
            let q = TorusPoint::new(vec![p.coords()[0], -p.coords()[1]], 0.0).unwrap();
            assert!(
                s.points.iter().any(|r| r.distance(&q) < 1e-10),
                "seed {seed}"
            );
        }
    }
}

#[test]
fn single_solution_system() {
    // x = 2, y = 3 written as x - 2, y - 3.
    let f: System = SparseSystem::from_terms(
        2,
        &[
            vec![
                (vec![1, 0], C::new(1.0, 0.0)),
                (vec![0, 0], C::new(-2.0, 0.0)),
            ],
            vec![
                (vec![0, 1], C::new(1.0, 0.0)),
                (vec![0, 0], C::new(-3.0, 0.0)),
            ],
        ],
    )
    .unwrap();
    let s = solve_torus(&f, 0, &SolverConfig::default()).unwrap();
    assert_eq!(s.len(), 1);
    assert!((s.points[0].coords()[0] - C::new(2.0, 0.0)).norm() < 1e-14);
    assert!((s.points[0].coords()[1] - C::new(3.0, 0.0)).norm() < 1e-14);
}

#[test]
fn first_coordinates_are_distinct_on_corpus() {
    let cfg = SolverConfig::default();
    for (name, c) in fixtures::corpus() {
        let f = random_system::<f64>(&c, 17);
        let s = solve_torus(&f, 17, &cfg).unwrap();
        for (i, p) in s.points.iter().enumerate() {
            for q in &s.points[i + 1..] {
                assert!((p.coords()[0] - q.coords()[0]).norm() > 1e-6, "{name}");
            }
        }
    }
}

#[test]
fn single_precision_solves_small_system() {
    let c: SupportCollection = fixtures::dilated_simplices(2, 2);
    let f = random_system::<f32>(&c, 2);
    let s = solve_torus(&f, 2, &SolverConfig::<f32>::default()).unwrap();
    assert_eq!(s.len(), 4);
    let exact = solve_torus(&random_system::<f64>(&c, 2), 2, &SolverConfig::default()).unwrap();
    let widened: Vec<Point> = s.points.iter().map(|p| p.cast()).collect();
    assert!(same_set(&widened, &exact.points, 1e-3));
}
