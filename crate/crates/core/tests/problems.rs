use std::f64::consts::PI;

use corner_nystrom::geometry::Vec2;
use corner_nystrom::problems::{example_problem, reference_solution, ProblemSpec};
use corner_nystrom::{split_boundary, Error};
use proptest::prelude::*;

fn polygon(spec: &ProblemSpec) -> Vec<Vec2> {
    (0..=4000).map(|k| spec.curve.point(k as f64 / 4000.0)).collect()
}

/// Winding-number test against a fine polygonal approximation of the curve.
fn inside(poly: &[Vec2], p: Vec2) -> bool {
    let wind: f64 = poly
        .windows(2)
        .map(|e| {
            let (a, b) = (e[0] - p, e[1] - p);
            a.cross(b).atan2(a.dot(b))
        })
        .sum();
    (wind / (2.0 * PI)).round() as i64 == 1
}

fn boundary_distance(poly: &[Vec2], p: Vec2) -> f64 {
    poly.iter().map(|&q| (q - p).norm()).fold(f64::INFINITY, f64::min)
}

fn laplacian(spec: &ProblemSpec, p: Vec2, h: f64) -> f64 {
    let u = |x: f64, y: f64| reference_solution(spec, Vec2::new(x, y)).unwrap();
    (u(p.x + h, p.y) + u(p.x - h, p.y) + u(p.x, p.y + h) + u(p.x, p.y - h) - 4.0 * u(p.x, p.y))
        / (h * h)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 20, max_global_rejects: 100_000, ..ProptestConfig::default() })]

    #[test]
    fn references_are_harmonic(id in 1u8..=3, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let spec = example_problem(id, None).unwrap();
        let (lo, hi) = (-1.0, 1.0);
        let p = Vec2::new(lo + (hi - lo) * u, lo + (hi - lo) * v);
        let poly = polygon(&spec);
        prop_assume!(inside(&poly, p));
        prop_assume!(boundary_distance(&poly, p) > 0.02);
        prop_assume!(p.norm() > 0.05);
        let lap = laplacian(&spec, p, 1e-4);
        prop_assert!(lap.abs() <= 1e-4, "{:?}: {}", p, lap);
    }
}

#[test]
fn reference_values() {
    let ex1 = example_problem(1, None).unwrap();
    assert!((reference_solution(&ex1, Vec2::new(1.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
    let ex2 = example_problem(2, None).unwrap();
    let v = reference_solution(&ex2, Vec2::new(0.8, 0.6)).unwrap();
    // cos(1.5·atan2(0.6, 0.8)) evaluated independently.
    assert!((v - 0.569_209_978_830_308_2).abs() < 1e-12, "{v}");
    let ex3 = example_problem(3, None).unwrap();
    assert_eq!(reference_solution(&ex3, Vec2::new(0.0, 0.0)).unwrap(), 0.0);
    let p = Vec2::new(0.3, 0.02);
    let want = 0.3f64.sin() * 0.02f64.cosh();
    assert!((reference_solution(&ex3, p).unwrap() - want).abs() < 1e-15);
}

#[test]
fn families_have_no_reference() {
    for (id, phi) in [(4u8, 0.5 * PI), (5, 1.5 * PI)] {
        let spec = example_problem(id, Some(phi)).unwrap();
        assert!(matches!(
            reference_solution(&spec, Vec2::new(0.1, 0.0)),
            Err(Error::Unsupported(_))
        ));
        assert!(spec.boundary_data().is_err());
    }
}

#[test]
fn angle_arguments() {
    assert!(example_problem(1, Some(1.0)).is_err());
    assert!(example_problem(4, None).is_err());
    assert!(example_problem(4, Some(0.05 * PI)).is_err());
    assert!(example_problem(4, Some(0.1 * PI)).is_ok());
    assert!(example_problem(4, Some(1.9 * PI)).is_ok());
    assert!(matches!(
        example_problem(4, Some(PI)),
        Err(Error::SmoothPoint { .. })
    ));
    assert!(example_problem(5, Some(PI)).is_err());
    assert!(example_problem(5, Some(2.0 * PI)).is_err());
    assert!(example_problem(0, None).is_err());
    assert!(example_problem(6, None).is_err());
}

#[test]
fn example4_parametrization() {
    let phi = 0.5 * PI;
    let spec = example_problem(4, Some(phi)).unwrap();
    for t in [0.1, 0.4, 0.77] {
        let want = Vec2::new((phi * (t - 0.5)).cos(), (phi * (t - 0.5)).sin()) * (PI * t).sin();
        assert!((spec.curve.point(t) - want).norm() < 1e-15);
    }
}

#[test]
fn datum_is_the_trace_of_the_reference() {
    for id in 1..=3u8 {
        let spec = example_problem(id, None).unwrap();
        let arcs = split_boundary(&spec.curve, spec.default_params.delta).unwrap();
        let g = spec.boundary_data().unwrap();
        for i in 1..=3 {
            for s in [0.0, 0.3, 0.9, 1.0] {
                let want = reference_solution(&spec, arcs.arc(i).point(s)).unwrap();
                assert_eq!(g.eval(&arcs, i, s), want);
            }
        }
    }
}

#[test]
fn reference_has_no_branch_cut_inside() {
    for id in 1..=2u8 {
        let spec = example_problem(id, None).unwrap();
        let poly = polygon(&spec);
        let n = 100;
        let h = 2.0 / n as f64;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let p = Vec2::new(-1.0 + a as f64 * h, -1.0 + b as f64 * h);
                let q = p + Vec2::new(h, 0.0);
                let r = p + Vec2::new(0.0, h);
                if !inside(&poly, p) {
                    continue;
                }
                let u = reference_solution(&spec, p).unwrap();
                for nb in [q, r] {
                    if inside(&poly, nb) {
                        let jump = (reference_solution(&spec, nb).unwrap() - u).abs();
                        worst = worst.max(jump);
                    }
                }
            }
        }
        // A cut would produce an O(1) jump; smooth neighbors differ by O(h^β).
        assert!(worst < 0.1, "example {id}: {worst}");
    }
}
