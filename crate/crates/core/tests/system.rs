mod common;

use std::f64::consts::PI;

use common::{run, unit_density_error, Datum};
use corner_nystrom::problems::example_problem;
use corner_nystrom::{assemble, BoundaryData, Error, QuadratureRule, SolverConfig};

#[test]
fn dimensions_and_finiteness() {
    let r = run(1, 64, Datum::Reference, true, false);
    assert_eq!(r.sys.matrix().n(), 198);
    assert_eq!(r.sys.rhs().len(), 198);
    assert!(r.sys.matrix().is_finite());
    assert_eq!(r.sys.index(1, 0), 0);
    assert_eq!(r.sys.index(2, 0), 66);
    assert_eq!(r.sys.index(3, 65), 197);
}

#[test]
fn operator_maps_unit_density_close_to_minus_two_pi() {
    let r = run(1, 64, Datum::MinusTwoPi, true, false);
    let n = r.sys.matrix().n();
    let a1 = r.sys.matrix().mul_vec(&vec![1.0; n]);
    let worst = a1.iter().map(|v| (v + 2.0 * PI).abs()).fold(0.0, f64::max);
    assert!(worst <= 5e-3, "{worst}");
}

#[test]
fn corner_rows_have_no_sampled_cross_arm_term() {
    // At x_0 = 0 the blend reduces to the corner term alone, and the Mellin
    // part vanishes on the corner pairing.
    let r = run(2, 64, Datum::Reference, true, false);
    let chi = r.kset.chi();
    let m = r.sys.matrix();
    let (r10, r20) = (r.sys.index(1, 0), r.sys.index(2, 0));
    let modified = m[(r10, r10)];
    let raw = run(2, 64, Datum::Reference, false, false);
    assert!((modified - raw.sys.matrix()[(r10, r10)]).abs() < 1e-14);
    assert!((m[(r10, r20)]).abs() < 1e-14);
    // −π identity, −χπ from the corner limit, and the self term.
    let self_term: f64 = r.sys.rule().weights()[0] * r.kset.kernel_k(1, 1, 0.0, 0.0).unwrap();
    assert!((modified - (-PI - chi * PI + self_term)).abs() < 1e-12);
}

#[test]
fn zero_datum_gives_zero_density() {
    let spec = example_problem(2, None).unwrap();
    let p = spec.default_params;
    let kset = spec.kernels(p.delta).unwrap();
    let rule = QuadratureRule::lobatto(32).unwrap();
    let config = SolverConfig::new(32, p.c, p.epsilon).unwrap();
    let sys = assemble(&kset, &rule, &config, &BoundaryData::constant(0.0)).unwrap();
    let sol = sys.solve().unwrap();
    assert!(sol.nodal_values().iter().all(|&v| v == 0.0));
}

#[test]
fn interpolant_reproduces_nodes() {
    for id in 1..=3u8 {
        let r = run(id, 64, Datum::Reference, true, false);
        let x = r.sol.rule().nodes().to_vec();
        for i in 1..=3 {
            for (l, &xl) in x.iter().enumerate() {
                let v = r.sol.interpolate_density(i, xl).unwrap();
                let a = r.sol.arc_values(i)[l];
                assert!((v - a).abs() <= 1e-10 * (1.0 + a.abs()), "ex{id} ({i},{l})");
            }
        }
    }
}

#[test]
fn unit_density_interpolant() {
    let r = run(1, 128, Datum::MinusTwoPi, true, false);
    let tol = unit_density_error(&r.sol).max(1e-12);
    for i in 1..=3 {
        for k in 0..=40 {
            let s = k as f64 / 40.0;
            let v = r.sol.interpolate_density(i, s).unwrap();
            assert!((v - 1.0).abs() <= 10.0 * tol, "({i}, {s}): {v}");
        }
    }
    assert!(r.sol.interpolate_density(3, 1.5).is_err());
    assert!(r.sol.interpolate_density(4, 0.5).is_err());
}

#[test]
fn unit_density_error_decreases_in_m() {
    let errs: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&m| unit_density_error(&run(1, m, Datum::MinusTwoPi, true, false).sol))
        .collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    assert!(errs[1] <= 1e-3);
}

#[test]
fn density_self_convergence() {
    let a = run(2, 256, Datum::Reference, true, false);
    let b = run(2, 512, Datum::Reference, true, false);
    let (va, vb) = (
        a.sol.interpolate_density(3, 0.5).unwrap(),
        b.sol.interpolate_density(3, 0.5).unwrap(),
    );
    assert!((va - vb).abs() <= 1e-6 * vb.abs(), "{va} vs {vb}");
}

#[test]
fn density_norm_is_stable_in_m() {
    let norms: Vec<f64> = [64, 128, 256, 512]
        .iter()
        .map(|&m| run(2, m, Datum::Reference, true, false).sol.psi_norm_inf())
        .collect();
    let max = norms.iter().cloned().fold(f64::MIN, f64::max);
    let min = norms.iter().cloned().fold(f64::MAX, f64::min);
    assert!((max - min) / max < 1e-4, "{norms:?}");
    assert!((norms[0] - 0.44387).abs() / 0.44387 < 1e-3, "{}", norms[0]);
}

#[test]
fn residual_and_corner_mismatch_bounds() {
    for id in 1..=3u8 {
        for m in [64, 128, 256] {
            let r = run(id, m, Datum::Reference, true, false);
            let a = r.sol.nodal_norm_inf();
            let b = r.sys.rhs().iter().fold(0.0f64, |s, v| s.max(v.abs()));
            assert!(r.sol.residual_inf <= 1e-10 * (r.sys.matrix().norm_inf() * a + b));
            assert!(r.sol.corner_mismatch <= 1e-8 * (1.0 + a), "ex{id} m={m}");
        }
    }
}

#[test]
fn constrained_mode_identifies_the_corner_unknowns() {
    let spec = example_problem(1, None).unwrap();
    let p = spec.default_params;
    let kset = spec.kernels(p.delta).unwrap();
    let rule = QuadratureRule::lobatto(64).unwrap();
    let g = spec.boundary_data().unwrap();
    let full = SolverConfig::new(64, p.c, p.epsilon).unwrap();
    let sys_full = assemble(&kset, &rule, &full, &g).unwrap();
    let sys_con = assemble(&kset, &rule, &full.with_constrained(true), &g).unwrap();
    let (reduced, rhs) = sys_con.effective();
    assert_eq!(reduced.n(), 197);
    assert_eq!(rhs.len(), 197);
    let a = sys_full.solve().unwrap();
    let b = sys_con.solve().unwrap();
    assert_eq!(b.corner_mismatch, 0.0);
    assert_eq!(b.nodal_values().len(), 198);
    let diff = a
        .nodal_values()
        .iter()
        .zip(b.nodal_values())
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max);
    assert!(diff <= 1e-6, "{diff}");
    let cond = sys_con.condition_inf().unwrap();
    assert!(cond.is_finite() && cond >= 1.0);
}

#[test]
fn modified_rows_grow_slowly() {
    for id in 1..=3u8 {
        let p = example_problem(id, None).unwrap().default_params;
        for m in [64, 128, 256, 512, 1024] {
            let rule = QuadratureRule::lobatto(m).unwrap();
            let config = SolverConfig::new(m, p.c, p.epsilon).unwrap();
            let cp = config.corner_threshold();
            let count = rule.nodes().iter().filter(|&&x| x < cp).count();
            let bound = (4.0 * p.c.sqrt() * (m as f64).powf(p.epsilon)).ceil() as usize + 1;
            assert!(count >= 1 && count <= bound, "ex{id} m={m}: {count} > {bound}");
        }
    }
    let r = run(1, 64, Datum::Reference, true, false);
    assert!(r.sys.modified_node_count() >= 2);
    assert_eq!(run(1, 64, Datum::Reference, false, false).sys.modified_node_count(), 0);
}

#[test]
fn assembly_is_deterministic() {
    let a = run(3, 64, Datum::Reference, true, false);
    let b = run(3, 64, Datum::Reference, true, false);
    assert_eq!(a.sys.matrix().as_slice(), b.sys.matrix().as_slice());
    assert_eq!(a.sys.rhs(), b.sys.rhs());
}

#[test]
fn csv_dumps() {
    let r = run(2, 4, Datum::Reference, true, false);
    let mut m = Vec::new();
    r.sys.write_matrix_csv(&mut m).unwrap();
    let m = String::from_utf8(m).unwrap();
    let lines: Vec<&str> = m.lines().collect();
    assert_eq!(lines[0], "row,col,value");
    assert_eq!(lines.len(), 1 + 18 * 18);
    let f: Vec<&str> = lines[1 + 18 + 2].split(',').collect();
    assert_eq!((f[0], f[1]), ("1", "2"));
    assert_eq!(f[2].parse::<f64>().unwrap(), r.sys.matrix()[(1, 2)]);
    let mut b = Vec::new();
    r.sys.write_rhs_csv(&mut b).unwrap();
    let b = String::from_utf8(b).unwrap();
    let lines: Vec<&str> = b.lines().collect();
    assert_eq!(lines[0], "row,value");
    assert_eq!(lines.len(), 19);
    assert_eq!(lines[5].split(',').nth(1).unwrap().parse::<f64>().unwrap(), r.sys.rhs()[4]);
}

#[test]
fn bad_inputs() {
    let spec = example_problem(2, None).unwrap();
    let p = spec.default_params;
    let kset = spec.kernels(p.delta).unwrap();
    let rule = QuadratureRule::lobatto(16).unwrap();
    let config = SolverConfig::new(32, p.c, p.epsilon).unwrap();
    let g = spec.boundary_data().unwrap();
    assert!(matches!(
        assemble(&kset, &rule, &config, &g),
        Err(Error::InvalidArgument(_))
    ));
    let config = SolverConfig::new(16, p.c, p.epsilon).unwrap();
    let jump = BoundaryData::per_arc(|i, _s| if i == 1 { 1.0 } else { 0.0 });
    assert!(assemble(&kset, &rule, &config, &jump).is_err());
    let nan = BoundaryData::constant(f64::NAN);
    assert!(assemble(&kset, &rule, &config, &nan).is_err());
    assert!(SolverConfig::new(0, 1.0, 0.1).is_err());
    assert!(SolverConfig::new(8, -1.0, 0.1).is_err());
    assert!(SolverConfig::new(8, 1.0, 1.0).is_err());
    assert!(SolverConfig::new(8, 500.0, 0.1).is_err());
}
