#![allow(dead_code)]

use std::f64::consts::PI;

use corner_nystrom::problems::example_problem;
use corner_nystrom::{
    assemble, BoundaryData, KernelSet, LinearSystem, NystromSolution, QuadratureRule, SolverConfig,
};

/// A solved example with its matrix.
pub struct Run {
    pub kset: KernelSet,
    pub sys: LinearSystem,
    pub sol: NystromSolution,
    pub cond: Option<f64>,
}

pub enum Datum {
    /// Trace of the example's reference solution.
    Reference,
    /// `g ≡ −2π`, whose exact density is 1.
    MinusTwoPi,
}

/// Solves example `id` with its default parameters.
pub fn run(id: u8, m: usize, datum: Datum, modified: bool, cond: bool) -> Run {
    let spec = example_problem(id, None).unwrap();
    let p = spec.default_params;
    let kset = spec.kernels(p.delta).unwrap();
    let rule = QuadratureRule::lobatto(m).unwrap();
    let config = SolverConfig::new(m, p.c, p.epsilon)
        .unwrap()
        .with_modified(modified);
    let g = match datum {
        Datum::Reference => spec.boundary_data().unwrap(),
        Datum::MinusTwoPi => BoundaryData::constant(-2.0 * PI),
    };
    let sys = assemble(&kset, &rule, &config, &g).unwrap();
    let (sol, cond) = sys.solve_with_condition(cond).unwrap();
    Run {
        kset,
        sys,
        sol,
        cond,
    }
}

/// `max |a − 1|`.
pub fn unit_density_error(sol: &NystromSolution) -> f64 {
    sol.nodal_values()
        .iter()
        .fold(0.0, |m, v| f64::max(m, (v - 1.0).abs()))
}

/// Composite midpoint rule with `n` panels on `[0, 1]`.
pub fn composite_midpoint<F: Fn(f64) -> f64>(f: F, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    (0..n).map(|q| f((q as f64 + 0.5) * h)).sum::<f64>() * h
}

/// Prints the verdict line for a criterion and returns whether it passed.
pub fn report(id: u32, passed: bool, detail: &str) -> bool {
    println!(
        "[{}] criterion {id}: {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    passed
}
