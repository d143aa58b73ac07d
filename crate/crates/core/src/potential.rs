//! The approximate double-layer potential `u_m` at interior points.

use log::warn;

use crate::error::{Error, Result};
use crate::geometry::{SubArc, Vec2};
use crate::kernels::KernelSet;
use crate::quadrature::QuadratureRule;
use crate::system::NystromSolution;

const DISTANCE_SAMPLES: usize = 1024;
const DISTANCE_TOL: f64 = 1e-10;

/// Distances below this count as lying on the boundary.
pub const ON_BOUNDARY_TOL: f64 = 1e-12;

/// Evaluations closer than this to the boundary are flagged.
pub const NEAR_BOUNDARY: f64 = 1e-3;

/// `u_m` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialEvaluation {
    pub point: Vec2,
    pub value: f64,
    /// `min_i d_i`.
    pub d: f64,
    pub per_arc_distances: [f64; 3],
    /// `d` below [`NEAR_BOUNDARY`]; the quadrature error grows like `1/d²` there.
    pub near_boundary: bool,
}

fn arc_distance(arc: &SubArc, point: Vec2) -> f64 {
    let dist = |s: f64| (arc.point(s) - point).norm();
    let step = 1.0 / DISTANCE_SAMPLES as f64;
    let (k, dk) = (0..=DISTANCE_SAMPLES)
        .map(|k| (k, dist(k as f64 * step)))
        .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
    let mut a = (k as f64 - 1.0).max(0.0) * step;
    let mut b = (k as f64 + 1.0).min(DISTANCE_SAMPLES as f64) * step;
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (dist(c), dist(d));
    while b - a > DISTANCE_TOL {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = dist(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = dist(d);
        }
    }
    dk.min(fc).min(fd)
}

/// Distance from `point` to each arc and their minimum: dense sampling
/// followed by golden-section refinement in the arc parameter.
pub fn min_boundary_distance(kset: &KernelSet, point: Vec2) -> (f64, [f64; 3]) {
    let per = [1, 2, 3].map(|i| arc_distance(kset.arcs().arc(i), point));
    (per[0].min(per[1]).min(per[2]), per)
}

/// `Σ_i Σ_h λ_h H_i(x, y, x_h) ρ_{i,h}` for nodal values `density`, laid out
/// like the unknowns of the linear system.
pub fn double_layer_potential(
    kset: &KernelSet,
    rule: &QuadratureRule,
    density: &[f64],
    point: Vec2,
) -> f64 {
    let n = rule.len();
    assert_eq!(density.len(), 3 * n, "density must hold 3(m+2) values");
    let mut total = 0.0;
    for i in 1..=3 {
        let rho = &density[(i - 1) * n..i * n];
        let arc_sum: f64 = rule
            .iter()
            .zip(rho)
            .map(|((x, lam), r)| lam * kset.kernel_h(i, point, x) * r)
            .sum();
        total += arc_sum;
    }
    total
}

/// Evaluates `u_m` at an interior point.
pub fn evaluate_potential(sol: &NystromSolution, point: Vec2) -> Result<PotentialEvaluation> {
    if !point.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "evaluation point ({}, {}) is not finite",
            point.x, point.y
        )));
    }
    let kset = sol.kernels();
    let (d, per_arc_distances) = min_boundary_distance(kset, point);
    if d <= ON_BOUNDARY_TOL {
        return Err(Error::OnBoundary {
            x: point.x,
            y: point.y,
        });
    }
    let near_boundary = d < NEAR_BOUNDARY;
    if near_boundary {
        warn!(
            "point ({}, {}) is {d:e} from the boundary; expect reduced accuracy",
            point.x, point.y
        );
    }
    let value = double_layer_potential(kset, sol.rule(), sol.nodal_values(), point);
    Ok(PotentialEvaluation {
        point,
        value,
        d,
        per_arc_distances,
        near_boundary,
    })
}
