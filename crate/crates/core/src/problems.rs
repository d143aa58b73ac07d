//! The five test domains: boundary curves, reference solutions and default
//! parameters.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{corner_angle, split_boundary, BoundaryCurve, CornerData, ParametricCurve, Vec2};
use crate::kernels::KernelSet;
use crate::system::BoundaryData;

/// `(δ, c, ε)` used when the caller does not override them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    pub delta: f64,
    pub c: f64,
    pub epsilon: f64,
}

/// `σ(t) = ((2/3) sin 3πt, sin 2πt)`.
#[derive(Debug, Clone, Copy)]
struct Reentrant;

impl ParametricCurve for Reentrant {
    fn point(&self, t: f64) -> Vec2 {
        Vec2::new(2.0 / 3.0 * (3.0 * PI * t).sin(), (2.0 * PI * t).sin())
    }
    fn d1(&self, t: f64) -> Vec2 {
        Vec2::new(2.0 * PI * (3.0 * PI * t).cos(), 2.0 * PI * (2.0 * PI * t).cos())
    }
    fn d2(&self, t: f64) -> Vec2 {
        Vec2::new(
            -6.0 * PI * PI * (3.0 * PI * t).sin(),
            -4.0 * PI * PI * (2.0 * PI * t).sin(),
        )
    }
    fn point_near_end(&self, u: f64) -> Vec2 {
        Vec2::new(2.0 / 3.0 * (3.0 * PI * u).sin(), -(2.0 * PI * u).sin())
    }
}

/// `σ(t) = ((2/√3) sin πt, −sin 2πt)`.
#[derive(Debug, Clone, Copy)]
struct Drop {
    k: f64,
}

impl Drop {
    fn new() -> Self {
        Self { k: 2.0 / 3f64.sqrt() }
    }
}

impl ParametricCurve for Drop {
    fn point(&self, t: f64) -> Vec2 {
        Vec2::new(self.k * (PI * t).sin(), -(2.0 * PI * t).sin())
    }
    fn d1(&self, t: f64) -> Vec2 {
        Vec2::new(self.k * PI * (PI * t).cos(), -2.0 * PI * (2.0 * PI * t).cos())
    }
    fn d2(&self, t: f64) -> Vec2 {
        Vec2::new(
            -self.k * PI * PI * (PI * t).sin(),
            4.0 * PI * PI * (2.0 * PI * t).sin(),
        )
    }
    fn point_near_end(&self, u: f64) -> Vec2 {
        Vec2::new(self.k * (PI * u).sin(), (2.0 * PI * u).sin())
    }
}

/// `σ(t) = sin πt (cos α(t − t₀), sin α(t − t₀))`.
#[derive(Debug, Clone, Copy)]
struct Petal {
    alpha: f64,
    shift: f64,
}

impl Petal {
    fn dir(&self, t: f64) -> (Vec2, Vec2) {
        let (s, c) = (self.alpha * (t - self.shift)).sin_cos();
        (Vec2::new(c, s), Vec2::new(-s, c))
    }
}

impl ParametricCurve for Petal {
    fn point(&self, t: f64) -> Vec2 {
        self.dir(t).0 * (PI * t).sin()
    }
    fn d1(&self, t: f64) -> Vec2 {
        let (e, ep) = self.dir(t);
        let (s, c) = (PI * t).sin_cos();
        e * (PI * c) + ep * (self.alpha * s)
    }
    fn d2(&self, t: f64) -> Vec2 {
        let (e, ep) = self.dir(t);
        let (s, c) = (PI * t).sin_cos();
        let a = self.alpha;
        e * (-PI * PI * s - a * a * s) + ep * (2.0 * PI * a * c)
    }
    fn point_near_end(&self, u: f64) -> Vec2 {
        self.dir(1.0 - u).0 * (PI * u).sin()
    }
}

/// `σ(t) = R(ωt) (T, 1) − (T, cos πt)` with `T = tan(φ/2)`, `ω = (1 + φ/π)π`.
#[derive(Debug, Clone, Copy)]
struct Heart {
    tan_half: f64,
    omega: f64,
}

impl Heart {
    fn new(phi: f64) -> Self {
        Self {
            tan_half: (0.5 * phi).tan(),
            omega: (1.0 + phi / PI) * PI,
        }
    }

    fn rotate(&self, t: f64, v: Vec2) -> Vec2 {
        let (s, c) = (self.omega * t).sin_cos();
        Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
    }
}

impl ParametricCurve for Heart {
    fn point(&self, t: f64) -> Vec2 {
        let v = Vec2::new(self.tan_half, 1.0);
        self.rotate(t, v) - Vec2::new(self.tan_half, (PI * t).cos())
    }
    fn d1(&self, t: f64) -> Vec2 {
        let perp = Vec2::new(-1.0, self.tan_half);
        self.rotate(t, perp) * self.omega + Vec2::new(0.0, PI * (PI * t).sin())
    }
    fn d2(&self, t: f64) -> Vec2 {
        let v = Vec2::new(self.tan_half, 1.0);
        self.rotate(t, v) * (-self.omega * self.omega) + Vec2::new(0.0, PI * PI * (PI * t).cos())
    }
}

/// Harmonic reference solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceSolution {
    /// `r^β cos(βθ)` around `center`, with `θ` taken in
    /// `(bisector − π, bisector + π)` so that the branch cut runs along the
    /// exterior bisector of the corner, outside the domain.
    Power { beta: f64, center: Vec2, bisector: f64 },
    /// `sin x cosh y`.
    SinCosh,
}

impl ReferenceSolution {
    pub fn eval(&self, p: Vec2) -> f64 {
        match *self {
            ReferenceSolution::Power {
                beta,
                center,
                bisector,
            } => {
                let v = p - center;
                let r = v.norm();
                if r == 0.0 {
                    return 0.0;
                }
                let e = Vec2::new(bisector.cos(), bisector.sin());
                let theta = bisector + e.cross(v).atan2(e.dot(v));
                r.powf(beta) * (beta * theta).cos()
            }
            ReferenceSolution::SinCosh => p.x.sin() * p.y.cosh(),
        }
    }
}

/// One of the built-in domains.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub id: u8,
    /// Interior angle for the families 4 and 5.
    pub angle: Option<f64>,
    pub curve: BoundaryCurve,
    pub corner: CornerData,
    pub reference: Option<ReferenceSolution>,
    pub default_params: ProblemParams,
    pub eval_points: Vec<Vec2>,
}

/// Accepted interior angles for example 4.
pub const EXAMPLE4_RANGE: (f64, f64) = (0.1 * PI, 1.9 * PI);

/// Accepted interior angles for example 5 (open interval).
pub const EXAMPLE5_RANGE: (f64, f64) = (PI, 2.0 * PI);

const RANGE_SLACK: f64 = 1e-12;

/// Builds example `id`. Examples 4 and 5 are families and need `angle`.
pub fn example_problem(id: u8, angle: Option<f64>) -> Result<ProblemSpec> {
    let (curve, reference_beta, params, eval_points): (BoundaryCurve, Option<Option<f64>>, _, _) =
        match (id, angle) {
            (1..=3, Some(_)) => {
                return Err(Error::InvalidArgument(format!(
                    "example {id} has a fixed angle; --phi is not accepted"
                )))
            }
            (4 | 5, None) => {
                return Err(Error::InvalidArgument(format!(
                    "example {id} needs an interior angle"
                )))
            }
            (1, None) => (
                BoundaryCurve::new(Reentrant)?,
                Some(Some(2.0 / 3.0)),
                ProblemParams {
                    delta: 5.16e-8,
                    c: 50.0,
                    epsilon: 1e-3,
                },
                vec![
                    Vec2::new(-0.01, 0.0),
                    Vec2::new(0.0, 0.1),
                    Vec2::new(-0.4, 0.4),
                    Vec2::new(0.4, 0.8),
                ],
            ),
            (2, None) => (
                BoundaryCurve::new(Drop::new())?,
                Some(Some(1.5)),
                ProblemParams {
                    delta: 3.10e-8,
                    c: 1.0,
                    epsilon: 1e-6,
                },
                vec![
                    Vec2::new(0.01, 0.0),
                    Vec2::new(0.1, 0.0),
                    Vec2::new(0.8, 0.6),
                    Vec2::new(0.9, 0.8),
                ],
            ),
            (3, None) => (
                BoundaryCurve::new(Petal {
                    alpha: (1.0 - 0.86) * PI,
                    shift: 0.0,
                })?,
                Some(None),
                ProblemParams {
                    delta: 1.52e-8,
                    c: 500.0,
                    epsilon: 1e-1,
                },
                vec![
                    Vec2::new(0.05, 0.01),
                    Vec2::new(0.2, 0.025),
                    Vec2::new(0.4, 0.05),
                    Vec2::new(0.8, 0.15),
                ],
            ),
            (4, Some(phi)) => {
                let (lo, hi) = EXAMPLE4_RANGE;
                if !(phi >= lo - RANGE_SLACK && phi <= hi + RANGE_SLACK) {
                    return Err(Error::InvalidArgument(format!(
                        "example 4 needs an angle in [0.1π, 1.9π], got {phi}"
                    )));
                }
                (
                    BoundaryCurve::new(Petal {
                        alpha: phi,
                        shift: 0.5,
                    })?,
                    None,
                    family_params(),
                    Vec::new(),
                )
            }
            (5, Some(phi)) => {
                let (lo, hi) = EXAMPLE5_RANGE;
                if !(phi > lo && phi < hi) {
                    return Err(Error::InvalidArgument(format!(
                        "example 5 needs an angle in (π, 2π), got {phi}"
                    )));
                }
                (BoundaryCurve::new(Heart::new(phi))?, None, family_params(), Vec::new())
            }
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown example {id}; expected 1 to 5"
                )))
            }
        };
    let corner = corner_angle(&curve)?;
    let reference = reference_beta.map(|beta| match beta {
        Some(beta) => ReferenceSolution::Power {
            beta,
            center: corner.p0,
            bisector: corner.tangent_out.y.atan2(corner.tangent_out.x) + 0.5 * corner.phi,
        },
        None => ReferenceSolution::SinCosh,
    });
    Ok(ProblemSpec {
        id,
        angle,
        curve,
        corner,
        reference,
        default_params: params,
        eval_points,
    })
}

fn family_params() -> ProblemParams {
    ProblemParams {
        delta: 1e-4,
        c: 200.0,
        epsilon: 1e-1,
    }
}

/// Reference solution of `spec` at `point`.
pub fn reference_solution(spec: &ProblemSpec, point: Vec2) -> Result<f64> {
    spec.reference
        .map(|r| r.eval(point))
        .ok_or_else(|| Error::Unsupported(format!("example {} has no reference solution", spec.id)))
}

impl ProblemSpec {
    /// `ḡ = u|_Σ` for the examples with a reference solution.
    pub fn boundary_data(&self) -> Result<BoundaryData> {
        let r = self
            .reference
            .ok_or_else(|| Error::Unsupported(format!("example {} has no boundary datum", self.id)))?;
        Ok(BoundaryData::from_trace(move |p| r.eval(p)))
    }

    /// Splits the boundary with deviation bound `delta` and builds the kernels.
    pub fn kernels(&self, delta: f64) -> Result<KernelSet> {
        KernelSet::new(split_boundary(&self.curve, delta)?)
    }
}
