//! Boundary curves with a single corner and their split into three arcs.
//!
//! A [`BoundaryCurve`] is a closed counterclockwise parametrization on
//! `[0, 1]` whose only corner sits at `t = 0 ≡ 1`. [`split_boundary`] cuts it
//! into `Σ1` (ending at the corner, parametrized outward from it), `Σ2`
//! (starting at the corner) and `Σ3` (the rest), each reparametrized over
//! `[0, 1]`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_composite, QuadratureRule};

/// A point or vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> Self {
        self * (1.0 / self.norm())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl From<(f64, f64)> for Vec2 {
    fn from((x, y): (f64, f64)) -> Self {
        Vec2::new(x, y)
    }
}

/// A closed parametric curve on `[0, 1]` with first and second derivatives.
pub trait ParametricCurve: Send + Sync {
    fn point(&self, t: f64) -> Vec2;
    fn d1(&self, t: f64) -> Vec2;
    fn d2(&self, t: f64) -> Vec2;

    /// `point(1 - u)`. Override when a closed form keeps relative accuracy
    /// for tiny `u`; the kernels difference points a few ulps from the corner.
    fn point_near_end(&self, u: f64) -> Vec2 {
        self.point(1.0 - u)
    }
}

type CurveFn = Box<dyn Fn(f64) -> Vec2 + Send + Sync>;

/// A [`ParametricCurve`] assembled from three closures.
pub struct FnCurve {
    point: CurveFn,
    d1: CurveFn,
    d2: CurveFn,
}

impl FnCurve {
    pub fn new<P, D1, D2>(point: P, d1: D1, d2: D2) -> Self
    where
        P: Fn(f64) -> Vec2 + Send + Sync + 'static,
        D1: Fn(f64) -> Vec2 + Send + Sync + 'static,
        D2: Fn(f64) -> Vec2 + Send + Sync + 'static,
    {
        Self {
            point: Box::new(point),
            d1: Box::new(d1),
            d2: Box::new(d2),
        }
    }
}

impl ParametricCurve for FnCurve {
    fn point(&self, t: f64) -> Vec2 {
        (self.point)(t)
    }
    fn d1(&self, t: f64) -> Vec2 {
        (self.d1)(t)
    }
    fn d2(&self, t: f64) -> Vec2 {
        (self.d2)(t)
    }
}

const VALIDATION_SAMPLES: usize = 1024;

/// A validated closed, regular, counterclockwise boundary with its corner at `t = 0`.
#[derive(Clone)]
pub struct BoundaryCurve {
    inner: Arc<dyn ParametricCurve>,
}

impl fmt::Debug for BoundaryCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryCurve")
            .field("start", &self.point(0.0))
            .finish_non_exhaustive()
    }
}

impl BoundaryCurve {
    /// Wraps and validates a curve: closed, regular on a sample grid, and
    /// counterclockwise.
    pub fn new<C: ParametricCurve + 'static>(curve: C) -> Result<Self> {
        Self::from_arc(Arc::new(curve))
    }

    pub fn from_arc(inner: Arc<dyn ParametricCurve>) -> Result<Self> {
        let curve = Self { inner };
        let start = curve.point(0.0);
        let end = curve.point(1.0);
        let scale = (0..=16)
            .map(|k| (curve.point(k as f64 / 16.0) - start).norm())
            .fold(0.0, f64::max)
            .max(1.0);
        if (end - start).norm() > 1e-12 * scale {
            return Err(Error::InvalidGeometry(format!(
                "curve is not closed: |σ(1) - σ(0)| = {:e}",
                (end - start).norm()
            )));
        }
        for k in 0..=VALIDATION_SAMPLES {
            let t = k as f64 / VALIDATION_SAMPLES as f64;
            let d = curve.d1(t);
            if !(d.is_finite() && d.norm() > 0.0) {
                return Err(Error::InvalidGeometry(format!(
                    "parametrization is not regular at t = {t}"
                )));
            }
        }
        let area = curve.signed_area();
        if area.is_nan() || area <= 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "curve must be counterclockwise (signed area {area:e})"
            )));
        }
        Ok(curve)
    }

    pub fn point(&self, t: f64) -> Vec2 {
        self.inner.point(t)
    }

    pub fn d1(&self, t: f64) -> Vec2 {
        self.inner.d1(t)
    }

    pub fn d2(&self, t: f64) -> Vec2 {
        self.inner.d2(t)
    }

    pub fn point_near_end(&self, u: f64) -> Vec2 {
        self.inner.point_near_end(u)
    }

    /// `½ ∮ (x dy − y dx)` by composite quadrature.
    pub fn signed_area(&self) -> f64 {
        0.5 * fine_integral(0.0, 1.0, |t| {
            let p = self.point(t);
            p.cross(self.d1(t))
        })
    }

    pub fn arc_length(&self) -> f64 {
        fine_integral(0.0, 1.0, |t| self.d1(t).norm())
    }
}

/// Composite 12-point Lobatto over 256 panels; plenty for smooth integrands.
pub(crate) fn fine_integral<F: FnMut(f64) -> f64>(a: f64, b: f64, f: F) -> f64 {
    thread_local! {
        static RULE: QuadratureRule = QuadratureRule::lobatto(10).expect("fixed rule");
    }
    let panels = 256;
    let breaks: Vec<f64> = (0..=panels)
        .map(|k| a + (b - a) * k as f64 / panels as f64)
        .collect();
    RULE.with(|rule| integrate_composite(rule, &breaks, f))
}

/// Geometry of the single corner `P0 = σ(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerData {
    pub p0: Vec2,
    /// Interior angle, measured through the domain.
    pub phi: f64,
    /// `phi = (1 − chi) π`.
    pub chi: f64,
    /// Unit tangent leaving the corner, `σ'(0⁺)`.
    pub tangent_out: Vec2,
    /// Unit tangent arriving at the corner, `σ'(1⁻)`.
    pub tangent_in: Vec2,
}

const SMOOTH_TOL: f64 = 1e-9;

/// Interior angle at `σ(0)` of a counterclockwise curve.
pub fn corner_angle(curve: &BoundaryCurve) -> Result<CornerData> {
    let d_out = curve.d1(0.0);
    let d_in = curve.d1(1.0);
    if !(d_out.norm() > 0.0 && d_in.norm() > 0.0) {
        return Err(Error::InvalidGeometry(
            "one-sided tangent at the corner vanishes".into(),
        ));
    }
    let tangent_out = d_out.normalized();
    let tangent_in = d_in.normalized();
    // Turning angle from the incoming to the outgoing direction; the interior
    // lies to the left, so a left turn shrinks the interior angle.
    let turning = tangent_in.cross(tangent_out).atan2(tangent_in.dot(tangent_out));
    let phi = PI - turning;
    if (phi - PI).abs() <= SMOOTH_TOL {
        return Err(Error::SmoothPoint {
            phi,
            tol: SMOOTH_TOL,
        });
    }
    if !(phi > 0.0 && phi < 2.0 * PI) {
        return Err(Error::InvalidGeometry(format!(
            "interior angle {phi} outside (0, 2π)"
        )));
    }
    Ok(CornerData {
        p0: curve.point(0.0),
        phi,
        chi: 1.0 - phi / PI,
        tangent_out,
        tangent_in,
    })
}

/// Which side of the corner an arm lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CornerEnd {
    /// `t ∈ [0, length]`, the arm leaving the corner.
    Start,
    /// `t ∈ [1 − length, 1]`, the arm arriving at the corner.
    End,
}

const DEVIATION_SAMPLES: usize = 256;

/// Maximum perpendicular offset of an arm from the one-sided corner tangent.
pub fn tangent_deviation(curve: &BoundaryCurve, endpoint: CornerEnd, length: f64) -> Result<f64> {
    if !(length > 0.0 && length <= 0.5) {
        return Err(Error::InvalidArgument(format!(
            "arm length {length} must lie in (0, 1/2]"
        )));
    }
    let p0 = curve.point(0.0);
    let (tangent, sample): (Vec2, Box<dyn Fn(f64) -> Vec2>) = match endpoint {
        CornerEnd::Start => (
            curve.d1(0.0).normalized(),
            Box::new(|u: f64| curve.point(u)),
        ),
        CornerEnd::End => (
            curve.d1(1.0).normalized(),
            Box::new(|u: f64| curve.point_near_end(u)),
        ),
    };
    let mut worst: f64 = 0.0;
    for k in 0..=DEVIATION_SAMPLES {
        let u = length * k as f64 / DEVIATION_SAMPLES as f64;
        let offset = tangent.cross(sample(u) - p0).abs();
        if !offset.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "non-finite curve sample near the corner (offset {u})"
            )));
        }
        worst = worst.max(offset);
    }
    Ok(worst)
}

/// How a sub-arc maps `s ∈ [0, 1]` onto the global parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
enum ArcMap {
    /// `t = 1 − len·s`: starts at the corner and runs against the orientation.
    Backward { len: f64 },
    /// `t = t0 + len·s`; when `end_from_back` is set, `s = 1` is evaluated as
    /// `point_near_end(end_from_back)` so the junction matches `Σ1(1)` bitwise.
    Forward {
        t0: f64,
        len: f64,
        end_from_back: Option<f64>,
    },
}

/// Position and derivatives of an arc at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcSample {
    pub p: Vec2,
    pub d1: Vec2,
    pub d2: Vec2,
}

/// One of the three arcs `σ_i : [0, 1] → Σ_i`.
#[derive(Debug, Clone)]
pub struct SubArc {
    curve: BoundaryCurve,
    map: ArcMap,
}

impl SubArc {
    pub fn point(&self, s: f64) -> Vec2 {
        match self.map {
            ArcMap::Backward { len } => self.curve.point_near_end(len * s),
            ArcMap::Forward {
                t0,
                len,
                end_from_back,
            } => match end_from_back {
                Some(u) if s == 1.0 => self.curve.point_near_end(u),
                _ => self.curve.point(t0 + len * s),
            },
        }
    }

    pub fn d1(&self, s: f64) -> Vec2 {
        match self.map {
            ArcMap::Backward { len } => self.curve.d1(1.0 - len * s) * (-len),
            ArcMap::Forward { t0, len, .. } => self.curve.d1(t0 + len * s) * len,
        }
    }

    pub fn d2(&self, s: f64) -> Vec2 {
        match self.map {
            ArcMap::Backward { len } => self.curve.d2(1.0 - len * s) * (len * len),
            ArcMap::Forward { t0, len, .. } => self.curve.d2(t0 + len * s) * (len * len),
        }
    }

    pub fn sample(&self, s: f64) -> ArcSample {
        ArcSample {
            p: self.point(s),
            d1: self.d1(s),
            d2: self.d2(s),
        }
    }

    /// Whether the parametrization follows the global counterclockwise orientation.
    pub fn follows_orientation(&self) -> bool {
        matches!(self.map, ArcMap::Forward { .. })
    }

    pub fn arc_length(&self) -> f64 {
        fine_integral(0.0, 1.0, |s| self.d1(s).norm())
    }
}

/// The three arcs `Σ1`, `Σ2`, `Σ3` plus corner data.
#[derive(Debug, Clone)]
pub struct ArcSystem {
    arcs: [SubArc; 3],
    pub corner: CornerData,
    /// Global parameter length taken by `Σ1` (at the end of `[0, 1]`).
    pub a: f64,
    /// Global parameter length taken by `Σ2` (at the start of `[0, 1]`).
    pub b: f64,
    /// Requested deviation bound.
    pub delta_requested: f64,
    /// Largest tangent deviation of the two corner arms.
    pub delta: f64,
    curve: BoundaryCurve,
}

impl ArcSystem {
    /// Arc `i ∈ {1, 2, 3}`.
    pub fn arc(&self, i: usize) -> &SubArc {
        &self.arcs[i - 1]
    }

    pub fn arcs(&self) -> &[SubArc; 3] {
        &self.arcs
    }

    pub fn curve(&self) -> &BoundaryCurve {
        &self.curve
    }

    pub fn chi(&self) -> f64 {
        self.corner.chi
    }
}

const SEARCH_LEVELS: i32 = 60;
const BISECTION_STEPS: usize = 40;

/// Largest arm length with deviation ≤ `delta`: dyadic scan, then bisection.
///
/// The bisection only ever moves the passing end onto a length that was
/// evaluated and passed, so a non-monotone deviation still yields an
/// admissible (if conservative) length.
fn admissible_length(delta: f64, dev: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut failing: Option<f64> = None;
    let mut passing = None;
    for k in 1..=SEARCH_LEVELS {
        let len = 0.5f64.powi(k);
        if dev(len)? <= delta {
            passing = Some(len);
            break;
        }
        failing = Some(len);
    }
    let mut lo = passing.ok_or_else(|| {
        Error::InvalidArgument(format!(
            "tangent deviation bound {delta:e} is not achievable by any arm length ≥ 2^-{SEARCH_LEVELS}"
        ))
    })?;
    if let Some(mut hi) = failing {
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if dev(mid)? <= delta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    Ok(lo)
}

/// Splits `curve` into the three arcs with corner arms within `delta` of
/// their tangents.
///
/// The two arms are finally trimmed to equal length at the corner
/// (`a |σ'(1)| = b |σ'(0)|`): the wedge kernel assumes both arms advance at
/// the same speed away from `P0`.
pub fn split_boundary(curve: &BoundaryCurve, delta: f64) -> Result<ArcSystem> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "delta must be positive and finite, got {delta}"
        )));
    }
    let corner = corner_angle(curve)?;
    let dev_start = |len: f64| tangent_deviation(curve, CornerEnd::Start, len);
    let dev_end = |len: f64| tangent_deviation(curve, CornerEnd::End, len);

    let b_max = admissible_length(delta, dev_start)?;
    let a_max = admissible_length(delta, dev_end)?;

    let speed_out = curve.d1(0.0).norm();
    let speed_in = curve.d1(1.0).norm();
    let reach = (a_max * speed_in).min(b_max * speed_out);
    let (mut a, mut b) = (reach / speed_in, reach / speed_out);
    let mut guard = 0;
    while dev_end(a)? > delta || dev_start(b)? > delta {
        a *= 0.5;
        b *= 0.5;
        guard += 1;
        if guard > SEARCH_LEVELS {
            return Err(Error::InvalidArgument(format!(
                "could not balance arm lengths within deviation {delta:e}"
            )));
        }
    }
    if a + b >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "delta {delta:e} leaves no room for the third arc (a + b = {})",
            a + b
        )));
    }
    let achieved = dev_end(a)?.max(dev_start(b)?);

    let arcs = [
        SubArc {
            curve: curve.clone(),
            map: ArcMap::Backward { len: a },
        },
        SubArc {
            curve: curve.clone(),
            map: ArcMap::Forward {
                t0: 0.0,
                len: b,
                end_from_back: None,
            },
        },
        SubArc {
            curve: curve.clone(),
            map: ArcMap::Forward {
                t0: b,
                len: 1.0 - a - b,
                end_from_back: Some(a),
            },
        },
    ];
    Ok(ArcSystem {
        arcs,
        corner,
        a,
        b,
        delta_requested: delta,
        delta: achieved,
        curve: curve.clone(),
    })
}
