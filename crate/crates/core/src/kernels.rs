//! Double-layer kernels on the three-arc parametrization.
//!
//! `K^{i,j}(t, s)` is the inner-normal derivative of `log|σ_i(s) − σ_j(t)|`
//! with respect to the source point `σ_j(t)`, times `|σ_j'(t)|`. Near the
//! corner the cross-arm kernels `K^{1,2}`, `K^{2,1}` behave like the Mellin
//! wedge kernel `L(t, s)`; their difference `M^{i,j}` stays bounded.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{ArcSample, ArcSystem, Vec2};
use crate::quadrature::{integrate_composite, QuadratureRule};

/// Below this value of both `t` and `s` the remainder `M` is set to zero.
const MELLIN_CUTOFF: f64 = 1e-10;

/// Accepted mismatch of the Gauss identity when fixing arc orientations.
const ORIENTATION_TOL: f64 = 1e-4;

/// Mellin wedge kernel without argument checks.
#[inline]
pub(crate) fn wedge(chi: f64, t: f64, s: f64) -> f64 {
    let (sin, cos) = (chi * PI).sin_cos();
    -s * sin / (s * s + 2.0 * t * s * cos + t * t)
}

/// `L(t, s) = −s sin(χπ) / (s² + 2ts cos(χπ) + t²)`.
pub fn kernel_l(chi: f64, t: f64, s: f64) -> Result<f64> {
    if !(chi.abs() < 1.0 && chi != 0.0) {
        return Err(Error::Domain(format!("chi = {chi} must satisfy 0 < |chi| < 1")));
    }
    if t < 0.0 || s < 0.0 {
        return Err(Error::Domain(format!("L({t}, {s}) needs t, s ≥ 0")));
    }
    if t == 0.0 && s == 0.0 {
        return Err(Error::Domain("L is undefined at (0, 0)".into()));
    }
    Ok(wedge(chi, t, s))
}

/// Interior angle `Ω̄_i(s)` seen from arc `i`.
pub fn omega_bar(chi: f64, i: usize, s: f64) -> f64 {
    if (i == 1 || i == 2) && s == 0.0 {
        (1.0 - chi) * PI
    } else {
        PI
    }
}

/// Raw double-layer kernel from a target point and a source sample.
///
/// Coincident points take the curvature limit of the source arc; this covers
/// the diagonal `i = j, t = s` as well as the smooth junctions between arcs.
#[inline]
pub fn double_layer(target: Vec2, source: &ArcSample) -> f64 {
    let delta = target - source.p;
    let den = delta.norm_sq();
    if den == 0.0 {
        0.5 * source.d2.cross(source.d1) / source.d1.norm_sq()
    } else {
        delta.cross(source.d1) / den
    }
}

/// Arc system, corner exponent and the per-arc orientation signs.
#[derive(Debug, Clone)]
pub struct KernelSet {
    arcs: ArcSystem,
    chi: f64,
    orientation_sign: [f64; 3],
}

impl KernelSet {
    /// Builds the kernel set and fixes the orientation signs so that the
    /// Gauss identity `Σ_j ∫ K^{i,j}(t, s) dt = −Ω̄_i(s)` holds.
    ///
    /// `Σ1` runs against the boundary orientation, so `(−1, +1, +1)` is tried
    /// first; the remaining assignments are tried only if it fails.
    pub fn new(arcs: ArcSystem) -> Result<Self> {
        let chi = arcs.chi();
        let provisional = [
            if arcs.arc(1).follows_orientation() { 1.0 } else { -1.0 },
            if arcs.arc(2).follows_orientation() { 1.0 } else { -1.0 },
            if arcs.arc(3).follows_orientation() { 1.0 } else { -1.0 },
        ];
        let mut kset = KernelSet {
            arcs,
            chi,
            orientation_sign: [1.0; 3],
        };
        // Unsigned partial integrals I[i][j](s) at three points per arc.
        let samples = [0.25, 0.5, 0.75];
        let mut partial = [[[0.0; 3]; 3]; 3];
        for i in 1..=3 {
            for (k, &s) in samples.iter().enumerate() {
                for j in 1..=3 {
                    partial[i - 1][k][j - 1] = kset.graded_integral(i, j, s);
                }
            }
        }
        let passes = |sign: &[f64; 3]| {
            (1..=3).all(|i| {
                samples.iter().enumerate().all(|(k, &s)| {
                    let sum: f64 = (0..3).map(|j| sign[j] * partial[i - 1][k][j]).sum();
                    (sum + omega_bar(chi, i, s)).abs() <= ORIENTATION_TOL
                })
            })
        };
        let candidates = std::iter::once(provisional).chain((0..8u8).map(|bits| {
            let f = |b: u8| if bits & b != 0 { -1.0 } else { 1.0 };
            [f(1), f(2), f(4)]
        }));
        for sign in candidates {
            if passes(&sign) {
                kset.orientation_sign = sign;
                return Ok(kset);
            }
        }
        Err(Error::Orientation(
            "no orientation assignment satisfies the Gauss identity".into(),
        ))
    }

    pub fn arcs(&self) -> &ArcSystem {
        &self.arcs
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn orientation_sign(&self) -> [f64; 3] {
        self.orientation_sign
    }

    /// Sign attached to arc `j ∈ {1, 2, 3}`.
    #[inline]
    pub fn sign(&self, j: usize) -> f64 {
        self.orientation_sign[j - 1]
    }

    /// `K^{i,j}(t, s)`: target `σ_i(s)`, source `σ_j(t)`.
    pub fn kernel_k(&self, i: usize, j: usize, t: f64, s: f64) -> Result<f64> {
        check_arc(i)?;
        check_arc(j)?;
        if i != j && i <= 2 && j <= 2 && t == 0.0 && s == 0.0 {
            return Err(Error::Domain(format!(
                "K^{{{i},{j}}} is undefined at the corner pairing (0, 0)"
            )));
        }
        Ok(self.k_unchecked(i, j, t, s))
    }

    pub(crate) fn k_unchecked(&self, i: usize, j: usize, t: f64, s: f64) -> f64 {
        let target = self.arcs.arc(i).point(s);
        let source = self.arcs.arc(j).sample(t);
        self.sign(j) * double_layer(target, &source)
    }

    /// `M^{i,j}(t, s) = K^{i,j}(t, s) − L(t, s)` for the cross-arm pairs.
    pub fn kernel_m(&self, i: usize, j: usize, t: f64, s: f64) -> Result<f64> {
        if !matches!((i, j), (1, 2) | (2, 1)) {
            return Err(Error::InvalidArgument(format!(
                "M^{{{i},{j}}} is defined only for (1,2) and (2,1)"
            )));
        }
        Ok(self.m_unchecked(i, j, t, s))
    }

    pub(crate) fn m_unchecked(&self, i: usize, j: usize, t: f64, s: f64) -> f64 {
        if t < MELLIN_CUTOFF && s < MELLIN_CUTOFF {
            return 0.0;
        }
        self.k_unchecked(i, j, t, s) - wedge(self.chi, t, s)
    }

    /// `H_i(x, y, t)`: the double-layer kernel of arc `i` at an off-boundary point.
    pub fn kernel_h(&self, i: usize, point: Vec2, t: f64) -> f64 {
        let source = self.arcs.arc(i).sample(t);
        self.sign(i) * double_layer(point, &source)
    }

    /// `Σ_j ∫_0^1 K^{i,j}(t, s) dt`, which should equal `−Ω̄_i(s)`.
    pub fn gauss_row_sum(&self, i: usize, s: f64) -> f64 {
        (1..=3)
            .map(|j| self.sign(j) * self.graded_integral(i, j, s))
            .sum()
    }

    /// Unsigned `∫_0^1 K^{i,j}(t, s) dt` by a composite rule.
    ///
    /// The kernel varies on the parameter scale `|σ_i(s) − σ_j(e)| / |σ_j'(e)|`
    /// near each end `e` of arc `j`, so panels are refined geometrically
    /// towards both ends down to a fraction of that scale. A target that
    /// coincides with an end gets no refinement there: the kernel is smooth
    /// across a junction, and sampling closer would only pick up rounding
    /// noise in the difference of nearly equal points.
    fn graded_integral(&self, i: usize, j: usize, s: f64) -> f64 {
        thread_local! {
            static RULE: QuadratureRule = QuadratureRule::lobatto(10).expect("fixed rule");
        }
        let target = self.arcs.arc(i).point(s);
        let arc = self.arcs.arc(j);
        let scale = |t_end: f64| {
            let d = (target - arc.point(t_end)).norm();
            d / arc.d1(t_end).norm()
        };
        let breaks = graded_breakpoints(s, scale(0.0), scale(1.0));
        RULE.with(|rule| {
            integrate_composite(rule, &breaks, |t| double_layer(target, &arc.sample(t)))
        })
    }
}

/// Uniform panels on `[0, 1]` plus the breakpoint `extra`, refined
/// geometrically towards 0 down to `scale0 / 20` and towards 1 down to
/// `scale1 / 20`. A zero scale means no refinement at that end.
pub(crate) fn graded_breakpoints(extra: f64, scale0: f64, scale1: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = (0..=64).map(|k| k as f64 / 64.0).collect();
    pts.push(extra);
    for k in 7..=60 {
        let h = 0.5f64.powi(k);
        if scale0 > 0.0 && h >= 0.05 * scale0 {
            pts.push(h);
        }
        if scale1 > 0.0 && h >= 0.05 * scale1 {
            pts.push(1.0 - h);
        }
    }
    pts.retain(|&p| (0.0..=1.0).contains(&p));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn check_arc(i: usize) -> Result<()> {
    if (1..=3).contains(&i) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("arc index {i} not in 1..=3")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wedge_kernel_values() {
        assert!((kernel_l(0.5, 1.0, 1.0).unwrap() + 0.5).abs() < 1e-15);
        assert!((kernel_l(-0.5, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(kernel_l(0.3, 2.0, 0.0).unwrap(), 0.0);
        assert!(matches!(kernel_l(0.3, 0.0, 0.0), Err(Error::Domain(_))));
        assert!(kernel_l(0.0, 1.0, 1.0).is_err());
        assert!(kernel_l(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn wedge_kernel_sign_opposes_chi() {
        for &chi in &[-0.9, -0.3, 0.2, 0.86] {
            for &(t, s) in &[(0.1, 0.2), (1.0, 1e-3), (1e-4, 0.5)] {
                let l = kernel_l(chi, t, s).unwrap();
                assert_eq!(l.signum(), -f64::signum(chi));
            }
        }
    }

    #[test]
    fn interior_angle_function() {
        assert!((omega_bar(-0.5, 1, 0.0) - 1.5 * PI).abs() < 1e-15);
        assert_eq!(omega_bar(-0.5, 2, 0.3), PI);
        assert_eq!(omega_bar(0.3, 3, 0.0), PI);
    }

    #[test]
    fn breakpoints_are_sorted_and_bounded() {
        for scale in [0.0, 1e-9, 1.0] {
            let b = graded_breakpoints(0.3, scale, scale);
            assert_eq!(b[0], 0.0);
            assert_eq!(*b.last().unwrap(), 1.0);
            assert!(b.windows(2).all(|w| w[0] < w[1]));
            assert!(b.contains(&0.3));
            let finest = b[1];
            if scale == 1e-9 {
                assert!((0.05e-9..1e-9).contains(&finest));
            } else {
                assert_eq!(finest, 1.0 / 64.0);
            }
        }
    }
}
