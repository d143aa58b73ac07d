//! Assembly and solution of the Nyström system `A_m a = b`.
//!
//! Unknown `(i, l)`, arc `i ∈ {1, 2, 3}` and node `l ∈ 0..=m+1`, sits at index
//! `(i − 1)(m + 2) + l`. Each row is the collocated equation
//!
//! ```text
//! −π a_{i,l} + (W̃_m a)_i(x_l) + (S_m a)_i(x_l) = ḡ_i(x_l)
//! ```
//!
//! where `S_m` holds the compact parts (the `K^{i,j}` and the cross-arm
//! remainders `M^{1,2}`, `M^{2,1}`) and `W̃_m` the wedge kernel `L` on the two
//! corner arms, replaced by a linear blend for `s` below `c′ = c / m^{2−2ε}`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use log::warn;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{ArcSample, ArcSystem, Vec2};
use crate::kernels::{double_layer, wedge, KernelSet};
use crate::linalg::{norm_inf_vec, DenseMatrix, LuFactorization};
use crate::quadrature::QuadratureRule;

/// Remainder `M` is set to zero when both arguments fall below this.
const MELLIN_CUTOFF: f64 = 1e-10;

const CORNER_DATUM_TOL: f64 = 1e-12;

const GOLDEN_STEPS: usize = 80;

/// Discretization parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Number of interior quadrature nodes per arc.
    pub m: usize,
    pub c: f64,
    pub epsilon: f64,
    /// Apply the near-corner blend. Disabling it leaves the raw `W_m` rows.
    pub modified: bool,
    /// Identify `a_{2,0}` with `a_{1,0}` and average the two corner rows.
    pub constrained: bool,
}

impl SolverConfig {
    pub fn new(m: usize, c: f64, epsilon: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("m must be at least 1".into()));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("c must be positive, got {c}")));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        let config = Self {
            m,
            c,
            epsilon,
            modified: true,
            constrained: false,
        };
        let cp = config.corner_threshold();
        if cp > 1.0 {
            return Err(Error::InvalidArgument(format!(
                "corner threshold c / m^(2-2eps) = {cp} exceeds 1; increase m or decrease c"
            )));
        }
        Ok(config)
    }

    pub fn with_modified(mut self, modified: bool) -> Self {
        self.modified = modified;
        self
    }

    pub fn with_constrained(mut self, constrained: bool) -> Self {
        self.constrained = constrained;
        self
    }

    /// `c′ = c / m^{2−2ε}`.
    pub fn corner_threshold(&self) -> f64 {
        self.c / (self.m as f64).powf(2.0 - 2.0 * self.epsilon)
    }
}

type DatumFn = dyn Fn(usize, f64, Vec2) -> f64 + Send + Sync;

/// Boundary datum `ḡ_i(s)` on the three arcs.
#[derive(Clone)]
pub struct BoundaryData(Arc<DatumFn>);

impl fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("BoundaryData(..)")
    }
}

impl BoundaryData {
    pub fn constant(value: f64) -> Self {
        Self(Arc::new(move |_, _, _| value))
    }

    /// Trace of a function of the plane, `ḡ_i(s) = g(σ_i(s))`.
    pub fn from_trace<F>(g: F) -> Self
    where
        F: Fn(Vec2) -> f64 + Send + Sync + 'static,
    {
        Self(Arc::new(move |_, _, p| g(p)))
    }

    /// Datum given directly in arc coordinates `(i, s)`.
    pub fn per_arc<F>(g: F) -> Self
    where
        F: Fn(usize, f64) -> f64 + Send + Sync + 'static,
    {
        Self(Arc::new(move |i, s, _| g(i, s)))
    }

    pub fn eval(&self, arcs: &ArcSystem, i: usize, s: f64) -> f64 {
        (self.0)(i, s, arcs.arc(i).point(s))
    }
}

/// Kernels, rule and parameters shared by a system and its solution.
#[derive(Debug)]
struct Discretization {
    kset: KernelSet,
    rule: QuadratureRule,
    config: SolverConfig,
    samples: [Vec<ArcSample>; 3],
}

impl Discretization {
    fn n(&self) -> usize {
        self.rule.len()
    }

    /// Coefficients of `(W̃_m + S_m)` applied at `σ_i(s)`, written into `row`
    /// (length `3(m + 2)`, zeroed by the caller).
    fn operator_row(&self, i: usize, s: f64, row: &mut [f64]) {
        let n = self.n();
        let chi = self.kset.chi();
        let nodes = self.rule.nodes();
        let weights = self.rule.weights();
        let target = self.kset.arcs().arc(i).point(s);

        for j in 1..=3 {
            let sign = self.kset.sign(j);
            let cross_arm = matches!((i, j), (1, 2) | (2, 1));
            let block = &mut row[(j - 1) * n..j * n];
            for (h, (entry, source)) in block.iter_mut().zip(&self.samples[j - 1]).enumerate() {
                let x = nodes[h];
                let k = if cross_arm {
                    if x < MELLIN_CUTOFF && s < MELLIN_CUTOFF {
                        0.0
                    } else {
                        sign * double_layer(target, source) - wedge(chi, x, s)
                    }
                } else {
                    sign * double_layer(target, source)
                };
                *entry += weights[h] * k;
            }
        }

        if i == 3 {
            return;
        }
        let j = 3 - i;
        let own_corner = (i - 1) * n;
        let other = (j - 1) * n..j * n;
        let cp = self.config.corner_threshold();
        if self.config.modified && s < cp {
            let f = 1.0 / cp;
            for (h, entry) in row[other].iter_mut().enumerate() {
                *entry += f * s * weights[h] * wedge(chi, nodes[h], cp);
            }
            row[own_corner] += f * (cp - s) * (-chi * PI);
        } else if s == 0.0 {
            row[own_corner] += -chi * PI;
        } else {
            for (h, entry) in row[other].iter_mut().enumerate() {
                *entry += weights[h] * wedge(chi, nodes[h], s);
            }
        }
    }
}

/// The assembled matrix `A_m` and right-hand side `b`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    matrix: DenseMatrix,
    rhs: Vec<f64>,
    g: BoundaryData,
    disc: Arc<Discretization>,
}

/// Builds `A_m` and `b` for the datum `g`.
pub fn assemble(
    kset: &KernelSet,
    rule: &QuadratureRule,
    config: &SolverConfig,
    g: &BoundaryData,
) -> Result<LinearSystem> {
    if rule.m() != config.m {
        return Err(Error::InvalidArgument(format!(
            "rule has m = {} but the configuration asks for m = {}",
            rule.m(),
            config.m
        )));
    }
    let n = rule.len();
    let cp = config.corner_threshold();
    if config.modified && cp <= rule.nodes()[1] {
        warn!(
            "corner threshold {cp:e} does not exceed the first interior node {:e}; only x_0 is blended",
            rule.nodes()[1]
        );
    }
    let samples = [1, 2, 3].map(|i| {
        let arc = kset.arcs().arc(i);
        rule.nodes().iter().map(|&x| arc.sample(x)).collect::<Vec<_>>()
    });
    let disc = Arc::new(Discretization {
        kset: kset.clone(),
        rule: rule.clone(),
        config: *config,
        samples,
    });

    let mut matrix = DenseMatrix::zeros(3 * n);
    matrix.rows_mut_par().enumerate().for_each(|(r, row)| {
        let (i, l) = (r / n + 1, r % n);
        disc.operator_row(i, disc.rule.nodes()[l], row);
        row[r] += -PI;
    });
    for (r, row) in matrix.rows().enumerate() {
        if let Some(c) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEntry {
                i: r / n + 1,
                j: c / n + 1,
                l: r % n,
                h: c % n,
            });
        }
    }

    let arcs = kset.arcs();
    let rhs: Vec<f64> = (0..3 * n)
        .map(|r| g.eval(arcs, r / n + 1, rule.nodes()[r % n]))
        .collect();
    if let Some(r) = rhs.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "boundary datum is not finite at arc {}, node {}",
            r / n + 1,
            r % n
        )));
    }
    let (b1, b2) = (rhs[0], rhs[n]);
    if (b1 - b2).abs() > CORNER_DATUM_TOL * (1.0 + b1.abs().max(b2.abs())) {
        return Err(Error::InvalidArgument(format!(
            "boundary datum is discontinuous at the corner: {b1} vs {b2}"
        )));
    }
    Ok(LinearSystem {
        matrix,
        rhs,
        g: g.clone(),
        disc,
    })
}

impl LinearSystem {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.disc.rule
    }

    pub fn config(&self) -> &SolverConfig {
        &self.disc.config
    }

    pub fn kernels(&self) -> &KernelSet {
        &self.disc.kset
    }

    /// Row/column index of unknown `(i, l)`.
    pub fn index(&self, i: usize, l: usize) -> usize {
        (i - 1) * self.disc.n() + l
    }

    /// Number of nodes `l` (on each corner arm) that fall under the blend.
    pub fn modified_node_count(&self) -> usize {
        if !self.disc.config.modified {
            return 0;
        }
        let cp = self.disc.config.corner_threshold();
        self.disc.rule.nodes().iter().filter(|&&x| x < cp).count()
    }

    /// The matrix and right-hand side actually solved: the full system, or the
    /// corner-constrained reduction with `a_{2,0}` eliminated.
    pub fn effective(&self) -> (DenseMatrix, Vec<f64>) {
        if !self.disc.config.constrained {
            return (self.matrix.clone(), self.rhs.clone());
        }
        let big = self.matrix.n();
        let (keep, drop) = (0, self.disc.n());
        let mut reduced = DenseMatrix::zeros(big - 1);
        let mut rhs = Vec::with_capacity(big - 1);
        let shrink = |c: usize| if c > drop { c - 1 } else { c };
        for r in (0..big).filter(|&r| r != drop) {
            let src: Vec<f64> = if r == keep {
                self.matrix
                    .row(keep)
                    .iter()
                    .zip(self.matrix.row(drop))
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect()
            } else {
                self.matrix.row(r).to_vec()
            };
            let dst = reduced.row_mut(shrink(r));
            for (c, v) in src.into_iter().enumerate() {
                if c == drop {
                    dst[keep] += v;
                } else {
                    dst[shrink(c)] += v;
                }
            }
            rhs.push(if r == keep {
                0.5 * (self.rhs[keep] + self.rhs[drop])
            } else {
                self.rhs[r]
            });
        }
        (reduced, rhs)
    }

    fn expand(&self, x: Vec<f64>) -> Vec<f64> {
        if !self.disc.config.constrained {
            return x;
        }
        let drop = self.disc.n();
        let mut full = x;
        full.insert(drop, full[0]);
        full
    }

    /// Solves the system with partial pivoting.
    pub fn solve(&self) -> Result<NystromSolution> {
        Ok(self.solve_with_condition(false)?.0)
    }

    /// `‖A‖_∞ ‖A⁻¹‖_∞` of the matrix that [`LinearSystem::solve`] uses.
    pub fn condition_inf(&self) -> Result<f64> {
        let (a, _) = self.effective();
        Ok(LuFactorization::new(&a)?.condition_inf())
    }

    /// Solves and, if asked, computes the condition number from the same
    /// factorization.
    pub fn solve_with_condition(&self, condition: bool) -> Result<(NystromSolution, Option<f64>)> {
        let (a, b) = self.effective();
        let lu = LuFactorization::new(&a)?;
        let x = lu.solve(&b);
        let ax = a.mul_vec(&x);
        let residual_inf = ax
            .iter()
            .zip(&b)
            .fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
        let cond = condition.then(|| lu.condition_inf());
        let values = self.expand(x);
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Singular { pivot: k });
        }
        let sol = NystromSolution::new(self, values, residual_inf);
        Ok((sol, cond))
    }

    /// Wraps given nodal values as a solution without solving.
    pub fn solution_from_values(&self, values: Vec<f64>) -> Result<NystromSolution> {
        if values.len() != self.matrix.n() {
            return Err(Error::InvalidArgument(format!(
                "expected {} nodal values, got {}",
                self.matrix.n(),
                values.len()
            )));
        }
        let ax = self.matrix.mul_vec(&values);
        let residual_inf = ax
            .iter()
            .zip(&self.rhs)
            .fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
        Ok(NystromSolution::new(self, values, residual_inf))
    }

    /// `row,col,value` rows with 17 significant digits.
    pub fn write_matrix_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "row,col,value")?;
        for (r, row) in self.matrix.rows().enumerate() {
            for (c, v) in row.iter().enumerate() {
                writeln!(out, "{r},{c},{v:.16e}")?;
            }
        }
        Ok(())
    }

    /// `row,value` rows with 17 significant digits.
    pub fn write_rhs_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "row,value")?;
        for (r, v) in self.rhs.iter().enumerate() {
            writeln!(out, "{r},{v:.16e}")?;
        }
        Ok(())
    }
}

/// Nodal densities `a_{i,l} = ψ̄_{m,i}(x_l)` and what is needed to
/// interpolate them.
#[derive(Debug, Clone)]
pub struct NystromSolution {
    values: Vec<f64>,
    g: BoundaryData,
    disc: Arc<Discretization>,
    /// `‖A a − b‖_∞` of the system that was solved.
    pub residual_inf: f64,
    /// `|a_{1,0} − a_{2,0}|`.
    pub corner_mismatch: f64,
}

impl NystromSolution {
    fn new(sys: &LinearSystem, values: Vec<f64>, residual_inf: f64) -> Self {
        let n = sys.disc.n();
        let corner_mismatch = (values[0] - values[n]).abs();
        Self {
            values,
            g: sys.g.clone(),
            disc: Arc::clone(&sys.disc),
            residual_inf,
            corner_mismatch,
        }
    }

    pub fn nodal_values(&self) -> &[f64] {
        &self.values
    }

    /// `a_{i,0..=m+1}`.
    pub fn arc_values(&self, i: usize) -> &[f64] {
        let n = self.disc.n();
        &self.values[(i - 1) * n..i * n]
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.disc.rule
    }

    pub fn config(&self) -> &SolverConfig {
        &self.disc.config
    }

    pub fn kernels(&self) -> &KernelSet {
        &self.disc.kset
    }

    /// `max |a_{i,l}|`.
    pub fn nodal_norm_inf(&self) -> f64 {
        norm_inf_vec(&self.values)
    }

    /// Nyström interpolant
    /// `ψ̄_{m,i}(s) = −(1/π) [ḡ_i(s) − (W̃_m a)_i(s) − (S_m a)_i(s)]`.
    pub fn interpolate_density(&self, i: usize, s: f64) -> Result<f64> {
        if !(1..=3).contains(&i) {
            return Err(Error::InvalidArgument(format!("arc index {i} not in 1..=3")));
        }
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidArgument(format!("s = {s} outside [0, 1]")));
        }
        Ok(self.interpolate_unchecked(i, s))
    }

    fn interpolate_unchecked(&self, i: usize, s: f64) -> f64 {
        let mut row = vec![0.0; self.values.len()];
        self.disc.operator_row(i, s, &mut row);
        let applied: f64 = row.iter().zip(&self.values).map(|(a, b)| a * b).sum();
        let g = self.g.eval(self.disc.kset.arcs(), i, s);
        -(g - applied) / PI
    }

    /// `‖ψ̄_m‖_∞`: the largest nodal value on each arc, refined by a
    /// golden-section search of the interpolant between the neighbouring nodes.
    pub fn psi_norm_inf(&self) -> f64 {
        let nodes = self.disc.rule.nodes();
        let n = nodes.len();
        let mut best = self.nodal_norm_inf();
        for i in 1..=3 {
            let vals = self.arc_values(i);
            let l = (0..n)
                .max_by(|&a, &b| vals[a].abs().total_cmp(&vals[b].abs()))
                .unwrap_or(0);
            let lo = nodes[l.saturating_sub(1)];
            let hi = nodes[(l + 1).min(n - 1)];
            let f = |s: f64| self.interpolate_unchecked(i, s).abs();
            best = best.max(golden_max(f, lo, hi));
        }
        best
    }
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_STEPS {
        if b - a <= 1e-15 {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(0, 1.0, 0.1).is_err());
        assert!(SolverConfig::new(64, -1.0, 0.1).is_err());
        assert!(SolverConfig::new(64, 1.0, 1.0).is_err());
        assert!(SolverConfig::new(4, 500.0, 0.1).is_err());
        let c = SolverConfig::new(64, 50.0, 1e-3).unwrap();
        let expected = 50.0 / 64f64.powf(2.0 - 2e-3);
        assert_eq!(c.corner_threshold(), expected);
        assert!(c.modified && !c.constrained);
    }

    #[test]
    fn golden_section_finds_peak() {
        let v = golden_max(|x| 1.0 - (x - 0.3) * (x - 0.3), 0.0, 1.0);
        assert!((v - 1.0).abs() < 1e-15);
    }
}
