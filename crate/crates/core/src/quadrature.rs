//! Lobatto quadrature on `[0, 1]` built on the Jacobi weight `x (1 - x)`.
//!
//! The `m + 2` point rule uses both endpoints plus the `m` zeros of the
//! degree-`m` polynomial orthogonal with respect to `x (1 - x)`. It is exact
//! for polynomials up to degree `2m + 1`.
//!
//! Interior nodes are seeded by the eigenvalues of the Jacobi matrix of the
//! orthonormal recurrence and then polished by Newton's method on the same
//! recurrence. Interior weights are the Gauss–Jacobi weights divided by the
//! weight function at the node.

use std::io::Write;

use crate::error::{Error, Result};

/// Largest accepted number of interior nodes.
pub const MAX_INTERIOR_NODES: usize = 1 << 20;

const NEWTON_MAX_ITER: usize = 50;
const NEWTON_ULPS: f64 = 4.0;
const QL_MAX_ITER: usize = 60;

/// `∫_0^1 x (1 - x) dx`.
const WEIGHT_MASS: f64 = 1.0 / 6.0;

/// An `(m + 2)`-point Lobatto rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    m: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Builds the rule with `m` interior nodes.
    pub fn lobatto(m: usize) -> Result<Self> {
        lobatto_rule(m)
    }

    /// Number of interior nodes.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Total number of nodes, `m + 2`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Iterates `(node, weight)` pairs in ascending node order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// `Σ λ_k f(x_k)`; fails on the first non-finite sample.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, f: F) -> Result<f64> {
        integrate(self, f)
    }

    /// Writes `k,node,weight` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,node,weight")?;
        for (k, (x, w)) in self.iter().enumerate() {
            writeln!(out, "{k},{x:.16e},{w:.16e}")?;
        }
        Ok(())
    }
}

/// Sums `λ_k f(x_k)` over the rule.
pub fn integrate<F: FnMut(f64) -> f64>(rule: &QuadratureRule, mut f: F) -> Result<f64> {
    let mut acc = 0.0;
    for (index, (node, weight)) in rule.iter().enumerate() {
        let value = f(node);
        if !value.is_finite() {
            return Err(Error::NonFiniteEvaluation { index, node, value });
        }
        acc += weight * value;
    }
    Ok(acc)
}

/// Composite application of `rule` over consecutive panels `[b_k, b_{k+1}]`.
///
/// Used for the reference integrals (arc length, Gauss identity checks) where a
/// single global rule is not accurate enough.
pub fn integrate_composite<F: FnMut(f64) -> f64>(
    rule: &QuadratureRule,
    breakpoints: &[f64],
    mut f: F,
) -> f64 {
    breakpoints
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let h = b - a;
            rule.iter().map(|(x, lam)| lam * f(a + h * x)).sum::<f64>() * h
        })
        .sum()
}

/// Off-diagonal entries of the Jacobi matrix for `x (1 - x)` on `[0, 1]`.
///
/// On `[-1, 1]` the Jacobi(1,1) recurrence has zero diagonal and
/// `b_n = sqrt(n (n + 2) / ((2n + 1)(2n + 3)))`; the affine map halves it.
fn recurrence_beta(n: usize) -> f64 {
    let n = n as f64;
    0.5 * (n * (n + 2.0) / ((2.0 * n + 1.0) * (2.0 * n + 3.0))).sqrt()
}

/// Orthonormal `p_m(x)` and `p_m'(x)` together with `Σ_{j<m} p_j(x)^2`.
fn orthonormal_eval(m: usize, x: f64) -> (f64, f64, f64) {
    let mut p_prev = 0.0;
    let mut dp_prev = 0.0;
    let mut p = 1.0 / WEIGHT_MASS.sqrt();
    let mut dp = 0.0;
    let mut christoffel = 0.0;
    let mut beta_prev = 0.0;
    for n in 0..m {
        christoffel += p * p;
        let beta = recurrence_beta(n + 1);
        let p_next = ((x - 0.5) * p - beta_prev * p_prev) / beta;
        let dp_next = (p + (x - 0.5) * dp - beta_prev * dp_prev) / beta;
        p_prev = p;
        dp_prev = dp;
        p = p_next;
        dp = dp_next;
        beta_prev = beta;
    }
    (p, dp, christoffel)
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with Wilkinson
/// shifts. `offdiag[i]` couples rows `i` and `i + 1`; its last entry is ignored.
fn tridiagonal_eigenvalues(mut diag: Vec<f64>, mut offdiag: Vec<f64>) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(diag);
    }
    offdiag.resize(n, 0.0);
    offdiag[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if offdiag[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_ITER {
                return Err(Error::NoConvergence { index: l });
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * offdiag[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + offdiag[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * offdiag[i];
                let b = c * offdiag[i];
                r = f.hypot(g);
                offdiag[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    offdiag[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            offdiag[l] = g;
            offdiag[m] = 0.0;
        }
    }
    diag.sort_by(f64::total_cmp);
    Ok(diag)
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    if m > MAX_INTERIOR_NODES {
        return Err(Error::InvalidArgument(format!(
            "m = {m} exceeds the supported maximum {MAX_INTERIOR_NODES}"
        )));
    }
    Ok(())
}

/// Newton polish of one seed; returns the refined root and the Gauss weight.
fn polish(m: usize, seed: f64) -> (f64, f64) {
    let mut x = seed;
    for _ in 0..NEWTON_MAX_ITER {
        let (p, dp, _) = orthonormal_eval(m, x);
        let step = p / dp;
        if !step.is_finite() {
            break;
        }
        x -= step;
        if step.abs() <= NEWTON_ULPS * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    let (_, _, christoffel) = orthonormal_eval(m, x);
    (x, 1.0 / christoffel)
}

/// Interior nodes and their Gauss–Jacobi(1,1) weights, unsymmetrized.
fn gauss_jacobi11(m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    check_m(m)?;
    let diag = vec![0.5; m];
    let offdiag: Vec<f64> = (1..=m).map(recurrence_beta).collect();
    let seeds = tridiagonal_eigenvalues(diag, offdiag)?;

    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for (k, &seed) in seeds.iter().enumerate() {
        let (x, w) = polish(m, seed);
        // Newton must stay in the seed's basin: strictly inside (0, 1) and
        // ordered after the previous root.
        let lower = nodes.last().copied().unwrap_or(0.0);
        if !(x.is_finite() && w.is_finite() && x > lower && x < 1.0 && w > 0.0) {
            return Err(Error::NoConvergence { index: k + 1 });
        }
        nodes.push(x);
        weights.push(w);
    }
    Ok((nodes, weights))
}

/// Zeros of the degree-`m` orthogonal polynomial for `x (1 - x)` on `[0, 1]`.
pub fn jacobi11_interior_nodes(m: usize) -> Result<Vec<f64>> {
    let (mut nodes, _) = gauss_jacobi11(m)?;
    let mut dummy = vec![0.0; m];
    symmetrize(&mut nodes, &mut dummy);
    Ok(nodes)
}

/// Averages each node/weight with its mirror image about `1/2`.
fn symmetrize(nodes: &mut [f64], weights: &mut [f64]) {
    let n = nodes.len();
    for k in 0..n / 2 {
        let j = n - 1 - k;
        let x = 0.5 * (nodes[k] + (1.0 - nodes[j]));
        let w = 0.5 * (weights[k] + weights[j]);
        nodes[k] = x;
        nodes[j] = 1.0 - x;
        weights[k] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.5;
    }
}

/// The `(m + 2)`-point Lobatto rule on `[0, 1]`.
pub fn lobatto_rule(m: usize) -> Result<QuadratureRule> {
    let (interior, gauss_weights) = gauss_jacobi11(m)?;
    let end_weight = 1.0 / ((m as f64 + 1.0) * (m as f64 + 2.0));

    let mut nodes = Vec::with_capacity(m + 2);
    let mut weights = Vec::with_capacity(m + 2);
    nodes.push(0.0);
    weights.push(end_weight);
    for (&x, &w) in interior.iter().zip(&gauss_weights) {
        nodes.push(x);
        weights.push(w / (x * (1.0 - x)));
    }
    nodes.push(1.0);
    weights.push(end_weight);

    symmetrize(&mut nodes[1..=m], &mut weights[1..=m]);
    Ok(QuadratureRule { m, nodes, weights })
}
