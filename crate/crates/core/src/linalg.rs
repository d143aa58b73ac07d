//! Dense square matrices, LU with partial pivoting, and condition numbers.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Reciprocal condition estimate below which a matrix counts as singular.
pub const RCOND_SINGULAR: f64 = 1e-14;

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = Self::zeros(n);
        for i in 0..n {
            a[(i, i)] = 1.0;
        }
        a
    }

    /// Builds a matrix from row-major data of length `n²`.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let n = self.n;
        &mut self.data[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n.max(1))
    }

    pub(crate) fn rows_mut_par(&mut self) -> rayon::slice::ChunksExactMut<'_, f64> {
        let n = self.n.max(1);
        self.data.par_chunks_exact_mut(n)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.rows()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        let mut col = vec![0.0; self.n];
        for r in self.rows() {
            for (c, v) in col.iter_mut().zip(r) {
                *c += v.abs();
            }
        }
        col.into_iter().fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "dimension mismatch");
        self.rows()
            .map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Largest absolute entry.
pub fn norm_inf_vec(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `PA = LU` with unit lower `L`, stored in place.
#[derive(Debug, Clone)]
pub struct LuFactorization {
    n: usize,
    lu: Vec<f64>,
    /// `perm[k]` is the original row now at position `k`.
    perm: Vec<usize>,
    norm_1: f64,
    norm_inf: f64,
}

impl LuFactorization {
    /// Factors `a` with partial pivoting. Fails with [`Error::Singular`] on a
    /// zero pivot or when the estimated reciprocal condition number is
    /// below [`RCOND_SINGULAR`].
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        let n = a.n;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == 0.0 {
                return Err(Error::Singular { pivot: k });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let (head, tail) = lu.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..];
            let pivot = pivot_row[k];
            tail.par_chunks_exact_mut(n).for_each(|row| {
                let l = row[k] / pivot;
                row[k] = l;
                if l != 0.0 {
                    for (r, u) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                        *r -= l * u;
                    }
                }
            });
        }
        let f = Self {
            n,
            lu,
            perm,
            norm_1: a.norm_1(),
            norm_inf: a.norm_inf(),
        };
        let rcond = f.rcond_estimate();
        if rcond.is_nan() || rcond < RCOND_SINGULAR {
            let pivot = (0..n)
                .min_by(|&i, &j| f.lu[i * n + i].abs().total_cmp(&f.lu[j * n + j].abs()))
                .unwrap_or(0);
            return Err(Error::Singular { pivot });
        }
        Ok(f)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "dimension mismatch");
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let s: f64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / row[i];
        }
        x
    }

    /// Solves `Aᵀ x = c`.
    pub fn solve_transpose(&self, c: &[f64]) -> Vec<f64> {
        assert_eq!(c.len(), self.n, "dimension mismatch");
        let n = self.n;
        let mut w = c.to_vec();
        // Uᵀ w = c, column-oriented so U is read by rows.
        for k in 0..n {
            let row = &self.lu[k * n..(k + 1) * n];
            w[k] /= row[k];
            let wk = w[k];
            for (wj, u) in w[k + 1..].iter_mut().zip(&row[k + 1..]) {
                *wj -= u * wk;
            }
        }
        // Lᵀ v = w.
        for k in (0..n).rev() {
            let row = &self.lu[k * n..k * n + k];
            let vk = w[k];
            for (wj, l) in w[..k].iter_mut().zip(row) {
                *wj -= l * vk;
            }
        }
        let mut x = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = w[k];
        }
        x
    }

    /// Hager's estimate of `1 / (‖A‖₁ ‖A⁻¹‖₁)`.
    pub fn rcond_estimate(&self) -> f64 {
        let n = self.n;
        if n == 0 {
            return 1.0;
        }
        let mut x = vec![1.0 / n as f64; n];
        let mut est = 0.0;
        for _ in 0..5 {
            let y = self.solve(&x);
            est = y.iter().map(|v| v.abs()).sum::<f64>();
            if !est.is_finite() {
                return 0.0;
            }
            let xi: Vec<f64> = y.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect();
            let z = self.solve_transpose(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.abs()))
                .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= ztx {
                break;
            }
            x.iter_mut().for_each(|v| *v = 0.0);
            x[j] = 1.0;
        }
        if self.norm_1 == 0.0 || est == 0.0 {
            return 0.0;
        }
        1.0 / (self.norm_1 * est)
    }

    /// Exact `‖A⁻¹‖_∞`. Row `i` of `A⁻¹` is `A⁻ᵀ e_i`, so every row sum is
    /// formed inside one task and the result does not depend on scheduling.
    pub fn inverse_norm_inf(&self) -> f64 {
        let n = self.n;
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                self.solve_transpose(&e).iter().map(|v| v.abs()).sum::<f64>()
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `‖A‖_∞ ‖A⁻¹‖_∞`.
    pub fn condition_inf(&self) -> f64 {
        self.norm_inf * self.inverse_norm_inf()
    }
}

/// `‖A‖_∞ ‖A⁻¹‖_∞` with the inverse formed explicitly.
pub fn condition_inf(a: &DenseMatrix) -> Result<f64> {
    Ok(LuFactorization::new(a)?.condition_inf())
}
