//! Small dense and sparse linear algebra kernels.
//!
//! Everything here is sized for the problems of this crate: dense matrices of
//! a few thousand rows at most, banded SPD systems from structured meshes and
//! CSR operators used inside conjugate gradients.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension { expected: rows * cols, found: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `max |A - Aᵀ|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Matrix::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                for k in 0..other.rows {
                    let dst = (i * other.rows + k) * cols + j * other.cols;
                    for (o, b) in out.data[dst..dst + other.cols].iter_mut().zip(other.row(k)) {
                        *o = a * b;
                    }
                }
            }
        }
        out
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.rows).map(|i| x[i] * dot(self.row(i), y)).sum()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Dense Cholesky factor `A = L Lᵀ`; returns `L` (lower triangle, upper zero).
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    let n = a.rows;
    if a.cols != n {
        return Err(Error::Dimension { expected: n, found: a.cols });
    }
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s = a[(i, j)] - dot(&l.row(i)[..j], &l.row(j)[..j]);
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return Err(Error::NotPositiveDefinite { row: i, pivot: s });
                }
                l[(i, i)] = s.sqrt();
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    Ok(l)
}

/// Solves `L Y = B` for every column of `B` in place (`L` lower triangular).
fn forward_solve_rows(l: &Matrix, b: &mut Matrix) {
    let n = l.rows;
    let m = b.cols;
    let mut acc = vec![0.0; m];
    for i in 0..n {
        acc.copy_from_slice(b.row(i));
        for k in 0..i {
            let lik = l[(i, k)];
            if lik != 0.0 {
                for (a, y) in acc.iter_mut().zip(&b.data[k * m..(k + 1) * m]) {
                    *a -= lik * y;
                }
            }
        }
        let d = l[(i, i)];
        for (dst, a) in b.row_mut(i).iter_mut().zip(&acc) {
            *dst = a / d;
        }
    }
}

/// Solves `Lᵀ x = y` for a single vector.
fn backward_solve_transposed(l: &Matrix, y: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut x = y.to_vec();
    for i in (0..n).rev() {
        x[i] /= l[(i, i)];
        let xi = x[i];
        for k in 0..i {
            x[k] -= l[(i, k)] * xi;
        }
    }
    x
}

/// Householder reduction of a symmetric matrix to tridiagonal form,
/// `A = Q T Qᵀ`, with `Q` kept implicitly as a product of reflectors.
struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
    /// `(v, beta)` per step `k`; `v` acts on indices `k+1..n`.
    reflectors: Vec<(Vec<f64>, f64)>,
}

impl Tridiagonal {
    fn reduce(mut a: Matrix) -> Self {
        let n = a.rows;
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n];
        let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
        let mut p = vec![0.0; n];
        for k in 0..n.saturating_sub(2) {
            let m = n - k - 1;
            let mut v: Vec<f64> = (k + 1..n).map(|i| a[(i, k)]).collect();
            let sigma: f64 = v[1..].iter().map(|x| x * x).sum();
            let x0 = v[0];
            let beta;
            let alpha;
            if sigma == 0.0 {
                beta = 0.0;
                alpha = x0;
            } else {
                let mu = (x0 * x0 + sigma).sqrt();
                alpha = if x0 <= 0.0 { mu } else { -mu };
                v[0] = x0 - alpha;
                let vtv = v[0] * v[0] + sigma;
                beta = 2.0 / vtv;
            }
            diag[k] = a[(k, k)];
            off[k] = alpha;
            if beta != 0.0 {
                // p = beta * A22 v ; w = p - (beta/2)(pᵀv) v ; A22 -= v wᵀ + w vᵀ
                for i in 0..m {
                    let row = &a.data[(k + 1 + i) * n + k + 1..(k + 2 + i) * n];
                    p[i] = beta * dot(row, &v);
                }
                let kappa = 0.5 * beta * dot(&p[..m], &v);
                for i in 0..m {
                    p[i] -= kappa * v[i];
                }
                for i in 0..m {
                    let (vi, wi) = (v[i], p[i]);
                    let row = &mut a.data[(k + 1 + i) * n + k + 1..(k + 2 + i) * n];
                    for j in 0..m {
                        row[j] -= vi * p[j] + wi * v[j];
                    }
                }
            }
            reflectors.push((v, beta));
        }
        if n >= 2 {
            diag[n - 2] = a[(n - 2, n - 2)];
            off[n - 2] = a[(n - 1, n - 2)];
        }
        if n >= 1 {
            diag[n - 1] = a[(n - 1, n - 1)];
        }
        Self { diag, off, reflectors }
    }

    /// `z <- Q z`.
    fn back_transform(&self, z: &mut [f64]) {
        for (k, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            if *beta == 0.0 {
                continue;
            }
            let tail = &mut z[k + 1..];
            let s = beta * dot(v, tail);
            for (t, vi) in tail.iter_mut().zip(v) {
                *t -= s * vi;
            }
        }
    }
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (`e[i]` couples `i` and `i+1`), by implicit QL.
/// Returned in nonincreasing order.
pub fn tridiagonal_eigenvalues(d: &[f64], e: &[f64]) -> Result<Vec<f64>> {
    let n = d.len();
    let mut d = d.to_vec();
    let mut e: Vec<f64> = (0..n).map(|i| if i + 1 < n { e[i] } else { 0.0 }).collect();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Eigen("QL iteration did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    Ok(d)
}

/// Solves `(T - shift I) x = b` for tridiagonal `T` by Gaussian elimination
/// with partial pivoting. Zero pivots are replaced by `tiny`.
fn tridiagonal_shifted_solve(d: &[f64], e: &[f64], shift: f64, tiny: f64, b: &mut [f64]) {
    let n = d.len();
    if n == 1 {
        let p = d[0] - shift;
        b[0] /= if p.abs() < tiny { tiny } else { p };
        return;
    }
    // U has diagonal u0, superdiagonals u1, u2.
    let mut u0 = vec![0.0; n];
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; n];
    let mut cur_diag = d[0] - shift;
    let mut cur_sup = e[0];
    for i in 0..n - 1 {
        let sub = e[i];
        let next_diag = d[i + 1] - shift;
        let next_sup = if i + 2 < n { e[i + 1] } else { 0.0 };
        if cur_diag.abs() >= sub.abs() {
            let piv = if cur_diag.abs() < tiny { tiny } else { cur_diag };
            let m = sub / piv;
            u0[i] = piv;
            u1[i] = cur_sup;
            u2[i] = 0.0;
            b[i + 1] -= m * b[i];
            cur_diag = next_diag - m * cur_sup;
            cur_sup = next_sup;
        } else {
            // swap rows i and i+1
            let m = cur_diag / sub;
            u0[i] = sub;
            u1[i] = next_diag;
            u2[i] = next_sup;
            b.swap(i, i + 1);
            b[i + 1] -= m * b[i];
            cur_diag = cur_sup - m * next_diag;
            cur_sup = -m * next_sup;
        }
    }
    u0[n - 1] = if cur_diag.abs() < tiny { tiny } else { cur_diag };
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= u1[i] * b[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * b[i + 2];
        }
        b[i] = s / u0[i];
    }
}

/// Eigenpairs of a symmetric tridiagonal matrix for the given eigenvalues,
/// by inverse iteration with reorthogonalization inside clusters.
fn tridiagonal_eigenvectors(d: &[f64], e: &[f64], values: &[f64]) -> Vec<Vec<f64>> {
    let n = d.len();
    let tnorm = (0..n)
        .map(|i| d[i].abs() + if i + 1 < n { e[i].abs() } else { 0.0 } + if i > 0 { e[i - 1].abs() } else { 0.0 })
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * tnorm;
    let cluster_tol = 1e-3 * tnorm;
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(values.len());
    for (idx, &lambda) in values.iter().enumerate() {
        // deterministic, non-degenerate start vector
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_75 * (idx as f64 + 1.0)).sin())
            .collect();
        let cluster: Vec<usize> =
            (0..idx).filter(|&j| (values[j] - lambda).abs() <= cluster_tol).collect();
        for _ in 0..4 {
            tridiagonal_shifted_solve(d, e, lambda, tiny, &mut x);
            for &j in &cluster {
                let c = dot(&vectors[j], &x);
                for (xi, vi) in x.iter_mut().zip(&vectors[j]) {
                    *xi -= c * vi;
                }
            }
            let nrm = norm2(&x);
            for xi in x.iter_mut() {
                *xi /= nrm;
            }
        }
        vectors.push(x);
    }
    vectors
}

/// All eigenvalues of a dense symmetric matrix, nonincreasing.
pub fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    let t = Tridiagonal::reduce(a.clone());
    tridiagonal_eigenvalues(&t.diag, &t.off)
}

/// The `k` algebraically largest eigenpairs of a dense symmetric matrix.
/// Eigenvalues are nonincreasing; eigenvectors have unit Euclidean norm.
pub fn symmetric_eigen_top(a: &Matrix, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = a.rows;
    if k > n {
        return Err(Error::Dimension { expected: n, found: k });
    }
    let t = Tridiagonal::reduce(a.clone());
    let mut values = tridiagonal_eigenvalues(&t.diag, &t.off)?;
    values.truncate(k);
    let mut vectors = tridiagonal_eigenvectors(&t.diag, &t.off, &values);
    for v in vectors.iter_mut() {
        t.back_transform(v);
    }
    Ok((values, vectors))
}

/// Top-`k` eigenpairs of the symmetric-definite pencil `C b = λ M b`.
///
/// Reduces to a standard problem with the Cholesky factor of `M`. The
/// returned vectors satisfy `bᵢᵀ M bⱼ = δᵢⱼ`.
pub fn generalized_eigen_top(c: &Matrix, m: &Matrix, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = c.rows;
    if m.rows != n || c.cols != n || m.cols != n {
        return Err(Error::Dimension { expected: n, found: m.rows });
    }
    let l = cholesky(m)?;
    let a = reduce_pencil(c, &l);
    let (values, ys) = symmetric_eigen_top(&a, k)?;
    let vectors = ys.iter().map(|y| backward_solve_transposed(&l, y)).collect();
    Ok((values, vectors))
}

/// All eigenvalues of the pencil `C b = λ M b`, nonincreasing.
pub fn generalized_eigenvalues(c: &Matrix, m: &Matrix) -> Result<Vec<f64>> {
    let l = cholesky(m)?;
    symmetric_eigenvalues(&reduce_pencil(c, &l))
}

/// `L⁻¹ C L⁻ᵀ`, symmetrized.
fn reduce_pencil(c: &Matrix, l: &Matrix) -> Matrix {
    let mut x = c.clone();
    forward_solve_rows(l, &mut x); // L⁻¹ C
    let mut a = x.transpose(); // C L⁻ᵀ
    forward_solve_rows(l, &mut a); // L⁻¹ C L⁻ᵀ
    let n = a.rows;
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = s;
            a[(j, i)] = s;
        }
    }
    a
}

/// Symmetric sparse matrix in compressed-row form (both triangles stored).
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds the pattern from per-row column sets, with zero values.
    pub fn from_pattern(rows: &[BTreeSet<usize>]) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for r in rows {
            col_idx.extend(r.iter().copied());
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        Self { n, row_ptr, col_idx, values: vec![0.0; nnz] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    /// Position of entry `(i, j)` in the value array.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let cols = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        cols.binary_search(&j).ok().map(|p| self.row_ptr[i] + p)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |p| self.values[p])
    }

    /// Same pattern, different values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.values.len());
        Self { n: self.n, row_ptr: self.row_ptr.clone(), col_idx: self.col_idx.clone(), values }
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        Self::mul_with(&self.row_ptr, &self.col_idx, &self.values, x, y);
    }

    /// `y = A x` for a matrix sharing this pattern with values `vals`.
    pub fn mul_with_values(&self, vals: &[f64], x: &[f64], y: &mut [f64]) {
        Self::mul_with(&self.row_ptr, &self.col_idx, vals, x, y);
    }

    /// `y += A x` for values `vals` on this pattern.
    pub fn mul_add_with_values(&self, vals: &[f64], x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
            *yi += self.col_idx[s..e].iter().zip(&vals[s..e]).map(|(&j, v)| v * x[j]).sum::<f64>();
        }
    }

    /// `ya += A xb` and `yb += A xa` in one sweep, for symmetric `A` given by
    /// `vals` on this pattern.
    pub fn mul_add_symmetric_pair(&self, vals: &[f64], xa: &[f64], xb: &[f64], ya: &mut [f64], yb: &mut [f64]) {
        for i in 0..self.n {
            let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let (mut sa, mut sb) = (0.0, 0.0);
            for (&j, v) in self.col_idx[s..e].iter().zip(&vals[s..e]) {
                sa += v * xb[j];
                sb += v * xa[j];
            }
            ya[i] += sa;
            yb[i] += sb;
        }
    }

    fn mul_with(row_ptr: &[usize], col_idx: &[usize], vals: &[f64], x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let (s, e) = (row_ptr[i], row_ptr[i + 1]);
            *yi = col_idx[s..e].iter().zip(&vals[s..e]).map(|(&j, v)| v * x[j]).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.col_idx[p])] = self.values[p];
            }
        }
        m
    }

    /// `max |A - Aᵀ|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[p];
                worst = worst.max((self.values[p] - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Half bandwidth `max |i - j|` over stored entries.
    pub fn half_bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|i| self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]].iter().map(move |&j| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    /// Symmetric elimination of the listed unknowns: rows and columns are
    /// zeroed and the diagonal set to one.
    pub fn eliminate(&mut self, fixed: &[bool]) {
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[p];
                if fixed[i] || fixed[j] {
                    self.values[p] = if i == j { 1.0 } else { 0.0 };
                }
            }
        }
    }
}

/// Cholesky factor of a symmetric positive definite band matrix.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    /// row `i` holds `L[i][i-bw..=i]` (left-padded).
    data: Vec<f64>,
}

impl BandCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let bw = a.half_bandwidth();
        let mut f = Self::uninit(a.n(), bw);
        f.refactor(a)?;
        Ok(f)
    }

    /// Empty factor with a fixed bandwidth, for reuse across solves.
    pub fn uninit(n: usize, bw: usize) -> Self {
        Self { n, bw, data: vec![0.0; n * (bw + 1)] }
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Refactors in place for a matrix with the same (or narrower) band.
    pub fn refactor(&mut self, a: &CsrMatrix) -> Result<()> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        self.data.iter_mut().for_each(|v| *v = 0.0);
        let (rp, ci, vals) = (a.row_ptr(), a.col_idx(), a.values());
        for i in 0..n {
            for p in rp[i]..rp[i + 1] {
                let j = ci[p];
                if j <= i {
                    if i - j > bw {
                        return Err(Error::Dimension { expected: bw, found: i - j });
                    }
                    self.data[i * w + (j + bw - i)] = vals[p];
                }
            }
        }
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(bw));
                let len = j - k0;
                let ri = i * w + (k0 + bw - i);
                let rj = j * w + (k0 + bw - j);
                let s = self.data[i * w + (j + bw - i)] - dot(&self.data[ri..ri + len], &self.data[rj..rj + len]);
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite { row: i, pivot: s });
                    }
                    self.data[i * w + bw] = s.sqrt();
                } else {
                    self.data[i * w + (j + bw - i)] = s / self.data[j * w + bw];
                }
            }
        }
        Ok(())
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            let row = &self.data[i * w + (j0 + bw - i)..i * w + bw];
            let s = b[i] - dot(row, &b[j0..i]);
            b[i] = s / self.data[i * w + bw];
        }
        for i in (0..n).rev() {
            b[i] /= self.data[i * w + bw];
            let xi = b[i];
            let j0 = i.saturating_sub(bw);
            let row = &self.data[i * w + (j0 + bw - i)..i * w + bw];
            for (bj, lij) in b[j0..i].iter_mut().zip(row) {
                *bj -= lij * xi;
            }
        }
    }
}

/// Outcome of a conjugate gradient run.
#[derive(Debug, Clone, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
    /// Relative residual after every iteration.
    pub history: Vec<f64>,
}

/// Preconditioned conjugate gradients for an SPD operator.
///
/// `x` holds the initial guess and receives the solution. Stops when
/// `‖b - A x‖ ≤ tol ‖b‖`.
pub fn pcg<A, P>(
    mut apply_a: A,
    mut apply_prec: P,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgReport>
where
    A: FnMut(&[f64], &mut [f64]),
    P: FnMut(&[f64], &mut [f64]),
{
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgReport { iterations: 0, relative_residual: 0.0, history: Vec::new() });
    }
    let mut r = vec![0.0; n];
    apply_a(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z = vec![0.0; n];
    apply_prec(&r, &mut z);
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut history = Vec::new();
    let mut rel = norm2(&r) / bnorm;
    if rel <= tol {
        return Ok(CgReport { iterations: 0, relative_residual: rel, history });
    }
    for it in 1..=max_iter {
        apply_a(&p, &mut q);
        let curvature = dot(&p, &q);
        if curvature <= 0.0 || !curvature.is_finite() {
            return Err(Error::Indefinite { iteration: it, curvature });
        }
        let alpha = rz / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        rel = norm2(&r) / bnorm;
        history.push(rel);
        if rel <= tol {
            // guard against drift of the recursive residual
            apply_a(x, &mut q);
            let true_rel = norm2(&b.iter().zip(&q).map(|(bi, qi)| bi - qi).collect::<Vec<_>>()) / bnorm;
            if true_rel <= tol * 10.0 {
                return Ok(CgReport { iterations: it, relative_residual: true_rel, history });
            }
            for i in 0..n {
                r[i] = b[i] - q[i];
            }
        }
        apply_prec(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, residual: rel })
}

/// Preconditioned MINRES for a symmetric, possibly indefinite operator
/// with a symmetric positive definite preconditioner.
///
/// The convergence test uses the preconditioned residual estimate; the
/// reported residual is the true relative residual `‖b - A x‖ / ‖b‖`.
pub fn minres<A, P>(
    mut apply_a: A,
    mut apply_prec: P,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgReport>
where
    A: FnMut(&[f64], &mut [f64]),
    P: FnMut(&[f64], &mut [f64]),
{
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgReport { iterations: 0, relative_residual: 0.0, history: Vec::new() });
    }
    let mut ax = vec![0.0; n];
    let true_residual = |apply_a: &mut A, x: &[f64], ax: &mut [f64]| {
        apply_a(x, ax);
        let r: Vec<f64> = b.iter().zip(ax.iter()).map(|(bi, ai)| bi - ai).collect();
        norm2(&r) / bnorm
    };
    let mut r1 = vec![0.0; n];
    apply_a(x, &mut r1);
    for (ri, bi) in r1.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut y = vec![0.0; n];
    apply_prec(&r1, &mut y);
    let beta1_sq = dot(&r1, &y);
    if beta1_sq < 0.0 {
        return Err(Error::NotPositiveDefinite { row: 0, pivot: beta1_sq });
    }
    let beta1 = beta1_sq.sqrt();
    if beta1 == 0.0 {
        return Ok(CgReport { iterations: 0, relative_residual: 0.0, history: Vec::new() });
    }
    let mut r2 = r1.clone();
    let (mut oldb, mut beta, mut dbar, mut epsln, mut phibar) = (0.0, beta1, 0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0, 0.0);
    let mut w = vec![0.0; n];
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut history = Vec::new();
    for it in 1..=max_iter {
        let s = 1.0 / beta;
        for (vi, yi) in v.iter_mut().zip(&y) {
            *vi = s * yi;
        }
        apply_a(&v, &mut y);
        if it >= 2 {
            let f = beta / oldb;
            for (yi, ri) in y.iter_mut().zip(&r1) {
                *yi -= f * ri;
            }
        }
        let alfa = dot(&v, &y);
        let f = alfa / beta;
        for (yi, ri) in y.iter_mut().zip(&r2) {
            *yi -= f * ri;
        }
        core::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        apply_prec(&r2, &mut y);
        oldb = beta;
        let beta_sq = dot(&r2, &y);
        if beta_sq < 0.0 {
            return Err(Error::NotPositiveDefinite { row: it, pivot: beta_sq });
        }
        beta = beta_sq.sqrt();
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta);
        if gamma == 0.0 {
            return Err(Error::NoConvergence { iterations: it, residual: phibar / beta1 });
        }
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        let denom = 1.0 / gamma;
        core::mem::swap(&mut w1, &mut w2);
        core::mem::swap(&mut w2, &mut w);
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) * denom;
            x[i] += phi * w[i];
        }
        let est = phibar / beta1;
        history.push(est);
        if est <= tol || beta == 0.0 {
            let rel = true_residual(&mut apply_a, x, &mut ax);
            if rel <= tol * 10.0 || beta == 0.0 {
                return Ok(CgReport { iterations: it, relative_residual: rel, history });
            }
        }
    }
    let rel = true_residual(&mut apply_a, x, &mut ax);
    Err(Error::NoConvergence { iterations: max_iter, residual: rel })
}
