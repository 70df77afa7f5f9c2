//! Probabilist Hermite polynomials and Gauss-Hermite quadrature for the
//! standard Gaussian weight `s(x) = exp(-x²/2)/√(2π)`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::tridiagonal_eigenvalues;

/// Largest polynomial degree accepted by [`he`].
pub const MAX_DEGREE: usize = 40;

/// Largest tensor rule size accepted by [`tensor_rule`].
pub const MAX_TENSOR_NODES: usize = 4_000_000;

fn check_degree(n: usize) -> Result<()> {
    if n > MAX_DEGREE {
        return Err(Error::Range(alloc::format!("Hermite degree {n} exceeds {MAX_DEGREE}")));
    }
    Ok(())
}

/// `He_n(x)` by the three-term recurrence.
pub fn he(n: usize, x: f64) -> Result<f64> {
    check_degree(n)?;
    Ok(he_unchecked(n, x))
}

pub(crate) fn he_unchecked(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return 1.0;
    }
    for k in 1..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `He_0(x), …, He_n(x)`.
pub fn he_all(n: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if n == 0 {
        return;
    }
    out.push(x);
    for k in 1..n {
        let next = x * out[k] - k as f64 * out[k - 1];
        out.push(next);
    }
}

/// `He_n(x)/√(n!)`.
pub fn he_orthonormal(n: usize, x: f64) -> Result<f64> {
    check_degree(n)?;
    Ok(he_orthonormal_unchecked(n, x))
}

/// Orthonormal recurrence `h_{k+1} = (x h_k - √k h_{k-1})/√(k+1)`, which
/// avoids the factorial growth of the monic form.
pub(crate) fn he_orthonormal_unchecked(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, x);
    for k in 1..n {
        let kf = k as f64;
        let next = (x * cur - kf.sqrt() * prev) / (kf + 1.0).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// Orthonormal values `h_0(x), …, h_n(x)` written into `out[..=n]`.
pub fn he_orthonormal_all(n: usize, x: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if n == 0 {
        return;
    }
    out[1] = x;
    for k in 1..n {
        let kf = k as f64;
        out[k + 1] = (x * out[k] - kf.sqrt() * out[k - 1]) / (kf + 1.0).sqrt();
    }
}

/// A multi-index `(p_1, …, p_N)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    pub fn total_degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&p| p == 0)
    }
}

/// Total-degree index set `{p : Σ p_n ≤ p}` in graded lexicographic order:
/// by total degree, then lexicographically descending in the first entry,
/// so for `N = 2` the order is `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), …`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndexSet {
    dim: usize,
    degree: usize,
    indices: Vec<MultiIndex>,
}

impl MultiIndexSet {
    pub fn total_degree(dim: usize, degree: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("stochastic dimension must be at least 1".into()));
        }
        let mut indices = Vec::new();
        for d in 0..=degree {
            let mut cur = vec![0; dim];
            push_compositions(d, 0, &mut cur, &mut indices);
        }
        Ok(Self { dim, degree, indices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn get(&self, k: usize) -> &MultiIndex {
        &self.indices[k]
    }

    pub fn position(&self, idx: &MultiIndex) -> Option<usize> {
        self.indices.iter().position(|m| m == idx)
    }
}

/// Appends all compositions of `remaining` into `cur[pos..]`, first entry largest first.
fn push_compositions(remaining: usize, pos: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
    let n = cur.len();
    if pos == n - 1 {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for k in (0..=remaining).rev() {
        cur[pos] = k;
        push_compositions(remaining - k, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

/// `binomial(n, k)` as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Π_n h_{p_n}(ε_n)` with orthonormal univariate factors.
pub fn eval_multivariate(idx: &MultiIndex, eps: &[f64]) -> Result<f64> {
    if idx.dim() != eps.len() {
        return Err(Error::Dimension { expected: idx.dim(), found: eps.len() });
    }
    for &p in &idx.0 {
        check_degree(p)?;
    }
    Ok(idx.0.iter().zip(eps).map(|(&p, &e)| he_orthonormal_unchecked(p, e)).product())
}

/// Quadrature rule for the (product) standard Gaussian weight.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    dim: usize,
    /// Node coordinates, `dim` per node, node-major.
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.nodes.chunks_exact(self.dim).zip(self.weights.iter().copied())
    }

    /// `Σ w_i g(x_i)`.
    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut g: F) -> f64 {
        self.iter().map(|(x, w)| w * g(x)).sum()
    }
}

/// `n`-point Gauss-Hermite rule for the standard Gaussian weight.
///
/// Nodes are the zeros of `He_n`, found as eigenvalues of the symmetric
/// Jacobi matrix (off-diagonal `√k`) and polished by Newton steps. Weights
/// use `w_i = (n-1)! / (n He_{n-1}(x_i)²)`, evaluated in orthonormal form
/// as `1 / (n h_{n-1}(x_i)²)`.
pub fn gauss_hermite(n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::Config("Gauss-Hermite rule needs at least one point".into()));
    }
    check_degree(n)?;
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n).map(|k| (k as f64).sqrt()).collect();
    let mut nodes = tridiagonal_eigenvalues(&diag, &off)?;
    nodes.reverse();
    let nf = n as f64;
    for x in nodes.iter_mut() {
        // Newton on h_n, with h_n' = √n h_{n-1}
        for _ in 0..3 {
            let hn = he_orthonormal_unchecked(n, *x);
            let dh = nf.sqrt() * he_orthonormal_unchecked(n - 1, *x);
            if dh == 0.0 {
                break;
            }
            let step = hn / dh;
            *x -= step;
            if step.abs() < 1e-16 * (1.0 + x.abs()) {
                break;
            }
        }
    }
    // exact symmetry about the origin
    for i in 0..n / 2 {
        let m = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -m;
        nodes[n - 1 - i] = m;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let h = he_orthonormal_unchecked(n - 1, x);
            1.0 / (nf * h * h)
        })
        .collect();
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Eigen("non-finite Gauss-Hermite weight".into()));
    }
    Ok(QuadratureRule { dim: 1, nodes, weights })
}

/// Tensor product of the `n`-point Gauss-Hermite rule in `dim` dimensions.
/// The last coordinate varies fastest.
pub fn tensor_rule(n: usize, dim: usize) -> Result<QuadratureRule> {
    if dim == 0 {
        return Err(Error::Config("tensor rule dimension must be at least 1".into()));
    }
    let size = (n as f64).powi(dim as i32);
    if size > MAX_TENSOR_NODES as f64 {
        return Err(Error::Config(alloc::format!(
            "tensor rule with {n}^{dim} nodes exceeds the limit of {MAX_TENSOR_NODES}"
        )));
    }
    let base = gauss_hermite(n)?;
    let total = size as usize;
    let mut nodes = Vec::with_capacity(total * dim);
    let mut weights = Vec::with_capacity(total);
    let mut digits = vec![0usize; dim];
    for _ in 0..total {
        let mut w = 1.0;
        for &d in &digits {
            nodes.push(base.nodes[d]);
            w *= base.weights[d];
        }
        weights.push(w);
        for k in (0..dim).rev() {
            digits[k] += 1;
            if digits[k] < n {
                break;
            }
            digits[k] = 0;
        }
    }
    Ok(QuadratureRule { dim, nodes, weights })
}

/// Points per dimension that integrate a polynomial of total degree `g`
/// exactly: `⌈(g+1)/2⌉`.
pub fn points_for_degree(g: usize) -> usize {
    g / 2 + 1
}
