//! Stochastic Galerkin discretization in the orthonormal Hermite basis.
//!
//! With `a(x, ε) ≈ Σ_k a_k(x) ψ_k(ε)` and `u ≈ Σ_i u_i(x) ψ_i(ε)`, the
//! coupled system has blocks `K_ij = Σ_k E[ψ_k ψ_i ψ_j] K(a_k)`. Every block
//! is a stiffness matrix for the combined coefficient
//! `c_ij = Σ_k E[ψ_k ψ_i ψ_j] a_k`, which is how they are assembled.
//! Coefficients live at the element quadrature points.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fem::{Assembler, NodalField, QoiKind, StructuredQuadMesh};
use crate::hermite::{
    eval_multivariate, he_orthonormal_all, points_for_degree, tensor_rule, MultiIndex, MultiIndexSet,
};
use crate::kl::KlField;
use crate::linalg::{dot, minres, pcg, BandCholesky, CgReport, CsrMatrix};
use crate::mc::{sample_parameters, SampleSet};
use crate::series::MomentVector;

/// Gauss-Hermite points per dimension for the data projection.
pub const DEFAULT_PROJECTION_POINTS: usize = 20;

/// How the Hermite coefficients of the log-normal coefficient are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionMethod {
    /// Tensor Gauss-Hermite quadrature with this many points per dimension.
    Quadrature { points: usize },
    /// `a_q = e^{μ + ½Σc_n²} Π c_n^{q_n}/√(q_n!)` with `c_n = √λ_n b_n(x)`.
    ClosedForm,
}

impl Default for ProjectionMethod {
    fn default() -> Self {
        ProjectionMethod::Quadrature { points: DEFAULT_PROJECTION_POINTS }
    }
}

/// Hermite expansion of the coefficient, one field per multi-index.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientExpansion {
    index_set: MultiIndexSet,
    /// `a_k` at the element quadrature points.
    coeffs: Vec<Vec<f64>>,
}

impl CoefficientExpansion {
    /// Wraps precomputed coefficient fields given at quadrature points.
    pub fn new(index_set: MultiIndexSet, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        if coeffs.len() != index_set.len() {
            return Err(Error::Dimension { expected: index_set.len(), found: coeffs.len() });
        }
        let nq = coeffs.first().map_or(0, Vec::len);
        if let Some(c) = coeffs.iter().find(|c| c.len() != nq) {
            return Err(Error::Dimension { expected: nq, found: c.len() });
        }
        Ok(Self { index_set, coeffs })
    }

    pub fn index_set(&self) -> &MultiIndexSet {
        &self.index_set
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    /// Deterministic expansion `a ≡ a₀` (zero for every other index).
    pub fn deterministic(index_set: MultiIndexSet, a0: Vec<f64>) -> Self {
        let nq = a0.len();
        let mut coeffs = vec![vec![0.0; nq]; index_set.len()];
        coeffs[0] = a0;
        Self { index_set, coeffs }
    }
}

/// Projects `a(x, ε)` onto the total-degree-`q` Hermite space.
pub fn project_coefficient(field: &KlField, q: usize, method: ProjectionMethod) -> Result<CoefficientExpansion> {
    let index_set = MultiIndexSet::total_degree(field.dim(), q)?;
    let modes = field.scaled_modes_at_quadrature();
    let nq = modes[0].len();
    let coeffs = match method {
        ProjectionMethod::ClosedForm => {
            let mut out = vec![vec![0.0; nq]; index_set.len()];
            let inv_sqrt_fact: Vec<f64> = {
                let mut v = vec![1.0; q + 1];
                for n in 1..=q {
                    v[n] = v[n - 1] / (n as f64).sqrt();
                }
                v
            };
            for x in 0..nq {
                let half_var: f64 = modes.iter().map(|c| c[x] * c[x]).sum::<f64>() * 0.5;
                let scale = (field.mu_gamma() + half_var).exp();
                for (k, idx) in index_set.indices().iter().enumerate() {
                    let mut v = scale;
                    for (c, &p) in modes.iter().zip(&idx.0) {
                        v *= c[x].powi(p as i32) * inv_sqrt_fact[p];
                    }
                    out[k][x] = v;
                }
                out[0][x] += field.a_min();
            }
            out
        }
        ProjectionMethod::Quadrature { points } => {
            if points < q + 2 {
                return Err(Error::Config(alloc::format!(
                    "projection quadrature needs at least q + 2 = {} points per dimension, got {points}",
                    q + 2
                )));
            }
            let rule = tensor_rule(points, field.dim())?;
            let mut out = vec![vec![0.0; nq]; index_set.len()];
            let mut a = Vec::with_capacity(nq);
            let mut basis = vec![0.0; index_set.len()];
            let mut h = vec![vec![0.0; q + 1]; field.dim()];
            for (eps, w) in rule.iter() {
                field.coefficient_at_quadrature_into(eps, &mut a)?;
                hermite_basis_values(&index_set, eps, &mut h, &mut basis);
                for (o, &b) in out.iter_mut().zip(&basis) {
                    let wb = w * b;
                    for (ox, ax) in o.iter_mut().zip(&a) {
                        *ox += wb * ax;
                    }
                }
            }
            out
        }
    };
    Ok(CoefficientExpansion { index_set, coeffs })
}

/// `ψ_k(ε)` for every index of `set`; `h` is per-dimension scratch.
fn hermite_basis_values(set: &MultiIndexSet, eps: &[f64], h: &mut [Vec<f64>], out: &mut [f64]) {
    for (hd, &e) in h.iter_mut().zip(eps) {
        let deg = hd.len() - 1;
        he_orthonormal_all(deg, e, hd);
    }
    for (o, idx) in out.iter_mut().zip(set.indices()) {
        *o = idx.0.iter().zip(h.iter()).map(|(&p, hd)| hd[p]).product();
    }
}

/// `E[ψ_k ψ_i ψ_j]` for `k` in an outer set and `i, j` in an inner set.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleProducts {
    outer: usize,
    inner: usize,
    values: Vec<f64>,
}

impl TripleProducts {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.values[(k * self.inner + i) * self.inner + j]
    }

    pub fn outer_len(&self) -> usize {
        self.outer
    }

    pub fn inner_len(&self) -> usize {
        self.inner
    }
}

/// Triple products by a tensor Gauss-Hermite rule exact for the total
/// degree `deg(outer) + 2 deg(inner)`. Values below `1e-14` are zeroed.
pub fn triple_products(outer: &MultiIndexSet, inner: &MultiIndexSet) -> Result<TripleProducts> {
    if outer.dim() != inner.dim() {
        return Err(Error::Dimension { expected: outer.dim(), found: inner.dim() });
    }
    let points = points_for_degree(outer.degree() + 2 * inner.degree());
    let rule = tensor_rule(points, outer.dim())?;
    let (no, ni) = (outer.len(), inner.len());
    let mut values = vec![0.0; no * ni * ni];
    let max_deg = outer.degree().max(inner.degree());
    let mut h = vec![vec![0.0; max_deg + 1]; outer.dim()];
    let (mut bo, mut bi) = (vec![0.0; no], vec![0.0; ni]);
    for (eps, w) in rule.iter() {
        hermite_basis_values(outer, eps, &mut h, &mut bo);
        hermite_basis_values(inner, eps, &mut h, &mut bi);
        for k in 0..no {
            let wk = w * bo[k];
            for i in 0..ni {
                let wki = wk * bi[i];
                let row = &mut values[(k * ni + i) * ni..(k * ni + i + 1) * ni];
                for (r, bj) in row.iter_mut().zip(&bi) {
                    *r += wki * bj;
                }
            }
        }
    }
    for v in values.iter_mut() {
        if v.abs() < 1e-14 {
            *v = 0.0;
        }
    }
    Ok(TripleProducts { outer: no, inner: ni, values })
}

/// Assembled coupled system with Dirichlet conditions eliminated.
#[derive(Debug, Clone)]
pub struct SgSystem {
    basis: MultiIndexSet,
    pattern: CsrMatrix,
    /// `(i, j, values)` for `i ≤ j`; missing pairs are zero blocks.
    blocks: Vec<(usize, usize, Vec<f64>)>,
    rhs: Vec<f64>,
    boundary: Vec<bool>,
}

impl SgSystem {
    pub fn basis(&self) -> &MultiIndexSet {
        &self.basis
    }

    /// Unknowns per stochastic mode.
    pub fn nodes(&self) -> usize {
        self.pattern.n()
    }

    /// Total unknowns `J_h · |J(p)|`.
    pub fn size(&self) -> usize {
        self.nodes() * self.basis.len()
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Block `(i, j)` as a sparse matrix, `None` if structurally zero.
    pub fn block(&self, i: usize, j: usize) -> Option<CsrMatrix> {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.blocks
            .iter()
            .find(|(bi, bj, _)| *bi == a && *bj == b)
            .map(|(_, _, v)| self.pattern.with_values(v.clone()))
    }

    /// `y = A x` on the full block vector (mode-major layout).
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.nodes();
        y.iter_mut().for_each(|v| *v = 0.0);
        for (i, j, vals) in &self.blocks {
            let (i, j) = (*i, *j);
            if i == j {
                self.pattern.mul_add_with_values(vals, &x[i * n..(i + 1) * n], &mut y[i * n..(i + 1) * n]);
            } else {
                let (lo, hi) = y.split_at_mut(j * n);
                self.pattern.mul_add_symmetric_pair(
                    vals,
                    &x[i * n..(i + 1) * n],
                    &x[j * n..(j + 1) * n],
                    &mut lo[i * n..(i + 1) * n],
                    &mut hi[..n],
                );
            }
        }
    }
}

/// Assembles the SG system for `-∇·(a∇u) = f` with `u = 0` on the boundary.
pub fn assemble_sg_system(
    mesh: &StructuredQuadMesh,
    assembler: &Assembler,
    coeff: &CoefficientExpansion,
    basis: &MultiIndexSet,
    forcing: f64,
) -> Result<SgSystem> {
    let triples = triple_products(coeff.index_set(), basis)?;
    assemble_with_triples(mesh, assembler, coeff, basis, &triples, forcing)
}

/// As [`assemble_sg_system`] with precomputed triple products.
pub fn assemble_with_triples(
    mesh: &StructuredQuadMesh,
    assembler: &Assembler,
    coeff: &CoefficientExpansion,
    basis: &MultiIndexSet,
    triples: &TripleProducts,
    forcing: f64,
) -> Result<SgSystem> {
    if triples.outer_len() != coeff.index_set().len() || triples.inner_len() != basis.len() {
        return Err(Error::Dimension { expected: coeff.index_set().len(), found: triples.outer_len() });
    }
    let nq = coeff.coefficients()[0].len();
    let expected = mesh.num_elements() * crate::fem::QP_PER_ELEMENT;
    if nq != expected {
        return Err(Error::Dimension { expected, found: nq });
    }
    let pattern = assembler.pattern().clone();
    let boundary = mesh.boundary_mask().to_vec();
    let mut blocks = Vec::new();
    let mut c = vec![0.0; nq];
    for i in 0..basis.len() {
        for j in i..basis.len() {
            let active: Vec<(usize, f64)> =
                (0..triples.outer_len()).map(|k| (k, triples.get(k, i, j))).filter(|(_, t)| *t != 0.0).collect();
            if active.is_empty() {
                continue;
            }
            c.iter_mut().for_each(|v| *v = 0.0);
            for &(k, t) in &active {
                for (cv, ak) in c.iter_mut().zip(&coeff.coefficients()[k]) {
                    *cv += t * ak;
                }
            }
            let mut vals = vec![0.0; pattern.nnz()];
            assembler.stiffness_values_into(&c, &mut vals);
            eliminate_block(&pattern, &mut vals, &boundary, i == j);
            blocks.push((i, j, vals));
        }
    }
    let n = mesh.num_nodes();
    let mut rhs = vec![0.0; n * basis.len()];
    for (r, (l, &b)) in rhs.iter_mut().zip(assembler.lumped_mass().iter().zip(&boundary)) {
        *r = if b { 0.0 } else { forcing * l };
    }
    Ok(SgSystem { basis: basis.clone(), pattern, blocks, rhs, boundary })
}

fn eliminate_block(pattern: &CsrMatrix, vals: &mut [f64], fixed: &[bool], diagonal: bool) {
    let (rp, ci) = (pattern.row_ptr(), pattern.col_idx());
    for i in 0..pattern.n() {
        for p in rp[i]..rp[i + 1] {
            let j = ci[p];
            if fixed[i] || fixed[j] {
                vals[p] = if diagonal && i == j { 1.0 } else { 0.0 };
            }
        }
    }
}

/// Krylov method used for the coupled system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KrylovMethod {
    /// Conjugate gradients, switching to MINRES if negative curvature shows
    /// that the truncated expansion made the system indefinite.
    #[default]
    Auto,
    Cg,
    Minres,
}

/// Modes `u_i` of the SG solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SgSolution {
    pub basis: MultiIndexSet,
    pub modes: Vec<NodalField>,
    pub report: CgReport,
    /// Method that produced the solution.
    pub method: KrylovMethod,
    /// Whether conjugate gradients met negative curvature, i.e. the
    /// discrete operator is not coercive.
    pub indefinite: bool,
}

/// Default relative residual target for [`solve_sg`].
pub const DEFAULT_SG_TOL: f64 = 1e-10;

/// Solves the coupled system with the mean block `K_00` as preconditioner
/// on every diagonal block.
pub fn solve_sg(system: &SgSystem, tol: f64, max_iter: usize) -> Result<SgSolution> {
    solve_sg_with(system, tol, max_iter, KrylovMethod::Auto)
}

/// As [`solve_sg`] with an explicit Krylov method.
pub fn solve_sg_with(system: &SgSystem, tol: f64, max_iter: usize, method: KrylovMethod) -> Result<SgSolution> {
    let n = system.nodes();
    let mean = system.block(0, 0).ok_or_else(|| Error::Config("SG system has no mean block".into()))?;
    let factor = BandCholesky::factor(&mean)?;
    let prec = |r: &[f64], z: &mut [f64]| {
        z.copy_from_slice(r);
        for chunk in z.chunks_mut(n) {
            factor.solve_in_place(chunk);
        }
    };
    let apply = |v: &[f64], out: &mut [f64]| system.apply(v, out);
    let mut x = vec![0.0; system.size()];
    let mut indefinite = false;
    let (report, used) = match method {
        KrylovMethod::Cg => (pcg(apply, prec, &system.rhs, &mut x, tol, max_iter)?, KrylovMethod::Cg),
        KrylovMethod::Minres => (minres(apply, prec, &system.rhs, &mut x, tol, max_iter)?, KrylovMethod::Minres),
        KrylovMethod::Auto => match pcg(apply, prec, &system.rhs, &mut x, tol, max_iter) {
            Ok(r) => (r, KrylovMethod::Cg),
            Err(Error::Indefinite { .. }) => {
                indefinite = true;
                x.iter_mut().for_each(|v| *v = 0.0);
                (minres(apply, prec, &system.rhs, &mut x, tol, max_iter)?, KrylovMethod::Minres)
            }
            Err(e) => return Err(e),
        },
    };
    let modes = x
        .chunks(n)
        .map(|c| {
            let mut v = c.to_vec();
            for (vi, &b) in v.iter_mut().zip(&system.boundary) {
                if b {
                    *vi = 0.0;
                }
            }
            NodalField::new(v)
        })
        .collect();
    Ok(SgSolution { basis: system.basis.clone(), modes, report, method: used, indefinite })
}

/// `Q(ε) = Σ_k β_k ψ_k(ε)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QoiPolynomial {
    pub index_set: MultiIndexSet,
    pub beta: Vec<f64>,
    pub kind: QoiKind,
}

impl QoiPolynomial {
    pub fn new(index_set: MultiIndexSet, beta: Vec<f64>, kind: QoiKind) -> Result<Self> {
        if beta.len() != index_set.len() {
            return Err(Error::Dimension { expected: index_set.len(), found: beta.len() });
        }
        if let Some(i) = beta.iter().position(|b| !b.is_finite()) {
            return Err(Error::Range(alloc::format!("coefficient {i} is not finite")));
        }
        Ok(Self { index_set, beta, kind })
    }

    pub fn dim(&self) -> usize {
        self.index_set.dim()
    }

    pub fn evaluate(&self, eps: &[f64]) -> Result<f64> {
        if eps.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: eps.len() });
        }
        let mut h = vec![vec![0.0; self.index_set.degree() + 1]; self.dim()];
        let mut b = vec![0.0; self.index_set.len()];
        hermite_basis_values(&self.index_set, eps, &mut h, &mut b);
        Ok(dot(&self.beta, &b))
    }
}

/// How `∫u²` is mapped to Hermite coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SquareProjection {
    /// `β_k = ∫ u_k²` on the solution's own index set.
    #[default]
    ModeWise,
    /// Galerkin projection of `∫u(·, ε)²` onto the total-degree-`2p` space:
    /// `β_k = Σ_ij E[ψ_k ψ_i ψ_j] ∫ u_i u_j`.
    Exact,
}

/// QoI polynomial of an SG solution. The maximum is not a polynomial
/// functional of the modes and is rejected.
pub fn qoi_polynomial(
    sol: &SgSolution,
    kind: QoiKind,
    assembler: &Assembler,
    square: SquareProjection,
) -> Result<QoiPolynomial> {
    let n = assembler.pattern().n();
    if let Some(m) = sol.modes.iter().find(|m| m.len() != n) {
        return Err(Error::Dimension { expected: n, found: m.len() });
    }
    let mass = assembler.mass();
    match kind {
        QoiKind::Average => {
            let beta = sol.modes.iter().map(|u| dot(assembler.lumped_mass(), &u.values)).collect();
            QoiPolynomial::new(sol.basis.clone(), beta, kind)
        }
        QoiKind::IntegralSquare => match square {
            SquareProjection::ModeWise => {
                let beta = sol.modes.iter().map(|u| dot(&u.values, &mass.mul_vec(&u.values))).collect();
                QoiPolynomial::new(sol.basis.clone(), beta, kind)
            }
            SquareProjection::Exact => {
                let outer = MultiIndexSet::total_degree(sol.basis.dim(), 2 * sol.basis.degree())?;
                let t = triple_products(&outer, &sol.basis)?;
                let mu: Vec<Vec<f64>> = sol.modes.iter().map(|u| mass.mul_vec(&u.values)).collect();
                let p = sol.modes.len();
                let mut gram = vec![0.0; p * p];
                for i in 0..p {
                    for j in 0..p {
                        gram[i * p + j] = dot(&sol.modes[i].values, &mu[j]);
                    }
                }
                let beta = (0..outer.len())
                    .map(|k| (0..p).flat_map(|i| (0..p).map(move |j| (i, j))).map(|(i, j)| t.get(k, i, j) * gram[i * p + j]).sum())
                    .collect();
                QoiPolynomial::new(outer, beta, kind)
            }
        },
        QoiKind::Max => Err(Error::Unsupported(
            "the maximum is not available from an SG solution; use Monte Carlo".into(),
        )),
    }
}

/// `m_l = E[Q^l]` for `l = 1..=l_max` by a tensor rule exact for degree
/// `l_max · p`.
pub fn exact_moments(qoi: &QoiPolynomial, l_max: usize) -> Result<MomentVector> {
    exact_moments_with_points(qoi, l_max, points_for_degree(l_max * qoi.index_set.degree()))
}

/// As [`exact_moments`] with an explicit number of points per dimension.
pub fn exact_moments_with_points(qoi: &QoiPolynomial, l_max: usize, points: usize) -> Result<MomentVector> {
    let rule = tensor_rule(points, qoi.dim())?;
    let mut m = vec![0.0; l_max];
    let mut h = vec![vec![0.0; qoi.index_set.degree() + 1]; qoi.dim()];
    let mut b = vec![0.0; qoi.index_set.len()];
    for (eps, w) in rule.iter() {
        hermite_basis_values(&qoi.index_set, eps, &mut h, &mut b);
        let v = dot(&qoi.beta, &b);
        let mut pw = w;
        for ml in m.iter_mut() {
            pw *= v;
            *ml += pw;
        }
    }
    MomentVector::new(m)
}

/// `count` evaluations of the QoI polynomial at standard normal samples.
pub fn sample_qoi_polynomial(qoi: &QoiPolynomial, count: usize, seed: u64) -> Result<SampleSet> {
    let mut h = vec![vec![0.0; qoi.index_set.degree() + 1]; qoi.dim()];
    let mut b = vec![0.0; qoi.index_set.len()];
    let values = sample_parameters(count, qoi.dim(), seed)
        .iter()
        .map(|eps| {
            hermite_basis_values(&qoi.index_set, eps, &mut h, &mut b);
            dot(&qoi.beta, &b)
        })
        .collect();
    SampleSet::new(values, seed, qoi.kind)
}

/// `ψ_idx(ε)`, re-exported for callers holding a single index.
pub fn basis_value(idx: &MultiIndex, eps: &[f64]) -> Result<f64> {
    eval_multivariate(idx, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{qoi_average, PoissonSolver};
    use crate::kl::CovarianceSpec;

    fn fact(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// `E[h_a h_b h_c]` for orthonormal 1D Hermite polynomials.
    fn triple_1d(a: usize, b: usize, c: usize) -> f64 {
        let sum = a + b + c;
        if sum % 2 == 1 {
            return 0.0;
        }
        let s = sum / 2;
        if s < a || s < b || s < c {
            return 0.0;
        }
        (fact(a) * fact(b) * fact(c)).sqrt() / (fact(s - a) * fact(s - b) * fact(s - c))
    }

    #[test]
    fn triple_products_match_closed_form() {
        let outer = MultiIndexSet::total_degree(2, 5).unwrap();
        let inner = MultiIndexSet::total_degree(2, 4).unwrap();
        let t = triple_products(&outer, &inner).unwrap();
        for (k, ik) in outer.indices().iter().enumerate() {
            for (i, ii) in inner.indices().iter().enumerate() {
                for (j, ij) in inner.indices().iter().enumerate() {
                    let want: f64 = (0..2).map(|d| triple_1d(ik.0[d], ii.0[d], ij.0[d])).product();
                    assert!((t.get(k, i, j) - want).abs() < 1e-12 * (1.0 + want), "{k} {i} {j}");
                }
            }
        }
    }

    fn field(level: usize, sigma: f64) -> (StructuredQuadMesh, KlField) {
        let mesh = StructuredQuadMesh::new(level).unwrap();
        let f = KlField::from_covariance(&mesh, &CovarianceSpec::new(sigma, 0.1).unwrap(), 2, 0.01, 0.0).unwrap();
        (mesh, f)
    }

    #[test]
    fn projections_agree() {
        let (_, f) = field(1, 1.6);
        let a = project_coefficient(&f, 5, ProjectionMethod::ClosedForm).unwrap();
        let b = project_coefficient(&f, 5, ProjectionMethod::default()).unwrap();
        let scale = a.coefficients()[0].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (ca, cb) in a.coefficients().iter().zip(b.coefficients()) {
            for (x, y) in ca.iter().zip(cb) {
                assert!((x - y).abs() < 1e-10 * scale);
            }
        }
        assert!(project_coefficient(&f, 5, ProjectionMethod::Quadrature { points: 6 }).is_err());
    }

    #[test]
    fn zero_index_dominates_for_small_variance() {
        let (_, f) = field(1, 1e-12);
        let a = project_coefficient(&f, 3, ProjectionMethod::ClosedForm).unwrap();
        assert!(a.coefficients()[0].iter().all(|v| (v - 1.01).abs() < 1e-12));
        for c in &a.coefficients()[1..] {
            assert!(c.iter().all(|v| v.abs() < 1e-10));
        }
        let (_, g) = field(1, 0.9);
        let b = project_coefficient(&g, 3, ProjectionMethod::ClosedForm).unwrap();
        assert!(b.coefficients()[0].iter().all(|v| *v >= 1.01));
    }

    #[test]
    fn deterministic_coefficient_decouples() {
        let (mesh, f) = field(1, 1e-9);
        let asm = Assembler::new(&mesh);
        let coeff = project_coefficient(&f, 5, ProjectionMethod::ClosedForm).unwrap();
        let basis = MultiIndexSet::total_degree(2, 4).unwrap();
        let sys = assemble_sg_system(&mesh, &asm, &coeff, &basis, -1.0).unwrap();
        assert_eq!(sys.size(), 15 * mesh.num_nodes());
        let sol = solve_sg(&sys, 1e-12, 500).unwrap();
        let mut det = PoissonSolver::new(&mesh);
        let u = det.solve_qp(&vec![1.01; mesh.num_elements() * 9], -1.0).unwrap();
        for (a, b) in sol.modes[0].values.iter().zip(&u.values) {
            assert!((a - b).abs() < 1e-10);
        }
        for m in &sol.modes[1..] {
            assert!(m.values.iter().all(|v| v.abs() < 1e-10));
        }
        let q = qoi_polynomial(&sol, QoiKind::Average, &asm, SquareProjection::ModeWise).unwrap();
        assert!((q.beta[0] - qoi_average(&u, &asm)).abs() < 1e-12);
        assert!(q.beta[1..].iter().all(|b| b.abs() < 1e-10));
    }

    #[test]
    fn degree_zero_matches_deterministic_assembly() {
        let (mesh, f) = field(0, 0.5);
        let asm = Assembler::new(&mesh);
        let coeff = project_coefficient(&f, 2, ProjectionMethod::ClosedForm).unwrap();
        let basis = MultiIndexSet::total_degree(2, 0).unwrap();
        let sys = assemble_sg_system(&mesh, &asm, &coeff, &basis, -1.0).unwrap();
        let mut k = asm.stiffness(&coeff.coefficients()[0]).unwrap();
        k.eliminate(mesh.boundary_mask());
        let b = sys.block(0, 0).unwrap();
        for (x, y) in b.values().iter().zip(k.values()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_in_forcing() {
        let (mesh, f) = field(1, 0.8);
        let asm = Assembler::new(&mesh);
        let coeff = project_coefficient(&f, 3, ProjectionMethod::ClosedForm).unwrap();
        let basis = MultiIndexSet::total_degree(2, 2).unwrap();
        let s1 = solve_sg(&assemble_sg_system(&mesh, &asm, &coeff, &basis, -1.0).unwrap(), 1e-13, 500).unwrap();
        let s2 = solve_sg(&assemble_sg_system(&mesh, &asm, &coeff, &basis, -2.0).unwrap(), 1e-13, 500).unwrap();
        for (a, b) in s1.modes.iter().zip(&s2.modes) {
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((2.0 * x - y).abs() < 1e-10 * (1.0 + y.abs()));
            }
        }
        assert!(matches!(
            qoi_polynomial(&s1, QoiKind::Max, &asm, SquareProjection::ModeWise),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn polynomial_moments() {
        let set = MultiIndexSet::total_degree(2, 4).unwrap();
        let mut beta = vec![0.0; set.len()];
        beta[0] = 0.3;
        let c = QoiPolynomial::new(set.clone(), beta.clone(), QoiKind::Average).unwrap();
        let m = exact_moments(&c, 6).unwrap();
        for l in 1..=6 {
            assert!((m.get(l) - 0.3f64.powi(l as i32)).abs() < 1e-15);
        }
        beta[0] = 0.0;
        beta[1] = 1.0;
        let g = QoiPolynomial::new(set.clone(), beta, QoiKind::Average).unwrap();
        let m = exact_moments(&g, 6).unwrap();
        for (a, b) in m.as_slice().iter().zip([0.0, 1.0, 0.0, 3.0, 0.0, 15.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let s = sample_qoi_polynomial(&c, 10, 3).unwrap();
        assert!(s.values.iter().all(|&v| v == 0.3));
    }
}
