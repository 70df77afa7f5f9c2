//! Karhunen-Loève discretization of the log-coefficient field.
//!
//! The coefficient is `a(x, ε) = a_min + exp(γ(x, ε))` with the truncated
//! expansion `γ(x, ε) = μ_γ + Σ_n √λ_n b_n(x) ε_n`. The pairs `(λ_n, b_n)`
//! solve the Galerkin eigenproblem `C b = λ M b`, where `C` discretizes the
//! covariance `σ² exp(-(|x₁-x̂₁| + |x₂-x̂₂|)/L)` and `M` is the mass matrix.
//!
//! The kernel is a product of 1D kernels and the Q2 basis is a tensor
//! product, so `C = σ² C₁ ⊗ C₁` and `M = M₁ ⊗ M₁` exactly; the same holds
//! for the element-pair tensor Gauss rule, so the 2D matrix never needs a
//! quadruple loop over element pairs.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fem::{gauss_legendre, lagrange2, StructuredQuadMesh, GAUSS3};
use crate::linalg::{generalized_eigen_top, Matrix};

/// Parameters of the exponential covariance of `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceSpec {
    /// Standard deviation of `γ`.
    pub sigma_gamma: f64,
    /// Correlation length `L`.
    pub corr_length: f64,
}

impl CovarianceSpec {
    pub fn new(sigma_gamma: f64, corr_length: f64) -> Result<Self> {
        if !(sigma_gamma > 0.0) || !sigma_gamma.is_finite() {
            return Err(Error::Config(alloc::format!("sigma_gamma must be positive, got {sigma_gamma}")));
        }
        if !(corr_length > 0.0) || corr_length > core::f64::consts::SQRT_2 {
            return Err(Error::Config(alloc::format!(
                "correlation length must lie in (0, sqrt(2)], got {corr_length}"
            )));
        }
        Ok(Self { sigma_gamma, corr_length })
    }
}

/// `σ² exp(-(|x₁-x̂₁| + |x₂-x̂₂|)/L)`.
pub fn covariance(x: [f64; 2], x_hat: [f64; 2], spec: &CovarianceSpec) -> f64 {
    let d = (x[0] - x_hat[0]).abs() + (x[1] - x_hat[1]).abs();
    spec.sigma_gamma * spec.sigma_gamma * (-d / spec.corr_length).exp()
}

/// `∫₀¹∫₀¹ exp(-|s-t|/L) ds dt`.
pub fn unit_kernel_integral_1d(corr_length: f64) -> f64 {
    let l = corr_length;
    2.0 * l - 2.0 * l * l * (1.0 - (-1.0 / l).exp())
}

const LOCAL_GAUSS_POINTS: usize = 24;

/// How the covariance double integrals are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovarianceQuadrature {
    /// Tensor `3×3` Gauss-Legendre per element, applied to every element
    /// pair, including the diagonal pairs where the kernel has a kink.
    #[default]
    ElementGauss3,
    /// Near machine-precision integrals: off-diagonal element pairs factor
    /// into single integrals and diagonal pairs are split along `s = t`.
    Accurate,
}

impl CovarianceQuadrature {
    pub fn as_str(self) -> &'static str {
        match self {
            CovarianceQuadrature::ElementGauss3 => "gauss3",
            CovarianceQuadrature::Accurate => "accurate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gauss3" => Some(CovarianceQuadrature::ElementGauss3),
            "accurate" => Some(CovarianceQuadrature::Accurate),
            _ => None,
        }
    }
}

/// 1D Galerkin matrix of `exp(-|s-t|/L)` for the quadratic Lagrange basis
/// with `elements` uniform elements on `[0, 1]`.
pub fn covariance_matrix_1d(elements: usize, corr_length: f64, rule: CovarianceQuadrature) -> Result<Matrix> {
    match rule {
        CovarianceQuadrature::ElementGauss3 => Ok(covariance_matrix_1d_gauss3(elements, corr_length)),
        CovarianceQuadrature::Accurate => covariance_matrix_1d_accurate(elements, corr_length),
    }
}

fn covariance_matrix_1d_gauss3(elements: usize, corr_length: f64) -> Matrix {
    let h = 1.0 / elements as f64;
    let n = 2 * elements + 1;
    let mut c = Matrix::zeros(n, n);
    let mut psi = [[0.0; 3]; 3];
    for (q, &(t, _)) in GAUSS3.iter().enumerate() {
        for a in 0..3 {
            psi[q][a] = lagrange2(a, t);
        }
    }
    for e in 0..elements {
        for f in 0..elements {
            let mut local = [[0.0; 3]; 3];
            for (q, &(tq, wq)) in GAUSS3.iter().enumerate() {
                let s = (e as f64 + tq) * h;
                for (r, &(tr, wr)) in GAUSS3.iter().enumerate() {
                    let t = (f as f64 + tr) * h;
                    let k = (-(s - t).abs() / corr_length).exp() * wq * wr * h * h;
                    for a in 0..3 {
                        for b in 0..3 {
                            local[a][b] += k * psi[q][a] * psi[r][b];
                        }
                    }
                }
            }
            for a in 0..3 {
                for b in 0..3 {
                    c[(2 * e + a, 2 * f + b)] += local[a][b];
                }
            }
        }
    }
    c
}

fn covariance_matrix_1d_accurate(elements: usize, corr_length: f64) -> Result<Matrix> {
    let h = 1.0 / elements as f64;
    let l = corr_length;
    let n = 2 * elements + 1;
    let rule = gauss_legendre(LOCAL_GAUSS_POINTS)?;
    // P_a = ∫₀ʰ e^{-u/L} ψ_a(u/h) du ; decay away from the left end
    let mut left = [0.0; 3];
    for a in 0..3 {
        left[a] = rule.iter().map(|&(t, w)| w * h * (-t * h / l).exp() * lagrange2(a, t)).sum();
    }
    // decay away from the right end, by reflection
    let right = [left[2], left[1], left[0]];
    // diagonal block: T[a][b] = ∫₀ʰ ψ_a(u) ∫₀ᵘ e^{-(u-v)/L} ψ_b(v) dv du
    let mut tri = [[0.0; 3]; 3];
    for &(tu, wu) in &rule {
        let u = tu * h;
        for &(tv, wv) in &rule {
            let v = tv * u;
            let k = (-(u - v) / l).exp() * wu * wv * h * u;
            for a in 0..3 {
                for b in 0..3 {
                    tri[a][b] += k * lagrange2(a, tu) * lagrange2(b, v / h);
                }
            }
        }
    }
    let mut c = Matrix::zeros(n, n);
    for e in 0..elements {
        for a in 0..3 {
            for b in 0..3 {
                c[(2 * e + a, 2 * e + b)] += tri[a][b] + tri[b][a];
            }
        }
        for ep in 0..e {
            // s in element e (right), t in element ep (left)
            let gap = (e - ep - 1) as f64 * h;
            let decay = (-gap / l).exp();
            for a in 0..3 {
                for b in 0..3 {
                    let v = left[a] * right[b] * decay;
                    c[(2 * e + a, 2 * ep + b)] += v;
                    c[(2 * ep + b, 2 * e + a)] += v;
                }
            }
        }
    }
    Ok(c)
}

/// 1D quadratic-element mass matrix on `[0, 1]`.
pub fn mass_matrix_1d(elements: usize) -> Matrix {
    let h = 1.0 / elements as f64;
    let local = [[4.0, 2.0, -1.0], [2.0, 16.0, 2.0], [-1.0, 2.0, 4.0]];
    let n = 2 * elements + 1;
    let mut m = Matrix::zeros(n, n);
    for e in 0..elements {
        for a in 0..3 {
            for b in 0..3 {
                m[(2 * e + a, 2 * e + b)] += h * local[a][b] / 30.0;
            }
        }
    }
    m
}

/// Dense covariance Galerkin matrix `C_ij = ∫∫ C_γ(x, x̂) φ_j(x) φ_i(x̂)`,
/// built as `σ² C₁ ⊗ C₁`. With [`CovarianceQuadrature::ElementGauss3`] this
/// equals the element-pair `3×3` tensor Gauss assembly exactly.
pub fn assemble_covariance_matrix(
    mesh: &StructuredQuadMesh,
    spec: &CovarianceSpec,
    rule: CovarianceQuadrature,
) -> Result<Matrix> {
    let c1 = covariance_matrix_1d(mesh.elements_per_side(), spec.corr_length, rule)?;
    let mut c = c1.kron(&c1);
    let s2 = spec.sigma_gamma * spec.sigma_gamma;
    for i in 0..c.rows() {
        c.row_mut(i).iter_mut().for_each(|v| *v *= s2);
    }
    Ok(c)
}

/// Dense mass matrix `M₁ ⊗ M₁` (equal to the assembled Q2 mass matrix).
pub fn dense_mass_matrix(mesh: &StructuredQuadMesh) -> Matrix {
    let m1 = mass_matrix_1d(mesh.elements_per_side());
    m1.kron(&m1)
}

/// Covariance matrix by element-pair tensor Gauss quadrature with `3×3`
/// points per element, for an arbitrary kernel. `O(n_el² · 81²)`; meant for
/// cross-checks on coarse meshes.
pub fn assemble_covariance_matrix_elementwise<K>(mesh: &StructuredQuadMesh, kernel: K) -> Matrix
where
    K: Fn([f64; 2], [f64; 2]) -> f64,
{
    let n = mesh.num_nodes();
    let h = mesh.h();
    let ne = mesh.elements_per_side();
    let mut qp = [[0.0; 2]; 9];
    let mut qw = [0.0; 9];
    let mut phi = [[0.0; 9]; 9];
    for (qy, &(ty, wy)) in GAUSS3.iter().enumerate() {
        for (qx, &(tx, wx)) in GAUSS3.iter().enumerate() {
            let q = qy * 3 + qx;
            qp[q] = [tx, ty];
            qw[q] = wx * wy * h * h;
            for b in 0..3 {
                for a in 0..3 {
                    phi[q][b * 3 + a] = lagrange2(a, tx) * lagrange2(b, ty);
                }
            }
        }
    }
    let origin = |e: usize| [(e % ne) as f64 * h, (e / ne) as f64 * h];
    let mut c = Matrix::zeros(n, n);
    for (e, conn) in mesh.elements().iter().enumerate() {
        let oe = origin(e);
        for (f, conn_f) in mesh.elements().iter().enumerate() {
            let of = origin(f);
            let mut local = [[0.0; 9]; 9];
            for q in 0..9 {
                let x = [oe[0] + qp[q][0] * h, oe[1] + qp[q][1] * h];
                for r in 0..9 {
                    let y = [of[0] + qp[r][0] * h, of[1] + qp[r][1] * h];
                    let k = kernel(x, y) * qw[q] * qw[r];
                    for i in 0..9 {
                        let ki = k * phi[q][i];
                        for j in 0..9 {
                            local[i][j] += ki * phi[r][j];
                        }
                    }
                }
            }
            for i in 0..9 {
                for j in 0..9 {
                    c[(conn[i], conn_f[j])] += local[i][j];
                }
            }
        }
    }
    c
}

/// Top-`n_terms` eigenpairs of `C b = λ M b`, eigenvalues nonincreasing,
/// eigenvectors `M`-orthonormal with the sign convention of
/// [`fix_sign`].
pub fn solve_kl_eigenproblem(c: &Matrix, m: &Matrix, n_terms: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if n_terms == 0 || n_terms > c.rows() {
        return Err(Error::Config(alloc::format!(
            "number of KL terms must lie in 1..={}, got {n_terms}",
            c.rows()
        )));
    }
    let (values, mut vectors) = generalized_eigen_top(c, m, n_terms)?;
    for v in vectors.iter_mut() {
        let norm = m.bilinear(v, v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        fix_sign(v);
    }
    Ok((values, vectors))
}

/// Flips `v` so that its entry of largest magnitude is positive. Among
/// entries within a relative `1e-9` of the largest magnitude the first one
/// decides.
pub fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() >= max * (1.0 - 1e-9)) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Eigenpairs of the 2D pencil built from the 1D pencil `(C₁, M₁)`.
///
/// Products `λ_i λ_j` are ranked nonincreasing. Exact ties (`(i,j)` versus
/// `(j,i)`, equal by symmetry of the square) are broken by taking the mode
/// with the lower-order factor in `x` first. The eigenvector of `(i, j)` is
/// `v_i(y) v_j(x)`.
pub fn separable_eigenpairs(
    mesh: &StructuredQuadMesh,
    spec: &CovarianceSpec,
    n_terms: usize,
    rule: CovarianceQuadrature,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let ne = mesh.elements_per_side();
    let n1 = 2 * ne + 1;
    if n_terms == 0 || n_terms > n1 * n1 {
        return Err(Error::Config(alloc::format!("number of KL terms must lie in 1..={}, got {n_terms}", n1 * n1)));
    }
    let c1 = covariance_matrix_1d(ne, spec.corr_length, rule)?;
    let m1 = mass_matrix_1d(ne);
    // enough 1D modes to cover the requested 2D ones
    let k1 = n_terms.min(n1);
    let (vals1, mut vecs1) = generalized_eigen_top(&c1, &m1, k1)?;
    for v in vecs1.iter_mut() {
        let norm = m1.bilinear(v, v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        fix_sign(v);
    }
    let mut pairs: Vec<(usize, usize)> = (0..k1).flat_map(|i| (0..k1).map(move |j| (i, j))).collect();
    pairs.sort_by(|&(a, b), &(c, d)| {
        let la = vals1[a] * vals1[b];
        let lc = vals1[c] * vals1[d];
        lc.partial_cmp(&la).unwrap_or(core::cmp::Ordering::Equal).then((b, a).cmp(&(d, c)))
    });
    let s2 = spec.sigma_gamma * spec.sigma_gamma;
    let mut values = Vec::with_capacity(n_terms);
    let mut vectors = Vec::with_capacity(n_terms);
    for &(iy, ix) in pairs.iter().take(n_terms) {
        // scale the product last so symmetric pairs tie exactly
        values.push(s2 * (vals1[iy] * vals1[ix]));
        let mut v = vec![0.0; n1 * n1];
        for y in 0..n1 {
            for x in 0..n1 {
                v[y * n1 + x] = vecs1[iy][y] * vecs1[ix][x];
            }
        }
        vectors.push(v);
    }
    Ok((values, vectors))
}

/// Truncated KL representation of the log-normal coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct KlField {
    a_min: f64,
    mu_gamma: f64,
    eigenvalues: Vec<f64>,
    /// Nodal eigenfunctions `b_n`.
    modes: Vec<Vec<f64>>,
    /// `√λ_n b_n` interpolated at the element quadrature points.
    scaled_modes_qp: Vec<Vec<f64>>,
}

impl KlField {
    /// Builds a field from precomputed eigenpairs on `mesh`.
    pub fn new(
        mesh: &StructuredQuadMesh,
        a_min: f64,
        mu_gamma: f64,
        eigenvalues: Vec<f64>,
        modes: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if !(a_min >= 0.0) {
            return Err(Error::Config(alloc::format!("a_min must be nonnegative, got {a_min}")));
        }
        if eigenvalues.len() != modes.len() || eigenvalues.is_empty() {
            return Err(Error::Dimension { expected: eigenvalues.len(), found: modes.len() });
        }
        for w in eigenvalues.windows(2) {
            if w[1] > w[0] {
                return Err(Error::Eigen("KL eigenvalues must be nonincreasing".into()));
            }
        }
        if let Some(&last) = eigenvalues.last() {
            if !(last > 0.0) {
                return Err(Error::Eigen(alloc::format!(
                    "KL eigenvalue {last:e} is not positive; reduce the number of terms"
                )));
            }
        }
        for m in &modes {
            if m.len() != mesh.num_nodes() {
                return Err(Error::Dimension { expected: mesh.num_nodes(), found: m.len() });
            }
        }
        let scaled_modes_qp = eigenvalues
            .iter()
            .zip(&modes)
            .map(|(lam, b)| {
                let s = lam.sqrt();
                mesh.interpolate_at_quadrature(b).into_iter().map(|v| s * v).collect()
            })
            .collect();
        Ok(Self { a_min, mu_gamma, eigenvalues, modes, scaled_modes_qp })
    }

    /// Discretizes the covariance on `mesh` with the default quadrature and
    /// keeps `n_terms` modes.
    pub fn from_covariance(
        mesh: &StructuredQuadMesh,
        spec: &CovarianceSpec,
        n_terms: usize,
        a_min: f64,
        mu_gamma: f64,
    ) -> Result<Self> {
        let (values, vectors) = separable_eigenpairs(mesh, spec, n_terms, CovarianceQuadrature::default())?;
        Self::new(mesh, a_min, mu_gamma, values, vectors)
    }

    /// Stochastic dimension `N`.
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn a_min(&self) -> f64 {
        self.a_min
    }

    pub fn mu_gamma(&self) -> f64 {
        self.mu_gamma
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn modes(&self) -> &[Vec<f64>] {
        &self.modes
    }

    /// `√λ_n b_n(x_q)` at every element quadrature point `x_q`.
    pub fn scaled_modes_at_quadrature(&self) -> &[Vec<f64>] {
        &self.scaled_modes_qp
    }

    fn check_eps(&self, eps: &[f64]) -> Result<()> {
        if eps.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: eps.len() });
        }
        Ok(())
    }

    /// `γ(x_j, ε) = μ_γ + Σ √λ_n b_n(x_j) ε_n` at node `j`.
    pub fn gamma_at_node(&self, node: usize, eps: &[f64]) -> Result<f64> {
        self.check_eps(eps)?;
        Ok(self.mu_gamma
            + self.eigenvalues.iter().zip(&self.modes).zip(eps).map(|((l, b), e)| l.sqrt() * b[node] * e).sum::<f64>())
    }

    /// `a(x_j, ε) = a_min + exp(γ(x_j, ε))` at node `j`.
    pub fn coefficient_at_node(&self, node: usize, eps: &[f64]) -> Result<f64> {
        let g = self.gamma_at_node(node, eps)?;
        lognormal(self.a_min, g)
    }

    /// Coefficient at every element quadrature point, from the interpolated
    /// modes: `a = a_min + exp(μ_γ + Σ √λ_n b_n(x_q) ε_n)`.
    pub fn coefficient_at_quadrature_into(&self, eps: &[f64], out: &mut Vec<f64>) -> Result<()> {
        self.check_eps(eps)?;
        let nq = self.scaled_modes_qp[0].len();
        out.clear();
        out.resize(nq, self.mu_gamma);
        for (mode, e) in self.scaled_modes_qp.iter().zip(eps) {
            for (o, m) in out.iter_mut().zip(mode) {
                *o += m * e;
            }
        }
        for o in out.iter_mut() {
            *o = lognormal(self.a_min, *o)?;
        }
        Ok(())
    }
}

/// Largest exponent accepted before `exp` is considered to overflow.
const MAX_EXPONENT: f64 = 700.0;

fn lognormal(a_min: f64, gamma: f64) -> Result<f64> {
    if !(gamma <= MAX_EXPONENT) {
        return Err(Error::Overflow { exponent: gamma });
    }
    Ok(a_min + gamma.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: f64) -> CovarianceSpec {
        CovarianceSpec::new(s, 0.1).unwrap()
    }

    #[test]
    fn covariance_values() {
        let s = spec(1.0);
        assert_eq!(covariance([0.3, 0.4], [0.3, 0.4], &spec(0.5)), 0.25);
        assert!((covariance([0.0, 0.0], [0.1, 0.0], &s) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(covariance([0.1, 0.9], [0.7, 0.2], &s), covariance([0.7, 0.2], [0.1, 0.9], &s));
        assert!(CovarianceSpec::new(0.0, 0.1).is_err());
        assert!(CovarianceSpec::new(1.0, 1.5).is_err());
    }

    #[test]
    fn one_d_covariance_total_matches_closed_form() {
        for ne in [2, 4, 16] {
            let c = covariance_matrix_1d(ne, 0.1, CovarianceQuadrature::Accurate).unwrap();
            let total: f64 = c.as_slice().iter().sum();
            assert!((total - unit_kernel_integral_1d(0.1)).abs() < 1e-13 * total, "ne={ne}");
            assert!(c.asymmetry() < 1e-16);
        }
    }

    #[test]
    fn gauss3_kronecker_equals_elementwise_assembly() {
        let mesh = StructuredQuadMesh::new(1).unwrap();
        let s = spec(1.3);
        let kron = assemble_covariance_matrix(&mesh, &s, CovarianceQuadrature::ElementGauss3).unwrap();
        let brute = assemble_covariance_matrix_elementwise(&mesh, |x, y| covariance(x, y, &s));
        for (a, b) in kron.as_slice().iter().zip(brute.as_slice()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn kronecker_mass_equals_assembled_mass() {
        let mesh = StructuredQuadMesh::new(1).unwrap();
        let dense = dense_mass_matrix(&mesh);
        let sparse = crate::fem::assemble_mass(&mesh).to_dense();
        for (a, b) in dense.as_slice().iter().zip(sparse.as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn separable_matches_dense_generalized_solve() {
        let mesh = StructuredQuadMesh::new(1).unwrap();
        let s = spec(0.7);
        let rule = CovarianceQuadrature::Accurate;
        let c = assemble_covariance_matrix(&mesh, &s, rule).unwrap();
        let m = dense_mass_matrix(&mesh);
        let (vd, _) = solve_kl_eigenproblem(&c, &m, 6).unwrap();
        let (vs, modes) = separable_eigenpairs(&mesh, &s, 6, rule).unwrap();
        for (a, b) in vd.iter().zip(&vs) {
            assert!((a - b).abs() < 1e-12 * vd[0], "{a} vs {b}");
        }
        for (lam, b) in vs.iter().zip(&modes) {
            let cb = c.mul_vec(b);
            let mb = m.mul_vec(b);
            let r = cb.iter().zip(&mb).map(|(x, y)| (x - lam * y).abs()).fold(0.0, f64::max);
            assert!(r < 1e-12);
            assert!((m.bilinear(b, b) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn field_evaluation() {
        let mesh = StructuredQuadMesh::new(1).unwrap();
        let field = KlField::from_covariance(&mesh, &spec(0.3), 2, 0.01, 0.0).unwrap();
        let node = 40;
        assert_eq!(field.gamma_at_node(node, &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(field.coefficient_at_node(node, &[0.0, 0.0]).unwrap(), 1.01);
        let g = field.gamma_at_node(node, &[1.0, 0.0]).unwrap();
        assert!((g - field.eigenvalues()[0].sqrt() * field.modes()[0][node]).abs() < 1e-15);
        let (e1, e2) = ([0.3, -1.2], [2.0, 0.5]);
        let sum = [e1[0] + e2[0], e1[1] + e2[1]];
        let lhs = field.gamma_at_node(node, &sum).unwrap();
        let rhs = field.gamma_at_node(node, &e1).unwrap() + field.gamma_at_node(node, &e2).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
        assert!(matches!(field.gamma_at_node(node, &[1.0]), Err(Error::Dimension { .. })));
        assert!(matches!(field.coefficient_at_node(node, &[1e6, 1e6]), Err(Error::Overflow { .. })));
    }

    #[test]
    fn coefficient_exceeds_a_min() {
        let mesh = StructuredQuadMesh::new(1).unwrap();
        let field = KlField::from_covariance(&mesh, &spec(2.0), 2, 0.01, 0.0).unwrap();
        let mut out = Vec::new();
        field.coefficient_at_quadrature_into(&[-8.0, 7.5], &mut out).unwrap();
        assert!(out.iter().all(|&a| a > 0.01));
    }
}
