//! Structured bi-quadratic (Q2) finite elements on the unit square.
//!
//! The coarse grid has 2×2 elements; every refinement level halves the
//! element size. Nodes are numbered lexicographically, `node = iy * n1d + ix`,
//! and local element nodes follow the same tensor ordering `b * 3 + a`. Each
//! Q2 basis function is a product `ψ_a(x) ψ_b(y)` of 1D quadratic Lagrange
//! functions, which the KL module relies on.
//!
//! Element integrals use 3×3 Gauss-Legendre quadrature.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{BandCholesky, CsrMatrix};

/// Largest supported refinement level (memory guard).
pub const MAX_REFINEMENT: usize = 6;

/// Gauss-Legendre points and weights on `[0, 1]`, 3 points.
pub(crate) const GAUSS3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

/// `n`-point Gauss-Legendre rule mapped to `[0, 1]`, as `(point, weight)`.
pub fn gauss_legendre(n: usize) -> Result<Vec<(f64, f64)>> {
    if n == 0 {
        return Err(Error::Config("Gauss-Legendre rule needs at least one point".into()));
    }
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n).map(|k| k as f64 / ((4 * k * k - 1) as f64).sqrt()).collect();
    let mut x = crate::linalg::tridiagonal_eigenvalues(&diag, &off)?;
    x.reverse();
    let mut rule = Vec::with_capacity(n);
    for xi in x.iter_mut() {
        // Newton polish on P_n, then w = 2 / ((1 - x²) P_n'(x)²) on [-1, 1]
        let mut dp = 1.0;
        for _ in 0..3 {
            let (p, d) = legendre_with_derivative(n, *xi);
            dp = d;
            *xi -= p / d;
        }
        let w = 2.0 / ((1.0 - *xi * *xi) * dp * dp);
        rule.push((0.5 * (*xi + 1.0), 0.5 * w));
    }
    Ok(rule)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// Quadrature points per element.
pub const QP_PER_ELEMENT: usize = 9;

/// 1D quadratic Lagrange basis on `[0, 1]` with nodes 0, ½, 1.
#[inline]
pub fn lagrange2(a: usize, t: f64) -> f64 {
    match a {
        0 => 2.0 * (t - 0.5) * (t - 1.0),
        1 => -4.0 * t * (t - 1.0),
        _ => 2.0 * t * (t - 0.5),
    }
}

#[inline]
pub fn lagrange2_deriv(a: usize, t: f64) -> f64 {
    match a {
        0 => 4.0 * t - 3.0,
        1 => 4.0 - 8.0 * t,
        _ => 4.0 * t - 1.0,
    }
}

/// Q2 mesh of the unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredQuadMesh {
    refinement_level: usize,
    elements_per_side: usize,
    nodes_per_side: usize,
    nodes: Vec<[f64; 2]>,
    elements: Vec<[usize; 9]>,
    boundary: Vec<bool>,
}

impl StructuredQuadMesh {
    /// Coarse 2×2 grid refined `refinement_level` times by midpoint refinement.
    pub fn new(refinement_level: usize) -> Result<Self> {
        if refinement_level > MAX_REFINEMENT {
            return Err(Error::Config(alloc::format!(
                "refinement level {refinement_level} exceeds the limit {MAX_REFINEMENT}"
            )));
        }
        let ne = 2usize << refinement_level;
        let n1d = 2 * ne + 1;
        let h = 1.0 / (n1d - 1) as f64;
        let mut nodes = Vec::with_capacity(n1d * n1d);
        let mut boundary = Vec::with_capacity(n1d * n1d);
        for iy in 0..n1d {
            for ix in 0..n1d {
                // exact endpoints; interior coordinates as integer ratios
                nodes.push([ix as f64 * h, iy as f64 * h]);
                boundary.push(ix == 0 || iy == 0 || ix == n1d - 1 || iy == n1d - 1);
            }
        }
        for p in nodes.iter_mut() {
            for c in p.iter_mut() {
                if (*c - 1.0).abs() < 1e-15 {
                    *c = 1.0;
                }
            }
        }
        let mut elements = Vec::with_capacity(ne * ne);
        for ey in 0..ne {
            for ex in 0..ne {
                let mut conn = [0; 9];
                for b in 0..3 {
                    for a in 0..3 {
                        conn[b * 3 + a] = (2 * ey + b) * n1d + 2 * ex + a;
                    }
                }
                elements.push(conn);
            }
        }
        Ok(Self { refinement_level, elements_per_side: ne, nodes_per_side: n1d, nodes, elements, boundary })
    }

    pub fn refinement_level(&self) -> usize {
        self.refinement_level
    }

    /// Total number of nodes `J_h`.
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn elements_per_side(&self) -> usize {
        self.elements_per_side
    }

    pub fn nodes_per_side(&self) -> usize {
        self.nodes_per_side
    }

    /// Element edge length.
    pub fn h(&self) -> f64 {
        1.0 / self.elements_per_side as f64
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 9]] {
        &self.elements
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary[node]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes()).filter(|&i| self.boundary[i]).collect()
    }

    /// Index of the node closest to the domain center.
    pub fn center_node(&self) -> usize {
        let mid = self.nodes_per_side / 2;
        mid * self.nodes_per_side + mid
    }

    /// Lower-left corner of element `e`.
    fn element_origin(&self, e: usize) -> [f64; 2] {
        let ne = self.elements_per_side;
        let h = self.h();
        [(e % ne) as f64 * h, (e / ne) as f64 * h]
    }

    /// Physical coordinates of every element quadrature point, element-major,
    /// `QP_PER_ELEMENT` per element in the order `qy * 3 + qx`.
    pub fn quadrature_points(&self) -> Vec<[f64; 2]> {
        let h = self.h();
        let mut pts = Vec::with_capacity(self.num_elements() * QP_PER_ELEMENT);
        for e in 0..self.num_elements() {
            let [x0, y0] = self.element_origin(e);
            for (ty, _) in GAUSS3 {
                for (tx, _) in GAUSS3 {
                    pts.push([x0 + tx * h, y0 + ty * h]);
                }
            }
        }
        pts
    }

    /// Interpolates a nodal field at every element quadrature point
    /// (same layout as [`quadrature_points`](Self::quadrature_points)).
    pub fn interpolate_at_quadrature(&self, field: &[f64]) -> Vec<f64> {
        let tab = ReferenceTables::build();
        let mut out = Vec::with_capacity(self.num_elements() * QP_PER_ELEMENT);
        for conn in &self.elements {
            for q in 0..QP_PER_ELEMENT {
                out.push((0..9).map(|i| tab.phi[q][i] * field[conn[i]]).sum());
            }
        }
        out
    }

    /// Sparsity pattern of Q2 operators on this mesh.
    pub fn pattern(&self) -> CsrMatrix {
        let mut rows = vec![BTreeSet::new(); self.num_nodes()];
        for conn in &self.elements {
            for &i in conn {
                for &j in conn {
                    rows[i].insert(j);
                }
            }
        }
        CsrMatrix::from_pattern(&rows)
    }
}

/// Reference-element tables on `[0,1]²` at the 3×3 Gauss points.
#[derive(Debug, Clone)]
struct ReferenceTables {
    /// `phi[q][i]`: basis `i` at point `q`.
    phi: [[f64; 9]; QP_PER_ELEMENT],
    /// Quadrature weights (sum to one).
    weight: [f64; QP_PER_ELEMENT],
    /// `grad_products[q][i*9+j] = w_q ∇φ_i·∇φ_j` on the reference square.
    grad_products: [[f64; 81]; QP_PER_ELEMENT],
}

impl ReferenceTables {
    fn build() -> Self {
        let mut phi = [[0.0; 9]; QP_PER_ELEMENT];
        let mut weight = [0.0; QP_PER_ELEMENT];
        let mut grad_products = [[0.0; 81]; QP_PER_ELEMENT];
        for (qy, &(ty, wy)) in GAUSS3.iter().enumerate() {
            for (qx, &(tx, wx)) in GAUSS3.iter().enumerate() {
                let q = qy * 3 + qx;
                weight[q] = wx * wy;
                let mut grads = [[0.0; 2]; 9];
                for b in 0..3 {
                    for a in 0..3 {
                        let i = b * 3 + a;
                        phi[q][i] = lagrange2(a, tx) * lagrange2(b, ty);
                        grads[i] = [lagrange2_deriv(a, tx) * lagrange2(b, ty), lagrange2(a, tx) * lagrange2_deriv(b, ty)];
                    }
                }
                for i in 0..9 {
                    for j in 0..9 {
                        grad_products[q][i * 9 + j] =
                            weight[q] * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                    }
                }
            }
        }
        Self { phi, weight, grad_products }
    }
}

/// Per-mesh assembly helper: CSR pattern plus element-to-CSR scatter map.
#[derive(Debug, Clone)]
pub struct Assembler {
    pattern: CsrMatrix,
    scatter: Vec<[usize; 81]>,
    /// `M·1`, i.e. `∫φ_i`.
    lumped_mass: Vec<f64>,
    mass: CsrMatrix,
    tables: alloc::boxed::Box<ReferenceTables>,
}

impl Assembler {
    pub fn new(mesh: &StructuredQuadMesh) -> Self {
        let pattern = mesh.pattern();
        let scatter: Vec<[usize; 81]> = mesh
            .elements()
            .iter()
            .map(|conn| {
                let mut s = [0; 81];
                for i in 0..9 {
                    for j in 0..9 {
                        s[i * 9 + j] = pattern.position(conn[i], conn[j]).expect("pattern covers element");
                    }
                }
                s
            })
            .collect();
        let tab = alloc::boxed::Box::new(ReferenceTables::build());
        let h2 = mesh.h() * mesh.h();
        let mut local = [0.0; 81];
        for q in 0..QP_PER_ELEMENT {
            for i in 0..9 {
                for j in 0..9 {
                    local[i * 9 + j] += h2 * tab.weight[q] * tab.phi[q][i] * tab.phi[q][j];
                }
            }
        }
        let mut vals = vec![0.0; pattern.nnz()];
        for s in &scatter {
            for k in 0..81 {
                vals[s[k]] += local[k];
            }
        }
        let mass = pattern.with_values(vals);
        let lumped_mass = mass.mul_vec(&vec![1.0; mesh.num_nodes()]);
        Self { pattern, scatter, lumped_mass, mass, tables: tab }
    }

    pub fn pattern(&self) -> &CsrMatrix {
        &self.pattern
    }

    /// Consistent mass matrix `M_ij = ∫ φ_i φ_j`.
    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    /// `M 1`.
    pub fn lumped_mass(&self) -> &[f64] {
        &self.lumped_mass
    }

    /// Stiffness values (in pattern order) for a coefficient given at every
    /// element quadrature point.
    pub fn stiffness_values_into(&self, coeff_qp: &[f64], out: &mut [f64]) {
        let tab = &self.tables;
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut local = [0.0; 81];
        for (e, s) in self.scatter.iter().enumerate() {
            local.iter_mut().for_each(|v| *v = 0.0);
            let a = &coeff_qp[e * QP_PER_ELEMENT..(e + 1) * QP_PER_ELEMENT];
            for q in 0..QP_PER_ELEMENT {
                let aq = a[q];
                for (l, g) in local.iter_mut().zip(&tab.grad_products[q]) {
                    *l += aq * g;
                }
            }
            for k in 0..81 {
                out[s[k]] += local[k];
            }
        }
    }

    /// Stiffness matrix for a coefficient given at quadrature points.
    pub fn stiffness(&self, coeff_qp: &[f64]) -> Result<CsrMatrix> {
        let expected = self.scatter.len() * QP_PER_ELEMENT;
        if coeff_qp.len() != expected {
            return Err(Error::Dimension { expected, found: coeff_qp.len() });
        }
        let mut vals = vec![0.0; self.pattern.nnz()];
        self.stiffness_values_into(coeff_qp, &mut vals);
        Ok(self.pattern.with_values(vals))
    }

    /// Load vector for a constant forcing `f`: `F_i = f ∫φ_i`.
    pub fn load(&self, f: f64) -> Vec<f64> {
        self.lumped_mass.iter().map(|m| f * m).collect()
    }
}

/// Mass matrix of the mesh.
pub fn assemble_mass(mesh: &StructuredQuadMesh) -> CsrMatrix {
    Assembler::new(mesh).mass
}

/// Evaluates `coeff` at every quadrature point and checks coercivity.
pub fn coefficient_at_quadrature<F: Fn([f64; 2]) -> f64>(mesh: &StructuredQuadMesh, coeff: F) -> Result<Vec<f64>> {
    mesh.quadrature_points()
        .into_iter()
        .map(|p| {
            let a = coeff(p);
            if a > 0.0 && a.is_finite() {
                Ok(a)
            } else {
                Err(Error::Coercivity { value: a, x: p[0], y: p[1] })
            }
        })
        .collect()
}

/// Stiffness matrix `K_ij = ∫ a ∇φ_i·∇φ_j` for a pointwise coefficient.
pub fn assemble_stiffness<F: Fn([f64; 2]) -> f64>(mesh: &StructuredQuadMesh, coeff: F) -> Result<CsrMatrix> {
    let a = coefficient_at_quadrature(mesh, coeff)?;
    Assembler::new(mesh).stiffness(&a)
}

/// Discrete solution values at the mesh nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    pub values: Vec<f64>,
}

impl NodalField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn constant(mesh: &StructuredQuadMesh, c: f64) -> Self {
        Self { values: vec![c; mesh.num_nodes()] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Deterministic Poisson solver: reuses the mesh assembly data and a
/// band Cholesky workspace across solves.
#[derive(Debug, Clone)]
pub struct PoissonSolver {
    assembler: Assembler,
    boundary: Vec<bool>,
    factor: BandCholesky,
    values: Vec<f64>,
}

impl PoissonSolver {
    pub fn new(mesh: &StructuredQuadMesh) -> Self {
        let assembler = Assembler::new(mesh);
        let bw = assembler.pattern.half_bandwidth();
        let factor = BandCholesky::uninit(mesh.num_nodes(), bw);
        let nnz = assembler.pattern.nnz();
        Self { assembler, boundary: mesh.boundary_mask().to_vec(), factor, values: vec![0.0; nnz] }
    }

    pub fn assembler(&self) -> &Assembler {
        &self.assembler
    }

    /// Solves `-∇·(a∇u) = f`, `u = 0` on the boundary, with `a` given at the
    /// element quadrature points.
    pub fn solve_qp(&mut self, coeff_qp: &[f64], f: f64) -> Result<NodalField> {
        let expected = self.assembler.scatter.len() * QP_PER_ELEMENT;
        if coeff_qp.len() != expected {
            return Err(Error::Dimension { expected, found: coeff_qp.len() });
        }
        if let Some(q) = coeff_qp.iter().position(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::Coercivity { value: coeff_qp[q], x: f64::NAN, y: f64::NAN });
        }
        self.assembler.stiffness_values_into(coeff_qp, &mut self.values);
        let mut k = self.assembler.pattern.with_values(core::mem::take(&mut self.values));
        k.eliminate(&self.boundary);
        let res = self.factor.refactor(&k);
        self.values = k.values().to_vec();
        res?;
        let mut u = self.assembler.load(f);
        for (ui, &b) in u.iter_mut().zip(&self.boundary) {
            if b {
                *ui = 0.0;
            }
        }
        self.factor.solve_in_place(&mut u);
        for (ui, &b) in u.iter_mut().zip(&self.boundary) {
            if b {
                *ui = 0.0;
            }
        }
        Ok(NodalField { values: u })
    }
}

/// Solves the Poisson problem with a pointwise coefficient and constant forcing.
pub fn solve_poisson<F: Fn([f64; 2]) -> f64>(mesh: &StructuredQuadMesh, coeff: F, f: f64) -> Result<NodalField> {
    let a = coefficient_at_quadrature(mesh, coeff)?;
    PoissonSolver::new(mesh).solve_qp(&a, f)
}

/// Which scalar functional of the solution to extract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QoiKind {
    /// `(1/|D|) ∫ u`.
    Average,
    /// `∫ u²`.
    IntegralSquare,
    /// Maximum over nodal values.
    Max,
}

impl QoiKind {
    pub fn as_str(self) -> &'static str {
        match self {
            QoiKind::Average => "average",
            QoiKind::IntegralSquare => "integral_square",
            QoiKind::Max => "max",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "average" => Some(QoiKind::Average),
            "integral_square" => Some(QoiKind::IntegralSquare),
            "max" => Some(QoiKind::Max),
            _ => None,
        }
    }
}

fn check_len(u: &NodalField, mesh: &StructuredQuadMesh) -> Result<()> {
    if u.len() != mesh.num_nodes() {
        return Err(Error::Dimension { expected: mesh.num_nodes(), found: u.len() });
    }
    Ok(())
}

/// `(1/|D|) ∫ u = 1ᵀ M u` (the domain has unit area).
pub fn qoi_average(u: &NodalField, assembler: &Assembler) -> f64 {
    crate::linalg::dot(assembler.lumped_mass(), &u.values)
}

/// `∫ u² = uᵀ M u`.
pub fn qoi_integral_square(u: &NodalField, assembler: &Assembler) -> f64 {
    let mu = assembler.mass().mul_vec(&u.values);
    crate::linalg::dot(&mu, &u.values)
}

/// Maximum nodal value; element-interior extrema are not searched.
pub fn qoi_max(u: &NodalField) -> f64 {
    u.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Evaluates the requested QoI.
pub fn qoi(kind: QoiKind, u: &NodalField, mesh: &StructuredQuadMesh, assembler: &Assembler) -> Result<f64> {
    check_len(u, mesh)?;
    Ok(match kind {
        QoiKind::Average => qoi_average(u, assembler),
        QoiKind::IntegralSquare => qoi_integral_square(u, assembler),
        QoiKind::Max => qoi_max(u),
    })
}

/// `∫ (u - v)²` for two fields on the same mesh.
pub fn l2_difference(u: &NodalField, v: &NodalField, assembler: &Assembler) -> f64 {
    let d: Vec<f64> = u.values.iter().zip(&v.values).map(|(a, b)| a - b).collect();
    let md = assembler.mass().mul_vec(&d);
    crate::linalg::dot(&md, &d).max(0.0).sqrt()
}

/// Evaluates a nodal field at an arbitrary point of the unit square.
pub fn evaluate_at(mesh: &StructuredQuadMesh, field: &[f64], p: [f64; 2]) -> f64 {
    let ne = mesh.elements_per_side();
    let h = mesh.h();
    let ex = ((p[0] / h) as usize).min(ne - 1);
    let ey = ((p[1] / h) as usize).min(ne - 1);
    let tx = p[0] / h - ex as f64;
    let ty = p[1] / h - ey as f64;
    let conn = &mesh.elements()[ey * ne + ex];
    let mut s = 0.0;
    for b in 0..3 {
        for a in 0..3 {
            s += lagrange2(a, tx) * lagrange2(b, ty) * field[conn[b * 3 + a]];
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exactness() {
        let r = gauss_legendre(10).unwrap();
        for k in 0..20 {
            let v: f64 = r.iter().map(|(x, w)| w * x.powi(k)).sum();
            assert!((v - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "k={k}");
        }
        let r3 = gauss_legendre(3).unwrap();
        for ((x, w), (gx, gw)) in r3.iter().zip(GAUSS3) {
            assert!((x - gx).abs() < 1e-15 && (w - gw).abs() < 1e-15);
        }
    }

    #[test]
    fn mesh_sizes() {
        let m0 = StructuredQuadMesh::new(0).unwrap();
        assert_eq!((m0.num_elements(), m0.num_nodes()), (4, 25));
        let m1 = StructuredQuadMesh::new(1).unwrap();
        assert_eq!((m1.num_elements(), m1.num_nodes()), (16, 81));
        let m3 = StructuredQuadMesh::new(3).unwrap();
        assert_eq!((m3.num_elements(), m3.num_nodes()), (256, 1089));
        assert!(matches!(StructuredQuadMesh::new(7), Err(Error::Config(_))));
    }

    #[test]
    fn boundary_nodes_on_boundary() {
        let m = StructuredQuadMesh::new(2).unwrap();
        for (i, p) in m.nodes().iter().enumerate() {
            let on = p.iter().any(|c| c.abs() < 1e-14 || (c - 1.0).abs() < 1e-14);
            assert_eq!(on, m.is_boundary(i), "node {i} at {p:?}");
        }
        assert_eq!(m.boundary_nodes().len(), 4 * (m.nodes_per_side() - 1));
    }

    #[test]
    fn elements_quadruple_per_level() {
        for l in 0..4 {
            let a = StructuredQuadMesh::new(l).unwrap().num_elements();
            let b = StructuredQuadMesh::new(l + 1).unwrap().num_elements();
            assert_eq!(b, 4 * a);
        }
    }

    #[test]
    fn mass_partition_of_unity_and_constants() {
        for l in 0..4 {
            let mesh = StructuredQuadMesh::new(l).unwrap();
            let m = assemble_mass(&mesh);
            let total: f64 = m.values().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            let c = vec![-2.5; mesh.num_nodes()];
            let q = crate::linalg::dot(&m.mul_vec(&c), &c);
            assert!((q - 6.25).abs() < 1e-12);
            assert!(m.asymmetry() < 1e-15);
        }
    }

    #[test]
    fn mass_is_positive_definite() {
        let mesh = StructuredQuadMesh::new(0).unwrap();
        let m = assemble_mass(&mesh).to_dense();
        let vals = crate::linalg::symmetric_eigenvalues(&m).unwrap();
        assert!(*vals.last().unwrap() > 0.0);
    }

    #[test]
    fn stiffness_kills_constants_and_is_linear_in_a() {
        let mesh = StructuredQuadMesh::new(2).unwrap();
        let k1 = assemble_stiffness(&mesh, |_| 1.0).unwrap();
        let k2 = assemble_stiffness(&mesh, |_| 2.0).unwrap();
        let kc = k1.mul_vec(&vec![3.0; mesh.num_nodes()]);
        assert!(kc.iter().all(|v| v.abs() < 1e-12));
        for (a, b) in k1.values().iter().zip(k2.values()) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
        assert!(k1.asymmetry() < 1e-12);
    }

    #[test]
    fn nonpositive_coefficient_is_rejected() {
        let mesh = StructuredQuadMesh::new(0).unwrap();
        let err = assemble_stiffness(&mesh, |p| p[0] - 0.5).unwrap_err();
        assert!(matches!(err, Error::Coercivity { .. }));
    }

    #[test]
    fn poisson_sign_and_scaling() {
        let mesh = StructuredQuadMesh::new(2).unwrap();
        let u1 = solve_poisson(&mesh, |_| 1.0, -1.0).unwrap();
        assert!(u1.values.iter().all(|v| *v <= 1e-15));
        for b in mesh.boundary_nodes() {
            assert_eq!(u1.values[b], 0.0);
        }
        let u10 = solve_poisson(&mesh, |_| 10.0, -1.0).unwrap();
        for (a, b) in u1.values.iter().zip(&u10.values) {
            assert!((a / 10.0 - b).abs() < 1e-10);
        }
    }

    #[test]
    fn poisson_residual_small() {
        let mesh = StructuredQuadMesh::new(3).unwrap();
        let asm = Assembler::new(&mesh);
        let a = coefficient_at_quadrature(&mesh, |p| 1.0 + p[0] * p[1]).unwrap();
        let u = PoissonSolver::new(&mesh).solve_qp(&a, -1.0).unwrap();
        let mut k = asm.stiffness(&a).unwrap();
        k.eliminate(mesh.boundary_mask());
        let mut f = asm.load(-1.0);
        for b in mesh.boundary_nodes() {
            f[b] = 0.0;
        }
        let r: Vec<f64> = k.mul_vec(&u.values).iter().zip(&f).map(|(x, y)| x - y).collect();
        assert!(crate::linalg::norm2(&r) / crate::linalg::norm2(&f) < 1e-10);
    }

    #[test]
    fn qoi_of_constant_and_zero_fields() {
        let mesh = StructuredQuadMesh::new(1).unwrap();
        let asm = Assembler::new(&mesh);
        let c = NodalField::constant(&mesh, 0.7);
        assert!((qoi(QoiKind::Average, &c, &mesh, &asm).unwrap() - 0.7).abs() < 1e-14);
        assert!((qoi(QoiKind::IntegralSquare, &c, &mesh, &asm).unwrap() - 0.49).abs() < 1e-14);
        assert_eq!(qoi(QoiKind::Max, &c, &mesh, &asm).unwrap(), 0.7);
        let z = NodalField::constant(&mesh, 0.0);
        for k in [QoiKind::Average, QoiKind::IntegralSquare, QoiKind::Max] {
            assert_eq!(qoi(k, &z, &mesh, &asm).unwrap(), 0.0);
        }
        let wrong = NodalField::new(vec![0.0; 3]);
        assert!(matches!(qoi(QoiKind::Max, &wrong, &mesh, &asm), Err(Error::Dimension { .. })));
    }

    #[test]
    fn interpolation_reproduces_quadratics() {
        let mesh = StructuredQuadMesh::new(1).unwrap();
        let f = |p: [f64; 2]| 1.0 + p[0] - 2.0 * p[1] * p[1] + p[0] * p[1];
        let nodal: Vec<f64> = mesh.nodes().iter().map(|&p| f(p)).collect();
        for (p, v) in mesh.quadrature_points().iter().zip(mesh.interpolate_at_quadrature(&nodal)) {
            assert!((f(*p) - v).abs() < 1e-13);
        }
        assert!((evaluate_at(&mesh, &nodal, [0.3, 0.77]) - f([0.3, 0.77])).abs() < 1e-13);
    }
}
