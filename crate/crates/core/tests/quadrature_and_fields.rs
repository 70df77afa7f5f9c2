//! Gauss-Hermite rules, finite elements and the KL field against closed
//! forms.

use proptest::prelude::*;
use sgpdf_core::fem::{qoi_average, solve_poisson, Assembler, StructuredQuadMesh};
use sgpdf_core::hermite::{gauss_hermite, he_orthonormal, MultiIndexSet};
use sgpdf_core::kl::{
    dense_mass_matrix, separable_eigenpairs, CovarianceQuadrature, CovarianceSpec, KlField,
};

/// `E[x^k]` under the standard Gaussian: `(k-1)!!` for even `k`.
fn gaussian_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        (1..k).step_by(2).map(f64::from).product()
    }
}

#[test]
fn gauss_hermite_is_exact_to_degree_2n_minus_1() {
    for n in 1..=13 {
        let rule = gauss_hermite(n).unwrap();
        for k in 0..2 * n as u32 {
            let got = rule.integrate(|x| x[0].powi(k as i32));
            let want = gaussian_moment(k);
            // odd moments vanish, so measure them against E|x|^k
            let scale = rule.integrate(|x| x[0].abs().powi(k as i32)).max(1.0);
            assert!((got - want).abs() < 1e-11 * scale, "n = {n}, k = {k}: {got} vs {want}");
        }
    }
}

#[test]
fn orthonormal_hermite_basis() {
    let rule = gauss_hermite(12).unwrap();
    for i in 0..=10 {
        for j in 0..=10 {
            let g = rule.integrate(|x| he_orthonormal(i, x[0]).unwrap() * he_orthonormal(j, x[0]).unwrap());
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((g - want).abs() < 1e-11, "<He_{i}, He_{j}> = {g}");
        }
    }
}

/// `∫u` for `-Δu = 1` on the unit square with homogeneous Dirichlet data,
/// from the double sine series.
fn unit_torsion_integral() -> f64 {
    let pi6 = std::f64::consts::PI.powi(6);
    let mut s = 0.0;
    for m in (1..4000).step_by(2) {
        for n in (1..4000).step_by(2) {
            let (m, n) = (m as f64, n as f64);
            s += 64.0 / (pi6 * m * m * n * n * (m * m + n * n));
        }
    }
    s
}

#[test]
fn poisson_average_matches_the_sine_series() {
    let want = -unit_torsion_integral();
    let mesh = StructuredQuadMesh::new(3).unwrap();
    let u = solve_poisson(&mesh, |_| 1.0, -1.0).unwrap();
    let got = qoi_average(&u, &Assembler::new(&mesh));
    let err3 = (got - want).abs();
    assert!(err3 < 1e-5 * want.abs(), "{got} vs {want}");
    // Q2 converges at least cubically in h
    let fine = StructuredQuadMesh::new(4).unwrap();
    let err4 = (qoi_average(&solve_poisson(&fine, |_| 1.0, -1.0).unwrap(), &Assembler::new(&fine)) - want).abs();
    assert!(err4 < err3 / 8.0, "{err4} vs {err3}");
    // a constant coefficient a rescales u by 1/a
    let u2 = solve_poisson(&mesh, |_| 1.01, -1.0).unwrap();
    assert!((qoi_average(&u2, &Assembler::new(&mesh)) - got / 1.01).abs() < 1e-12 * want.abs());
}

#[test]
fn kl_modes_are_mass_orthonormal() {
    let mesh = StructuredQuadMesh::new(3).unwrap();
    let spec = CovarianceSpec::new(1.0, 0.1).unwrap();
    let m = dense_mass_matrix(&mesh);
    for rule in [CovarianceQuadrature::ElementGauss3, CovarianceQuadrature::Accurate] {
        let (_, modes) = separable_eigenpairs(&mesh, &spec, 6, rule).unwrap();
        for (i, a) in modes.iter().enumerate() {
            for (j, b) in modes.iter().enumerate() {
                let g = m.bilinear(a, b);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-10, "{rule:?} ({i}, {j}): {g}");
            }
        }
    }
}

fn leading_eigenvalue(level: usize, rule: CovarianceQuadrature) -> f64 {
    let mesh = StructuredQuadMesh::new(level).unwrap();
    separable_eigenpairs(&mesh, &CovarianceSpec::new(1.0, 0.1).unwrap(), 1, rule).unwrap().0[0]
}

#[test]
fn leading_eigenvalue_is_stable_under_refinement() {
    let (l2, l3) = (leading_eigenvalue(2, CovarianceQuadrature::Accurate), leading_eigenvalue(3, CovarianceQuadrature::Accurate));
    assert!((l2 - l3).abs() < 0.02 * l3, "{l2} vs {l3}");
}

#[test]
fn gauss3_eigenvalue_converges_to_the_accurate_one() {
    // the 3-point rule misses the kernel's kink inside diagonal element
    // pairs; that error shrinks with h
    let exact = leading_eigenvalue(5, CovarianceQuadrature::Accurate);
    let errs: Vec<f64> =
        (2..=5).map(|level| (leading_eigenvalue(level, CovarianceQuadrature::ElementGauss3) - exact).abs()).collect();
    assert!(errs.windows(2).all(|w| w[1] < 0.5 * w[0]), "{errs:?}");
    assert!(errs[1] < 0.02 * exact);
}

#[test]
fn eigenvalues_do_not_exceed_the_total_variance() {
    // Σ λ_n ≤ ∫ C(x, x) dx = σ² on the unit square
    let mesh = StructuredQuadMesh::new(2).unwrap();
    let spec = CovarianceSpec::new(0.7, 0.1).unwrap();
    let (lam, modes) = separable_eigenpairs(&mesh, &spec, 40, CovarianceQuadrature::Accurate).unwrap();
    assert!(lam.iter().sum::<f64>() <= 0.49 * (1.0 + 1e-12));
    assert!(lam.windows(2).all(|w| w[0] >= w[1]));
    assert!(lam.iter().all(|&l| l > 0.0));
    // and they are accepted as a field
    assert!(KlField::new(&mesh, 0.01, 0.0, lam, modes).is_ok());
}

#[test]
fn field_with_zero_parameters_is_the_median_coefficient() {
    let mesh = StructuredQuadMesh::new(1).unwrap();
    let field = KlField::from_covariance(&mesh, &CovarianceSpec::new(0.5, 0.1).unwrap(), 3, 0.01, 0.2).unwrap();
    for node in 0..mesh.num_nodes() {
        let a = field.coefficient_at_node(node, &[0.0; 3]).unwrap();
        assert!((a - (0.01 + 0.2f64.exp())).abs() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eigenvalues_scale_with_the_variance(sigma in 0.01..3.0f64, s in 0.1..10.0f64) {
        let mesh = StructuredQuadMesh::new(2).unwrap();
        let pairs = |sg: f64| {
            separable_eigenpairs(&mesh, &CovarianceSpec::new(sg, 0.1).unwrap(), 4, CovarianceQuadrature::default()).unwrap()
        };
        let (a, va) = pairs(sigma);
        let (b, vb) = pairs(s * sigma);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((y - s * s * x).abs() < 1e-10 * y.abs());
        }
        // the modes themselves do not depend on σ
        prop_assert_eq!(va, vb);
    }

    #[test]
    fn total_degree_set_size(dim in 1usize..5, degree in 0usize..7) {
        let set = MultiIndexSet::total_degree(dim, degree).unwrap();
        let want: usize = (1..=dim).map(|k| (degree + k) as f64 / k as f64).product::<f64>().round() as usize;
        prop_assert_eq!(set.len(), want);
        prop_assert!(set.indices().iter().all(|i| i.total_degree() <= degree));
    }
}
