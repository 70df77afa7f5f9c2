//! Monte Carlo sampling of the QoI and moment estimation.
//!
//! Sample `m` is drawn from its own ChaCha8 stream (`stream = m`) under a
//! common seed, so any subset of samples can be regenerated, and split
//! across workers, without touching the others.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fem::{qoi, PoissonSolver, QoiKind, StructuredQuadMesh};
use crate::kl::KlField;
use crate::series::MomentVector;

/// QoI realizations with their provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub values: Vec<f64>,
    pub seed: u64,
    pub kind: QoiKind,
}

impl SampleSet {
    pub fn new(values: Vec<f64>, seed: u64, kind: QoiKind) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Range(alloc::format!("sample {i} is not finite")));
        }
        Ok(Self { values, seed, kind })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(min, max)`; `None` when empty.
    pub fn range(&self) -> Option<(f64, f64)> {
        let first = *self.values.first()?;
        Some(self.values.iter().fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v))))
    }
}

/// Standard normal vector of sample `index` under `seed`.
pub fn sample_at(seed: u64, index: u64, out: &mut [f64]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    for o in out.iter_mut() {
        *o = rng.sample(StandardNormal);
    }
}

/// `count` i.i.d. standard normal `dim`-vectors.
pub fn sample_parameters(count: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|m| {
            let mut eps = vec![0.0; dim];
            sample_at(seed, m as u64, &mut eps);
            eps
        })
        .collect()
}

/// What to do when a single sample fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FailurePolicy {
    /// Abort and report the sample index.
    #[default]
    FailFast,
    /// Drop the sample and record the failure.
    Skip,
}

/// Per-worker state for repeated PDE solves against one field.
#[derive(Debug, Clone)]
pub struct McSolver {
    solver: PoissonSolver,
    coeff: Vec<f64>,
    kind: QoiKind,
    forcing: f64,
    mesh: StructuredQuadMesh,
}

impl McSolver {
    pub fn new(mesh: &StructuredQuadMesh, kind: QoiKind, forcing: f64) -> Self {
        Self { solver: PoissonSolver::new(mesh), coeff: Vec::new(), kind, forcing, mesh: mesh.clone() }
    }

    /// QoI of the solution for parameter `eps`.
    pub fn solve(&mut self, field: &KlField, eps: &[f64]) -> Result<f64> {
        field.coefficient_at_quadrature_into(eps, &mut self.coeff)?;
        let u = self.solver.solve_qp(&self.coeff, self.forcing)?;
        qoi(self.kind, &u, &self.mesh, self.solver.assembler())
    }
}

/// Result of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct McRun {
    pub samples: SampleSet,
    /// Samples dropped under [`FailurePolicy::Skip`].
    pub failures: Vec<(usize, Error)>,
}

/// Solves the PDE for every parameter vector, in order.
pub fn run_mc(
    mesh: &StructuredQuadMesh,
    field: &KlField,
    kind: QoiKind,
    forcing: f64,
    params: &[Vec<f64>],
    seed: u64,
    policy: FailurePolicy,
) -> Result<McRun> {
    let mut worker = McSolver::new(mesh, kind, forcing);
    let mut values = Vec::with_capacity(params.len());
    let mut failures = Vec::new();
    for (m, eps) in params.iter().enumerate() {
        match worker.solve(field, eps) {
            Ok(v) => values.push(v),
            Err(e) => match policy {
                FailurePolicy::FailFast => return Err(Error::Sample { index: m, source: alloc::boxed::Box::new(e) }),
                FailurePolicy::Skip => failures.push((m, e)),
            },
        }
    }
    Ok(McRun { samples: SampleSet::new(values, seed, kind)?, failures })
}

/// Sample moments with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub moments: MomentVector,
    /// Standard error of each `m_l`: `sd(Q^l)/√M`, which is also the
    /// jackknife estimate for a sample mean.
    pub std_errors: Vec<f64>,
}

/// Neumaier-compensated sum.
fn compensated_sum<I: Iterator<Item = f64>>(it: I) -> f64 {
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    for v in it {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `m_l = (1/M) Σ Q_m^l` for `l = 1..=l_max`.
pub fn mc_moments(set: &SampleSet, l_max: usize) -> Result<MomentEstimate> {
    if set.is_empty() {
        return Err(Error::Empty);
    }
    let n = set.len() as f64;
    let mut moments = Vec::with_capacity(l_max);
    let mut std_errors = Vec::with_capacity(l_max);
    for l in 1..=l_max {
        let p = l as i32;
        let mean = compensated_sum(set.values.iter().map(|v| v.powi(p))) / n;
        let var = compensated_sum(set.values.iter().map(|v| {
            let d = v.powi(p) - mean;
            d * d
        })) / (n - 1.0).max(1.0);
        moments.push(mean);
        std_errors.push((var / n).sqrt());
    }
    Ok(MomentEstimate { moments: MomentVector::new(moments)?, std_errors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kl::CovarianceSpec;

    #[test]
    fn parameters_are_reproducible_and_standard() {
        let a = sample_parameters(20_000, 2, 7);
        assert_eq!(a, sample_parameters(20_000, 2, 7));
        assert_ne!(a, sample_parameters(20_000, 2, 8));
        let n = a.len() as f64;
        let bound = 4.0 / n.sqrt();
        for d in 0..2 {
            let mean = a.iter().map(|e| e[d]).sum::<f64>() / n;
            assert!(mean.abs() < bound);
        }
        let c01 = a.iter().map(|e| e[0] * e[1]).sum::<f64>() / n;
        let c00 = a.iter().map(|e| e[0] * e[0]).sum::<f64>() / n;
        assert!(c01.abs() < bound && (c00 - 1.0).abs() < 2.0 * bound);
        let mut one = [0.0; 2];
        sample_at(7, 1234, &mut one);
        assert_eq!(one.to_vec(), a[1234]);
    }

    #[test]
    fn constant_samples() {
        let s = SampleSet::new(vec![-0.5; 10], 0, QoiKind::Average).unwrap();
        let est = mc_moments(&s, 6).unwrap();
        for l in 1..=6 {
            assert_eq!(est.moments.get(l), (-0.5f64).powi(l as i32));
            assert_eq!(est.std_errors[l - 1], 0.0);
        }
        assert!(matches!(
            mc_moments(&SampleSet::new(vec![], 0, QoiKind::Average).unwrap(), 2),
            Err(Error::Empty)
        ));
    }

    #[test]
    fn small_variance_collapses_to_deterministic() {
        let mesh = StructuredQuadMesh::new(1).unwrap();
        let field = KlField::from_covariance(&mesh, &CovarianceSpec::new(1e-12, 0.1).unwrap(), 2, 0.01, 0.0).unwrap();
        let params = sample_parameters(5, 2, 1);
        let run = run_mc(&mesh, &field, QoiKind::Average, -1.0, &params, 1, FailurePolicy::FailFast).unwrap();
        let det = McSolver::new(&mesh, QoiKind::Average, -1.0).solve(&field, &[0.0, 0.0]).unwrap();
        for v in &run.samples.values {
            assert!((v - det).abs() < 1e-10);
        }
        let mut rev = params.clone();
        rev.reverse();
        let run_rev = run_mc(&mesh, &field, QoiKind::Average, -1.0, &rev, 1, FailurePolicy::FailFast).unwrap();
        let mut back = run_rev.samples.values.clone();
        back.reverse();
        assert_eq!(back, run.samples.values);
    }

    #[test]
    fn failures_carry_the_sample_index() {
        let mesh = StructuredQuadMesh::new(0).unwrap();
        let field = KlField::from_covariance(&mesh, &CovarianceSpec::new(1.0, 0.1).unwrap(), 2, 0.0, 0.0).unwrap();
        let params = vec![vec![0.0, 0.0], vec![1e6, 0.0], vec![0.5, 0.5]];
        let err = run_mc(&mesh, &field, QoiKind::Average, -1.0, &params, 0, FailurePolicy::FailFast).unwrap_err();
        assert!(matches!(err, Error::Sample { index: 1, .. }));
        let run = run_mc(&mesh, &field, QoiKind::Average, -1.0, &params, 0, FailurePolicy::Skip).unwrap();
        assert_eq!(run.samples.len(), 2);
        assert_eq!(run.failures[0].0, 1);
    }
}
