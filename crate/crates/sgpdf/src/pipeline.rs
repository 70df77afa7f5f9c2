//! Coefficient field, solvers and moments wired from a configuration.

use std::path::PathBuf;

use rayon::prelude::*;
use sgpdf_core::fem::{Assembler, StructuredQuadMesh};
use sgpdf_core::hermite::MultiIndexSet;
use sgpdf_core::kl::KlField;
use sgpdf_core::mc::{mc_moments, sample_at, FailurePolicy, McRun, McSolver, MomentEstimate, SampleSet};
use sgpdf_core::series::MomentVector;
use sgpdf_core::sg::{
    assemble_sg_system, exact_moments, project_coefficient, qoi_polynomial, solve_sg_with, KrylovMethod,
    ProjectionMethod, QoiPolynomial,
};
use sgpdf_core::Error;

use crate::cache::{load_or_compute, CacheStatus, EigenKey};
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

/// Moments are always carried to this order: enough for GC6 and ED4.
pub const MOMENT_ORDER: usize = 6;

/// Mesh and KL field of an experiment.
#[derive(Debug, Clone)]
pub struct Problem {
    pub mesh: StructuredQuadMesh,
    pub field: KlField,
    pub cache: CacheStatus,
    pub cache_path: PathBuf,
}

pub fn eigen_key(cfg: &ExperimentConfig) -> EigenKey {
    EigenKey {
        refinement: cfg.refinement,
        sigma_gamma: cfg.sigma_gamma,
        corr_length: cfg.corr_length,
        terms: cfg.kl_terms,
        rule: cfg.covariance_quadrature,
    }
}

pub fn build_problem(cfg: &ExperimentConfig) -> Result<Problem> {
    cfg.validate()?;
    let mesh = StructuredQuadMesh::new(cfg.refinement)?;
    let (pairs, cache, cache_path) = load_or_compute(&cfg.cache_dir(), &eigen_key(cfg))?;
    let field = KlField::new(&mesh, cfg.a_min, cfg.mu_gamma, pairs.eigenvalues, pairs.modes)?;
    Ok(Problem { mesh, field, cache, cache_path })
}

#[derive(Debug, Clone)]
pub struct SgRun {
    pub qoi: QoiPolynomial,
    pub moments: MomentVector,
    pub iterations: usize,
    pub method: KrylovMethod,
    /// The truncated coefficient expansion made the system indefinite.
    pub indefinite: bool,
}

pub fn run_sg(cfg: &ExperimentConfig, problem: &Problem) -> Result<SgRun> {
    let asm = Assembler::new(&problem.mesh);
    let coeff = project_coefficient(
        &problem.field,
        cfg.coeff_degree,
        ProjectionMethod::Quadrature { points: cfg.projection_points },
    )?;
    let basis = MultiIndexSet::total_degree(problem.field.dim(), cfg.degree)?;
    let system = assemble_sg_system(&problem.mesh, &asm, &coeff, &basis, cfg.forcing)?;
    let sol = solve_sg_with(&system, cfg.sg_tol, cfg.sg_max_iter, KrylovMethod::Auto)?;
    let qoi = qoi_polynomial(&sol, cfg.qoi, &asm, cfg.square)?;
    let moments = exact_moments(&qoi, MOMENT_ORDER)?;
    Ok(SgRun { qoi, moments, iterations: sol.report.iterations, method: sol.method, indefinite: sol.indefinite })
}

/// Monte Carlo over `cfg.samples` PDE solves, sample `m` drawn from stream
/// `m` of `cfg.seed`. Values are independent of the worker count.
pub fn run_mc(cfg: &ExperimentConfig, problem: &Problem) -> Result<McRun> {
    let policy = cfg.failure_policy();
    let dim = problem.field.dim();
    let solve_range = || {
        (0..cfg.samples)
            .into_par_iter()
            .map_init(
                || (McSolver::new(&problem.mesh, cfg.qoi, cfg.forcing), vec![0.0; dim]),
                |(worker, eps), m| {
                    sample_at(cfg.seed, m as u64, eps);
                    worker.solve(&problem.field, eps)
                },
            )
            .collect::<Vec<_>>()
    };
    let results = if cfg.workers == 1 {
        let mut worker = McSolver::new(&problem.mesh, cfg.qoi, cfg.forcing);
        let mut eps = vec![0.0; dim];
        (0..cfg.samples)
            .map(|m| {
                sample_at(cfg.seed, m as u64, &mut eps);
                worker.solve(&problem.field, &eps)
            })
            .collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", cfg.workers)))?
            .install(solve_range)
    };
    let mut values = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (m, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => values.push(v),
            Err(e) if policy == FailurePolicy::Skip => failures.push((m, e)),
            Err(e) => return Err(Error::Sample { index: m, source: Box::new(e) }.into()),
        }
    }
    Ok(McRun { samples: SampleSet::new(values, cfg.seed, cfg.qoi)?, failures })
}

pub fn mc_estimate(samples: &SampleSet) -> Result<MomentEstimate> {
    Ok(mc_moments(samples, MOMENT_ORDER)?)
}
