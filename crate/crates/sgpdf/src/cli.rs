//! Argument parsing. Every config key has a matching `--kebab-case` flag;
//! flags override the config file, which overrides the built-in defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "sgpdf", version, about = "Density of PDE quantities of interest from stochastic Galerkin moments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute (or load cached) KL eigenpairs and print the eigenvalues.
    Kl(RunArgs),
    /// Raw and standardized moments and cumulants of the QoI.
    Moments(RunArgs),
    /// Truncated Gram-Charlier/Edgeworth curves, histogram and order selection.
    Estimate(RunArgs),
    /// Monte Carlo against stochastic Galerkin moments.
    Compare(RunArgs),
}

impl Command {
    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Kl(a) | Command::Moments(a) | Command::Estimate(a) | Command::Compare(a) => a,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Flat key = value config file.
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Extra `key=value` assignments, applied after the typed flags.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub refinement: Option<String>,
    #[arg(long)]
    pub sigma_gamma: Option<String>,
    #[arg(long)]
    pub corr_length: Option<String>,
    #[arg(long)]
    pub kl_terms: Option<String>,
    #[arg(long)]
    pub covariance_quadrature: Option<String>,
    #[arg(long)]
    pub a_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu_gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub forcing: Option<String>,
    #[arg(long)]
    pub degree: Option<String>,
    #[arg(long)]
    pub coeff_degree: Option<String>,
    #[arg(long)]
    pub projection_points: Option<String>,
    #[arg(long)]
    pub sg_tol: Option<String>,
    #[arg(long)]
    pub sg_max_iter: Option<String>,
    #[arg(long)]
    pub qoi: Option<String>,
    #[arg(long)]
    pub square: Option<String>,
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub samples: Option<String>,
    #[arg(long)]
    pub crude_samples: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub workers: Option<String>,
    /// Run Monte Carlo even where its sampling error is large.
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub skip_failures: bool,
    #[arg(long)]
    pub bins: Option<String>,
    #[arg(long)]
    pub bandwidth: Option<String>,
    /// Also emit a kernel density estimate.
    #[arg(long)]
    pub kde: bool,
    #[arg(long)]
    pub series: Option<String>,
    #[arg(long)]
    pub order: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long)]
    pub grid_points: Option<String>,
    #[arg(short, long)]
    pub output: Option<String>,
    #[arg(long)]
    pub cache_dir: Option<String>,
}

impl RunArgs {
    fn flag_pairs(&self) -> Vec<(&'static str, Option<String>)> {
        let on = |b: bool| b.then(|| "true".to_string());
        vec![
            ("refinement", self.refinement.clone()),
            ("sigma_gamma", self.sigma_gamma.clone()),
            ("corr_length", self.corr_length.clone()),
            ("kl_terms", self.kl_terms.clone()),
            ("covariance_quadrature", self.covariance_quadrature.clone()),
            ("a_min", self.a_min.clone()),
            ("mu_gamma", self.mu_gamma.clone()),
            ("forcing", self.forcing.clone()),
            ("degree", self.degree.clone()),
            ("coeff_degree", self.coeff_degree.clone()),
            ("projection_points", self.projection_points.clone()),
            ("sg_tol", self.sg_tol.clone()),
            ("sg_max_iter", self.sg_max_iter.clone()),
            ("qoi", self.qoi.clone()),
            ("square", self.square.clone()),
            ("method", self.method.clone()),
            ("samples", self.samples.clone()),
            ("crude_samples", self.crude_samples.clone()),
            ("seed", self.seed.clone()),
            ("workers", self.workers.clone()),
            ("force", on(self.force)),
            ("skip_failures", on(self.skip_failures)),
            ("bins", self.bins.clone()),
            ("bandwidth", self.bandwidth.clone()),
            ("kde", on(self.kde)),
            ("series", self.series.clone()),
            ("order", self.order.clone()),
            ("tol", self.tol.clone()),
            ("grid_points", self.grid_points.clone()),
            ("output", self.output.clone()),
            ("cache_dir", self.cache_dir.clone()),
        ]
    }

    /// Defaults, then the config file, then flags, then `--set`.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        for (key, value) in self.flag_pairs() {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        for assignment in &self.set {
            let (k, v) = assignment
                .split_once('=')
                .ok_or_else(|| crate::CliError::Config(format!("--set expects KEY=VALUE, got {assignment:?}")))?;
            cfg.set(k.trim(), v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
