//! Flat `key = value` experiment configuration.
//!
//! Precedence: built-in defaults, then the config file, then command line
//! flags. `#` starts a comment; unknown and repeated keys are errors.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sgpdf_core::density::{DEFAULT_BINS, DEFAULT_GRID_POINTS, DEFAULT_TOLERANCE};
use sgpdf_core::fem::{QoiKind, MAX_REFINEMENT};
use sgpdf_core::kl::CovarianceQuadrature;
use sgpdf_core::mc::FailurePolicy;
use sgpdf_core::series::SeriesKind;
use sgpdf_core::sg::{SquareProjection, DEFAULT_PROJECTION_POINTS, DEFAULT_SG_TOL};

use crate::error::{CliError, Result};

/// Largest σ_γ at which Monte Carlo moments are trusted without `force`.
pub const MC_SIGMA_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Mc,
    Sg,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::Sg => "sg",
        }
    }
}

/// Which expansions `estimate` builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesChoice {
    Gc,
    Ed,
    Both,
}

impl SeriesChoice {
    pub fn kinds(self) -> &'static [SeriesKind] {
        match self {
            SeriesChoice::Gc => &[SeriesKind::GramCharlier],
            SeriesChoice::Ed => &[SeriesKind::Edgeworth],
            SeriesChoice::Both => &[SeriesKind::GramCharlier, SeriesKind::Edgeworth],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SeriesChoice::Gc => "gc",
            SeriesChoice::Ed => "ed",
            SeriesChoice::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderChoice {
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub refinement: usize,
    pub sigma_gamma: f64,
    pub corr_length: f64,
    pub kl_terms: usize,
    pub covariance_quadrature: CovarianceQuadrature,
    pub a_min: f64,
    pub mu_gamma: f64,
    pub forcing: f64,
    /// Total degree `p` of the SG solution space.
    pub degree: usize,
    /// Total degree `q` of the coefficient expansion.
    pub coeff_degree: usize,
    pub projection_points: usize,
    pub sg_tol: f64,
    pub sg_max_iter: usize,
    pub qoi: QoiKind,
    pub square: SquareProjection,
    pub method: Method,
    pub samples: usize,
    pub crude_samples: usize,
    pub seed: u64,
    pub workers: usize,
    pub force: bool,
    /// Drop failed Monte Carlo samples instead of aborting.
    pub skip_failures: bool,
    pub bins: usize,
    /// `None`: the histogram bin width.
    pub bandwidth: Option<f64>,
    pub kde: bool,
    pub series: SeriesChoice,
    pub order: OrderChoice,
    pub tol: f64,
    pub grid_points: usize,
    pub output: PathBuf,
    /// `None`: `<output>/cache`.
    pub cache_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            refinement: 3,
            sigma_gamma: 0.08,
            corr_length: 0.1,
            kl_terms: 2,
            covariance_quadrature: CovarianceQuadrature::default(),
            a_min: 0.01,
            mu_gamma: 0.0,
            forcing: -1.0,
            degree: 4,
            coeff_degree: 5,
            projection_points: DEFAULT_PROJECTION_POINTS,
            sg_tol: DEFAULT_SG_TOL,
            sg_max_iter: 20_000,
            qoi: QoiKind::Average,
            square: SquareProjection::ModeWise,
            method: Method::Sg,
            samples: 100_000,
            crude_samples: 10_000,
            seed: 0,
            workers: 0,
            force: false,
            skip_failures: false,
            bins: DEFAULT_BINS,
            bandwidth: None,
            kde: false,
            series: SeriesChoice::Both,
            order: OrderChoice::Auto,
            tol: DEFAULT_TOLERANCE,
            grid_points: DEFAULT_GRID_POINTS,
            output: PathBuf::from("out"),
            cache_dir: None,
        }
    }
}

/// Every accepted key, in canonical order.
pub const KEYS: &[&str] = &[
    "refinement",
    "sigma_gamma",
    "corr_length",
    "kl_terms",
    "covariance_quadrature",
    "a_min",
    "mu_gamma",
    "forcing",
    "degree",
    "coeff_degree",
    "projection_points",
    "sg_tol",
    "sg_max_iter",
    "qoi",
    "square",
    "method",
    "samples",
    "crude_samples",
    "seed",
    "workers",
    "force",
    "skip_failures",
    "bins",
    "bandwidth",
    "kde",
    "series",
    "order",
    "tol",
    "grid_points",
    "output",
    "cache_dir",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| CliError::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::Config(format!("{key}: expected true or false, got {value:?}"))),
    }
}

/// Plain decimal for moderate magnitudes, exponent notation otherwise;
/// both parse back to the same value.
fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn choice<T>(key: &str, value: &str, parsed: Option<T>, allowed: &str) -> Result<T> {
    parsed.ok_or_else(|| CliError::Config(format!("{key}: {value:?} is not one of {allowed}")))
}

impl ExperimentConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "refinement" => self.refinement = parse(key, v)?,
            "sigma_gamma" => self.sigma_gamma = parse(key, v)?,
            "corr_length" => self.corr_length = parse(key, v)?,
            "kl_terms" => self.kl_terms = parse(key, v)?,
            "covariance_quadrature" => {
                self.covariance_quadrature = choice(key, v, CovarianceQuadrature::parse(v), "gauss3, accurate")?
            }
            "a_min" => self.a_min = parse(key, v)?,
            "mu_gamma" => self.mu_gamma = parse(key, v)?,
            "forcing" => self.forcing = parse(key, v)?,
            "degree" => self.degree = parse(key, v)?,
            "coeff_degree" => self.coeff_degree = parse(key, v)?,
            "projection_points" => self.projection_points = parse(key, v)?,
            "sg_tol" => self.sg_tol = parse(key, v)?,
            "sg_max_iter" => self.sg_max_iter = parse(key, v)?,
            "qoi" => self.qoi = choice(key, v, QoiKind::parse(v), "average, integral_square, max")?,
            "square" => {
                self.square = choice(
                    key,
                    v,
                    match v {
                        "modewise" => Some(SquareProjection::ModeWise),
                        "exact" => Some(SquareProjection::Exact),
                        _ => None,
                    },
                    "modewise, exact",
                )?
            }
            "method" => {
                self.method = choice(
                    key,
                    v,
                    match v {
                        "mc" => Some(Method::Mc),
                        "sg" => Some(Method::Sg),
                        _ => None,
                    },
                    "mc, sg",
                )?
            }
            "samples" => self.samples = parse(key, v)?,
            "crude_samples" => self.crude_samples = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "workers" => self.workers = parse(key, v)?,
            "force" => self.force = parse_bool(key, v)?,
            "skip_failures" => self.skip_failures = parse_bool(key, v)?,
            "bins" => self.bins = parse(key, v)?,
            "bandwidth" => self.bandwidth = if v == "auto" { None } else { Some(parse(key, v)?) },
            "kde" => self.kde = parse_bool(key, v)?,
            "series" => {
                self.series = choice(
                    key,
                    v,
                    match v {
                        "gc" => Some(SeriesChoice::Gc),
                        "ed" => Some(SeriesChoice::Ed),
                        "both" => Some(SeriesChoice::Both),
                        _ => None,
                    },
                    "gc, ed, both",
                )?
            }
            "order" => self.order = if v == "auto" { OrderChoice::Auto } else { OrderChoice::Fixed(parse(key, v)?) },
            "tol" => self.tol = parse(key, v)?,
            "grid_points" => self.grid_points = parse(key, v)?,
            "output" => self.output = PathBuf::from(v),
            "cache_dir" => self.cache_dir = if v.is_empty() { None } else { Some(PathBuf::from(v)) },
            _ => return Err(CliError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a config file body on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value, got {raw:?}", n + 1)))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(CliError::Config(format!("line {}: {key} set twice", n + 1)));
            }
            self.set(key, value).map_err(|e| match e {
                CliError::Config(m) => CliError::Config(format!("line {}: {m}", n + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        Ok(cfg)
    }

    /// The value of `key` as it would be written in a config file.
    pub fn get(&self, key: &str) -> Option<String> {
        let opt_path = |p: &Option<PathBuf>| p.as_ref().map_or(String::new(), |p| p.display().to_string());
        Some(match key {
            "refinement" => self.refinement.to_string(),
            "sigma_gamma" => num(self.sigma_gamma),
            "corr_length" => num(self.corr_length),
            "kl_terms" => self.kl_terms.to_string(),
            "covariance_quadrature" => self.covariance_quadrature.as_str().to_string(),
            "a_min" => num(self.a_min),
            "mu_gamma" => num(self.mu_gamma),
            "forcing" => num(self.forcing),
            "degree" => self.degree.to_string(),
            "coeff_degree" => self.coeff_degree.to_string(),
            "projection_points" => self.projection_points.to_string(),
            "sg_tol" => num(self.sg_tol),
            "sg_max_iter" => self.sg_max_iter.to_string(),
            "qoi" => self.qoi.as_str().to_string(),
            "square" => match self.square {
                SquareProjection::ModeWise => "modewise",
                SquareProjection::Exact => "exact",
            }
            .to_string(),
            "method" => self.method.as_str().to_string(),
            "samples" => self.samples.to_string(),
            "crude_samples" => self.crude_samples.to_string(),
            "seed" => self.seed.to_string(),
            "workers" => self.workers.to_string(),
            "force" => self.force.to_string(),
            "skip_failures" => self.skip_failures.to_string(),
            "bins" => self.bins.to_string(),
            "bandwidth" => self.bandwidth.map_or("auto".to_string(), num),
            "kde" => self.kde.to_string(),
            "series" => self.series.as_str().to_string(),
            "order" => match self.order {
                OrderChoice::Auto => "auto".to_string(),
                OrderChoice::Fixed(o) => o.to_string(),
            },
            "tol" => num(self.tol),
            "grid_points" => self.grid_points.to_string(),
            "output" => self.output.display().to_string(),
            "cache_dir" => opt_path(&self.cache_dir),
            _ => return None,
        })
    }

    /// `(key, value)` for every key in canonical order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        KEYS.iter().map(|&k| (k, self.get(k).expect("every key is gettable"))).collect()
    }

    pub fn failure_policy(&self) -> FailurePolicy {
        if self.skip_failures {
            FailurePolicy::Skip
        } else {
            FailurePolicy::FailFast
        }
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.cache_dir.clone().unwrap_or_else(|| self.output.join("cache"))
    }

    /// Range and consistency checks that do not need any numerics.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.refinement > MAX_REFINEMENT {
            return bad(format!("refinement must be at most {MAX_REFINEMENT}, got {}", self.refinement));
        }
        if !(self.sigma_gamma > 0.0 && self.sigma_gamma.is_finite()) {
            return bad(format!("sigma_gamma must be positive, got {}", self.sigma_gamma));
        }
        if !(self.corr_length > 0.0 && self.corr_length <= 2f64.sqrt()) {
            return bad(format!("corr_length must lie in (0, sqrt 2], got {}", self.corr_length));
        }
        if self.kl_terms == 0 {
            return bad("kl_terms must be at least 1".into());
        }
        if !(self.a_min >= 0.0) || !self.mu_gamma.is_finite() || !self.forcing.is_finite() {
            return bad("a_min must be nonnegative and mu_gamma, forcing finite".into());
        }
        if self.projection_points < self.coeff_degree + 2 {
            return bad(format!(
                "projection_points must be at least coeff_degree + 2 = {}, got {}",
                self.coeff_degree + 2,
                self.projection_points
            ));
        }
        if !(self.sg_tol > 0.0) || self.sg_max_iter == 0 {
            return bad("sg_tol and sg_max_iter must be positive".into());
        }
        if self.samples == 0 || self.crude_samples == 0 {
            return bad("samples and crude_samples must be positive".into());
        }
        if self.bins < 2 {
            return bad(format!("bins must be at least 2, got {}", self.bins));
        }
        if let Some(h) = self.bandwidth {
            if !(h > 0.0) {
                return bad(format!("bandwidth must be positive, got {h}"));
            }
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.grid_points < 2 {
            return bad(format!("grid_points must be at least 2, got {}", self.grid_points));
        }
        if let OrderChoice::Fixed(o) = self.order {
            for kind in self.series.kinds() {
                if !kind.orders().contains(&o) {
                    return bad(format!("order {o} is outside {:?} for {}", kind.orders(), kind.as_str()));
                }
            }
        }
        Ok(())
    }

    /// Refuses Monte Carlo moments where the sampling error swamps the
    /// estimate, unless forced. Returns a warning when forced.
    pub fn check_mc_allowed(&self) -> Result<Option<String>> {
        if self.sigma_gamma <= MC_SIGMA_LIMIT {
            return Ok(None);
        }
        let msg = format!(
            "Monte Carlo moments at sigma_gamma = {} > {MC_SIGMA_LIMIT} carry large sampling error",
            self.sigma_gamma
        );
        if self.force {
            Ok(Some(msg))
        } else {
            Err(CliError::Config(format!("{msg}; use method = sg or set force = true")))
        }
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.entries() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
