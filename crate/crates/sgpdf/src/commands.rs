//! The four subcommands. Each writes its artifacts under `cfg.output` and
//! returns what it computed so callers can print or check it.

use std::path::PathBuf;

use sgpdf_core::density::{
    build_histogram, kde, linspace, select_order, standardize_samples, Histogram, OrderSelectionReport,
    SelectionOptions,
};
use sgpdf_core::mc::SampleSet;
use sgpdf_core::series::{build_series, moments_to_cumulants, standardize_moments, CumulantVector, MomentVector, TruncatedSeries};
use sgpdf_core::sg::sample_qoi_polynomial;

use crate::cache::{load_or_compute, CacheStatus};
use crate::config::{ExperimentConfig, Method, OrderChoice};
use crate::error::Result;
use crate::io::{
    exact, sig6, write_curve, write_histogram, write_order_report, write_qoi_polynomial, write_samples, write_table,
    Header,
};
use crate::pipeline::{build_problem, eigen_key, mc_estimate, run_mc, run_sg, MOMENT_ORDER};

#[derive(Debug, Clone)]
pub struct KlOutcome {
    pub eigenvalues: Vec<f64>,
    pub cache: CacheStatus,
    pub cache_path: PathBuf,
    pub warnings: Vec<String>,
}

/// Eigenpairs only; unlike the other commands this does not build the
/// field, so nonpositive eigenvalues are reported instead of rejected.
pub fn kl(cfg: &ExperimentConfig) -> Result<KlOutcome> {
    cfg.validate()?;
    let (pairs, cache, cache_path) = load_or_compute(&cfg.cache_dir(), &eigen_key(cfg))?;
    let eigenvalues = pairs.eigenvalues;
    let warnings = match eigenvalues.iter().position(|&l| !(l > 0.0)) {
        Some(n) => vec![format!(
            "lambda_{} = {:e} is not positive: the discrete covariance has rank {n}; use at most {n} terms",
            n + 1,
            eigenvalues[n]
        )],
        None => Vec::new(),
    };
    let rows: Vec<Vec<String>> =
        eigenvalues.iter().enumerate().map(|(n, &l)| vec![(n + 1).to_string(), sig6(l)]).collect();
    write_table(&cfg.output.join("kl_eigenvalues.csv"), &Header::new("kl_eigenvalues").config(cfg), &["n", "lambda"], &rows)?;
    Ok(KlOutcome { eigenvalues, cache, cache_path, warnings })
}

/// Raw and standardized moments and cumulants of the QoI.
#[derive(Debug, Clone)]
pub struct MomentTable {
    pub method: Method,
    pub raw: MomentVector,
    /// Monte Carlo standard errors of the raw moments.
    pub std_errors: Option<Vec<f64>>,
    pub cumulants: CumulantVector,
    pub standardized: MomentVector,
    pub standardized_cumulants: CumulantVector,
}

impl MomentTable {
    pub fn new(method: Method, raw: MomentVector, std_errors: Option<Vec<f64>>) -> Result<Self> {
        let cumulants = moments_to_cumulants(&raw);
        let standardized = standardize_moments(&raw)?;
        let standardized_cumulants = moments_to_cumulants(&standardized);
        Ok(Self { method, raw, std_errors, cumulants, standardized, standardized_cumulants })
    }

    pub fn rows(&self) -> Vec<Vec<String>> {
        (1..=self.raw.order())
            .map(|l| {
                vec![
                    l.to_string(),
                    sig6(self.raw.get(l)),
                    self.std_errors.as_ref().map_or(String::new(), |s| sig6(s[l - 1])),
                    sig6(self.cumulants.get(l)),
                    sig6(self.standardized.get(l)),
                    sig6(self.standardized_cumulants.get(l)),
                ]
            })
            .collect()
    }

    pub const COLUMNS: [&'static str; 6] =
        ["l", "moment", "std_error", "cumulant", "standardized_moment", "standardized_cumulant"];

    /// Fixed-width rendering of [`MomentTable::rows`].
    pub fn render(&self) -> String {
        let mut s = format!("{:>3} {:>13} {:>13} {:>13} {:>13} {:>13}\n", "l", "m_l", "se(m_l)", "k_l", "std m_l", "std k_l");
        for r in self.rows() {
            s += &format!("{:>3} {:>13} {:>13} {:>13} {:>13} {:>13}\n", r[0], r[1], r[2], r[3], r[4], r[5]);
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct MomentsOutcome {
    pub table: MomentTable,
    pub warnings: Vec<String>,
}

/// Samples and moments from whichever method the config selects; the
/// samples double as the crude set for order selection.
struct Estimate {
    table: MomentTable,
    crude: SampleSet,
    warnings: Vec<String>,
}

fn estimate_moments(cfg: &ExperimentConfig, write_data: bool) -> Result<Estimate> {
    let mut warnings = Vec::new();
    let problem = build_problem(cfg)?;
    match cfg.method {
        Method::Sg => {
            let sg = run_sg(cfg, &problem)?;
            if sg.indefinite {
                warnings.push(format!(
                    "the SG system is indefinite at sigma_gamma = {}; solved with MINRES in {} iterations",
                    cfg.sigma_gamma, sg.iterations
                ));
            }
            if write_data {
                write_qoi_polynomial(&cfg.output.join("qoi_polynomial.csv"), &sg.qoi, Header::new("qoi_polynomial").config(cfg))?;
            }
            let crude = sample_qoi_polynomial(&sg.qoi, cfg.crude_samples, cfg.seed)?;
            Ok(Estimate { table: MomentTable::new(Method::Sg, sg.moments, None)?, crude, warnings })
        }
        Method::Mc => {
            warnings.extend(cfg.check_mc_allowed()?);
            let run = run_mc(cfg, &problem)?;
            for (m, e) in &run.failures {
                warnings.push(format!("sample {m} dropped: {e}"));
            }
            if write_data {
                write_samples(&cfg.output.join("samples_mc.csv"), &run.samples, Header::new("samples").config(cfg))?;
            }
            let est = mc_estimate(&run.samples)?;
            let table = MomentTable::new(Method::Mc, est.moments, Some(est.std_errors))?;
            Ok(Estimate { table, crude: run.samples, warnings })
        }
    }
}

pub fn moments(cfg: &ExperimentConfig) -> Result<MomentsOutcome> {
    let est = estimate_moments(cfg, true)?;
    let path = cfg.output.join(format!("moments_{}.csv", cfg.method.as_str()));
    write_table(&path, &Header::new("moments").config(cfg), &MomentTable::COLUMNS, &est.table.rows())?;
    Ok(MomentsOutcome { table: est.table, warnings: est.warnings })
}

#[derive(Debug, Clone)]
pub struct EstimateOutcome {
    pub table: MomentTable,
    pub histogram: Histogram,
    /// Crude samples in standardized coordinates.
    pub standardized: Vec<f64>,
    /// Evaluation grid in standardized coordinates.
    pub grid: Vec<f64>,
    pub series: Vec<TruncatedSeries>,
    /// One report per series kind when the order is chosen automatically.
    pub reports: Vec<OrderSelectionReport>,
    pub chosen: Vec<TruncatedSeries>,
    pub kde: Option<(f64, Vec<f64>)>,
    pub warnings: Vec<String>,
}

pub fn estimate(cfg: &ExperimentConfig) -> Result<EstimateOutcome> {
    let est = estimate_moments(cfg, false)?;
    let mut warnings = est.warnings;
    let raw = est.table.raw.clone();
    let kappa = est.table.standardized_cumulants.clone();
    let z = standardize_samples(&est.crude.values, &raw)?;
    let histogram = build_histogram(&z, cfg.bins)?;
    let (lo, hi) = (histogram.edges[0], histogram.edges[histogram.bins()]);
    let grid = linspace(lo, hi, cfg.grid_points);
    let header = |artifact: &str| Header::new(artifact).config(cfg);
    write_histogram(&cfg.output.join("histogram.csv"), header("histogram"), &histogram)?;

    let mut series = Vec::new();
    let mut reports = Vec::new();
    let mut chosen = Vec::new();
    for &kind in cfg.series.kinds() {
        let order = match cfg.order {
            OrderChoice::Fixed(o) => o,
            OrderChoice::Auto => {
                let opts = SelectionOptions {
                    tol: cfg.tol,
                    max_order: *kind.orders().end(),
                    bins: cfg.bins,
                    grid_points: cfg.grid_points,
                };
                let report = select_order(|_| Ok(raw.clone()), kind, &est.crude.values, &opts)?;
                write_order_report(
                    &cfg.output.join(format!("order_selection_{}.csv", kind.as_str())),
                    header("order_selection"),
                    &report,
                )?;
                warnings.extend(report.warnings.iter().cloned());
                let o = report.chosen_order;
                reports.push(report);
                o
            }
        };
        for o in kind.orders() {
            let s = build_series(kind, &kappa, o)?;
            let ys: Vec<f64> = grid.iter().map(|&x| s.evaluate(x)).collect();
            let label = s.label();
            write_curve(
                &cfg.output.join(format!("series_{}.csv", label.to_lowercase())),
                header("series").with("curve", &label).with("chosen", o == order),
                &grid,
                &ys,
            )?;
            if o == order {
                chosen.push(s.clone());
            }
            series.push(s);
        }
    }

    let kde_curve = if cfg.kde {
        let h = cfg.bandwidth.unwrap_or_else(|| histogram.bin_width());
        let ys = grid.iter().map(|&x| kde(&z, h, x)).collect::<sgpdf_core::Result<Vec<f64>>>()?;
        write_curve(&cfg.output.join("kde.csv"), header("kde").with("bandwidth", exact(h)), &grid, &ys)?;
        Some((h, ys))
    } else {
        None
    };
    Ok(EstimateOutcome { table: est.table, histogram, standardized: z, grid, series, reports, chosen, kde: kde_curve, warnings })
}

#[derive(Debug, Clone)]
pub struct CompareOutcome {
    pub sg: MomentTable,
    pub mc: MomentTable,
    /// `(m_mc - m_sg) / se` per moment.
    pub z_scores: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Monte Carlo against stochastic Galerkin moments at the same settings.
pub fn compare(cfg: &ExperimentConfig) -> Result<CompareOutcome> {
    let mut warnings: Vec<String> = cfg.check_mc_allowed()?.into_iter().collect();
    let problem = build_problem(cfg)?;
    let sg = run_sg(cfg, &problem)?;
    let run = run_mc(cfg, &problem)?;
    for (m, e) in &run.failures {
        warnings.push(format!("sample {m} dropped: {e}"));
    }
    let est = mc_estimate(&run.samples)?;
    let z_scores: Vec<f64> = (1..=MOMENT_ORDER)
        .map(|l| (est.moments.get(l) - sg.moments.get(l)) / est.std_errors[l - 1])
        .collect();
    let rows: Vec<Vec<String>> = (1..=MOMENT_ORDER)
        .map(|l| {
            vec![
                l.to_string(),
                sig6(sg.moments.get(l)),
                sig6(est.moments.get(l)),
                sig6(est.std_errors[l - 1]),
                sig6(z_scores[l - 1]),
            ]
        })
        .collect();
    write_table(
        &cfg.output.join("compare.csv"),
        &Header::new("compare").config(cfg),
        &["l", "sg_moment", "mc_moment", "mc_std_error", "z_score"],
        &rows,
    )?;
    Ok(CompareOutcome {
        sg: MomentTable::new(Method::Sg, sg.moments, None)?,
        mc: MomentTable::new(Method::Mc, est.moments, Some(est.std_errors))?,
        z_scores,
        warnings,
    })
}
