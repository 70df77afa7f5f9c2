//! Histogram and kernel density baselines, curve distances, and automatic
//! choice of the truncation order of a GC or ED series.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::series::{build_series, moments_to_cumulants, standardize_moments, MomentVector, SeriesKind, TruncatedSeries};
use crate::std_normal_pdf;

pub const DEFAULT_BINS: usize = 50;
pub const DEFAULT_GRID_POINTS: usize = 201;
pub const DEFAULT_TOLERANCE: f64 = 1e-3;
/// Below this many crude samples the selector reports a warning.
pub const MIN_CRUDE_SAMPLES: usize = 100;

/// Density-normalized histogram over the sample range.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub count: usize,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.densities.len()
    }

    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// `Σ density · width`.
    pub fn integral(&self) -> f64 {
        self.densities.iter().zip(self.edges.windows(2)).map(|(d, w)| d * (w[1] - w[0])).sum()
    }
}

/// Equal-width histogram on `[min, max]` of the samples; the maximum falls
/// in the last bin.
pub fn build_histogram(samples: &[f64], bins: usize) -> Result<Histogram> {
    if bins < 2 {
        return Err(Error::Config(alloc::format!("histogram needs at least 2 bins, got {bins}")));
    }
    let (lo, hi) = sample_range(samples)?;
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in samples {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let edges: Vec<f64> = (0..=bins).map(|k| if k == bins { hi } else { lo + k as f64 * width }).collect();
    let total = samples.len() as f64;
    let densities = counts.iter().zip(edges.windows(2)).map(|(&c, w)| c as f64 / (total * (w[1] - w[0]))).collect();
    Ok(Histogram { edges, densities, count: samples.len() })
}

fn sample_range(samples: &[f64]) -> Result<(f64, f64)> {
    let first = *samples.first().ok_or(Error::Empty)?;
    let (lo, hi) = samples.iter().fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(hi > lo) {
        return Err(Error::Degenerate(hi - lo));
    }
    Ok((lo, hi))
}

/// Gaussian kernel density estimate `(1/(hM)) Σ s((x - Q_m)/h)`.
pub fn kde(samples: &[f64], bandwidth: f64, x: f64) -> Result<f64> {
    if !(bandwidth > 0.0) {
        return Err(Error::Config(alloc::format!("bandwidth must be positive, got {bandwidth}")));
    }
    if samples.is_empty() {
        return Err(Error::Empty);
    }
    let inv_h = 1.0 / bandwidth;
    let sum: f64 = samples.iter().map(|q| std_normal_pdf((x - q) * inv_h)).sum();
    Ok(sum * inv_h / samples.len() as f64)
}

/// `n` equispaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Root-mean-square difference `√(Σ (f - g)² / |grid|)`.
pub fn l2_distance<F, G>(f: F, g: G, grid: &[f64]) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if grid.is_empty() {
        return Err(Error::Empty);
    }
    let ss: f64 = grid.iter().map(|&x| (f(x) - g(x)).powi(2)).sum();
    Ok((ss / grid.len() as f64).sqrt())
}

/// RMS over bin centers of `series - density`; the histogram must be of
/// standardized samples.
pub fn series_vs_histogram_distance(series: &TruncatedSeries, hist: &Histogram) -> f64 {
    let ss: f64 = hist.centers().iter().zip(&hist.densities).map(|(&x, d)| (series.evaluate(x) - d).powi(2)).sum();
    (ss / hist.bins() as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Successive expansions settled below the tolerance.
    Convergent,
    /// The order closest to the crude histogram was taken.
    Divergent,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Convergent => "convergent",
            Branch::Divergent => "divergent",
        }
    }
}

/// One row of the selection table.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderRow {
    pub order: usize,
    /// RMS distance to the previous order's curve on the evaluation grid.
    pub successive: Option<f64>,
    /// RMS distance to the crude histogram (divergent branch only).
    pub histogram: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderSelectionReport {
    pub kind: SeriesKind,
    pub chosen_order: usize,
    pub branch: Branch,
    pub rows: Vec<OrderRow>,
    pub warnings: Vec<String>,
}

/// Tunables of [`select_order`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionOptions {
    pub tol: f64,
    /// Highest order tried; at most 6 for GC and 4 for ED.
    pub max_order: usize,
    pub bins: usize,
    pub grid_points: usize,
}

impl SelectionOptions {
    pub fn new(kind: SeriesKind) -> Self {
        Self { tol: DEFAULT_TOLERANCE, max_order: *kind.orders().end(), bins: DEFAULT_BINS, grid_points: DEFAULT_GRID_POINTS }
    }
}

/// Standardizes raw samples with the given raw moments.
pub fn standardize_samples(samples: &[f64], moments: &MomentVector) -> Result<Vec<f64>> {
    let var = moments.variance();
    if !(var > 0.0) {
        return Err(Error::Degenerate(var));
    }
    let (mean, sd) = (moments.get(1), var.sqrt());
    Ok(samples.iter().map(|v| (v - mean) / sd).collect())
}

/// Picks the truncation order of a `kind` series.
///
/// `moments(l)` returns raw moments `m_1..m_l` of the QoI and is called once; `crude` holds raw
/// QoI samples used for the evaluation range and, if needed, the histogram.
/// Orders are added one at a time and each new curve is compared with the
/// previous one on a grid over the standardized crude range. If these
/// distances keep decreasing and one drops below `tol`, the earlier order of
/// that pair is chosen. Otherwise every order up to `max_order` is compared
/// with the crude histogram and the closest one wins, ties going to the
/// smaller order.
pub fn select_order<P>(
    moments: P,
    kind: SeriesKind,
    crude: &[f64],
    opts: &SelectionOptions,
) -> Result<OrderSelectionReport>
where
    P: FnOnce(usize) -> Result<MomentVector>,
{
    let orders = kind.orders();
    let first = *orders.start();
    if !orders.contains(&opts.max_order) || opts.max_order <= first {
        return Err(Error::Range(alloc::format!(
            "max order for {} must lie in {}..={}, got {}",
            kind.as_str(),
            first + 1,
            orders.end(),
            opts.max_order
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Config(alloc::format!("tolerance must be positive, got {}", opts.tol)));
    }
    let mut warnings = Vec::new();
    if crude.len() < MIN_CRUDE_SAMPLES {
        warnings.push(alloc::format!(
            "only {} crude samples (fewer than {MIN_CRUDE_SAMPLES}); the histogram is unreliable",
            crude.len()
        ));
    }
    let need = kind.cumulants_needed(opts.max_order).max(2);
    let raw = moments(need)?;
    if raw.order() < need {
        return Err(Error::Dimension { expected: need, found: raw.order() });
    }
    let kappa = moments_to_cumulants(&standardize_moments(&raw)?);
    let series_at = |order: usize| build_series(kind, &kappa, order);
    let first_series = series_at(first)?;
    let standardized = standardize_samples(crude, &raw)?;
    let (lo, hi) = sample_range(&standardized)?;
    let grid = linspace(lo, hi, opts.grid_points);
    let curve = |s: &TruncatedSeries| grid.iter().map(|&x| s.evaluate(x)).collect::<Vec<f64>>();
    let rms = |a: &[f64], b: &[f64]| (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt();

    let mut series = vec![first_series];
    let mut rows = vec![OrderRow { order: first, successive: None, histogram: None }];
    let mut prev_curve = curve(&series[0]);
    let mut prev_diff = f64::INFINITY;
    for order in first + 1..=opts.max_order {
        let s = series_at(order)?;
        let c = curve(&s);
        let d = rms(&c, &prev_curve);
        rows.push(OrderRow { order, successive: Some(d), histogram: None });
        series.push(s);
        if d >= prev_diff {
            break;
        }
        if d < opts.tol {
            return Ok(OrderSelectionReport { kind, chosen_order: order - 1, branch: Branch::Convergent, rows, warnings });
        }
        prev_diff = d;
        prev_curve = c;
    }
    // fill in the orders skipped by an early non-monotone exit
    let last = series.last().map_or(first, TruncatedSeries::order);
    for order in last + 1..=opts.max_order {
        let s = series_at(order)?;
        let prev = curve(series.last().expect("nonempty"));
        let d = rms(&curve(&s), &prev);
        rows.push(OrderRow { order, successive: Some(d), histogram: None });
        series.push(s);
    }
    let hist = build_histogram(&standardized, opts.bins)?;
    let mut best = (f64::INFINITY, first);
    for (row, s) in rows.iter_mut().zip(&series) {
        let d = series_vs_histogram_distance(s, &hist);
        row.histogram = Some(d);
        if d < best.0 {
            best = (d, row.order);
        }
    }
    Ok(OrderSelectionReport { kind, chosen_order: best.1, branch: Branch::Divergent, rows, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize) -> Vec<f64> {
        (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
    }

    #[test]
    fn histogram_normalization() {
        let h = build_histogram(&uniform(10_000), 10).unwrap();
        assert!((h.integral() - 1.0).abs() < 1e-12);
        for d in &h.densities {
            assert!((d - 1.0).abs() < 0.02);
        }
        let skewed: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.01).powi(3)).collect();
        assert!((build_histogram(&skewed, 37).unwrap().integral() - 1.0).abs() < 1e-12);
        assert!(matches!(build_histogram(&[1.0, 1.0], 5), Err(Error::Degenerate(_))));
        assert!(build_histogram(&[1.0, 2.0], 1).is_err());
    }

    #[test]
    fn kde_properties() {
        assert!((kde(&[0.0], 1.0, 0.7).unwrap() - std_normal_pdf(0.7)).abs() < 1e-16);
        let samples = [-1.0, 0.2, 0.3, 2.5];
        let grid = linspace(-10.0, 12.0, 4001);
        let dx = grid[1] - grid[0];
        let integral: f64 = grid.iter().map(|&x| kde(&samples, 0.4, x).unwrap()).sum::<f64>() * dx;
        assert!((integral - 1.0).abs() < 1e-6);
        assert!(kde(&samples, 0.0, 0.0).is_err());
    }

    #[test]
    fn rms_distance() {
        let grid = linspace(-1.0, 1.0, 11);
        assert_eq!(l2_distance(|x| x * x, |x| x * x, &grid).unwrap(), 0.0);
        assert!((l2_distance(|x| x + 0.25, |x| x, &grid).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn gaussian_input_converges_immediately() {
        let gaussian = |l: usize| MomentVector::new([0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0][..l].to_vec());
        let crude: Vec<f64> = linspace(-3.0, 3.0, 500);
        for kind in [SeriesKind::GramCharlier, SeriesKind::Edgeworth] {
            let rep = select_order(gaussian, kind, &crude, &SelectionOptions::new(kind)).unwrap();
            assert_eq!(rep.branch, Branch::Convergent);
            assert_eq!(rep.chosen_order, *kind.orders().start());
            assert!(rep.warnings.is_empty());
        }
    }
}
