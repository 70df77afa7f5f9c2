//! CSV artifacts.
//!
//! Every file starts with `#`-prefixed `key = value` metadata lines, the
//! first of which names the producing version and the artifact. Report
//! tables print floats with 6 significant digits; data meant to be read
//! back (samples, polynomial coefficients, eigenpairs) uses the shortest
//! representation that round-trips exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use sgpdf_core::density::{Histogram, OrderSelectionReport};
use sgpdf_core::fem::QoiKind;
use sgpdf_core::hermite::{MultiIndex, MultiIndexSet};
use sgpdf_core::mc::SampleSet;
use sgpdf_core::sg::QoiPolynomial;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub const VERSION: &str = concat!("sgpdf ", env!("CARGO_PKG_VERSION"));

/// `x` with 6 significant digits and a two-digit signed exponent, e.g.
/// `-3.47979e-02`.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.5e}");
    let (mantissa, exp) = s.split_once('e').expect("LowerExp always has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

/// Shortest exactly round-tripping form.
pub fn exact(x: f64) -> String {
    format!("{x:e}")
}

/// Metadata lines of a CSV file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Header {
    pub entries: Vec<(String, String)>,
}

impl Header {
    pub fn new(artifact: &str) -> Self {
        Self { entries: vec![("version".into(), VERSION.into()), ("artifact".into(), artifact.into())] }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    /// Appends every configuration entry.
    pub fn config(mut self, cfg: &ExperimentConfig) -> Self {
        for (k, v) in cfg.entries() {
            self.entries.push((k.into(), v));
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn require(&self, path: &Path, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| CliError::format(path, format!("missing metadata {key:?}")))
    }
}

/// Contents of a CSV artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Header,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn write_table(path: &Path, header: &Header, columns: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    for (k, v) in &header.entries {
        writeln!(out, "# {k} = {v}").map_err(|e| CliError::io(path, e))?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns).map_err(|e| CliError::csv(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut header = Header::default();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some((k, v)) = line[1..].split_once('=') {
            header.entries.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let columns = r.headers().map_err(|e| CliError::csv(path, e))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(|e| CliError::csv(path, e))?.iter().map(str::to_string).collect());
    }
    Ok(Table { header, columns, rows })
}

fn parse_cell<T: std::str::FromStr>(path: &Path, cell: &str) -> Result<T> {
    cell.trim().parse().map_err(|_| CliError::format(path, format!("cannot parse {cell:?}")))
}

/// Single-column sample file.
pub fn write_samples(path: &Path, set: &SampleSet, header: Header) -> Result<()> {
    let header = header.with("seed", set.seed).with("count", set.len()).with("qoi_kind", set.kind.as_str());
    let rows: Vec<Vec<String>> = set.values.iter().map(|&v| vec![exact(v)]).collect();
    write_table(path, &header, &["qoi"], &rows)
}

pub fn read_samples(path: &Path) -> Result<SampleSet> {
    let t = read_table(path)?;
    if t.columns.len() != 1 {
        return Err(CliError::format(path, "expected a single column of samples"));
    }
    let seed = parse_cell(path, t.header.require(path, "seed")?)?;
    let kind_name = t.header.require(path, "qoi_kind")?;
    let kind = QoiKind::parse(kind_name).ok_or_else(|| CliError::format(path, format!("unknown qoi_kind {kind_name:?}")))?;
    let values = t.rows.iter().map(|r| parse_cell(path, &r[0])).collect::<Result<Vec<f64>>>()?;
    Ok(SampleSet::new(values, seed, kind)?)
}

/// One row per multi-index: the index tuple, then `β`.
pub fn write_qoi_polynomial(path: &Path, qoi: &QoiPolynomial, header: Header) -> Result<()> {
    let dim = qoi.index_set.dim();
    let header = header
        .with("qoi_kind", qoi.kind.as_str())
        .with("dim", dim)
        .with("total_degree", qoi.index_set.degree());
    let mut columns: Vec<String> = (1..=dim).map(|n| format!("i{n}")).collect();
    columns.push("beta".into());
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = qoi
        .index_set
        .indices()
        .iter()
        .zip(&qoi.beta)
        .map(|(idx, &b)| idx.0.iter().map(usize::to_string).chain([exact(b)]).collect())
        .collect();
    write_table(path, &header, &cols, &rows)
}

pub fn read_qoi_polynomial(path: &Path) -> Result<QoiPolynomial> {
    let t = read_table(path)?;
    let dim: usize = parse_cell(path, t.header.require(path, "dim")?)?;
    let degree: usize = parse_cell(path, t.header.require(path, "total_degree")?)?;
    let kind_name = t.header.require(path, "qoi_kind")?;
    let kind = QoiKind::parse(kind_name).ok_or_else(|| CliError::format(path, format!("unknown qoi_kind {kind_name:?}")))?;
    if t.columns.len() != dim + 1 {
        return Err(CliError::format(path, format!("expected {} columns, found {}", dim + 1, t.columns.len())));
    }
    let set = MultiIndexSet::total_degree(dim, degree)?;
    let mut beta = vec![0.0; set.len()];
    let mut filled = vec![false; set.len()];
    for row in &t.rows {
        let idx = MultiIndex(row[..dim].iter().map(|c| parse_cell(path, c)).collect::<Result<_>>()?);
        let k = set
            .position(&idx)
            .ok_or_else(|| CliError::format(path, format!("index {:?} is outside the total-degree set", idx.0)))?;
        beta[k] = parse_cell(path, &row[dim])?;
        filled[k] = true;
    }
    if let Some(k) = filled.iter().position(|f| !f) {
        return Err(CliError::format(path, format!("missing coefficient for index {:?}", set.get(k).0)));
    }
    Ok(QoiPolynomial::new(set, beta, kind)?)
}

/// Two-column curve `(x, f(x))`.
pub fn write_curve(path: &Path, header: Header, xs: &[f64], ys: &[f64]) -> Result<()> {
    let rows: Vec<Vec<String>> = xs.iter().zip(ys).map(|(&x, &y)| vec![sig6(x), sig6(y)]).collect();
    write_table(path, &header, &["x", "f"], &rows)
}

pub fn write_histogram(path: &Path, header: Header, hist: &Histogram) -> Result<()> {
    let rows: Vec<Vec<String>> = hist
        .edges
        .windows(2)
        .zip(&hist.densities)
        .map(|(e, &d)| vec![sig6(e[0]), sig6(e[1]), sig6(0.5 * (e[0] + e[1])), sig6(d)])
        .collect();
    write_table(path, &header.with("count", hist.count), &["left", "right", "center", "density"], &rows)
}

fn opt6(v: Option<f64>) -> String {
    v.map_or(String::new(), sig6)
}

pub fn write_order_report(path: &Path, header: Header, report: &OrderSelectionReport) -> Result<()> {
    let header = header
        .with("expansion", report.kind.as_str())
        .with("branch", report.branch.as_str())
        .with("chosen_order", report.chosen_order);
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.order.to_string(),
                opt6(r.successive),
                opt6(r.histogram),
                (r.order == report.chosen_order).to_string(),
            ]
        })
        .collect();
    write_table(path, &header, &["order", "successive_l2", "histogram_distance", "chosen"], &rows)
}

/// Human-readable selection table.
pub fn format_order_report(report: &OrderSelectionReport) -> String {
    let mut s = format!(
        "{} order selection: {} branch, chosen order {}\n",
        report.kind.as_str().to_uppercase(),
        report.branch.as_str(),
        report.chosen_order
    );
    s += &format!("{:>6}  {:>14}  {:>14}\n", "order", "successive l2", "vs histogram");
    for r in &report.rows {
        let mark = if r.order == report.chosen_order { " *" } else { "" };
        s += &format!("{:>6}  {:>14}  {:>14}{mark}\n", r.order, opt6(r.successive), opt6(r.histogram));
    }
    for w in &report.warnings {
        s += &format!("warning: {w}\n");
    }
    s
}
