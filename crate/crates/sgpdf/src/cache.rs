//! On-disk cache of KL eigenpairs.
//!
//! One file per `(refinement, σ_γ, L, N, covariance rule)`; the key is
//! repeated in the metadata and checked on load, so a stale or foreign file
//! is recomputed rather than trusted.

use std::path::{Path, PathBuf};

use sgpdf_core::fem::StructuredQuadMesh;
use sgpdf_core::kl::{separable_eigenpairs, CovarianceQuadrature, CovarianceSpec};

use crate::error::{CliError, Result};
use crate::io::{exact, read_table, write_table, Header};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenKey {
    pub refinement: usize,
    pub sigma_gamma: f64,
    pub corr_length: f64,
    pub terms: usize,
    pub rule: CovarianceQuadrature,
}

impl EigenKey {
    pub fn file_name(&self) -> String {
        format!(
            "kl_r{}_s{}_l{}_n{}_{}.csv",
            self.refinement,
            exact(self.sigma_gamma),
            exact(self.corr_length),
            self.terms,
            self.rule.as_str()
        )
    }

    fn header(&self) -> Header {
        Header::new("kl_eigenpairs")
            .with("refinement", self.refinement)
            .with("sigma_gamma", exact(self.sigma_gamma))
            .with("corr_length", exact(self.corr_length))
            .with("terms", self.terms)
            .with("covariance_quadrature", self.rule.as_str())
    }

    fn matches(&self, h: &Header) -> bool {
        let want = self.header();
        want.entries.iter().skip(1).all(|(k, v)| h.get(k) == Some(v.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpairs {
    pub eigenvalues: Vec<f64>,
    /// `M`-normalized nodal vectors.
    pub modes: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    /// Computed and written.
    Stored,
}

pub fn compute(key: &EigenKey) -> Result<Eigenpairs> {
    let mesh = StructuredQuadMesh::new(key.refinement)?;
    let spec = CovarianceSpec::new(key.sigma_gamma, key.corr_length)?;
    let (eigenvalues, modes) = separable_eigenpairs(&mesh, &spec, key.terms, key.rule)?;
    Ok(Eigenpairs { eigenvalues, modes })
}

/// Columns `lambda_1..lambda_N`: the first row holds the eigenvalues, then
/// one row per mesh node.
pub fn store(path: &Path, key: &EigenKey, pairs: &Eigenpairs) -> Result<()> {
    let columns: Vec<String> = (1..=key.terms).map(|n| format!("mode_{n}")).collect();
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let nodes = pairs.modes.first().map_or(0, Vec::len);
    let mut rows = Vec::with_capacity(nodes + 1);
    rows.push(pairs.eigenvalues.iter().map(|&l| exact(l)).collect());
    for i in 0..nodes {
        rows.push(pairs.modes.iter().map(|m| exact(m[i])).collect());
    }
    write_table(path, &key.header().with("nodes", nodes), &cols, &rows)
}

/// `None` if the file does not exist or belongs to another key.
pub fn load(path: &Path, key: &EigenKey) -> Result<Option<Eigenpairs>> {
    if !path.exists() {
        return Ok(None);
    }
    let t = read_table(path)?;
    if !key.matches(&t.header) {
        return Ok(None);
    }
    let parse = |c: &str| c.parse::<f64>().map_err(|_| CliError::format(path, format!("cannot parse {c:?}")));
    let (first, rest) = t.rows.split_first().ok_or_else(|| CliError::format(path, "no eigenvalue row"))?;
    if first.len() != key.terms || rest.iter().any(|r| r.len() != key.terms) {
        return Err(CliError::format(path, format!("expected {} columns", key.terms)));
    }
    let expected_nodes = StructuredQuadMesh::new(key.refinement)?.num_nodes();
    if rest.len() != expected_nodes {
        return Err(CliError::format(path, format!("expected {expected_nodes} node rows, found {}", rest.len())));
    }
    let eigenvalues = first.iter().map(|c| parse(c)).collect::<Result<Vec<_>>>()?;
    let mut modes = vec![Vec::with_capacity(rest.len()); key.terms];
    for row in rest {
        for (m, c) in modes.iter_mut().zip(row) {
            m.push(parse(c)?);
        }
    }
    Ok(Some(Eigenpairs { eigenvalues, modes }))
}

/// Loads the eigenpairs from `dir`, computing and storing them on a miss.
pub fn load_or_compute(dir: &Path, key: &EigenKey) -> Result<(Eigenpairs, CacheStatus, PathBuf)> {
    let path = dir.join(key.file_name());
    if let Some(p) = load(&path, key)? {
        return Ok((p, CacheStatus::Hit, path));
    }
    let pairs = compute(key)?;
    store(&path, key, &pairs)?;
    Ok((pairs, CacheStatus::Stored, path))
}
