//! Moment and cumulant algebra and truncated Gram-Charlier / Edgeworth
//! density expansions around the standard Gaussian kernel `s(x)`.
//!
//! Both expansions reduce to `s(x) Σ_k c_k He_k(x)` because
//! `D^k s = (-1)^k He_k s`; [`TruncatedSeries`] stores the coefficients
//! `c_k` and evaluates them with one Hermite sweep.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hermite::{binomial, he_all, he_unchecked};
use crate::std_normal_pdf;

/// Highest moment / cumulant order handled.
pub const MAX_ORDER: usize = 8;

/// Highest Gaussian derivative order (ϑ₄ needs the 12th).
pub const MAX_DERIVATIVE: usize = 14;

fn check_order(len: usize) -> Result<()> {
    if len == 0 || len > MAX_ORDER {
        return Err(Error::Range(alloc::format!("moment order must lie in 1..={MAX_ORDER}, got {len}")));
    }
    Ok(())
}

/// Raw moments `m_1..m_L`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    m: Vec<f64>,
}

impl MomentVector {
    pub fn new(m: Vec<f64>) -> Result<Self> {
        check_order(m.len())?;
        Ok(Self { m })
    }

    /// Largest order `L`.
    pub fn order(&self) -> usize {
        self.m.len()
    }

    /// `m_l`, one-based; `m_0 = 1`.
    pub fn get(&self, l: usize) -> f64 {
        if l == 0 {
            1.0
        } else {
            self.m[l - 1]
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.m
    }

    pub fn variance(&self) -> f64 {
        self.get(2) - self.get(1) * self.get(1)
    }
}

/// Cumulants `κ_1..κ_L`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantVector {
    kappa: Vec<f64>,
}

impl CumulantVector {
    pub fn new(kappa: Vec<f64>) -> Result<Self> {
        check_order(kappa.len())?;
        Ok(Self { kappa })
    }

    pub fn order(&self) -> usize {
        self.kappa.len()
    }

    /// `κ_l`, one-based.
    pub fn get(&self, l: usize) -> f64 {
        self.kappa[l - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.kappa
    }

    /// `κ₁ = 0` and `κ₂ = 1` within `tol`.
    pub fn is_standardized(&self, tol: f64) -> bool {
        self.order() >= 2 && self.get(1).abs() <= tol && (self.get(2) - 1.0).abs() <= tol
    }
}

/// Cumulants from raw moments. Orders up to six use the closed polynomial
/// maps; higher orders use `κ_n = m_n - Σ_{k<n} C(n-1, k-1) κ_k m_{n-k}`.
pub fn moments_to_cumulants(m: &MomentVector) -> CumulantVector {
    let l = m.order();
    let (m1, m2) = (m.get(1), if l >= 2 { m.get(2) } else { 0.0 });
    let m3 = if l >= 3 { m.get(3) } else { 0.0 };
    let m4 = if l >= 4 { m.get(4) } else { 0.0 };
    let m5 = if l >= 5 { m.get(5) } else { 0.0 };
    let m6 = if l >= 6 { m.get(6) } else { 0.0 };
    let closed = [
        m1,
        m2 - m1 * m1,
        m3 + 2.0 * m1.powi(3) - 3.0 * m1 * m2,
        m4 - 6.0 * m1.powi(4) + 12.0 * m1 * m1 * m2 - 3.0 * m2 * m2 - 4.0 * m1 * m3,
        m5 - 5.0 * m4 * m1 - 10.0 * m3 * m2 + 20.0 * m3 * m1 * m1 + 30.0 * m2 * m2 * m1 - 60.0 * m2 * m1.powi(3)
            + 24.0 * m1.powi(5),
        m6 - 6.0 * m5 * m1 - 15.0 * m4 * m2 + 30.0 * m4 * m1 * m1 - 10.0 * m3 * m3 + 120.0 * m3 * m2 * m1
            - 120.0 * m3 * m1.powi(3)
            + 30.0 * m2.powi(3)
            - 270.0 * m2 * m2 * m1 * m1
            + 360.0 * m2 * m1.powi(4)
            - 120.0 * m1.powi(6),
    ];
    let mut kappa: Vec<f64> = closed[..l.min(6)].to_vec();
    for n in 7..=l {
        kappa.push(cumulant_recursive(m, &kappa, n));
    }
    CumulantVector { kappa }
}

fn cumulant_recursive(m: &MomentVector, kappa: &[f64], n: usize) -> f64 {
    let mut k = m.get(n);
    for j in 1..n {
        k -= binomial(n - 1, j - 1) * kappa[j - 1] * m.get(n - j);
    }
    k
}

/// Cumulants from raw moments by the recursion alone, at every order.
pub fn moments_to_cumulants_recursive(m: &MomentVector) -> CumulantVector {
    let mut kappa = Vec::with_capacity(m.order());
    for n in 1..=m.order() {
        let k = cumulant_recursive(m, &kappa, n);
        kappa.push(k);
    }
    CumulantVector { kappa }
}

/// Raw moments of `(Q - m₁)/√(m₂ - m₁²)` from the raw moments of `Q`.
pub fn standardize_moments(m: &MomentVector) -> Result<MomentVector> {
    if m.order() < 2 {
        return Err(Error::Range("standardization needs at least two moments".into()));
    }
    let var = m.variance();
    if !(var > 16.0 * f64::EPSILON * m.get(2).abs()) {
        return Err(Error::Degenerate(var));
    }
    let sd = var.sqrt();
    let mean = m.get(1);
    let mut out = Vec::with_capacity(m.order());
    for k in 1..=m.order() {
        let central: f64 = (0..=k).map(|j| binomial(k, j) * m.get(j) * (-mean).powi((k - j) as i32)).sum();
        out.push(central / sd.powi(k as i32));
    }
    out[0] = 0.0;
    out[1] = 1.0;
    Ok(MomentVector { m: out })
}

/// Complete Bell polynomial `B_l(x_1, …, x_l)` by
/// `B_{n+1} = Σ_k C(n, k) B_{n-k} x_{k+1}`, `B_0 = 1`.
pub fn bell(l: usize, xs: &[f64]) -> Result<f64> {
    if l > MAX_ORDER {
        return Err(Error::Range(alloc::format!("Bell polynomial order {l} exceeds {MAX_ORDER}")));
    }
    if xs.len() < l {
        return Err(Error::Dimension { expected: l, found: xs.len() });
    }
    let mut b = vec![1.0; l + 1];
    for n in 0..l {
        b[n + 1] = (0..=n).map(|k| binomial(n, k) * b[n - k] * xs[k]).sum();
    }
    Ok(b[l])
}

/// `D^l s(x) = (-1)^l He_l(x) s(x)`.
pub fn gaussian_derivative(l: usize, x: f64) -> Result<f64> {
    if l > MAX_DERIVATIVE {
        return Err(Error::Range(alloc::format!("derivative order {l} exceeds {MAX_DERIVATIVE}")));
    }
    let sign = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * he_unchecked(l, x) * std_normal_pdf(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesKind {
    GramCharlier,
    Edgeworth,
}

impl SeriesKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SeriesKind::GramCharlier => "gc",
            SeriesKind::Edgeworth => "ed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gc" | "gram-charlier" | "gram_charlier" => Some(SeriesKind::GramCharlier),
            "ed" | "edgeworth" => Some(SeriesKind::Edgeworth),
            _ => None,
        }
    }

    /// Admissible truncation orders.
    pub fn orders(self) -> core::ops::RangeInclusive<usize> {
        match self {
            SeriesKind::GramCharlier => 3..=6,
            SeriesKind::Edgeworth => 1..=4,
        }
    }

    /// Highest cumulant order needed by the series of the given order.
    pub fn cumulants_needed(self, order: usize) -> usize {
        match self {
            SeriesKind::GramCharlier => order,
            SeriesKind::Edgeworth => order + 2,
        }
    }
}

/// A truncated expansion `f(x) = s(x) Σ_k c_k He_k(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    kind: SeriesKind,
    order: usize,
    /// `c_k` for `He_k`, `k = 0..=max degree`.
    coeffs: Vec<f64>,
}

impl TruncatedSeries {
    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn label(&self) -> alloc::string::String {
        alloc::format!("{}{}", self.kind.as_str().to_ascii_uppercase(), self.order)
    }

    pub fn hermite_coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Pointwise value; truncated series may be negative.
    pub fn evaluate(&self, x: f64) -> f64 {
        let mut h = Vec::with_capacity(self.coeffs.len());
        he_all(self.coeffs.len() - 1, x, &mut h);
        let poly: f64 = self.coeffs.iter().zip(&h).map(|(c, hk)| c * hk).sum();
        poly * std_normal_pdf(x)
    }
}

/// Pointwise value of a series.
pub fn evaluate_series(series: &TruncatedSeries, x: f64) -> f64 {
    series.evaluate(x)
}

const STANDARDIZED_TOL: f64 = 1e-6;

fn require_standardized(kappa: &CumulantVector, needed: usize) -> Result<()> {
    if !kappa.is_standardized(STANDARDIZED_TOL) {
        return Err(Error::Config(alloc::format!(
            "series need standardized cumulants, got κ₁ = {}, κ₂ = {}",
            kappa.get(1),
            if kappa.order() >= 2 { kappa.get(2) } else { f64::NAN }
        )));
    }
    if kappa.order() < needed {
        return Err(Error::Dimension { expected: needed, found: kappa.order() });
    }
    Ok(())
}

/// Gram-Charlier series `s(x)(1 + Σ_{l=3}^{order} B_l(0, 0, κ₃, …, κ_l) He_l(x)/l!)`.
pub fn gc_series(kappa: &CumulantVector, order: usize) -> Result<TruncatedSeries> {
    let kind = SeriesKind::GramCharlier;
    if !kind.orders().contains(&order) {
        return Err(Error::Range(alloc::format!("Gram-Charlier order must lie in 3..=6, got {order}")));
    }
    require_standardized(kappa, order)?;
    let mut xs = vec![0.0; order];
    xs[2..order].copy_from_slice(&kappa.as_slice()[2..order]);
    let mut coeffs = vec![0.0; order + 1];
    coeffs[0] = 1.0;
    let mut fact = 2.0;
    for (l, c) in coeffs.iter_mut().enumerate().skip(3) {
        fact *= l as f64;
        *c = bell(l, &xs)? / fact;
    }
    Ok(TruncatedSeries { kind, order, coeffs })
}

/// Edgeworth series `Σ_{l=0}^{order} (-1)^l ϑ_l(x)` at `r = 1`.
pub fn ed_series(kappa: &CumulantVector, order: usize) -> Result<TruncatedSeries> {
    ed_series_with_r(kappa, order, 1.0)
}

/// Edgeworth series `Σ_{l=0}^{order} (-1)^l ϑ_l(x) / r^{l/2}` with scaled
/// cumulants `ν_l = κ_l` of the summand.
pub fn ed_series_with_r(kappa: &CumulantVector, order: usize, r: f64) -> Result<TruncatedSeries> {
    let kind = SeriesKind::Edgeworth;
    if !kind.orders().contains(&order) {
        return Err(Error::Unsupported(alloc::format!("Edgeworth order must lie in 1..=4, got {order}")));
    }
    if !(r > 0.0) {
        return Err(Error::Config(alloc::format!("r must be positive, got {r}")));
    }
    require_standardized(kappa, order + 2)?;
    let nu = |l: usize| if l <= kappa.order() { kappa.get(l) } else { 0.0 };
    let (n3, n4, n5, n6) = (nu(3), nu(4), nu(5), nu(6));
    // ϑ_l as (factor, derivative order) pairs
    let theta: [&[(f64, usize)]; 5] = [
        &[(1.0, 0)],
        &[(n3 / 6.0, 3)],
        &[(n4 / 24.0, 4), (n3 * n3 / 72.0, 6)],
        &[(n5 / 120.0, 5), (n3 * n4 / 144.0, 7), (n3.powi(3) / 1296.0, 9)],
        &[
            (n6 / 720.0, 6),
            (n4 * n4 / 1152.0 + n3 * n5 / 720.0, 8),
            (n3 * n3 * n4 / 1728.0, 10),
            (n3.powi(4) / 31104.0, 12),
        ],
    ];
    let mut coeffs = vec![0.0; 3 * order + 1];
    for (l, terms) in theta.iter().enumerate().take(order + 1) {
        let scale = if l % 2 == 0 { 1.0 } else { -1.0 } / r.powf(l as f64 / 2.0);
        for &(factor, k) in terms.iter() {
            let dsign = if k % 2 == 0 { 1.0 } else { -1.0 };
            coeffs[k] += scale * dsign * factor;
        }
    }
    Ok(TruncatedSeries { kind, order, coeffs })
}

/// Builds a series of either kind.
pub fn build_series(kind: SeriesKind, kappa: &CumulantVector, order: usize) -> Result<TruncatedSeries> {
    match kind {
        SeriesKind::GramCharlier => gc_series(kappa, order),
        SeriesKind::Edgeworth => ed_series(kappa, order),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_cumulants() -> CumulantVector {
        CumulantVector::new(vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn gaussian_moments_have_trivial_cumulants() {
        let m = MomentVector::new(vec![0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0]).unwrap();
        let k = moments_to_cumulants(&m);
        for (l, &v) in k.as_slice().iter().enumerate() {
            let want = if l == 1 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-14, "κ_{} = {v}", l + 1);
        }
    }

    #[test]
    fn point_mass_cumulants() {
        let mu: f64 = 0.7;
        let m = MomentVector::new((1..=6).map(|l| mu.powi(l)).collect()).unwrap();
        let k = moments_to_cumulants(&m);
        assert!((k.get(1) - mu).abs() < 1e-15);
        for l in 2..=6 {
            assert!(k.get(l).abs() < 1e-13, "κ_{l} = {}", k.get(l));
        }
    }

    #[test]
    fn closed_forms_agree_with_recursion() {
        let m = MomentVector::new(vec![0.3, 1.4, -0.2, 5.1, 2.2, 40.0]).unwrap();
        let a = moments_to_cumulants(&m);
        let b = moments_to_cumulants_recursive(&m);
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).abs() < 1e-12 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn standardization() {
        let m = MomentVector::new(vec![0.0, 1.0, 0.5, 3.2]).unwrap();
        let s = standardize_moments(&m).unwrap();
        for (a, b) in s.as_slice().iter().zip(m.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
        // Q -> 2Q + 3
        let (a, b) = (2.0, 3.0);
        let raw = [0.0, 1.0, 0.5, 3.2];
        let mom = |k: usize| if k == 0 { 1.0 } else { raw[k - 1] };
        let shifted: Vec<f64> = (1..=4)
            .map(|k| (0..=k).map(|j| binomial(k, j) * a.powi(j as i32) * mom(j) * b.powi((k - j) as i32)).sum())
            .collect();
        let t = standardize_moments(&MomentVector::new(shifted).unwrap()).unwrap();
        for (x, y) in t.as_slice().iter().zip(s.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
        let c = MomentVector::new(vec![2.0, 4.0, 8.0]).unwrap();
        assert!(matches!(standardize_moments(&c), Err(Error::Degenerate(_))));
    }

    #[test]
    fn bell_values() {
        assert_eq!(bell(1, &[2.5]).unwrap(), 2.5);
        assert_eq!(bell(3, &[1.0, 1.0, 1.0]).unwrap(), 5.0);
        assert_eq!(bell(0, &[]).unwrap(), 1.0);
        for l in 1..=8 {
            assert_eq!(bell(l, &[0.0; 8]).unwrap(), 0.0);
        }
        // B_l(1, …, 1) are the Bell numbers
        let bell_numbers = [1.0, 1.0, 2.0, 5.0, 15.0, 52.0, 203.0, 877.0, 4140.0];
        for (l, &b) in bell_numbers.iter().enumerate() {
            assert_eq!(bell(l, &[1.0; 8]).unwrap(), b);
        }
    }

    #[test]
    fn gaussian_derivatives() {
        let s0 = std_normal_pdf(0.0);
        assert_eq!(gaussian_derivative(0, 0.3).unwrap(), std_normal_pdf(0.3));
        assert_eq!(gaussian_derivative(1, 0.0).unwrap(), 0.0);
        assert!((gaussian_derivative(2, 0.0).unwrap() + s0).abs() < 1e-16);
        // s' = -x s
        let x = 0.8;
        assert!((gaussian_derivative(1, x).unwrap() + x * std_normal_pdf(x)).abs() < 1e-16);
        assert!(gaussian_derivative(15, 0.0).is_err());
    }

    #[test]
    fn gaussian_fixed_point() {
        let k = gaussian_cumulants();
        for order in 3..=6 {
            let s = gc_series(&k, order).unwrap();
            assert_eq!(s.evaluate(0.4), std_normal_pdf(0.4));
        }
        for order in 1..=4 {
            let s = ed_series(&k, order).unwrap();
            assert_eq!(s.evaluate(-1.3), std_normal_pdf(-1.3));
        }
    }

    #[test]
    fn gc3_is_ed1() {
        let k = CumulantVector::new(vec![0.0, 1.0, -0.79329, 1.16802, -2.55194, 7.44632]).unwrap();
        let gc = gc_series(&k, 3).unwrap();
        let ed = ed_series(&k, 1).unwrap();
        for i in 0..=100 {
            let x = -6.0 + 0.12 * i as f64;
            assert!((gc.evaluate(x) - ed.evaluate(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn ed2_structure() {
        let k = CumulantVector::new(vec![0.0, 1.0, 0.0, 0.9, 0.0, 0.0]).unwrap();
        let ed = ed_series(&k, 2).unwrap();
        let x = 1.1;
        let want = std_normal_pdf(x) * (1.0 + 0.9 / 24.0 * he_unchecked(4, x));
        assert!((ed.evaluate(x) - want).abs() < 1e-15);
    }

    #[test]
    fn contracts() {
        let raw = CumulantVector::new(vec![0.5, 2.0, 0.1]).unwrap();
        assert!(gc_series(&raw, 3).is_err());
        assert!(matches!(ed_series(&gaussian_cumulants(), 5), Err(Error::Unsupported(_))));
        assert!(gc_series(&gaussian_cumulants(), 7).is_err());
        assert!(MomentVector::new(vec![0.0; 9]).is_err());
    }
}
