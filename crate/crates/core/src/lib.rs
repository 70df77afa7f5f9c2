//! Numerical core for approximating the density of scalar quantities of
//! interest of a 2D Poisson problem with a log-normal random coefficient.
//!
//! The crate is `no_std` (it needs `alloc`). It covers
//!
//! * [`fem`]: structured bi-quadratic (Q2) finite elements on the unit square,
//! * [`kl`]: Karhunen-Loève discretization of the log-coefficient covariance,
//! * [`hermite`]: probabilist Hermite polynomials, total-degree index sets and
//!   Gauss-Hermite rules,
//! * [`mc`]: Monte Carlo sampling of the PDE and moment estimators,
//! * [`sg`]: the stochastic Galerkin solver with exact moment quadrature,
//! * [`series`]: moment/cumulant algebra and truncated Gram-Charlier and
//!   Edgeworth expansions,
//! * [`density`]: histogram and kernel density baselines and the truncation
//!   order selector.
//!
//! File formats, configuration and the command line live in the `sgpdf`
//! companion crate.
#![no_std]
// `!(x > 0.0)` guards deliberately reject NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index loops mirror the matrix formulas they implement
#![allow(clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod density;
pub mod error;
pub mod fem;
pub mod hermite;
pub mod kl;
pub mod linalg;
pub mod mc;
pub mod series;
pub mod sg;

pub use error::{Error, Result};

/// Density of the standard Gaussian, `exp(-x²/2)/√(2π)`.
#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    #[allow(unused_imports)]
    use num_traits::Float;
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}
