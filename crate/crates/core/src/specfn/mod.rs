//! Special functions and quadrature used by the model and the limit laws.
//!
//! Every numerical tolerance used in this module is collected below.

mod bessel;
mod chi2;
mod gamma;
mod kolmogorov;
mod normal;
mod quad;

pub use bessel::{bessel_ratio, fvml_mean_resultant};
pub use chi2::{
    chi2_cdf, chi2_pdf, chi2_quantile, chi2_sf, noncentral_chi2_cdf, noncentral_chi2_quantile,
    noncentral_chi2_sf,
};
pub use gamma::{ln_gamma, regularized_gamma_p, regularized_gamma_q};
pub use kolmogorov::kolmogorov_sf;
pub use normal::normal_quantile;
pub use quad::{integrate, integrate_interval, QuadratureSpec};

/// Relative convergence threshold for series and continued fractions.
pub(crate) const SERIES_EPS: f64 = 1e-16;

/// Iteration cap for the incomplete-gamma series and continued fraction.
pub(crate) const GAMMA_MAX_ITER: usize = 100_000;

/// Iteration cap for the Bessel-ratio continued fraction.
pub(crate) const BESSEL_MAX_ITER: usize = 1_000_000;

/// Poisson tail mass at which the non-central chi-square series stops.
pub(crate) const NONCENTRAL_TAIL_CUTOFF: f64 = 1e-12;

/// Newton iterations for chi-square quantiles before giving up on refinement.
pub(crate) const QUANTILE_MAX_ITER: usize = 200;
