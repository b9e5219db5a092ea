//! Central and non-central chi-square distributions.

use super::gamma::{gamma_pq, ln_gamma};
use super::normal::normal_quantile;
use super::{NONCENTRAL_TAIL_CUTOFF, QUANTILE_MAX_ITER};
use crate::error::{Error, Result};

/// `P(χ²_df <= x) = P(df/2, x/2)`.
pub fn chi2_cdf(x: f64, df: u32) -> f64 {
    assert!(df >= 1, "chi-square needs df >= 1");
    if x <= 0.0 {
        return 0.0;
    }
    gamma_pq(0.5 * df as f64, 0.5 * x).0
}

/// Upper tail `P(χ²_df > x)`, computed without cancellation.
pub fn chi2_sf(x: f64, df: u32) -> f64 {
    assert!(df >= 1, "chi-square needs df >= 1");
    if x <= 0.0 {
        return 1.0;
    }
    gamma_pq(0.5 * df as f64, 0.5 * x).1
}

pub fn chi2_pdf(x: f64, df: u32) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let k = 0.5 * df as f64;
    if x == 0.0 {
        return match df {
            1 => f64::INFINITY,
            2 => 0.5,
            _ => 0.0,
        };
    }
    ((k - 1.0) * x.ln() - 0.5 * x - k * std::f64::consts::LN_2 - ln_gamma(k)).exp()
}

/// Inverse of [`chi2_cdf`]: Wilson–Hilferty starting point refined by
/// Newton steps, falling back to bisection whenever a step leaves the
/// current bracket.
pub fn chi2_quantile(prob: f64, df: u32) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::domain(format!(
            "chi-square quantile needs 0 < prob < 1, got {prob}"
        )));
    }
    if df == 0 {
        return Err(Error::domain("chi-square needs df >= 1"));
    }
    let k = df as f64;
    // Solve on whichever tail is smaller so the residual keeps full precision.
    let upper = prob > 0.5;
    let target = if upper { 1.0 - prob } else { prob };
    let residual = |x: f64| {
        if upper {
            target - chi2_sf(x, df)
        } else {
            chi2_cdf(x, df) - target
        }
    };

    let z = normal_quantile(prob);
    let h = 2.0 / (9.0 * k);
    let mut x = k * (1.0 - h + z * h.sqrt()).powi(3);
    if !(x.is_finite() && x > 0.0) {
        // small-x behaviour: F(x) ~ (x/2)^{k/2} / Γ(k/2 + 1)
        x = 2.0 * ((prob.ln() + ln_gamma(0.5 * k + 1.0)) / (0.5 * k)).exp();
    }

    let mut lo = 0.0;
    let mut hi = x.max(1.0);
    while residual(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    x = x.clamp(lo, hi);
    for _ in 0..QUANTILE_MAX_ITER {
        let r = residual(x);
        if r == 0.0 {
            return Ok(x);
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = chi2_pdf(x, df);
        let mut next = x - r / slope;
        if !(next.is_finite() && next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.max(1e-300) || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Poisson(nc/2) weights `w_j` paired with `(P, Q)(df/2 + j, x/2)`, summed
/// outward from the Poisson mode until the neglected weight drops below
/// [`NONCENTRAL_TAIL_CUTOFF`]. Returns `(Σ w P, Σ w Q, neglected weight)`.
fn noncentral_sums(x: f64, df: u32, nc: f64) -> (f64, f64, f64) {
    let lambda = 0.5 * nc;
    let half_x = 0.5 * x;
    let a0 = 0.5 * df as f64;
    let mode = lambda.floor();
    let log_w = |j: f64| -lambda + j * lambda.ln() - ln_gamma(j + 1.0);

    let (mut sum_p, mut sum_q, mut weight) = (0.0, 0.0, 0.0);
    let mut j = mode;
    loop {
        let w = log_w(j).exp();
        let (p, q) = gamma_pq(a0 + j, half_x);
        sum_p += w * p;
        sum_q += w * q;
        weight += w;
        if j == 0.0 || w < 1e-300 {
            break;
        }
        j -= 1.0;
    }
    let mut j = mode + 1.0;
    while 1.0 - weight > NONCENTRAL_TAIL_CUTOFF {
        let w = log_w(j).exp();
        if w == 0.0 {
            break;
        }
        let (p, q) = gamma_pq(a0 + j, half_x);
        sum_p += w * p;
        sum_q += w * q;
        weight += w;
        j += 1.0;
    }
    (sum_p, sum_q, (1.0 - weight).max(0.0))
}

/// CDF of the non-central chi-square `χ²_df(nc)`; `nc = 0` is exactly
/// [`chi2_cdf`].
pub fn noncentral_chi2_cdf(x: f64, df: u32, nc: f64) -> f64 {
    assert!(nc >= 0.0, "non-centrality must be >= 0");
    if nc == 0.0 {
        return chi2_cdf(x, df);
    }
    if x <= 0.0 {
        return 0.0;
    }
    noncentral_sums(x, df, nc).0.clamp(0.0, 1.0)
}

/// Upper tail of `χ²_df(nc)`; the neglected Poisson mass is counted as
/// exceeding `x`.
pub fn noncentral_chi2_sf(x: f64, df: u32, nc: f64) -> f64 {
    assert!(nc >= 0.0, "non-centrality must be >= 0");
    if nc == 0.0 {
        return chi2_sf(x, df);
    }
    if x <= 0.0 {
        return 1.0;
    }
    let (_, q, rest) = noncentral_sums(x, df, nc);
    (q + rest).clamp(0.0, 1.0)
}

/// Quantile of `χ²_df(nc)` by bisection on the CDF.
pub fn noncentral_chi2_quantile(prob: f64, df: u32, nc: f64) -> Result<f64> {
    if nc == 0.0 {
        return chi2_quantile(prob, df);
    }
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::domain(format!("quantile needs 0 < prob < 1, got {prob}")));
    }
    let mut lo = 0.0;
    let mut hi = chi2_quantile(prob, df)? + nc + 10.0;
    while noncentral_chi2_cdf(hi, df, nc) < prob {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if noncentral_chi2_cdf(mid, df, nc) < prob {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
