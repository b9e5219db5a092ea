//! Test statistics for `H₀: θ = θ₀`, the spherical mean, the rejection
//! decision, and the FvML likelihood quantities behind the LAN expansion.

pub mod ks;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geom::{normalize, SquareMatrix, UnitVector};
use crate::limits::{LimitLaw, QuantileCache};
use crate::model::{RegimeKind, RegimeSpec};
use crate::sampling::{Summarized, Summary};

/// Threshold on `||X̄||` and on the Watson/Wald denominator.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// The tests compared throughout the crate. The two oracle Wald variants
/// share the Wald statistic and differ only in their null law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TestKind {
    Watson,
    Wald,
    /// Wald statistic against its limiting law under contiguity with known `ξ`.
    ContiguityWald,
    /// Wald statistic against its limiting law under strict contiguity.
    StrictContiguityWald,
    /// `||√(np) X̄ - ξθ₀||²` against `χ²_p`; needs the true `ξ`.
    Oracle,
}

impl TestKind {
    pub const ALL: [TestKind; 5] = [
        TestKind::Watson,
        TestKind::Wald,
        TestKind::ContiguityWald,
        TestKind::StrictContiguityWald,
        TestKind::Oracle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TestKind::Watson => "watson",
            TestKind::Wald => "wald",
            TestKind::ContiguityWald => "contiguity_wald",
            TestKind::StrictContiguityWald => "strict_contiguity_wald",
            TestKind::Oracle => "oracle",
        }
    }

    /// Null law of the statistic; `xi` only matters for the contiguity Wald
    /// test.
    pub fn null_law(&self, p: usize, xi: f64) -> Result<LimitLaw> {
        let df = p as u32;
        match self {
            TestKind::Watson | TestKind::Wald => LimitLaw::chi_square(df - 1),
            TestKind::ContiguityWald => LimitLaw::wald_mixture(df - 1, xi),
            TestKind::StrictContiguityWald => LimitLaw::wald_mixture(df - 1, 0.0),
            TestKind::Oracle => LimitLaw::chi_square(df),
        }
    }

    pub fn statistic<S: Summarized + ?Sized>(
        &self,
        sample: &S,
        theta0: &UnitVector,
        xi: f64,
    ) -> Result<f64> {
        match self {
            TestKind::Watson => watson_statistic(sample, theta0),
            TestKind::Wald | TestKind::ContiguityWald | TestKind::StrictContiguityWald => {
                wald_statistic(sample, theta0)
            }
            TestKind::Oracle => oracle_statistic(sample, theta0, xi),
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        TestKind::ALL
            .into_iter()
            .find(|t| t.name() == key)
            .ok_or_else(|| Error::domain(format!("unknown test `{s}`")))
    }
}

fn check_theta<S: Summarized + ?Sized>(sample: &S, theta: &UnitVector) -> Result<Summary> {
    let s = sample.summary().into_owned();
    if s.n() == 0 {
        return Err(Error::domain("empty sample"));
    }
    if s.dim() != theta.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: theta.dim(),
        });
    }
    Ok(s)
}

/// `θ̂ = X̄ / ||X̄||`.
pub fn spherical_mean<S: Summarized + ?Sized>(sample: &S) -> Result<UnitVector> {
    let mean = sample.summary().mean();
    let norm = mean.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= DEGENERACY_TOL {
        return Err(Error::DegenerateMean { norm });
    }
    normalize(&mean)
}

/// `||v - (v'θ)θ||²`.
fn tangent_norm_sq(v: &[f64], theta: &UnitVector) -> f64 {
    let c = theta.dot(v);
    v.iter().zip(theta.iter()).map(|(a, t)| (a - c * t).powi(2)).sum()
}

fn denominator(s: &Summary, theta0: &UnitVector) -> Result<f64> {
    let value = 1.0 - s.mean_squared_projection(theta0);
    if value <= DEGENERACY_TOL {
        return Err(Error::DegenerateDenominator { value });
    }
    Ok(value)
}

/// Watson score statistic
/// `W_n = n(p-1) X̄'(I - θ₀θ₀')X̄ / (1 - (1/n) Σ (X_i'θ₀)²)`.
pub fn watson_statistic<S: Summarized + ?Sized>(sample: &S, theta0: &UnitVector) -> Result<f64> {
    let s = check_theta(sample, theta0)?;
    let denom = denominator(&s, theta0)?;
    let (n, p) = (s.n() as f64, s.dim() as f64);
    Ok(n * (p - 1.0) * tangent_norm_sq(&s.mean(), theta0) / denom)
}

/// Wald statistic
/// `S_n = n(p-1) (X̄'θ₀)² θ̂'(I - θ₀θ₀')θ̂ / (1 - (1/n) Σ (X_i'θ₀)²)`,
/// evaluated through `c = θ̂'θ₀` so that it vanishes exactly when `c = 0`.
pub fn wald_statistic<S: Summarized + ?Sized>(sample: &S, theta0: &UnitVector) -> Result<f64> {
    let s = check_theta(sample, theta0)?;
    let theta_hat = spherical_mean(&s)?;
    let denom = denominator(&s, theta0)?;
    let (n, p) = (s.n() as f64, s.dim() as f64);
    let mean_sq: f64 = s.mean().iter().map(|v| v * v).sum();
    let c = theta0.dot(&theta_hat);
    Ok(n * (p - 1.0) * mean_sq * c * c * tangent_norm_sq(&theta_hat, theta0) / denom)
}

/// `Q_BC = np X̄'(I - θ₀θ₀')X̄`, the maximin statistic beyond contiguity.
pub fn q_bc_statistic<S: Summarized + ?Sized>(sample: &S, theta0: &UnitVector) -> Result<f64> {
    let s = check_theta(sample, theta0)?;
    let (n, p) = (s.n() as f64, s.dim() as f64);
    Ok(n * p * tangent_norm_sq(&s.mean(), theta0))
}

/// The bilocal maximin statistic under contiguity; same expression as
/// [`q_bc_statistic`].
pub fn q_c_statistic<S: Summarized + ?Sized>(sample: &S, theta0: &UnitVector) -> Result<f64> {
    q_bc_statistic(sample, theta0)
}

/// `||√(np) X̄ - ξθ₀||²`.
pub fn oracle_statistic<S: Summarized + ?Sized>(
    sample: &S,
    theta0: &UnitVector,
    xi: f64,
) -> Result<f64> {
    if !(xi.is_finite() && xi >= 0.0) {
        return Err(Error::domain(format!("xi must be >= 0, got {xi}")));
    }
    let s = check_theta(sample, theta0)?;
    let scale = (s.n() as f64 * s.dim() as f64).sqrt();
    Ok(s
        .mean()
        .iter()
        .zip(theta0.iter())
        .map(|(m, t)| (scale * m - xi * t).powi(2))
        .sum())
}

/// Result of comparing a statistic with its null critical value.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub test: String,
    pub statistic: f64,
    pub critical_value: f64,
    /// Only for laws with a computable CDF (the chi-square family).
    pub p_value: Option<f64>,
    pub reject: bool,
    pub alpha: f64,
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("level alpha must lie in (0, 1), got {alpha}")))
    }
}

/// Rejects when `statistic > critical value` (strict). Chi-square critical
/// values are analytic; other laws go through `cache`.
pub fn decide(
    test: &str,
    statistic: f64,
    null_law: &LimitLaw,
    alpha: f64,
    cache: &QuantileCache,
) -> Result<TestOutcome> {
    check_alpha(alpha)?;
    let critical_value = cache.critical_value(null_law, alpha)?;
    Ok(TestOutcome {
        test: test.to_string(),
        statistic,
        critical_value,
        p_value: null_law.sf(statistic),
        reject: statistic > critical_value,
        alpha,
    })
}

/// Exact FvML log-likelihood ratio of location `θ₁` against `θ₀` at common
/// concentration: `κ Σ X_i'(θ₁ - θ₀)`.
pub fn fvml_log_likelihood_ratio<S: Summarized + ?Sized>(
    sample: &S,
    theta1: &UnitVector,
    theta0: &UnitVector,
    kappa: f64,
) -> Result<f64> {
    let s = check_theta(sample, theta0)?;
    if theta1.dim() != theta0.dim() {
        return Err(Error::DimensionMismatch {
            expected: theta0.dim(),
            found: theta1.dim(),
        });
    }
    let n = s.n() as f64;
    let mean = s.mean();
    let proj: f64 = mean
        .iter()
        .zip(theta1.iter().zip(theta0.iter()))
        .map(|(m, (a, b))| m * (a - b))
        .sum();
    Ok(n * kappa * proj)
}

/// Central sequence `Δ` and information `Γ` of the LAN expansion
/// `log LR = τ'Δ - τ'Γτ/2 + o_P(1)` for perturbations `θ + ν_n τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lan {
    pub delta: Vec<f64>,
    pub gamma: SquareMatrix,
}

impl Lan {
    /// `τ'Δ - τ'Γτ / 2`.
    pub fn quadratic_approximation(&self, tau: &[f64]) -> f64 {
        let linear: f64 = tau.iter().zip(&self.delta).map(|(t, d)| t * d).sum();
        linear - 0.5 * self.gamma.quadratic_form(tau)
    }
}

pub fn lan_central_sequence<S: Summarized + ?Sized>(
    sample: &S,
    theta: &UnitVector,
    xi: f64,
    regime: &RegimeSpec,
) -> Result<Lan> {
    let s = check_theta(sample, theta)?;
    let p = s.dim();
    let scale = xi * (s.n() as f64 * p as f64).sqrt();
    let mean = s.mean();
    match regime.kind {
        RegimeKind::AwayFromUniformity => Err(Error::UnsupportedRegime(
            "no LAN expansion is provided away from uniformity".into(),
        )),
        RegimeKind::BeyondContiguity => {
            let c = theta.dot(&mean);
            let delta = mean
                .iter()
                .zip(theta.iter())
                .map(|(m, t)| scale * (m - c * t))
                .collect();
            Ok(Lan {
                delta,
                gamma: SquareMatrix::tangent_projector(theta, xi * xi),
            })
        }
        RegimeKind::UnderContiguity => {
            let delta = mean
                .iter()
                .zip(theta.iter())
                .map(|(m, t)| scale * m - xi * xi * t)
                .collect();
            let mut gamma = SquareMatrix::identity(p);
            for i in 0..p {
                gamma.set(i, i, xi * xi);
            }
            Ok(Lan { delta, gamma })
        }
        RegimeKind::StrictContiguity => Ok(Lan {
            delta: vec![0.0; p],
            gamma: SquareMatrix::zeros(p),
        }),
    }
}
