//! Limiting laws of the statistics and of the spherical mean: samplers,
//! Monte-Carlo quantiles, closed-form asymptotic powers.

mod cache;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geom::{normalize, UnitVector};
use crate::model::{RegimeKind, RegimeSpec};
use crate::specfn::{
    chi2_quantile, chi2_sf, noncentral_chi2_cdf, noncentral_chi2_quantile, noncentral_chi2_sf,
};
use crate::stats::{check_alpha, TestKind};

pub use cache::{CacheEntry, QuantileCache, DEFAULT_MC_DRAWS};

/// Slack allowed above `||τ|| = 2` before rejecting a displacement.
const TAU_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitLaw {
    ChiSquare { df: u32 },
    NoncentralChiSquare { df: u32, nc: f64 },
    /// `(1 + Q/(Z + λ)²)^{-1} Q` with `Z ~ N(0,1)` independent of `Q ~ χ²_df`.
    WaldMixture { df: u32, lambda: f64 },
    /// `Z/||Z||` with `Z ~ N(ξ e_p, I_p)`.
    ProjectedNormal { p: usize, xi: f64 },
    UniformSphere { p: usize },
}

fn check_df(df: u32) -> Result<()> {
    if df == 0 {
        Err(Error::domain("degrees of freedom must be >= 1"))
    } else {
        Ok(())
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite and >= 0, got {v}")))
    }
}

impl LimitLaw {
    pub fn chi_square(df: u32) -> Result<Self> {
        check_df(df)?;
        Ok(LimitLaw::ChiSquare { df })
    }

    pub fn noncentral_chi_square(df: u32, nc: f64) -> Result<Self> {
        check_df(df)?;
        check_nonneg("non-centrality", nc)?;
        Ok(LimitLaw::NoncentralChiSquare { df, nc })
    }

    pub fn wald_mixture(df: u32, lambda: f64) -> Result<Self> {
        check_df(df)?;
        check_nonneg("lambda", lambda)?;
        Ok(LimitLaw::WaldMixture { df, lambda })
    }

    pub fn projected_normal(p: usize, xi: f64) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidDimension(p));
        }
        check_nonneg("xi", xi)?;
        Ok(LimitLaw::ProjectedNormal { p, xi })
    }

    pub fn uniform_sphere(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidDimension(p));
        }
        Ok(LimitLaw::UniformSphere { p })
    }

    /// Whether draws are reals (as opposed to directions).
    pub fn is_scalar(&self) -> bool {
        !matches!(self, LimitLaw::ProjectedNormal { .. } | LimitLaw::UniformSphere { .. })
    }

    /// Stable text key, e.g. `wald_mixture:df=2:lambda=1`.
    pub fn descriptor(&self) -> String {
        match self {
            LimitLaw::ChiSquare { df } => format!("chi2:df={df}"),
            LimitLaw::NoncentralChiSquare { df, nc } => format!("ncchi2:df={df}:nc={nc}"),
            LimitLaw::WaldMixture { df, lambda } => format!("wald_mixture:df={df}:lambda={lambda}"),
            LimitLaw::ProjectedNormal { p, xi } => format!("projected_normal:p={p}:xi={xi}"),
            LimitLaw::UniformSphere { p } => format!("uniform_sphere:p={p}"),
        }
    }

    pub fn from_descriptor(text: &str) -> Result<Self> {
        let bad = |why: &str| Error::domain(format!("bad law descriptor `{text}`: {why}"));
        let mut parts = text.trim().split(':');
        let kind = parts.next().unwrap_or_default();
        let mut fields = std::collections::BTreeMap::new();
        for part in parts {
            let (k, v) = part.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            fields.insert(k, v);
        }
        let get = |k: &str| -> Result<&str> {
            fields.get(k).copied().ok_or_else(|| bad(&format!("missing `{k}`")))
        };
        let int = |k: &str| -> Result<u32> { get(k)?.parse().map_err(|_| bad(&format!("`{k}` is not an integer"))) };
        let real = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| bad(&format!("`{k}` is not a number"))) };
        match kind {
            "chi2" => Self::chi_square(int("df")?),
            "ncchi2" => Self::noncentral_chi_square(int("df")?, real("nc")?),
            "wald_mixture" => Self::wald_mixture(int("df")?, real("lambda")?),
            "projected_normal" => Self::projected_normal(int("p")? as usize, real("xi")?),
            "uniform_sphere" => Self::uniform_sphere(int("p")? as usize),
            _ => Err(bad("unknown law")),
        }
    }

    /// Upper-tail probability `P(T > x)` where a closed form exists.
    pub fn sf(&self, x: f64) -> Option<f64> {
        match *self {
            LimitLaw::ChiSquare { df } => Some(chi2_sf(x.max(0.0), df)),
            LimitLaw::NoncentralChiSquare { df, nc } => Some(noncentral_chi2_sf(x.max(0.0), df, nc)),
            _ => None,
        }
    }

    /// Analytic `(1 - α)`-quantile, if available.
    pub fn analytic_critical_value(&self, alpha: f64) -> Option<Result<f64>> {
        match *self {
            LimitLaw::ChiSquare { df } => Some(chi2_quantile(1.0 - alpha, df)),
            LimitLaw::NoncentralChiSquare { df, nc } => {
                Some(noncentral_chi2_quantile(1.0 - alpha, df, nc))
            }
            _ => None,
        }
    }

    /// One scalar draw; `None` for direction-valued laws.
    pub fn draw_scalar<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<f64> {
        let chi2 = |rng: &mut R, df: u32| -> f64 {
            (0..df)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    z * z
                })
                .sum()
        };
        match *self {
            LimitLaw::ChiSquare { df } => Some(chi2(rng, df)),
            LimitLaw::NoncentralChiSquare { df, nc } => {
                let z: f64 = StandardNormal.sample(rng);
                Some((z + nc.sqrt()).powi(2) + chi2(rng, df - 1))
            }
            LimitLaw::WaldMixture { df, lambda } => {
                let z: f64 = StandardNormal.sample(rng);
                let q = chi2(rng, df);
                Some(wald_mixture_value(z, q, lambda))
            }
            _ => None,
        }
    }

    /// One direction draw; `None` for real-valued laws.
    pub fn draw_direction<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<UnitVector> {
        let (p, xi) = match *self {
            LimitLaw::ProjectedNormal { p, xi } => (p, xi),
            LimitLaw::UniformSphere { p } => (p, 0.0),
            _ => return None,
        };
        loop {
            let mut z: Vec<f64> = (0..p).map(|_| StandardNormal.sample(rng)).collect();
            z[p - 1] += xi;
            if let Ok(u) = normalize(&z) {
                return Some(u);
            }
        }
    }
}

/// `(1 + Q/(Z + λ)²)^{-1} Q`, written as `Q (Z+λ)² / ((Z+λ)² + Q)`; zero
/// when `Z + λ = 0`.
pub fn wald_mixture_value(z: f64, q: f64, lambda: f64) -> f64 {
    let s = (z + lambda).powi(2);
    let denom = s + q;
    if denom == 0.0 {
        0.0
    } else {
        q * s / denom
    }
}

/// Draws from a limit law.
#[derive(Debug, Clone, PartialEq)]
pub enum LawDraws {
    Scalars(Vec<f64>),
    Directions(Vec<UnitVector>),
}

pub fn sample_law<R: Rng + ?Sized>(law: &LimitLaw, m: usize, rng: &mut R) -> LawDraws {
    if law.is_scalar() {
        LawDraws::Scalars((0..m).map(|_| law.draw_scalar(rng).unwrap()).collect())
    } else {
        LawDraws::Directions((0..m).map(|_| law.draw_direction(rng).unwrap()).collect())
    }
}

/// `m` draws of a real-valued law.
pub fn sample_scalars<R: Rng + ?Sized>(law: &LimitLaw, m: usize, rng: &mut R) -> Result<Vec<f64>> {
    match sample_law(law, m, rng) {
        LawDraws::Scalars(v) => Ok(v),
        LawDraws::Directions(_) => Err(Error::domain(format!(
            "{} is direction-valued",
            law.descriptor()
        ))),
    }
}

/// Empirical `(1 - α)`-quantile `x_(⌈m(1-α)⌉)` of `m` draws.
pub fn mc_critical_value<R: Rng + ?Sized>(
    law: &LimitLaw,
    alpha: f64,
    m: usize,
    rng: &mut R,
) -> Result<f64> {
    check_alpha(alpha)?;
    if m == 0 {
        return Err(Error::domain("need at least one draw"));
    }
    let mut draws = sample_scalars(law, m, rng)?;
    Ok(empirical_quantile(&mut draws, 1.0 - alpha))
}

/// Type-1 empirical quantile; reorders `xs`.
pub fn empirical_quantile(xs: &mut [f64], prob: f64) -> f64 {
    let m = xs.len();
    let k = ((m as f64 * prob).ceil() as usize).clamp(1, m) - 1;
    *xs.select_nth_unstable_by(k, f64::total_cmp).1
}

/// MC estimate of `P(T > threshold)`.
pub fn mc_exceedance<R: Rng + ?Sized>(
    law: &LimitLaw,
    threshold: f64,
    m: usize,
    rng: &mut R,
) -> Result<f64> {
    let draws = sample_scalars(law, m, rng)?;
    Ok(draws.iter().filter(|&&x| x > threshold).count() as f64 / m as f64)
}

fn check_tau(tau_norm: f64) -> Result<()> {
    if tau_norm.is_finite() && tau_norm >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("||tau|| must be >= 0, got {tau_norm}")))
    }
}

/// Non-centrality of the limiting `χ²_{p-1}` law of the Watson statistic
/// under alternatives `θ + ν_n τ_n`, `||τ_n|| → tau_norm`.
pub fn watson_noncentrality(regime: &RegimeSpec, tau_norm: f64, p: usize) -> Result<f64> {
    check_tau(tau_norm)?;
    let pf = p as f64;
    let (xi, t2) = (regime.xi, tau_norm * tau_norm);
    match regime.kind {
        RegimeKind::AwayFromUniformity => {
            let e2 = regime
                .e2_tilde
                .ok_or_else(|| Error::domain("regime away from uniformity needs e2_tilde"))?;
            let denom = 1.0 - xi * xi / pf - e2;
            if denom <= 0.0 {
                return Err(Error::domain(format!(
                    "1 - xi^2/p - e2_tilde = {denom} must be positive"
                )));
            }
            Ok((1.0 - 1.0 / pf) / denom * xi * xi * t2)
        }
        RegimeKind::BeyondContiguity => Ok(xi * xi * t2),
        RegimeKind::UnderContiguity => {
            if tau_norm > 2.0 + TAU_SLACK {
                return Err(Error::domain(format!(
                    "||tau|| = {tau_norm} exceeds 2 under contiguity"
                )));
            }
            Ok(0.25 * xi * xi * t2 * (4.0 - t2).max(0.0))
        }
        RegimeKind::StrictContiguity => Ok(0.0),
    }
}

/// Asymptotic rejection probability of `test` at level `alpha`.
///
/// Defined for Watson in every regime, for Wald beyond contiguity and away
/// from uniformity (where it matches Watson), for the oracle under
/// contiguity, and for the two oracle Wald tests under the null of their own
/// regime (plus all alternatives under strict contiguity, which they cannot
/// detect). Other combinations return [`Error::UnsupportedRegime`].
pub fn asymptotic_power(
    test: TestKind,
    regime: &RegimeSpec,
    tau_norm: f64,
    p: usize,
    alpha: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    check_tau(tau_norm)?;
    let df = p as u32;
    let watson = || -> Result<f64> {
        let nc = watson_noncentrality(regime, tau_norm, p)?;
        if nc == 0.0 {
            return Ok(alpha);
        }
        let crit = chi2_quantile(1.0 - alpha, df - 1)?;
        Ok(1.0 - noncentral_chi2_cdf(crit, df - 1, nc))
    };
    let unsupported = || {
        Err(Error::UnsupportedRegime(format!(
            "no asymptotic power for {test} in the {} regime",
            regime.kind
        )))
    };
    match (test, regime.kind) {
        (TestKind::Watson, _) => watson(),
        (TestKind::Wald, RegimeKind::AwayFromUniformity | RegimeKind::BeyondContiguity) => watson(),
        (TestKind::Oracle, RegimeKind::UnderContiguity) => {
            if tau_norm > 2.0 + TAU_SLACK {
                return Err(Error::domain(format!(
                    "||tau|| = {tau_norm} exceeds 2 under contiguity"
                )));
            }
            let nc = regime.xi * regime.xi * tau_norm * tau_norm;
            if nc == 0.0 {
                return Ok(alpha);
            }
            let crit = chi2_quantile(1.0 - alpha, df)?;
            Ok(1.0 - noncentral_chi2_cdf(crit, df, nc))
        }
        (TestKind::ContiguityWald, RegimeKind::UnderContiguity) if tau_norm == 0.0 => Ok(alpha),
        (TestKind::StrictContiguityWald, RegimeKind::StrictContiguity) => Ok(alpha),
        _ => unsupported(),
    }
}

/// Scaling applied to `θ̂ - θ` (regimes with a Gaussian limit) in
/// [`SphericalMeanLimit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingRate {
    SqrtN,
    SqrtNEta,
    /// No rescaling: `θ̂` itself converges in law.
    Unit,
}

impl ScalingRate {
    pub fn factor(&self, n: usize, regime: &RegimeSpec) -> f64 {
        match self {
            ScalingRate::SqrtN => (n as f64).sqrt(),
            ScalingRate::SqrtNEta => (n as f64).sqrt() * regime.eta(n),
            ScalingRate::Unit => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanLimit {
    /// Centred Gaussian on the tangent space at `θ`, covariance
    /// `variance_factor · (I - θθ')`.
    TangentGaussian { variance_factor: f64 },
    /// Law of `θ̂` in the frame where `θ = e_p`.
    Law(LimitLaw),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalMeanLimit {
    pub limit: MeanLimit,
    pub rate: ScalingRate,
}

/// Limit of the spherical mean in each regime.
pub fn spherical_mean_limit(regime: &RegimeSpec, p: usize) -> Result<SphericalMeanLimit> {
    let (pf, xi) = (p as f64, regime.xi);
    Ok(match regime.kind {
        RegimeKind::AwayFromUniformity => {
            let e2 = regime
                .e2_tilde
                .ok_or_else(|| Error::domain("regime away from uniformity needs e2_tilde"))?;
            let num = 1.0 - xi * xi / pf - e2;
            if num <= 0.0 {
                return Err(Error::domain(format!(
                    "1 - xi^2/p - e2_tilde = {num} must be positive"
                )));
            }
            SphericalMeanLimit {
                limit: MeanLimit::TangentGaussian {
                    variance_factor: num / (xi * xi * (1.0 - 1.0 / pf)),
                },
                rate: ScalingRate::SqrtN,
            }
        }
        RegimeKind::BeyondContiguity => SphericalMeanLimit {
            limit: MeanLimit::TangentGaussian {
                variance_factor: 1.0 / (xi * xi),
            },
            rate: ScalingRate::SqrtNEta,
        },
        RegimeKind::UnderContiguity => SphericalMeanLimit {
            limit: MeanLimit::Law(LimitLaw::projected_normal(p, xi)?),
            rate: ScalingRate::Unit,
        },
        RegimeKind::StrictContiguity => SphericalMeanLimit {
            limit: MeanLimit::Law(LimitLaw::uniform_sphere(p)?),
            rate: ScalingRate::Unit,
        },
    })
}
