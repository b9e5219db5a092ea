use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::UnitVector;
use crate::limits::{sample_scalars, LimitLaw};
use crate::model::{calibrate_kappa, RadialFunction, RegimeKind, RegimeSpec, RotSymModel};
use crate::sampling::{labeled_rng, DirectionSampler};
use crate::stats::ks::ks_two_sample;
use crate::stats::{fvml_log_likelihood_ratio, lan_central_sequence, wald_statistic};

const WALD_LAW_LABEL: u64 = 31;
const LAN_LABEL: u64 = 51;

/// Distance between simulated Wald statistics and their mixture limit.
#[derive(Debug, Clone, PartialEq)]
pub struct WaldLawCheck {
    pub n: usize,
    pub replicates: usize,
    pub lambda: f64,
    pub ks_distance: f64,
}

/// Simulates the Wald statistic at the true location under FvML data with
/// `E[X'θ] = η_n ξ / √p` and compares it (KS distance) with `law_draws`
/// draws of its mixture limit: `λ = ξ` under contiguity, `λ = 0` under
/// strict contiguity.
pub fn wald_law_check(
    regime: &RegimeSpec,
    p: usize,
    n: usize,
    replicates: usize,
    law_draws: usize,
    seed: u64,
) -> Result<WaldLawCheck> {
    let lambda = match regime.kind {
        RegimeKind::UnderContiguity => regime.xi,
        RegimeKind::StrictContiguity => 0.0,
        other => {
            return Err(Error::UnsupportedRegime(format!(
                "the Wald statistic has a mixture limit only under (strict) contiguity, not {other}"
            )))
        }
    };
    let theta = UnitVector::pole(p);
    let kappa = calibrate_kappa(p, &RadialFunction::fvml(), regime.target_e1(n, p))?;
    let sampler = DirectionSampler::new(&RotSymModel::fvml(theta.clone(), kappa)?)?;
    let tag = regime.rate_exponent.to_bits();
    let stats: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|rep| {
            let mut rng = labeled_rng(seed, &[WALD_LAW_LABEL, tag, n as u64, rep as u64]);
            wald_statistic(&sampler.sample_summary(n, &mut rng), &theta)
        })
        .collect::<Result<_>>()?;
    let law = LimitLaw::wald_mixture(p as u32 - 1, lambda)?;
    let mut rng = labeled_rng(seed, &[WALD_LAW_LABEL, tag, u64::MAX]);
    let reference = sample_scalars(&law, law_draws, &mut rng)?;
    Ok(WaldLawCheck {
        n,
        replicates,
        lambda,
        ks_distance: ks_two_sample(&stats, &reference),
    })
}

/// Mean absolute gap between the exact FvML log-likelihood ratio and its
/// LAN approximation at one sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct LanErrorRow {
    pub n: usize,
    pub mean_abs_error: f64,
    pub stderr: f64,
}

/// For each `n`: FvML data at `θ = e_p` with `E[X'θ] = η_n ξ/√p`, the
/// alternative `θ₁` at chord `ν_n t` from `θ` (so that `τ_n = (θ₁ - θ)/ν_n`
/// has norm `t` and keeps `θ + ν_n τ_n` on the sphere), and the average of
/// `|log LR - (τ'Δ - τ'Γτ/2)|` over `samples` samples.
pub fn lan_error_study(
    regime: &RegimeSpec,
    p: usize,
    ns: &[usize],
    tau_norm: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<LanErrorRow>> {
    let theta = UnitVector::pole(p);
    ns.iter()
        .map(|&n| {
            let kappa = calibrate_kappa(p, &RadialFunction::fvml(), regime.target_e1(n, p))?;
            let nu = regime.nu(n);
            let chord = nu * tau_norm;
            if chord > 2.0 {
                return Err(Error::domain(format!("chord {chord} exceeds the sphere diameter")));
            }
            let angle = 2.0 * (0.5 * chord).asin();
            let mut t1 = vec![0.0; p];
            t1[0] = angle.sin();
            t1[p - 1] = angle.cos();
            let theta1 = UnitVector::new(t1)?;
            let tau: Vec<f64> = theta1.iter().zip(theta.iter()).map(|(a, b)| (a - b) / nu).collect();
            let sampler = DirectionSampler::new(&RotSymModel::fvml(theta.clone(), kappa)?)?;
            let errs: Vec<f64> = (0..samples)
                .into_par_iter()
                .map(|rep| -> Result<f64> {
                    let mut rng = labeled_rng(seed, &[LAN_LABEL, regime.rate_exponent.to_bits(), n as u64, rep as u64]);
                    let s = sampler.sample_summary(n, &mut rng);
                    let exact = fvml_log_likelihood_ratio(&s, &theta1, &theta, kappa)?;
                    let lan = lan_central_sequence(&s, &theta, regime.xi, regime)?;
                    Ok((exact - lan.quadratic_approximation(&tau)).abs())
                })
                .collect::<Result<_>>()?;
            let m = errs.len() as f64;
            let mean = errs.iter().sum::<f64>() / m;
            let var = errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (m - 1.0);
            Ok(LanErrorRow {
                n,
                mean_abs_error: mean,
                stderr: (var / m).sqrt(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contiguous_lan_error_is_small() {
        let regime = RegimeSpec::canonical(RegimeKind::UnderContiguity, 1.0, None).unwrap();
        let rows = lan_error_study(&regime, 3, &[1000], 1.0, 50, 5).unwrap();
        assert!(rows[0].mean_abs_error < 0.01, "{rows:?}");
    }

    #[test]
    fn wald_check_rejects_regimes_without_mixture_limit() {
        let regime = RegimeSpec::canonical(RegimeKind::BeyondContiguity, 1.0, None).unwrap();
        assert!(wald_law_check(&regime, 3, 100, 100, 1000, 1).is_err());
    }
}
