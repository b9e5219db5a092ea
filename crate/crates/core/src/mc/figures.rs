use rayon::prelude::*;

use super::{ExperimentResult, ExperimentSpec, Figure, ResultRow};
use crate::error::{Error, Result};
use crate::geom::UnitVector;
use crate::limits::{asymptotic_power, mc_exceedance, LimitLaw, QuantileCache};
use crate::model::{
    calibrate_kappa, local_alternative, moments, RegimeKind, RegimeSpec, RotSymModel,
};
use crate::sampling::{labeled_rng, DirectionSampler};
use crate::stats::TestKind;

const EXCEEDANCE_LABEL: u64 = 0xE7CE;

/// Limiting rejection probability of `test` at level `alpha`.
///
/// Uses the closed forms of [`asymptotic_power`] and, for Wald-type tests
/// whose statistic converges to a Wald mixture (strict contiguity, or the
/// null under contiguity), the Monte-Carlo probability that the mixture
/// exceeds the test's critical value. `None` where no limit is available.
pub fn asymptotic_rejection(
    test: TestKind,
    regime: &RegimeSpec,
    tau_norm: f64,
    p: usize,
    alpha: f64,
    cache: &QuantileCache,
) -> Result<Option<f64>> {
    match asymptotic_power(test, regime, tau_norm, p, alpha) {
        Ok(v) => return Ok(Some(v)),
        Err(Error::UnsupportedRegime(_)) => {}
        Err(e) => return Err(e),
    }
    let wald_type = matches!(
        test,
        TestKind::Wald | TestKind::ContiguityWald | TestKind::StrictContiguityWald
    );
    let lambda = match regime.kind {
        RegimeKind::UnderContiguity if tau_norm == 0.0 => regime.xi,
        RegimeKind::StrictContiguity => 0.0,
        _ => return Ok(None),
    };
    if !wald_type {
        return Ok(None);
    }
    let threshold = cache.critical_value(&test.null_law(p, regime.xi)?, alpha)?;
    let law = LimitLaw::wald_mixture(p as u32 - 1, lambda)?;
    let mut rng = labeled_rng(
        cache.seed(),
        &[EXCEEDANCE_LABEL, lambda.to_bits(), threshold.to_bits()],
    );
    Ok(Some(mc_exceedance(&law, threshold, cache.draws(), &mut rng)?))
}

/// Regime with rate exponent `a`, the spec's `ξ`, and (away from
/// uniformity) the variance of `X'θ` at the calibrated concentration.
fn cell_regime(spec: &ExperimentSpec, exponent: f64, kappa: f64) -> Result<RegimeSpec> {
    let e2 = if exponent == 0.0 {
        let model = RotSymModel::new(UnitVector::pole(spec.p), kappa, spec.radial.clone())?;
        Some(moments(&model)?.e2_tilde)
    } else {
        None
    };
    RegimeSpec::new(exponent, spec.xi, e2)
}

struct Cell<'a> {
    labels: [u64; 4],
    sampler: &'a DirectionSampler,
    n: usize,
    theta0: &'a UnitVector,
    tests: &'a [(TestKind, f64)],
}

/// Rejection counts per test over the spec's replicates.
fn count_rejections(spec: &ExperimentSpec, cell: &Cell<'_>) -> Result<Vec<usize>> {
    let k = cell.tests.len();
    (0..spec.replicates)
        .into_par_iter()
        .map(|rep| -> Result<Vec<usize>> {
            let [a, b, c, d] = cell.labels;
            let mut rng = labeled_rng(spec.seed, &[a, b, c, d, rep as u64]);
            let sample = cell.sampler.sample_summary(cell.n, &mut rng);
            cell.tests
                .iter()
                .map(|&(test, crit)| {
                    Ok(usize::from(test.statistic(&sample, cell.theta0, spec.xi)? > crit))
                })
                .collect()
        })
        .try_reduce(
            || vec![0; k],
            |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()),
        )
}

fn critical_values(spec: &ExperimentSpec, cache: &QuantileCache) -> Result<Vec<(TestKind, f64)>> {
    spec.tests()
        .into_iter()
        .map(|t| Ok((t, cache.critical_value(&t.null_law(spec.p, spec.xi)?, spec.alpha)?)))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    spec: &ExperimentSpec,
    cache: &QuantileCache,
    tests: &[(TestKind, f64)],
    ell: u32,
    r: u32,
    n: usize,
    model: &RotSymModel,
    theta0: &UnitVector,
    regime: &RegimeSpec,
    tau_norm: f64,
) -> Result<Vec<ResultRow>> {
    let sampler = DirectionSampler::new(model)?;
    let cell = Cell {
        labels: [spec.figure.code(), ell as u64, r as u64, n as u64],
        sampler: &sampler,
        n,
        theta0,
        tests,
    };
    let counts = count_rejections(spec, &cell)?;
    tests
        .iter()
        .zip(counts)
        .map(|(&(test, _), rejections)| {
            Ok(ResultRow {
                figure: spec.figure,
                ell,
                r,
                test: test.name().to_string(),
                n,
                replicates: spec.replicates,
                alpha: spec.alpha,
                rejections,
                asym_power: asymptotic_rejection(test, regime, tau_norm, spec.p, spec.alpha, cache)?,
                seed: spec.seed,
            })
        })
        .collect()
}

fn expect_figure(spec: &ExperimentSpec, figure: Figure) -> Result<()> {
    if spec.figure != figure {
        return Err(Error::Config {
            key: "figure".into(),
            message: format!("expected a {figure} spec, got {}", spec.figure),
        });
    }
    spec.validate()
}

/// Null rejection frequencies with `E[X'θ] = n^{-ℓ/6}/√p`.
pub fn run_figure1(spec: &ExperimentSpec, cache: &QuantileCache) -> Result<ExperimentResult> {
    expect_figure(spec, Figure::Fig1)?;
    let tests = critical_values(spec, cache)?;
    let theta0 = UnitVector::pole(spec.p);
    let mut rows = Vec::new();
    for &ell in &spec.ells {
        let exponent = ell as f64 / 6.0;
        for &n in &spec.ns {
            let target = (n as f64).powf(-exponent) / (spec.p as f64).sqrt();
            let kappa = calibrate_kappa(spec.p, &spec.radial, target)?;
            let regime = cell_regime(spec, exponent, kappa)?;
            let model = RotSymModel::new(theta0.clone(), kappa, spec.radial.clone())?;
            rows.extend(run_cell(spec, cache, &tests, ell, 0, n, &model, &theta0, &regime, 0.0)?);
        }
    }
    Ok(ExperimentResult { rows })
}

/// Rejection frequencies against `θ_r^{(ℓ)}` with `E[X'θ] = n^{-ℓ/4}/√p`.
pub fn run_figure2(spec: &ExperimentSpec, cache: &QuantileCache) -> Result<ExperimentResult> {
    expect_figure(spec, Figure::Fig2)?;
    alternatives_study(spec, cache, |ell| ell as f64 / 4.0)
}

/// Watson against the oracle test under contiguity, `E[X'θ] = 1/√(np)`.
pub fn run_figure3(spec: &ExperimentSpec, cache: &QuantileCache) -> Result<ExperimentResult> {
    expect_figure(spec, Figure::Fig3)?;
    alternatives_study(spec, cache, |_| 0.5)
}

fn alternatives_study(
    spec: &ExperimentSpec,
    cache: &QuantileCache,
    exponent_of: impl Fn(u32) -> f64,
) -> Result<ExperimentResult> {
    let tests = critical_values(spec, cache)?;
    let theta0 = UnitVector::pole(spec.p);
    let mut rows = Vec::new();
    for &ell in &spec.ells {
        let exponent = exponent_of(ell);
        for &n in &spec.ns {
            let target = (n as f64).powf(-exponent) * spec.xi / (spec.p as f64).sqrt();
            let kappa = calibrate_kappa(spec.p, &spec.radial, target)?;
            let regime = cell_regime(spec, exponent, kappa)?;
            for &r in &spec.rs {
                let theta_r = local_alternative(ell, r, n, &theta0)?;
                let chord: f64 = theta_r
                    .iter()
                    .zip(theta0.iter())
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let tau_norm = chord / regime.nu(n);
                let model = RotSymModel::new(theta_r, kappa, spec.radial.clone())?;
                rows.extend(run_cell(
                    spec, cache, &tests, ell, r, n, &model, &theta0, &regime, tau_norm,
                )?);
            }
        }
    }
    Ok(ExperimentResult { rows })
}

/// Dispatches on `spec.figure`; the spherical-mean study has its own runner.
pub fn run_figure(spec: &ExperimentSpec, cache: &QuantileCache) -> Result<ExperimentResult> {
    match spec.figure {
        Figure::Fig1 => run_figure1(spec, cache),
        Figure::Fig2 => run_figure2(spec, cache),
        Figure::Fig3 => run_figure3(spec, cache),
        Figure::Thm21 => Err(Error::Config {
            key: "figure".into(),
            message: "thm21 is run by run_thm21_study".into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(figure: Figure) -> ExperimentSpec {
        let mut spec = ExperimentSpec::preset(figure);
        spec.replicates = 200;
        spec.mc_draws = 20_000;
        spec
    }

    #[test]
    fn figure1_shape_and_determinism() {
        let mut spec = small(Figure::Fig1);
        spec.ells = vec![0, 3, 5];
        let cache = QuantileCache::new(spec.mc_draws, spec.seed);
        let a = run_figure1(&spec, &cache).unwrap();
        assert_eq!(a.rows.len(), 3 * 2 * 2);
        let b = run_figure1(&spec, &QuantileCache::new(spec.mc_draws, spec.seed)).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        let wald0 = a.find(0, 0, "wald", 100).unwrap();
        assert_eq!(wald0.asym_power, Some(0.05));
        assert!(a.find(5, 0, "wald", 1000).unwrap().asym_power.unwrap() < 0.01);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut spec = small(Figure::Fig3);
        spec.rs = vec![0, 3];
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                run_figure3(&spec, &QuantileCache::new(spec.mc_draws, spec.seed))
                    .unwrap()
                    .to_csv()
            })
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn figure2_rows_and_powers() {
        let mut spec = small(Figure::Fig2);
        spec.rs = vec![0, 3];
        let res = run_figure2(&spec, &QuantileCache::new(spec.mc_draws, spec.seed)).unwrap();
        assert_eq!(res.rows.len(), 4 * 2 * 4);
        let w = res.find(2, 3, "watson", 200).unwrap();
        let exact = 1.0 - crate::specfn::noncentral_chi2_cdf(5.991464547107979, 2, 1.0);
        assert!((w.asym_power.unwrap() - exact).abs() < 1e-10);
        assert_eq!(res.find(2, 3, "wald", 200).unwrap().asym_power, None);
        assert_eq!(res.find(3, 3, "watson", 200).unwrap().asym_power, Some(0.05));
    }

    #[test]
    fn wrong_figure_is_rejected() {
        let spec = small(Figure::Fig2);
        let cache = QuantileCache::new(spec.mc_draws, spec.seed);
        assert!(run_figure1(&spec, &cache).is_err());
    }
}
