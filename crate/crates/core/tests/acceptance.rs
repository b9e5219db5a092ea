//! End-to-end acceptance checks. Each criterion prints one `PASS` or `FAIL`
//! line; the process exits nonzero if any criterion fails.

use std::time::Instant;

use rotsym::geom::UnitVector;
use rotsym::limits::{asymptotic_power, QuantileCache};
use rotsym::mc::{
    lan_error_study, run_figure, run_thm21_study, wald_law_check, ExperimentResult, ExperimentSpec, Figure,
};
use rotsym::model::{calibrate_kappa, fvml_moments, moments, RadialFunction, RegimeKind, RegimeSpec, RotSymModel};
use rotsym::sampling::{labeled_rng, DirectionSampler, Sample, DEFAULT_SEED};
use rotsym::specfn::{chi2_cdf, chi2_quantile};
use rotsym::stats::{oracle_statistic, q_bc_statistic, wald_statistic, watson_statistic, TestKind};
use rotsym::zones::invert_test;

/// Collects the failed sub-checks of one criterion.
#[derive(Default)]
struct Check {
    failures: Vec<String>,
}

impl Check {
    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }
}

fn run_figure_at(figure: Figure, replicates: usize) -> ExperimentResult {
    let mut spec = ExperimentSpec::preset(figure);
    spec.replicates = replicates;
    spec.seed = DEFAULT_SEED;
    let cache = QuantileCache::new(spec.mc_draws, spec.seed);
    run_figure(&spec, &cache).expect("simulation")
}

fn within_band(freq: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&freq)
}

fn figure1(c: &mut Check) {
    let res = run_figure_at(Figure::Fig1, 10_000);
    for n in [100, 1000] {
        for ell in 0..=5 {
            let w = res.find(ell, 0, "watson", n).unwrap().reject_freq();
            c.require(within_band(w, 0.04, 0.06), format!("watson n={n} l={ell}: {w}"));
            if ell <= 2 {
                let f = res.find(ell, 0, "wald", n).unwrap().reject_freq();
                c.require(within_band(f, 0.04, 0.06), format!("wald n={n} l={ell}: {f}"));
            }
        }
    }
    let f = res.find(5, 0, "wald", 1000).unwrap().reject_freq();
    c.require(f < 0.01, format!("wald n=1000 l=5: {f}"));
}

fn figure2(c: &mut Check) {
    let res = run_figure_at(Figure::Fig2, 10_000);
    let n = 200;
    let contiguity = RegimeSpec::canonical(RegimeKind::UnderContiguity, 1.0, None).unwrap();
    let mut best = (0, f64::MIN);
    for r in 0..=6 {
        let w = res.find(2, r, "watson", n).unwrap();
        let tau = tau_norm(r);
        let theory = asymptotic_power(TestKind::Watson, &contiguity, tau, 3, 0.05).unwrap();
        let gap = (w.reject_freq() - theory).abs();
        c.require(
            gap <= 0.02 + 2.0 * w.stderr(),
            format!("l=2 watson r={r}: {} vs {theory}", w.reject_freq()),
        );
        if w.reject_freq() > best.1 {
            best = (r, w.reject_freq());
        }
        if r >= 1 {
            let f = res.find(2, r, "wald", n).unwrap().reject_freq();
            c.require(f < 0.02, format!("l=2 wald r={r}: {f}"));
        }
        let cw = res.find(2, r, "contiguity_wald", n).unwrap();
        c.require(
            cw.reject_freq() <= 0.05 + 2.0 * cw.stderr(),
            format!("l=2 contiguity_wald r={r}: {}", cw.reject_freq()),
        );

        for test in ["watson", "strict_contiguity_wald"] {
            let f = res.find(3, r, test, n).unwrap().reject_freq();
            c.require(within_band(f, 0.04, 0.06), format!("l=3 {test} r={r}: {f}"));
        }
        let f = res.find(3, r, "wald", n).unwrap().reject_freq();
        c.require(f < 0.01, format!("l=3 wald r={r}: {f}"));
    }
    c.require(best.0 == 3, format!("l=2 watson curve peaks at r={}", best.0));
}

/// `‖τ‖` of the r-th alternative under contiguity: the chord to the point at
/// angle `rπ/6`.
fn tau_norm(r: u32) -> f64 {
    2.0 * (r as f64 * std::f64::consts::PI / 12.0).sin()
}

fn figure3(c: &mut Check) {
    let res = run_figure_at(Figure::Fig3, 200_000);
    let n = 200;
    let regime = RegimeSpec::canonical(RegimeKind::UnderContiguity, 1.0, None).unwrap();
    let row = |r, t: &str| res.find(2, r, t, n).unwrap();
    let pooled = |r| (row(r, "watson").stderr().powi(2) + row(r, "oracle").stderr().powi(2)).sqrt();
    let diff = |r| row(r, "watson").reject_freq() - row(r, "oracle").reject_freq();
    c.require(diff(1) > 2.0 * pooled(1), format!("watson - oracle at r=1: {}", diff(1)));
    for r in [3, 4] {
        c.require(-diff(r) > 2.0 * pooled(r), format!("oracle - watson at r={r}: {}", -diff(r)));
    }
    for (test, kind) in [("watson", TestKind::Watson), ("oracle", TestKind::Oracle)] {
        let f = row(0, test).reject_freq();
        c.require(within_band(f, 0.04, 0.06), format!("{test} level at r=0: {f}"));
        for r in 0..=6 {
            let theory = asymptotic_power(kind, &regime, tau_norm(r), 3, 0.05).unwrap();
            let w = row(r, test);
            c.require(
                (w.reject_freq() - theory).abs() <= 0.02 + 2.0 * w.stderr(),
                format!("{test} r={r}: {} vs {theory}", w.reject_freq()),
            );
        }
    }
}

fn wald_mixture_laws(c: &mut Check) {
    for (kind, label) in [(RegimeKind::UnderContiguity, "contiguity"), (RegimeKind::StrictContiguity, "strict")] {
        let regime = RegimeSpec::canonical(kind, 1.0, None).unwrap();
        let check = wald_law_check(&regime, 3, 1000, 10_000, 1_000_000, DEFAULT_SEED).unwrap();
        c.require(check.ks_distance < 0.03, format!("{label}: KS {}", check.ks_distance));
    }
}

fn spherical_mean_limits(c: &mut Check) {
    let mut spec = ExperimentSpec::preset(Figure::Thm21);
    spec.regimes = vec![RegimeKind::BeyondContiguity, RegimeKind::StrictContiguity];
    spec.replicates = 5_000;
    let res = run_thm21_study(&spec).unwrap();
    let cov = res.find(RegimeKind::BeyondContiguity, "cov_rel_frobenius").unwrap();
    c.require(cov.passes(), format!("beyond covariance error {}", cov.value));
    let unif = res.find(RegimeKind::StrictContiguity, "ks_pvalue_u").unwrap();
    c.require(unif.passes(), format!("strict uniformity p-value {}", unif.value));
}

fn lan(c: &mut Check) {
    for kind in [RegimeKind::UnderContiguity, RegimeKind::BeyondContiguity] {
        let regime = RegimeSpec::canonical(kind, 1.0, None).unwrap();
        let rows = lan_error_study(&regime, 3, &[1_000, 10_000, 100_000], 1.0, 1000, DEFAULT_SEED).unwrap();
        let errs: Vec<f64> = rows.iter().map(|r| r.mean_abs_error).collect();
        c.require(errs[2] < 0.05, format!("{kind}: error at n=1e5 {}", errs[2]));
        c.require(errs.windows(2).all(|w| w[1] < w[0]), format!("{kind}: errors {errs:?}"));
    }
}

fn oracle_suites(c: &mut Check) {
    // Sampler moments against quadrature, n = 1e6 draws per model.
    let cases = [("fvml", 3, 2.0), ("fvml", 4, 0.5), ("linear", 3, 0.6), ("logistic", 3, 1.5)];
    for (i, &(name, p, kappa)) in cases.iter().enumerate() {
        let radial = RadialFunction::by_name(name).unwrap();
        let model = RotSymModel::new(UnitVector::pole(p), kappa, radial).unwrap();
        let m = moments(&model).unwrap();
        let sampler = DirectionSampler::new(&model).unwrap();
        let mut rng = labeled_rng(DEFAULT_SEED, &[0xACC, i as u64]);
        let n = 1_000_000;
        let (mut s1, mut s2, mut s4) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let t = sampler.draw(&mut rng).as_slice()[p - 1];
            s1 += t;
            s2 += t * t;
            s4 += t * t * t * t;
        }
        let nf = n as f64;
        let (e1, e2) = (s1 / nf, s2 / nf);
        let se1 = ((e2 - e1 * e1) / nf).sqrt();
        let se2 = ((s4 / nf - e2 * e2) / nf).sqrt();
        c.require((e1 - m.e1).abs() < 5.0 * se1, format!("{name} p={p}: E[t] {e1} vs {}", m.e1));
        c.require((e2 - m.e2).abs() < 5.0 * se2, format!("{name} p={p}: E[t^2] {e2} vs {}", m.e2));
    }

    // Quadrature against the Bessel closed forms.
    for p in [2, 3, 5, 10] {
        for kappa in [0.05, 0.5, 1.0, 5.0, 20.0] {
            let q = moments(&RotSymModel::fvml(UnitVector::pole(p), kappa).unwrap()).unwrap();
            let b = fvml_moments(p, kappa);
            c.require(
                (q.e1 - b.e1).abs() < 1e-8 && (q.e2_tilde - b.e2_tilde).abs() < 1e-8,
                format!("p={p} kappa={kappa}: {q:?} vs {b:?}"),
            );
        }
    }

    // Chi-square quantile round trip.
    for df in [1, 2, 3, 5, 10, 50] {
        for prob in [1e-6, 0.01, 0.05, 0.5, 0.95, 0.99, 1.0 - 1e-6] {
            let x = chi2_quantile(prob, df).unwrap();
            let back = chi2_cdf(x, df);
            c.require((back - prob).abs() < 1e-8, format!("df={df} prob={prob}: {back}"));
        }
    }

    // Hand-computed statistics on {e1, e2} in the plane, null theta0 = e1.
    let s = Sample::from_flat(2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
    let t0 = UnitVector::basis(2, 0);
    let values = [
        ("watson", watson_statistic(&s, &t0).unwrap(), 1.0),
        ("wald", wald_statistic(&s, &t0).unwrap(), 0.5),
        ("q_bc", q_bc_statistic(&s, &t0).unwrap(), 1.0),
        ("oracle", oracle_statistic(&s, &t0, 1.0).unwrap(), 1.0),
    ];
    for (name, got, want) in values {
        c.require((got - want).abs() < 1e-12, format!("{name}: {got} vs {want}"));
    }
}

fn zone_properties(c: &mut Check) {
    let p = 3;
    let level = 0.95;
    let regime = RegimeSpec::canonical(RegimeKind::UnderContiguity, 1.0, None).unwrap();
    let n = 200;
    let kappa = calibrate_kappa(p, &RadialFunction::fvml(), regime.target_e1(n, p)).unwrap();
    let theta = UnitVector::new(vec![0.3, -0.5, 0.8]).unwrap();
    let sampler = DirectionSampler::new(&RotSymModel::fvml(theta.clone(), kappa).unwrap()).unwrap();

    // Geometric properties on a handful of fine zones.
    for rep in 0..5u64 {
        let mut rng = labeled_rng(DEFAULT_SEED, &[0x20E, rep]);
        let sample = sampler.sample(n, &mut rng);
        let watson = invert_test(&sample, TestKind::Watson, level, 20_000).unwrap();
        let asym = watson
            .grid()
            .iter()
            .zip(watson.member())
            .filter(|(g, &m)| watson.contains(&g.antipode()).unwrap() != m)
            .count();
        c.require(asym == 0, format!("rep {rep}: {asym} points lack antipodal partner status"));
        c.require(watson.contains(watson.theta_hat()).unwrap(), format!("rep {rep}: theta_hat outside watson zone"));

        let wald = invert_test(&sample, TestKind::Wald, level, 20_000).unwrap();
        let hat = wald.theta_hat();
        let (u, v) = orthonormal_complement(hat);
        let off = (0..360)
            .map(|k| (k as f64).to_radians())
            .filter(|a| {
                let g: Vec<f64> = (0..3).map(|i| a.cos() * u[i] + a.sin() * v[i]).collect();
                !wald.contains(&UnitVector::new(g).unwrap()).unwrap()
            })
            .count();
        c.require(off == 0, format!("rep {rep}: {off} great-circle points outside wald zone"));

        let mut prev: Option<Vec<bool>> = None;
        for lv in [0.8, 0.9, 0.95, 0.99] {
            let z = watson.at_level(lv).unwrap();
            if let Some(prev) = &prev {
                let broken = prev.iter().zip(z.member()).filter(|(&a, &b)| a && !b).count();
                c.require(broken == 0, format!("rep {rep}: level {lv} drops {broken} points"));
            }
            prev = Some(z.member().to_vec());
        }
    }

    // Coverage of the true location.
    let replicates = 2000;
    let covered = (0..replicates as u64)
        .filter(|&rep| {
            let mut rng = labeled_rng(DEFAULT_SEED, &[0x20F, rep]);
            let sample = sampler.sample(n, &mut rng);
            invert_test(&sample, TestKind::Watson, level, 1000)
                .unwrap()
                .contains(&theta)
                .unwrap()
        })
        .count();
    let cov = covered as f64 / replicates as f64;
    let se = (cov * (1.0 - cov) / replicates as f64).sqrt();
    c.require(cov >= level - 3.0 * se, format!("coverage {cov} (stderr {se})"));
}

fn orthonormal_complement(v: &UnitVector) -> ([f64; 3], [f64; 3]) {
    let x = v.as_slice();
    let a = if x[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let dot: f64 = (0..3).map(|i| a[i] * x[i]).sum();
    let mut u = [0.0; 3];
    for i in 0..3 {
        u[i] = a[i] - dot * x[i];
    }
    let norm = u.iter().map(|c| c * c).sum::<f64>().sqrt();
    u.iter_mut().for_each(|c| *c /= norm);
    let w = [
        x[1] * u[2] - x[2] * u[1],
        x[2] * u[0] - x[0] * u[2],
        x[0] * u[1] - x[1] * u[0],
    ];
    (u, w)
}

fn main() {
    let criteria: [(&str, fn(&mut Check)); 8] = [
        ("figure 1 null rejection frequencies", figure1),
        ("figure 2 power under (strict) contiguity", figure2),
        ("figure 3 watson vs oracle", figure3),
        ("wald statistic mixture limits", wald_mixture_laws),
        ("spherical mean limits", spherical_mean_limits),
        ("LAN approximation error", lan),
        ("oracle suites", oracle_suites),
        ("confidence zone properties", zone_properties),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let mut check = Check::default();
        run(&mut check);
        let secs = start.elapsed().as_secs_f64();
        if check.failures.is_empty() {
            println!("PASS {name} ({secs:.1}s)");
        } else {
            failed += 1;
            println!("FAIL {name} ({secs:.1}s)");
            for f in &check.failures {
                println!("    {f}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
