use rotsym::geom::UnitVector;
use rotsym::model::{marginal_u_density, RadialFunction, RotSymModel};
use rotsym::sampling::{labeled_rng, DirectionSampler};
use rotsym::specfn::{chi2_cdf, chi2_quantile, ln_gamma, normal_quantile};
use rotsym::stats::ks::{ks_one_sample, ks_p_value};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

fn draws_u(model: &RotSymModel, n: usize, label: u64) -> Vec<f64> {
    let sampler = DirectionSampler::new(model).unwrap();
    sampler.sample_u(n, &mut labeled_rng(99, &[label]))
}

#[test]
fn fvml_s2_matches_closed_form_marginal() {
    for (i, kappa) in [0.1, 1.0, 4.0, 25.0].into_iter().enumerate() {
        let model = RotSymModel::fvml(UnitVector::new(vec![0.0, 0.6, 0.8]).unwrap(), kappa).unwrap();
        let u = draws_u(&model, 20_000, i as u64);
        let cdf = |t: f64| ((kappa * t).exp() - (-kappa).exp()) / (kappa.exp() - (-kappa).exp());
        let d = ks_one_sample(&u, cdf);
        assert!(ks_p_value(d, u.len() as f64) > 1e-3, "kappa={kappa}: D={d}");
    }
}

#[test]
fn other_samplers_match_quadrature_marginal() {
    let cases = [("fvml", 2, 1.5), ("fvml", 5, 3.0), ("linear", 3, 0.9), ("logistic", 3, 2.0), ("logistic", 4, 0.7)];
    for (i, (name, p, kappa)) in cases.into_iter().enumerate() {
        let model = RotSymModel::new(UnitVector::pole(p), kappa, RadialFunction::by_name(name).unwrap()).unwrap();
        let marginal = marginal_u_density(&model).unwrap();
        let u = draws_u(&model, 4000, 10 + i as u64);
        let d = ks_one_sample(&u, |t| marginal.cdf(t).unwrap());
        assert!(ks_p_value(d, u.len() as f64) > 1e-3, "{name} p={p} kappa={kappa}: D={d}");
    }
}

#[test]
fn uniform_second_moment_is_identity_over_p() {
    for p in [2, 3, 6] {
        let sampler = DirectionSampler::uniform(p).unwrap();
        let s = sampler.sample_summary(200_000, &mut labeled_rng(5, &[p as u64]));
        let m = s.second_moment();
        for i in 0..p {
            for j in 0..p {
                let want = if i == j { 1.0 / p as f64 } else { 0.0 };
                assert!((m.get(i, j) - want).abs() < 0.006, "p={p} ({i},{j}) {}", m.get(i, j));
            }
        }
    }
}

#[test]
fn samples_stay_on_the_sphere() {
    let model = RotSymModel::new(UnitVector::pole(4), 0.5, RadialFunction::logistic()).unwrap();
    let s = DirectionSampler::new(&model).unwrap().sample(1000, &mut labeled_rng(1, &[]));
    for row in s.rows() {
        assert!((row.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn chi_square_agrees_with_statrs() {
    for df in [1u32, 2, 3, 7, 30, 120] {
        let oracle = ChiSquared::new(df as f64).unwrap();
        for x in [0.01, 0.5, 1.0, 3.0, 10.0, 50.0, 150.0] {
            assert!((chi2_cdf(x, df) - oracle.cdf(x)).abs() < 1e-10, "df={df} x={x}");
        }
        for prob in [0.001, 0.05, 0.5, 0.95, 0.999] {
            let q = chi2_quantile(prob, df).unwrap();
            let want = oracle.inverse_cdf(prob);
            assert!((q - want).abs() < 1e-6 * (1.0 + want), "df={df} prob={prob}: {q} vs {want}");
        }
    }
}

#[test]
fn gamma_and_normal_agree_with_statrs() {
    for x in [0.1, 0.5, 1.0, 2.5, 10.0, 171.0] {
        assert!((ln_gamma(x) - statrs::function::gamma::ln_gamma(x)).abs() < 1e-10 * (1.0 + x), "x={x}");
    }
    let n = Normal::standard();
    for prob in [1e-8, 0.01, 0.3, 0.5, 0.975, 1.0 - 1e-8] {
        assert!((normal_quantile(prob) - n.inverse_cdf(prob)).abs() < 1e-8, "prob={prob}");
    }
}
