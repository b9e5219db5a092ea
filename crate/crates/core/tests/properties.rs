use proptest::prelude::*;
use rotsym::geom::{frame_to, normalize, UnitVector};
use rotsym::io::{parse_sample, sample_to_csv, DataFormat};
use rotsym::limits::wald_mixture_value;
use rotsym::sampling::{derive_stream, labeled_rng, sample_uniform, Sample};
use rotsym::specfn::{chi2_cdf, chi2_quantile};
use rotsym::stats::{q_bc_statistic, wald_statistic, watson_statistic};

fn unit3() -> impl Strategy<Value = UnitVector> {
    prop::array::uniform3(-1.0f64..1.0)
        .prop_filter("away from zero", |v| v.iter().map(|x| x * x).sum::<f64>() > 0.01)
        .prop_map(|v| normalize(&v).unwrap())
}

fn rotate(sample: &Sample, axis: &UnitVector) -> Sample {
    let r = frame_to(axis);
    let rows: Vec<UnitVector> = sample.rows().map(|x| normalize(&r.mul_vec(x)).unwrap()).collect();
    Sample::from_rows(&rows).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-8 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn statistics_are_rotation_equivariant(seed in any::<u64>(), theta0 in unit3(), axis in unit3()) {
        let sample = sample_uniform(3, 30, &mut labeled_rng(seed, &[1])).unwrap();
        let rotated = rotate(&sample, &axis);
        let t_rot = normalize(&frame_to(&axis).mul_vec(theta0.as_slice())).unwrap();
        prop_assert!(close(watson_statistic(&sample, &theta0).unwrap(), watson_statistic(&rotated, &t_rot).unwrap()));
        prop_assert!(close(wald_statistic(&sample, &theta0).unwrap(), wald_statistic(&rotated, &t_rot).unwrap()));
        prop_assert!(close(q_bc_statistic(&sample, &theta0).unwrap(), q_bc_statistic(&rotated, &t_rot).unwrap()));
    }

    #[test]
    fn statistics_ignore_the_sign_of_theta0(seed in any::<u64>(), theta0 in unit3()) {
        let sample = sample_uniform(3, 25, &mut labeled_rng(seed, &[2])).unwrap();
        let anti = theta0.antipode();
        prop_assert!(close(watson_statistic(&sample, &theta0).unwrap(), watson_statistic(&sample, &anti).unwrap()));
        prop_assert!(close(wald_statistic(&sample, &theta0).unwrap(), wald_statistic(&sample, &anti).unwrap()));
    }

    #[test]
    fn statistics_are_nonnegative(seed in any::<u64>(), theta0 in unit3()) {
        let sample = sample_uniform(3, 10, &mut labeled_rng(seed, &[3])).unwrap();
        prop_assert!(watson_statistic(&sample, &theta0).unwrap() >= 0.0);
        prop_assert!(wald_statistic(&sample, &theta0).unwrap() >= 0.0);
        prop_assert!(q_bc_statistic(&sample, &theta0).unwrap() >= 0.0);
    }

    #[test]
    fn chi2_quantile_inverts_cdf(prob in 1e-6f64..0.999999, df in 1u32..40) {
        let x = chi2_quantile(prob, df).unwrap();
        prop_assert!((chi2_cdf(x, df) - prob).abs() < 1e-8);
    }

    #[test]
    fn wald_mixture_is_bounded_by_q(z in -10.0f64..10.0, q in 0.0f64..50.0, lambda in 0.0f64..5.0) {
        let v = wald_mixture_value(z, q, lambda);
        prop_assert!(v >= 0.0 && v <= q + 1e-12);
    }

    #[test]
    fn stream_labels_are_order_sensitive(a in any::<u64>(), b in any::<u64>()) {
        prop_assume!(a != b);
        prop_assert_eq!(derive_stream(&[a, b]), derive_stream(&[a, b]));
        prop_assert_ne!(derive_stream(&[a, b]), derive_stream(&[b, a]));
    }

    #[test]
    fn csv_round_trip(seed in any::<u64>(), n in 1usize..20) {
        let sample = sample_uniform(3, n, &mut labeled_rng(seed, &[4])).unwrap();
        let back = parse_sample(&sample_to_csv(&sample), DataFormat::Cartesian, Some(3)).unwrap();
        prop_assert_eq!(back.len(), n);
        for (a, b) in sample.as_flat().iter().zip(back.as_flat()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
