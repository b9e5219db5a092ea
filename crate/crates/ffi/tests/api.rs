use std::ffi::{CStr, CString};
use std::ptr;

use rotsym_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(rotsym_last_error()) }.to_string_lossy().into_owned()
}

fn two_point() -> *mut RotsymSample {
    let data = [1.0, 0.0, 0.0, 1.0];
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { rotsym_sample_new(data.as_ptr(), 2, 2, &mut s) }, RotsymStatus::Ok);
    s
}

#[test]
fn statistics_through_the_c_abi() {
    let s = two_point();
    let e1 = [1.0, 0.0];
    let expected = [
        (RotsymTest::Watson, 1.0),
        (RotsymTest::Wald, 0.5),
        (RotsymTest::Oracle, 1.0),
    ];
    for (test, want) in expected {
        let mut v = f64::NAN;
        let st = unsafe { rotsym_statistic(s, test, e1.as_ptr(), 2, 1.0, &mut v) };
        assert_eq!(st, RotsymStatus::Ok);
        assert!((v - want).abs() < 1e-12, "{test:?}: {v}");
    }
    let (mut n, mut p) = (0, 0);
    assert_eq!(unsafe { rotsym_sample_shape(s, &mut n, &mut p) }, RotsymStatus::Ok);
    assert_eq!((n, p), (2, 2));

    let mut r = RotsymTestResult::default();
    let st = unsafe { rotsym_test(s, RotsymTest::Watson, e1.as_ptr(), 2, 1.0, 0.05, 1000, 1, &mut r) };
    assert_eq!(st, RotsymStatus::Ok);
    assert!(!r.reject && (r.critical_value - 3.841458820694124).abs() < 1e-9);
    assert!(r.p_value > 0.3);
    unsafe { rotsym_sample_free(s) };
}

#[test]
fn error_codes_and_messages() {
    let mut s = ptr::null_mut();
    let bad = [1.0, 1.0, 1.0];
    assert_eq!(unsafe { rotsym_sample_new(bad.as_ptr(), 1, 3, &mut s) }, RotsymStatus::InvalidArgument);
    assert!(s.is_null());
    assert!(last_error().contains("norm"), "{}", last_error());

    assert_eq!(
        unsafe { rotsym_sample_new(ptr::null(), 1, 3, &mut s) },
        RotsymStatus::NullPointer
    );
    assert_eq!(last_error(), "data is null");

    let anti = [0.0, 1.0, 0.0, -1.0];
    assert_eq!(unsafe { rotsym_sample_new(anti.as_ptr(), 2, 2, &mut s) }, RotsymStatus::Ok);
    let mut v = 0.0;
    let axis = [0.0, 1.0];
    let st = unsafe { rotsym_statistic(s, RotsymTest::Watson, axis.as_ptr(), 2, 1.0, &mut v) };
    assert_eq!(st, RotsymStatus::NumericalFailure);
    unsafe { rotsym_sample_free(s) };

    let path = CString::new("/nonexistent/data.csv").unwrap();
    let fmt = CString::new("cartesian").unwrap();
    assert_eq!(unsafe { rotsym_sample_load(path.as_ptr(), fmt.as_ptr(), &mut s) }, RotsymStatus::Io);
    unsafe { rotsym_sample_free(ptr::null_mut()) };
}

#[test]
fn calibration_and_power() {
    let fvml = CString::new("fvml").unwrap();
    let mut kappa = 0.0;
    assert_eq!(unsafe { rotsym_calibrate_kappa(3, fvml.as_ptr(), 0.0, &mut kappa) }, RotsymStatus::Ok);
    assert_eq!(kappa, 0.0);
    let mut power = 0.0;
    let st = unsafe {
        rotsym_asymptotic_power(RotsymTest::Watson, RotsymRegime::Strict, 1.0, f64::NAN, 1.0, 3, 0.05, &mut power)
    };
    assert_eq!(st, RotsymStatus::Ok);
    assert!((power - 0.05).abs() < 1e-12);
    let st = unsafe {
        rotsym_asymptotic_power(RotsymTest::Wald, RotsymRegime::Contiguity, 1.0, f64::NAN, 1.0, 3, 0.05, &mut power)
    };
    assert_eq!(st, RotsymStatus::InvalidArgument);
}

#[test]
fn zones_through_the_c_abi() {
    let data: Vec<f64> = (0..40)
        .flat_map(|i| {
            let a = 0.4 * (i as f64 / 40.0 - 0.5);
            let b = 0.3 * ((i * 7 % 40) as f64 / 40.0 - 0.5);
            let (x, y, z) = (a, b, 1.0f64);
            let n = (x * x + y * y + z * z).sqrt();
            [x / n, y / n, z / n]
        })
        .collect();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { rotsym_sample_new(data.as_ptr(), 40, 3, &mut s) }, RotsymStatus::Ok);
    let mut z = ptr::null_mut();
    assert_eq!(unsafe { rotsym_zone_new(s, RotsymTest::Watson, 0.95, 2000, &mut z) }, RotsymStatus::Ok);
    let (mut grid, mut members, mut area) = (0, 0, 0.0);
    assert_eq!(unsafe { rotsym_zone_summary(z, &mut grid, &mut members, &mut area) }, RotsymStatus::Ok);
    assert_eq!(grid, 2000);
    assert!(members > 0 && area > 0.0 && area < 1.0);
    let (pole, south) = ([0.0, 0.0, 1.0], [0.0, 0.0, -1.0]);
    let (mut a, mut b) = (false, false);
    unsafe {
        assert_eq!(rotsym_zone_contains(z, pole.as_ptr(), 3, &mut a), RotsymStatus::Ok);
        assert_eq!(rotsym_zone_contains(z, south.as_ptr(), 3, &mut b), RotsymStatus::Ok);
    }
    assert!(a && b);
    let mut oz = ptr::null_mut();
    assert_eq!(unsafe { rotsym_zone_new(s, RotsymTest::Oracle, 0.95, 2000, &mut oz) }, RotsymStatus::InvalidArgument);
    unsafe {
        rotsym_zone_free(z);
        rotsym_sample_free(s);
    }
}
