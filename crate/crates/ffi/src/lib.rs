//! C ABI over `rotsym`.
//!
//! Every function returns a [`RotsymStatus`]; results go through out
//! pointers. Samples and zones are opaque handles that must be released with
//! their `_free` function. After a non-OK status, `rotsym_last_error` gives
//! the message for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use rotsym::geom::UnitVector;
use rotsym::io::{load_sample, DatasetSpec};
use rotsym::limits::{asymptotic_power, QuantileCache};
use rotsym::model::{calibrate_kappa, RadialFunction, RegimeKind, RegimeSpec};
use rotsym::sampling::Sample;
use rotsym::stats::{decide, TestKind};
use rotsym::zones::{invert_test, zone_area_fraction, ConfidenceZone};
use rotsym::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotsymStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad argument, malformed input, or an unsupported combination.
    InvalidArgument = 2,
    /// Non-convergence or a degenerate sample.
    NumericalFailure = 3,
    Io = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotsymTest {
    Watson = 0,
    Wald = 1,
    ContiguityWald = 2,
    StrictContiguityWald = 3,
    Oracle = 4,
}

impl From<RotsymTest> for TestKind {
    fn from(t: RotsymTest) -> Self {
        match t {
            RotsymTest::Watson => TestKind::Watson,
            RotsymTest::Wald => TestKind::Wald,
            RotsymTest::ContiguityWald => TestKind::ContiguityWald,
            RotsymTest::StrictContiguityWald => TestKind::StrictContiguityWald,
            RotsymTest::Oracle => TestKind::Oracle,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotsymRegime {
    Away = 0,
    Beyond = 1,
    Contiguity = 2,
    Strict = 3,
}

impl From<RotsymRegime> for RegimeKind {
    fn from(r: RotsymRegime) -> Self {
        match r {
            RotsymRegime::Away => RegimeKind::AwayFromUniformity,
            RotsymRegime::Beyond => RegimeKind::BeyondContiguity,
            RotsymRegime::Contiguity => RegimeKind::UnderContiguity,
            RotsymRegime::Strict => RegimeKind::StrictContiguity,
        }
    }
}

/// Opaque sample of unit vectors.
pub struct RotsymSample(Sample);

/// Opaque confidence zone.
pub struct RotsymZone(ConfidenceZone);

/// Outcome of a test at level `alpha`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RotsymTestResult {
    pub statistic: f64,
    pub critical_value: f64,
    /// NaN when the null law has no closed-form tail.
    pub p_value: f64,
    pub reject: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> RotsymStatus {
    match e {
        Error::Io(_) => RotsymStatus::Io,
        _ if e.exit_code() == 3 => RotsymStatus::NumericalFailure,
        _ => RotsymStatus::InvalidArgument,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type FfiResult<T> = std::result::Result<T, Failure>;

fn guard(body: impl FnOnce() -> FfiResult<()>) -> RotsymStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => RotsymStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(&format!("{what} is null"));
            RotsymStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            RotsymStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(ptr: *const T, what: &'static str) -> FfiResult<&'a T> {
    ptr.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out<'a, T>(ptr: *mut T, what: &'static str) -> FfiResult<&'a mut T> {
    ptr.as_mut().ok_or(Failure::Null(what))
}

unsafe fn slice<'a>(ptr: *const f64, len: usize, what: &'static str) -> FfiResult<&'a [f64]> {
    if ptr.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn string(ptr: *const c_char, what: &'static str) -> FfiResult<String> {
    if ptr.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Failure::Lib(Error::Domain(format!("{what} is not UTF-8"))))
}

unsafe fn unit(ptr: *const f64, p: usize, what: &'static str) -> FfiResult<UnitVector> {
    Ok(UnitVector::new(slice(ptr, p, what)?.to_vec())?)
}

/// Message for the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rotsym_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a sample from `n` row-major unit vectors of dimension `p`.
///
/// # Safety
/// `data` must point to `n * p` doubles and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn rotsym_sample_new(
    data: *const f64,
    n: usize,
    p: usize,
    out_sample: *mut *mut RotsymSample,
) -> RotsymStatus {
    guard(|| {
        let slot = out(out_sample, "out_sample")?;
        let len = n.checked_mul(p).ok_or_else(|| Error::Domain("n * p overflows".into()))?;
        let sample = Sample::from_flat(p, slice(data, len, "data")?.to_vec())?;
        *slot = Box::into_raw(Box::new(RotsymSample(sample)));
        Ok(())
    })
}

/// Loads a data file; `format` is "cartesian" or "angles_deg".
///
/// # Safety
/// `path` and `format` must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn rotsym_sample_load(
    path: *const c_char,
    format: *const c_char,
    out_sample: *mut *mut RotsymSample,
) -> RotsymStatus {
    guard(|| {
        let slot = out(out_sample, "out_sample")?;
        let spec = DatasetSpec {
            path: PathBuf::from(string(path, "path")?),
            format: string(format, "format")?.parse()?,
            p: None,
        };
        *slot = Box::into_raw(Box::new(RotsymSample(load_sample(&spec)?)));
        Ok(())
    })
}

/// # Safety
/// `sample` must be null or a handle from `rotsym_sample_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rotsym_sample_free(sample: *mut RotsymSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// # Safety
/// `sample` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rotsym_sample_shape(
    sample: *const RotsymSample,
    out_n: *mut usize,
    out_p: *mut usize,
) -> RotsymStatus {
    guard(|| {
        let s = &deref(sample, "sample")?.0;
        *out(out_n, "out_n")? = s.len();
        *out(out_p, "out_p")? = s.dim();
        Ok(())
    })
}

/// Statistic of `test` for H0: θ = `theta0` (`p` coordinates). `xi` is used
/// by the oracle and contiguity tests only.
///
/// # Safety
/// `sample` must be a live handle and `theta0` must point to `p` doubles.
#[no_mangle]
pub unsafe extern "C" fn rotsym_statistic(
    sample: *const RotsymSample,
    test: RotsymTest,
    theta0: *const f64,
    p: usize,
    xi: f64,
    out_value: *mut f64,
) -> RotsymStatus {
    guard(|| {
        let s = &deref(sample, "sample")?.0;
        let t0 = unit(theta0, p, "theta0")?;
        *out(out_value, "out_value")? = TestKind::from(test).statistic(s, &t0, xi)?;
        Ok(())
    })
}

/// Runs `test` at level `alpha` against its asymptotic null law.
/// Mixture-law critical values use `mc_draws` Monte-Carlo draws from `seed`.
///
/// # Safety
/// As for `rotsym_statistic`; `out_result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rotsym_test(
    sample: *const RotsymSample,
    test: RotsymTest,
    theta0: *const f64,
    p: usize,
    xi: f64,
    alpha: f64,
    mc_draws: usize,
    seed: u64,
    out_result: *mut RotsymTestResult,
) -> RotsymStatus {
    guard(|| {
        let s = &deref(sample, "sample")?.0;
        let slot = out(out_result, "out_result")?;
        let t0 = unit(theta0, p, "theta0")?;
        let kind = TestKind::from(test);
        let statistic = kind.statistic(s, &t0, xi)?;
        let law = kind.null_law(s.dim(), xi)?;
        let o = decide(kind.name(), statistic, &law, alpha, &QuantileCache::new(mc_draws, seed))?;
        *slot = RotsymTestResult {
            statistic: o.statistic,
            critical_value: o.critical_value,
            p_value: o.p_value.unwrap_or(f64::NAN),
            reject: o.reject,
        };
        Ok(())
    })
}

/// Concentration giving `E[X'θ] = target_e1`; `radial` is "fvml", "linear"
/// or "logistic".
///
/// # Safety
/// `radial` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rotsym_calibrate_kappa(
    p: usize,
    radial: *const c_char,
    target_e1: f64,
    out_kappa: *mut f64,
) -> RotsymStatus {
    guard(|| {
        let slot = out(out_kappa, "out_kappa")?;
        let f = RadialFunction::by_name(&string(radial, "radial")?)?;
        *slot = calibrate_kappa(p, &f, target_e1)?;
        Ok(())
    })
}

/// Asymptotic power at `‖τ‖ = tau_norm`. `e2_tilde` is needed for the away
/// regime only; pass NaN otherwise.
///
/// # Safety
/// `out_power` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rotsym_asymptotic_power(
    test: RotsymTest,
    regime: RotsymRegime,
    xi: f64,
    e2_tilde: f64,
    tau_norm: f64,
    p: usize,
    alpha: f64,
    out_power: *mut f64,
) -> RotsymStatus {
    guard(|| {
        let slot = out(out_power, "out_power")?;
        let e2 = (!e2_tilde.is_nan()).then_some(e2_tilde);
        let spec = RegimeSpec::canonical(regime.into(), xi, e2)?;
        *slot = asymptotic_power(test.into(), &spec, tau_norm, p, alpha)?;
        Ok(())
    })
}

/// Inverts the Watson or Wald test on a grid of `resolution` points.
///
/// # Safety
/// `sample` must be a live handle and `out_zone` writable.
#[no_mangle]
pub unsafe extern "C" fn rotsym_zone_new(
    sample: *const RotsymSample,
    test: RotsymTest,
    level: f64,
    resolution: usize,
    out_zone: *mut *mut RotsymZone,
) -> RotsymStatus {
    guard(|| {
        let s = &deref(sample, "sample")?.0;
        let slot = out(out_zone, "out_zone")?;
        let zone = invert_test(s, test.into(), level, resolution)?;
        *slot = Box::into_raw(Box::new(RotsymZone(zone)));
        Ok(())
    })
}

/// # Safety
/// `zone` must be null or a handle from `rotsym_zone_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rotsym_zone_free(zone: *mut RotsymZone) {
    if !zone.is_null() {
        drop(Box::from_raw(zone));
    }
}

/// Grid size, member count and the member fraction of the sphere.
///
/// # Safety
/// `zone` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rotsym_zone_summary(
    zone: *const RotsymZone,
    out_grid_points: *mut usize,
    out_members: *mut usize,
    out_area_fraction: *mut f64,
) -> RotsymStatus {
    guard(|| {
        let z = &deref(zone, "zone")?.0;
        *out(out_grid_points, "out_grid_points")? = z.grid().len();
        *out(out_members, "out_members")? = z.member_count();
        *out(out_area_fraction, "out_area_fraction")? = zone_area_fraction(z);
        Ok(())
    })
}

/// Whether `theta` (`p` coordinates) satisfies the zone's membership rule.
///
/// # Safety
/// `zone` must be a live handle and `theta` must point to `p` doubles.
#[no_mangle]
pub unsafe extern "C" fn rotsym_zone_contains(
    zone: *const RotsymZone,
    theta: *const f64,
    p: usize,
    out_member: *mut bool,
) -> RotsymStatus {
    guard(|| {
        let z = &deref(zone, "zone")?.0;
        let t = unit(theta, p, "theta")?;
        *out(out_member, "out_member")? = z.contains(&t)?;
        Ok(())
    })
}
