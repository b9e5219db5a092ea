use super::{BESSEL_MAX_ITER, SERIES_EPS};

/// `I_ν(κ) / I_{ν-1}(κ)` for `ν >= 1/2`, `κ > 0`, from the Gauss continued
/// fraction `1 / (2ν/κ + 1 / (2(ν+1)/κ + ...))` (modified Lentz). The ratio
/// never forms either Bessel function, so it cannot overflow.
pub fn bessel_ratio(order: f64, kappa: f64) -> f64 {
    assert!(kappa > 0.0, "bessel_ratio needs kappa > 0");
    const TINY: f64 = 1e-300;
    let b = |k: usize| 2.0 * (order + k as f64) / kappa;
    let mut f = b(0).max(TINY);
    let mut c = f;
    let mut d = 0.0;
    for k in 1..BESSEL_MAX_ITER {
        let bk = b(k);
        d = bk + d;
        if d.abs() < TINY {
            d = TINY;
        }
        d = 1.0 / d;
        c = bk + 1.0 / c;
        if c.abs() < TINY {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < SERIES_EPS {
            break;
        }
    }
    1.0 / f
}

/// `E[X'θ]` of the FvML law on `S^{p-1}`: `I_{p/2}(κ) / I_{p/2-1}(κ)`.
pub fn fvml_mean_resultant(p: usize, kappa: f64) -> f64 {
    if kappa == 0.0 {
        return 0.0;
    }
    bessel_ratio(0.5 * p as f64, kappa)
}
