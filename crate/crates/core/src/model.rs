//! Rotationally symmetric laws on the sphere with density
//! `x ↦ c_{p,κ,f} f(κ x'θ)`, their moments, concentration calibration, the
//! asymptotic regimes near uniformity, and the alternatives used in the
//! simulation studies.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geom::{self, frame_to, UnitVector};
use crate::specfn::{fvml_mean_resultant, integrate_interval, QuadratureSpec};

/// Upper end of the concentration search bracket in [`calibrate_kappa`].
pub const KAPPA_SEARCH_MAX: f64 = 500.0;

/// Largest concentration accepted by the linear radial function `1 + t`.
const LINEAR_KAPPA_LIMIT: f64 = 1.0;

/// Tolerance on `|E[X'θ](κ) - target|` reached by [`calibrate_kappa`].
pub const CALIBRATION_TOL: f64 = 1e-12;

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum RadialKind {
    Exp,
    Linear,
    Logistic,
    Custom(RadialFn),
}

/// A member `f` of the class of monotone increasing functions with
/// `f(0) = f'(0) = 1`.
#[derive(Clone)]
pub struct RadialFunction {
    name: String,
    kind: RadialKind,
}

impl fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialFunction").field("name", &self.name).finish()
    }
}

impl RadialFunction {
    /// `f(t) = e^t`, the Fisher–von Mises–Langevin family.
    pub fn fvml() -> Self {
        RadialFunction {
            name: "fvml".into(),
            kind: RadialKind::Exp,
        }
    }

    /// `f(t) = 1 + t`; densities stay positive only for `κ < 1`.
    pub fn linear() -> Self {
        RadialFunction {
            name: "linear".into(),
            kind: RadialKind::Linear,
        }
    }

    /// `f(t) = 2e^{2t} / (1 + e^{2t}) = 1 + tanh t`.
    pub fn logistic() -> Self {
        RadialFunction {
            name: "logistic".into(),
            kind: RadialKind::Logistic,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "fvml" | "vmf" => Ok(Self::fvml()),
            "linear" => Ok(Self::linear()),
            "logistic" => Ok(Self::logistic()),
            other => Err(Error::InvalidRadial {
                name: other.into(),
                reason: "unknown radial function (expected fvml, linear or logistic)".into(),
            }),
        }
    }

    /// Wraps a user-supplied `f`, spot-checking `f(0) = 1`, `f'(0) = 1`
    /// (centred difference) and monotonicity on a 101-point grid of [-1, 1].
    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let rf = RadialFunction {
            name: name.into(),
            kind: RadialKind::Custom(Arc::new(f)),
        };
        rf.validate()?;
        Ok(rf)
    }

    fn validate(&self) -> Result<()> {
        let invalid = |reason: String| Error::InvalidRadial {
            name: self.name.clone(),
            reason,
        };
        let at0 = self.eval(0.0);
        if (at0 - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("f(0) = {at0}, expected 1")));
        }
        let h = 1e-5;
        let slope = (self.eval(h) - self.eval(-h)) / (2.0 * h);
        if (slope - 1.0).abs() > 1e-6 {
            return Err(invalid(format!("f'(0) ≈ {slope}, expected 1")));
        }
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=100 {
            let t = -1.0 + 0.02 * i as f64;
            let v = self.eval(t);
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(format!("f({t}) = {v} is negative or not finite")));
            }
            if v < prev {
                return Err(invalid(format!("f decreases near t = {t}")));
            }
            prev = v;
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_fvml(&self) -> bool {
        matches!(self.kind, RadialKind::Exp)
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            RadialKind::Exp => t.exp(),
            RadialKind::Linear => 1.0 + t,
            RadialKind::Logistic => 1.0 + t.tanh(),
            RadialKind::Custom(f) => f(t),
        }
    }

    /// Concentrations must stay strictly below this value, if any.
    pub fn kappa_limit(&self) -> Option<f64> {
        match self.kind {
            RadialKind::Linear => Some(LINEAR_KAPPA_LIMIT),
            _ => None,
        }
    }

    /// `ln f(κ)`, the log of the maximum of `t ↦ f(κt)` on [-1, 1].
    fn ln_peak(&self, kappa: f64) -> f64 {
        match self.kind {
            RadialKind::Exp => kappa,
            _ => self.eval(kappa).ln(),
        }
    }

    /// `f(κt) / f(κ)`, bounded by one on [-1, 1].
    fn scaled(&self, kappa: f64, t: f64) -> f64 {
        match &self.kind {
            RadialKind::Exp => (kappa * (t - 1.0)).exp(),
            RadialKind::Linear => (1.0 + kappa * t) / (1.0 + kappa),
            RadialKind::Logistic => (1.0 + (kappa * t).tanh()) / (1.0 + kappa.tanh()),
            RadialKind::Custom(f) => f(kappa * t) / f(kappa),
        }
    }
}

/// The law `R(θ, κ, f)`; `κ = 0` is the uniform distribution whatever `θ`, `f`.
#[derive(Debug, Clone)]
pub struct RotSymModel {
    theta: UnitVector,
    kappa: f64,
    radial: RadialFunction,
}

impl RotSymModel {
    pub fn new(theta: UnitVector, kappa: f64, radial: RadialFunction) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(Error::domain(format!("concentration must be >= 0, got {kappa}")));
        }
        if let Some(limit) = radial.kappa_limit() {
            if kappa >= limit {
                return Err(Error::domain(format!(
                    "radial function `{}` needs kappa < {limit}, got {kappa}",
                    radial.name()
                )));
            }
        }
        Ok(RotSymModel {
            theta,
            kappa,
            radial,
        })
    }

    pub fn fvml(theta: UnitVector, kappa: f64) -> Result<Self> {
        Self::new(theta, kappa, RadialFunction::fvml())
    }

    pub fn theta(&self) -> &UnitVector {
        &self.theta
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn radial(&self) -> &RadialFunction {
        &self.radial
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }

    /// The same law moved to a new location.
    pub fn with_theta(&self, theta: UnitVector) -> Self {
        RotSymModel {
            theta,
            ..self.clone()
        }
    }

    /// Unnormalized marginal weight of `φ = arccos(X'θ)`, scaled by `1/f(κ)`:
    /// `sin^{p-2} φ · f(κ cos φ) / f(κ)`. Working in the angle removes the
    /// endpoint singularity of `(1 - t²)^{(p-3)/2}` at `p = 2`.
    pub(crate) fn angular_weight(&self, phi: f64) -> f64 {
        let p = self.dim() as i32;
        let s = phi.sin().max(0.0).powi(p - 2);
        if self.kappa == 0.0 {
            s
        } else {
            s * self.radial.scaled(self.kappa, phi.cos())
        }
    }

    fn angular_integral<F: Fn(f64) -> f64>(&self, g: F) -> Result<f64> {
        integrate_interval(
            |phi| g(phi.cos()) * self.angular_weight(phi),
            0.0,
            PI,
            &QuadratureSpec::default(),
        )
    }

    /// `ln c_{p,κ,f}`; stays finite where `c` itself would underflow.
    pub fn ln_normalizing_constant(&self) -> Result<f64> {
        let mass = self.angular_integral(|_| 1.0)?;
        let peak = if self.kappa == 0.0 {
            0.0
        } else {
            self.radial.ln_peak(self.kappa)
        };
        Ok(-peak - mass.ln())
    }
}

/// `c_{p,κ,f} = 1 / ∫_{-1}^{1} (1 - t²)^{(p-3)/2} f(κt) dt`.
pub fn normalizing_constant(model: &RotSymModel) -> Result<f64> {
    model.ln_normalizing_constant().map(f64::exp)
}

/// Density of `X'θ` on [-1, 1]: `c (1 - t²)^{(p-3)/2} f(κt)`.
#[derive(Debug, Clone)]
pub struct MarginalDensity {
    model: RotSymModel,
    ln_c: f64,
    scaled_mass: f64,
}

impl MarginalDensity {
    pub fn eval(&self, t: f64) -> f64 {
        if !(-1.0..=1.0).contains(&t) {
            return 0.0;
        }
        let p = self.model.dim() as f64;
        let base = (1.0 - t * t).powf(0.5 * (p - 3.0));
        let kappa = self.model.kappa;
        if kappa == 0.0 {
            return self.ln_c.exp() * base;
        }
        base * self.model.radial.scaled(kappa, t) / self.scaled_mass
    }

    /// `P(X'θ <= t)`.
    pub fn cdf(&self, t: f64) -> Result<f64> {
        if t <= -1.0 {
            return Ok(0.0);
        }
        if t >= 1.0 {
            return Ok(1.0);
        }
        let upper = integrate_interval(
            |phi| self.model.angular_weight(phi),
            t.acos(),
            PI,
            &QuadratureSpec::default(),
        )?;
        Ok((upper / self.scaled_mass).clamp(0.0, 1.0))
    }

    pub fn model(&self) -> &RotSymModel {
        &self.model
    }
}

pub fn marginal_u_density(model: &RotSymModel) -> Result<MarginalDensity> {
    let scaled_mass = model.angular_integral(|_| 1.0)?;
    Ok(MarginalDensity {
        ln_c: model.ln_normalizing_constant()?,
        model: model.clone(),
        scaled_mass,
    })
}

/// Moments of `X'θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    /// `E[X'θ]`
    pub e1: f64,
    /// `Var[X'θ]`
    pub e2_tilde: f64,
    /// `E[(X'θ)²]`
    pub e2: f64,
    /// `(1 - e2) / (1 - 1/p)`
    pub d: f64,
}

impl Moments {
    fn from_e1_e2(p: usize, e1: f64, e2: f64) -> Self {
        Moments {
            e1,
            e2_tilde: e2 - e1 * e1,
            e2,
            d: (1.0 - e2) / (1.0 - 1.0 / p as f64),
        }
    }
}

/// Moments by quadrature of `t` and `t²` against the marginal density.
pub fn moments(model: &RotSymModel) -> Result<Moments> {
    let mass = model.angular_integral(|_| 1.0)?;
    let first = model.angular_integral(|t| t)?;
    let second = model.angular_integral(|t| t * t)?;
    Ok(Moments::from_e1_e2(
        model.dim(),
        first / mass,
        second / mass,
    ))
}

/// FvML moments from the Bessel ratio `A_p(κ) = I_{p/2}(κ)/I_{p/2-1}(κ)`:
/// `e1 = A_p`, `Var = 1 - (p-1) A_p / κ - A_p²`.
pub fn fvml_moments(p: usize, kappa: f64) -> Moments {
    if kappa == 0.0 {
        return Moments::from_e1_e2(p, 0.0, 1.0 / p as f64);
    }
    let a = fvml_mean_resultant(p, kappa);
    let var = 1.0 - (p as f64 - 1.0) / kappa * a - a * a;
    Moments::from_e1_e2(p, a, var + a * a)
}

/// `E[X'θ]` as a function of `κ` for fixed `p`, `f`. FvML short-circuits to
/// the Bessel ratio, which agrees with quadrature to ~1e-13.
pub(crate) fn mean_resultant(p: usize, radial: &RadialFunction, kappa: f64) -> Result<f64> {
    if radial.is_fvml() {
        return Ok(fvml_mean_resultant(p, kappa));
    }
    let model = RotSymModel::new(UnitVector::pole(p), kappa, radial.clone())?;
    Ok(moments(&model)?.e1)
}

/// Concentration `κ >= 0` with `E[X'θ] = target_e1`.
///
/// `E[X'θ]` increases in `κ`, so a sign-changing bracket `[0, κ_max]` is
/// refined with the Illinois variant of regula falsi, bisecting whenever a
/// secant step stalls.
pub fn calibrate_kappa(p: usize, radial: &RadialFunction, target_e1: f64) -> Result<f64> {
    if p < 2 {
        return Err(Error::InvalidDimension(p));
    }
    if !(target_e1.is_finite() && target_e1 >= 0.0) {
        return Err(Error::domain(format!("target E[X'theta] must be >= 0, got {target_e1}")));
    }
    if target_e1 == 0.0 {
        return Ok(0.0);
    }
    let hi_kappa = match radial.kappa_limit() {
        Some(limit) => limit * (1.0 - 1e-9),
        None => KAPPA_SEARCH_MAX,
    };
    let e1 = |k: f64| mean_resultant(p, radial, k);
    let sup = e1(hi_kappa)?;
    if target_e1 >= sup {
        return Err(Error::TargetUnreachable {
            target: target_e1,
            supremum: sup,
        });
    }
    let (mut a, mut fa) = (0.0, -target_e1);
    let (mut b, mut fb) = (hi_kappa, sup - target_e1);
    let mut side = 0i8;
    for _ in 0..500 {
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let fc = e1(c)? - target_e1;
        if fc.abs() <= CALIBRATION_TOL * 1e-2 || (b - a) <= 4.0 * f64::EPSILON * b {
            return Ok(c);
        }
        if fc < 0.0 {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    let c = 0.5 * (a + b);
    let resid = (e1(c)? - target_e1).abs();
    if resid <= CALIBRATION_TOL {
        Ok(c)
    } else {
        Err(Error::NoConvergence {
            subdivisions: 500,
            error: resid,
        })
    }
}

/// The four asymptotic regimes, by how fast `κ_n = √p η_n ξ` shrinks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegimeKind {
    /// `η_n ≡ 1`
    AwayFromUniformity,
    /// `η_n → 0`, `√n η_n → ∞`
    BeyondContiguity,
    /// `η_n ~ 1/√n`
    UnderContiguity,
    /// `√n η_n → 0`
    StrictContiguity,
}

impl RegimeKind {
    pub fn label(&self) -> &'static str {
        match self {
            RegimeKind::AwayFromUniformity => "away",
            RegimeKind::BeyondContiguity => "beyond",
            RegimeKind::UnderContiguity => "contiguity",
            RegimeKind::StrictContiguity => "strict",
        }
    }

    pub fn from_exponent(a: f64) -> Result<Self> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::domain(format!("rate exponent must be >= 0, got {a}")));
        }
        Ok(if a == 0.0 {
            RegimeKind::AwayFromUniformity
        } else if a < 0.5 {
            RegimeKind::BeyondContiguity
        } else if a == 0.5 {
            RegimeKind::UnderContiguity
        } else {
            RegimeKind::StrictContiguity
        })
    }
}

impl fmt::Display for RegimeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for RegimeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "away" | "i" => Ok(RegimeKind::AwayFromUniformity),
            "beyond" | "ii" => Ok(RegimeKind::BeyondContiguity),
            "contiguity" | "contiguous" | "iii" => Ok(RegimeKind::UnderContiguity),
            "strict" | "iv" => Ok(RegimeKind::StrictContiguity),
            other => Err(Error::domain(format!(
                "unknown regime `{other}` (expected away, beyond, contiguity or strict)"
            ))),
        }
    }
}

/// Regime with rate `η_n = n^{-rate_exponent}` and locality parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeSpec {
    pub kind: RegimeKind,
    pub rate_exponent: f64,
    pub xi: f64,
    /// Limiting `Var[X'θ]`; only meaningful away from uniformity (it is
    /// `1/p` in every shrinking regime).
    pub e2_tilde: Option<f64>,
}

impl RegimeSpec {
    pub fn new(rate_exponent: f64, xi: f64, e2_tilde: Option<f64>) -> Result<Self> {
        if !(xi.is_finite() && xi > 0.0) {
            return Err(Error::domain(format!("locality parameter xi must be > 0, got {xi}")));
        }
        let kind = RegimeKind::from_exponent(rate_exponent)?;
        if kind == RegimeKind::AwayFromUniformity && e2_tilde.is_none() {
            return Err(Error::domain("the away-from-uniformity regime needs e2_tilde"));
        }
        Ok(RegimeSpec {
            kind,
            rate_exponent,
            xi,
            e2_tilde,
        })
    }

    /// A representative spec for a regime kind: exponents 0, 1/4, 1/2, 1.
    pub fn canonical(kind: RegimeKind, xi: f64, e2_tilde: Option<f64>) -> Result<Self> {
        let a = match kind {
            RegimeKind::AwayFromUniformity => 0.0,
            RegimeKind::BeyondContiguity => 0.25,
            RegimeKind::UnderContiguity => 0.5,
            RegimeKind::StrictContiguity => 1.0,
        };
        Self::new(a, xi, e2_tilde)
    }

    /// `η_n`.
    pub fn eta(&self, n: usize) -> f64 {
        (n as f64).powf(-self.rate_exponent)
    }

    /// Target `E[X'θ] = η_n ξ / √p` at sample size `n`.
    pub fn target_e1(&self, n: usize, p: usize) -> f64 {
        self.eta(n) * self.xi / (p as f64).sqrt()
    }

    /// Alternative rate `ν_n`: `1/(√n η_n)` while `√n η_n → ∞`, else 1.
    pub fn nu(&self, n: usize) -> f64 {
        match self.kind {
            RegimeKind::AwayFromUniformity | RegimeKind::BeyondContiguity => {
                1.0 / ((n as f64).sqrt() * self.eta(n))
            }
            _ => 1.0,
        }
    }
}

/// Identifies `(kind, a, ξ)` from concentrations `κ_n = √p n^{-a} ξ` given
/// at two or more sample sizes, via a least-squares fit of `ln κ_n` on
/// `ln n`. A constant sequence stays away from uniformity; its `ξ` and `ẽ₂`
/// then follow from `E[X'θ] = ξ/√p` and `Var[X'θ]` under `f`.
pub fn locality_from_kappa(
    kappas: &[(usize, f64)],
    p: usize,
    radial: &RadialFunction,
) -> Result<RegimeSpec> {
    if kappas.len() < 2 {
        return Err(Error::domain("need concentrations at two or more sample sizes"));
    }
    if kappas.iter().any(|&(n, k)| n == 0 || !(k > 0.0 && k.is_finite())) {
        return Err(Error::domain("concentrations must be positive at positive n"));
    }
    let m = kappas.len() as f64;
    let xs: Vec<f64> = kappas.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = kappas.iter().map(|&(_, k)| k.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("concentrations must be given at distinct sample sizes"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let mut a = -sxy / sxx;
    for snap in [0.0, 0.5] {
        if (a - snap).abs() < 1e-6 {
            a = snap;
        }
    }
    if a < 0.0 {
        return Err(Error::domain(format!("concentrations grow with n (exponent {a})")));
    }
    if a == 0.0 {
        let kappa = my.exp();
        let model = RotSymModel::new(UnitVector::pole(p), kappa, radial.clone())?;
        let mom = moments(&model)?;
        return RegimeSpec::new(0.0, (p as f64).sqrt() * mom.e1, Some(mom.e2_tilde));
    }
    let intercept = my + a * mx;
    RegimeSpec::new(a, intercept.exp() / (p as f64).sqrt(), None)
}

/// Largest alternative displacement used by the `ℓ = 0, 1` alternatives.
const TAU_MAX: [f64; 3] = [2.0, 0.0, 0.0];

/// Alternative `θ_r^{(ℓ)}` on `S²` for `ℓ ∈ 0..=3`, `r ∈ 0..=6`:
/// `normalize(θ₀ + n^{ℓ/4 - 1/2} (r/6) τ_max)` for `ℓ ∈ {0, 1}` and
/// `v_r = (sin(rπ/6), 0, cos(rπ/6))` for `ℓ ∈ {2, 3}`, written in the frame
/// where `θ₀` is the north pole and rotated to the actual `θ₀`.
pub fn local_alternative(ell: u32, r: u32, n: usize, theta0: &UnitVector) -> Result<UnitVector> {
    if theta0.dim() != 3 {
        return Err(Error::domain("alternatives are defined on S^2 (p = 3)"));
    }
    if ell > 3 || r > 6 {
        return Err(Error::domain(format!("need ell in 0..=3 and r in 0..=6, got ell={ell}, r={r}")));
    }
    let pole_frame = if ell <= 1 {
        let scale = (n as f64).powf(ell as f64 / 4.0 - 0.5) * r as f64 / 6.0;
        geom::normalize(&[scale * TAU_MAX[0], scale * TAU_MAX[1], 1.0 + scale * TAU_MAX[2]])?
    } else {
        let a = r as f64 * PI / 6.0;
        let (s, c) = if r == 6 { (0.0, -1.0) } else { a.sin_cos() };
        UnitVector::from_unit_unchecked(vec![s, 0.0, c])
    };
    if r == 0 {
        return Ok(theta0.clone());
    }
    let frame = frame_to(theta0);
    geom::normalize(&frame.mul_vec(&pole_frame))
}

/// Whether `θ₀ + ν τ` stays on the sphere: `θ₀'τ = -ν ||τ||² / 2`.
pub fn check_spherical_constraint(theta0: &UnitVector, tau: &[f64], nu: f64) -> bool {
    if tau.len() != theta0.dim() {
        return false;
    }
    let tt: f64 = tau.iter().map(|v| v * v).sum();
    (theta0.dot(tau) + 0.5 * nu * tt).abs() <= 1e-10
}
