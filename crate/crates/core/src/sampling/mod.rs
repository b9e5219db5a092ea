//! Samples from rotationally symmetric laws and the sample containers used
//! by the test statistics.

mod rng;
mod table;

use std::borrow::Cow;

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geom::{frame_to, normalize, SquareMatrix, UnitVector};
use crate::model::RotSymModel;

pub use rng::{derive_stream, labeled_rng, stream_rng, SimRng, DEFAULT_SEED};
use table::InverseCdfTable;

/// Tolerance on `||x|| - 1` for observations handed to [`Sample`].
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// `n` observations on `S^{p-1}`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    p: usize,
    data: Vec<f64>,
}

impl Sample {
    /// Wraps row-major coordinates, checking every row has unit norm.
    pub fn from_flat(p: usize, data: Vec<f64>) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidDimension(p));
        }
        if data.len() % p != 0 {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: data.len() % p,
            });
        }
        for (i, row) in data.chunks_exact(p).enumerate() {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::Normalization { line: i + 1, norm });
            }
        }
        Ok(Sample { p, data })
    }

    pub fn from_rows(rows: &[UnitVector]) -> Result<Self> {
        let p = rows.first().map(|r| r.dim()).ok_or_else(|| Error::domain("empty sample"))?;
        let mut data = Vec::with_capacity(rows.len() * p);
        for r in rows {
            if r.dim() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: r.dim(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Sample { p, data })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.p
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.p)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn summary(&self) -> Summary {
        let mut s = Summary::empty(self.p);
        for row in self.rows() {
            s.push(row);
        }
        s
    }
}

/// Sufficient statistics of a sample for every test in this crate: the size,
/// the sum of the observations and the sum of their outer products.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    n: usize,
    sum: Vec<f64>,
    scatter: SquareMatrix,
}

impl Summary {
    pub fn empty(p: usize) -> Self {
        Summary {
            n: 0,
            sum: vec![0.0; p],
            scatter: SquareMatrix::zeros(p),
        }
    }

    pub fn push(&mut self, x: &[f64]) {
        let p = self.sum.len();
        debug_assert_eq!(x.len(), p);
        self.n += 1;
        for i in 0..p {
            self.sum[i] += x[i];
            for j in i..p {
                let v = self.scatter.get(i, j) + x[i] * x[j];
                self.scatter.set(i, j, v);
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.sum.len()
    }

    /// `X̄`.
    pub fn mean(&self) -> Vec<f64> {
        let n = self.n.max(1) as f64;
        self.sum.iter().map(|s| s / n).collect()
    }

    /// `(1/n) Σ X_i X_i'`.
    pub fn second_moment(&self) -> SquareMatrix {
        let p = self.dim();
        let n = self.n.max(1) as f64;
        let mut m = SquareMatrix::zeros(p);
        for i in 0..p {
            for j in i..p {
                let v = self.scatter.get(i, j) / n;
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        m
    }

    /// `(1/n) Σ (X_i'θ)²`.
    pub fn mean_squared_projection(&self, theta: &[f64]) -> f64 {
        let p = self.dim();
        let mut acc = 0.0;
        for i in 0..p {
            acc += self.scatter.get(i, i) * theta[i] * theta[i];
            for j in i + 1..p {
                acc += 2.0 * self.scatter.get(i, j) * theta[i] * theta[j];
            }
        }
        acc / self.n.max(1) as f64
    }
}

/// Anything the test statistics can be computed from.
pub trait Summarized {
    fn summary(&self) -> Cow<'_, Summary>;
}

impl Summarized for Summary {
    fn summary(&self) -> Cow<'_, Summary> {
        Cow::Borrowed(self)
    }
}

impl Summarized for Sample {
    fn summary(&self) -> Cow<'_, Summary> {
        Cow::Owned(Sample::summary(self))
    }
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Uniform,
    /// Exact inversion of the `X'θ` marginal on `S²`.
    FvmlSphere { kappa: f64 },
    /// Wood's rejection scheme for FvML in any dimension.
    Wood {
        kappa: f64,
        b: f64,
        x0: f64,
        c: f64,
        beta: Beta<f64>,
    },
    Table(Box<InverseCdfTable>),
}

/// Prepared sampler for one law; draws `X = u θ + √(1-u²) S` with `S`
/// uniform on the sphere of the tangent space at `θ`.
#[derive(Debug, Clone)]
pub struct DirectionSampler {
    p: usize,
    frame: SquareMatrix,
    kind: SamplerKind,
}

impl DirectionSampler {
    pub fn new(model: &RotSymModel) -> Result<Self> {
        let p = model.dim();
        let kappa = model.kappa();
        let kind = if kappa == 0.0 {
            SamplerKind::Uniform
        } else if model.radial().is_fvml() && p == 3 {
            SamplerKind::FvmlSphere { kappa }
        } else if model.radial().is_fvml() {
            let q = (p - 1) as f64;
            let b = q / (2.0 * kappa + (4.0 * kappa * kappa + q * q).sqrt());
            let x0 = (1.0 - b) / (1.0 + b);
            let c = kappa * x0 + q * (1.0 - x0 * x0).ln();
            let beta = Beta::new(q / 2.0, q / 2.0).map_err(|e| Error::domain(e.to_string()))?;
            SamplerKind::Wood {
                kappa,
                b,
                x0,
                c,
                beta,
            }
        } else {
            SamplerKind::Table(Box::new(InverseCdfTable::new(model)?))
        };
        Ok(DirectionSampler {
            p,
            frame: frame_to(model.theta()),
            kind,
        })
    }

    pub fn uniform(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidDimension(p));
        }
        Ok(DirectionSampler {
            p,
            frame: SquareMatrix::identity(p),
            kind: SamplerKind::Uniform,
        })
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    /// Draws `u = X'θ`. Not used for the uniform law, which is sampled
    /// directly from normalized Gaussians.
    fn draw_u<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            SamplerKind::Uniform => {
                let mut y = vec![0.0; self.p];
                uniform_into(rng, &mut y);
                y[self.p - 1]
            }
            SamplerKind::FvmlSphere { kappa } => {
                let v: f64 = rng.random();
                let u = 1.0 + (-(1.0 - v) * -(-2.0 * kappa).exp_m1()).ln_1p() / kappa;
                u.clamp(-1.0, 1.0)
            }
            SamplerKind::Wood {
                kappa,
                b,
                x0,
                c,
                beta,
            } => {
                let q = (self.p - 1) as f64;
                loop {
                    let z = beta.sample(rng);
                    let w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
                    let v: f64 = rng.random();
                    if kappa * w + q * (1.0 - x0 * w).ln() - c >= v.ln() {
                        return w.clamp(-1.0, 1.0);
                    }
                }
            }
            SamplerKind::Table(t) => t.phi(rng.random()).cos(),
        }
    }

    /// Writes one draw into `out` (length `p`); `buf` is scratch of length `p`.
    pub fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64], buf: &mut [f64]) {
        if let SamplerKind::Uniform = self.kind {
            uniform_into(rng, out);
            return;
        }
        let p = self.p;
        let u = self.draw_u(rng);
        let v = (1.0 - u * u).max(0.0).sqrt();
        tangent_direction_into(rng, &mut buf[..p - 1]);
        for x in buf[..p - 1].iter_mut() {
            *x *= v;
        }
        buf[p - 1] = u;
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.frame.as_row_major()[i * p..(i + 1) * p];
            *o = row.iter().zip(buf.iter()).map(|(a, b)| a * b).sum();
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> UnitVector {
        let mut out = vec![0.0; self.p];
        let mut buf = vec![0.0; self.p];
        self.draw_into(rng, &mut out, &mut buf);
        normalize(&out).expect("sampled direction has unit norm")
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Sample {
        let p = self.p;
        let mut data = vec![0.0; n * p];
        let mut buf = vec![0.0; p];
        for row in data.chunks_exact_mut(p) {
            self.draw_into(rng, row, &mut buf);
            renormalize(row);
        }
        Sample { p, data }
    }

    /// Draws `n` observations straight into a [`Summary`].
    pub fn sample_summary<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Summary {
        let mut s = Summary::empty(self.p);
        let mut x = vec![0.0; self.p];
        let mut buf = vec![0.0; self.p];
        for _ in 0..n {
            self.draw_into(rng, &mut x, &mut buf);
            s.push(&x);
        }
        s
    }

    /// `n` draws of `u = X'θ` only.
    pub fn sample_u<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.draw_u(rng)).collect()
    }
}

fn renormalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in x.iter_mut() {
        *v /= n;
    }
}

fn uniform_into<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    loop {
        let mut nn = 0.0;
        for o in out.iter_mut() {
            *o = StandardNormal.sample(rng);
            nn += *o * *o;
        }
        if nn > 1e-300 {
            let n = nn.sqrt();
            out.iter_mut().for_each(|o| *o /= n);
            return;
        }
    }
}

/// Uniform direction on `S^{k-1}`, `k = out.len() >= 1`.
fn tangent_direction_into<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    match out.len() {
        0 => {}
        1 => out[0] = if rng.random::<bool>() { 1.0 } else { -1.0 },
        2 => {
            let a = std::f64::consts::TAU * rng.random::<f64>();
            let (s, c) = a.sin_cos();
            out[0] = c;
            out[1] = s;
        }
        _ => uniform_into(rng, out),
    }
}

/// `n` i.i.d. draws from `model`.
pub fn sample_rotsym<R: Rng + ?Sized>(model: &RotSymModel, n: usize, rng: &mut R) -> Result<Sample> {
    Ok(DirectionSampler::new(model)?.sample(n, rng))
}

/// `n` i.i.d. uniform draws on `S^{p-1}`.
pub fn sample_uniform<R: Rng + ?Sized>(p: usize, n: usize, rng: &mut R) -> Result<Sample> {
    Ok(DirectionSampler::uniform(p)?.sample(n, rng))
}

/// A uniform unit vector in the tangent space at `θ` (orthogonal to `θ`).
pub fn sample_tangent_direction<R: Rng + ?Sized>(theta: &UnitVector, rng: &mut R) -> Vec<f64> {
    let p = theta.dim();
    let mut y = vec![0.0; p];
    tangent_direction_into(rng, &mut y[..p - 1]);
    frame_to(theta).mul_vec(&y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{fvml_moments, RadialFunction};

    #[test]
    fn samples_have_unit_norm_and_right_shape() {
        let mut rng = labeled_rng(1, &[0]);
        let theta = normalize(&[1.0, -2.0, 0.5]).unwrap();
        for (kappa, f) in [(0.0, RadialFunction::fvml()), (2.0, RadialFunction::fvml()), (0.5, RadialFunction::linear())] {
            let m = RotSymModel::new(theta.clone(), kappa, f).unwrap();
            let s = sample_rotsym(&m, 500, &mut rng).unwrap();
            assert_eq!(s.len(), 500);
            assert_eq!(s.dim(), 3);
            for row in s.rows() {
                let n: f64 = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((n - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn summary_matches_sample() {
        let mut rng = labeled_rng(2, &[0]);
        let s = sample_uniform(4, 50, &mut rng).unwrap();
        let sum = s.summary();
        let theta = normalize(&[0.3, 0.1, -0.5, 0.8]).unwrap();
        let direct: f64 = s.rows().map(|r| theta.dot(r).powi(2)).sum::<f64>() / 50.0;
        assert!((sum.mean_squared_projection(&theta) - direct).abs() < 1e-14);
        assert!((sum.second_moment().quadratic_form(&theta) - direct).abs() < 1e-14);
        let mean0: f64 = s.rows().map(|r| r[0]).sum::<f64>() / 50.0;
        assert!((sum.mean()[0] - mean0).abs() < 1e-15);
    }

    #[test]
    fn fvml_mean_resultant_matches_closed_form() {
        let mut rng = labeled_rng(3, &[0]);
        for &p in &[2usize, 3, 5] {
            let m = RotSymModel::fvml(UnitVector::pole(p), 1.5).unwrap();
            let sampler = DirectionSampler::new(&m).unwrap();
            let us = sampler.sample_u(200_000, &mut rng);
            let mean = us.iter().sum::<f64>() / us.len() as f64;
            let exact = fvml_moments(p, 1.5).e1;
            assert!((mean - exact).abs() < 5e-3, "p {p}: {mean} vs {exact}");
        }
    }

    #[test]
    fn tangent_direction_is_orthogonal() {
        let mut rng = labeled_rng(4, &[0]);
        let theta = normalize(&[0.2, 0.3, -0.9, 0.1]).unwrap();
        for _ in 0..100 {
            let s = sample_tangent_direction(&theta, &mut rng);
            assert!(theta.dot(&s).abs() < 1e-14);
            let n: f64 = s.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn flat_rows_are_validated() {
        assert!(Sample::from_flat(3, vec![1.0, 0.0, 0.0, 0.0, 1.0]).is_err());
        assert!(matches!(
            Sample::from_flat(2, vec![1.0, 0.0, 0.6, 0.6]),
            Err(Error::Normalization { line: 2, .. })
        ));
    }
}
