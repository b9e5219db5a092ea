//! Unit-sphere geometry: validated unit vectors, tangent projections, the
//! tangent-normal decomposition, rotations carrying the pole to a given
//! location, and spherical grids.

use std::f64::consts::PI;
use std::ops::Deref;

use crate::error::{Error, Result};

/// Norms below this are treated as zero by [`normalize`].
pub const ZERO_NORM: f64 = 1e-300;

/// Residual tangent norm below which a point counts as sitting at `±θ`.
const POLE_TOL: f64 = 1e-14;

/// A point on the unit sphere `S^{p-1}`, `p >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Normalizes `coords`; see [`normalize`].
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        normalize(&coords)
    }

    /// The last canonical basis vector `e_p`, used as the pole of every frame.
    pub fn pole(p: usize) -> Self {
        Self::basis(p, p - 1)
    }

    /// Canonical basis vector `e_k` of `R^p`.
    pub fn basis(p: usize, k: usize) -> Self {
        assert!(p >= 2 && k < p, "basis vector e_{k} undefined in R^{p}");
        let mut v = vec![0.0; p];
        v[k] = 1.0;
        UnitVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        dot(&self.0, x)
    }

    /// The antipodal point `-self`.
    pub fn antipode(&self) -> Self {
        UnitVector(self.0.iter().map(|c| -c).collect())
    }

    /// Wraps coordinates already known to have unit norm (internal use).
    pub(crate) fn from_unit_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!((norm(&coords) - 1.0).abs() < 1e-9);
        UnitVector(coords)
    }
}

impl Deref for UnitVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm with scaling so that huge or tiny entries do not
/// overflow or underflow.
pub(crate) fn norm(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
}

/// Returns `x / ||x||`.
pub fn normalize(x: &[f64]) -> Result<UnitVector> {
    if x.len() < 2 {
        return Err(Error::InvalidDimension(x.len()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("vector has non-finite coordinates"));
    }
    let n = norm(x);
    if n <= ZERO_NORM {
        return Err(Error::ZeroVector { norm: n });
    }
    Ok(UnitVector(x.iter().map(|v| v / n).collect()))
}

/// `x = u θ + v s` with `u = x'θ`, `v = sqrt(1 - u^2)` and `s` a unit tangent
/// vector at `θ` (zero when `x = ±θ`).
#[derive(Debug, Clone, PartialEq)]
pub struct TangentNormalParts {
    pub u: f64,
    pub v: f64,
    pub s: Vec<f64>,
}

impl TangentNormalParts {
    /// Rebuilds `u θ + v s`.
    pub fn reconstruct(&self, theta: &UnitVector) -> Vec<f64> {
        theta
            .iter()
            .zip(&self.s)
            .map(|(t, s)| self.u * t + self.v * s)
            .collect()
    }
}

pub fn tangent_normal(x: &UnitVector, theta: &UnitVector) -> Result<TangentNormalParts> {
    check_dims(theta.dim(), x.dim())?;
    let u = theta.dot(x).clamp(-1.0, 1.0);
    let mut r: Vec<f64> = x.iter().zip(theta.iter()).map(|(a, t)| a - u * t).collect();
    // second Gram-Schmidt pass: r'θ must vanish to rounding even when r is tiny
    let drift = theta.dot(&r);
    r.iter_mut().zip(theta.iter()).for_each(|(c, t)| *c -= drift * t);
    let v = norm(&r);
    if v <= POLE_TOL {
        return Ok(TangentNormalParts {
            u,
            v: 0.0,
            s: vec![0.0; x.dim()],
        });
    }
    let s = r.iter().map(|c| c / v).collect();
    Ok(TangentNormalParts {
        u,
        v: v.min(1.0),
        s,
    })
}

/// `(I_p - θθ') x`.
pub fn project_tangent(x: &[f64], theta: &UnitVector) -> Result<Vec<f64>> {
    check_dims(theta.dim(), x.len())?;
    let c = theta.dot(x);
    Ok(x.iter().zip(theta.iter()).map(|(a, t)| a - c * t).collect())
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Dense row-major square matrix. Dimensions here are small (the sphere
/// dimension `p`), so nothing fancier is needed.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        SquareMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(dim * dim, data.len())?;
        Ok(SquareMatrix { dim, data })
    }

    /// `scale * (I - θθ')`.
    pub fn tangent_projector(theta: &UnitVector, scale: f64) -> Self {
        let p = theta.dim();
        let mut m = Self::zeros(p);
        for i in 0..p {
            for j in 0..p {
                let id = if i == j { 1.0 } else { 0.0 };
                m.data[i * p + j] = scale * (id - theta[i] * theta[j]);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.dim + j] = value;
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, j)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        self.data.chunks_exact(self.dim).map(|row| dot(row, x)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &SquareMatrix) -> Self {
        let p = self.dim;
        let mut out = Self::zeros(p);
        for i in 0..p {
            for k in 0..p {
                let a = self.get(i, k);
                for j in 0..p {
                    out.data[i * p + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// `x' A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul_vec(x))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &SquareMatrix) -> Self {
        SquareMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Orthogonal `O` with `O e_p = θ`.
///
/// Built from the Householder reflection exchanging `e_p` and `θ`, with the
/// sign of the first column flipped so that `det O = +1`. `θ = e_p` maps to
/// the identity.
pub fn frame_to(theta: &UnitVector) -> SquareMatrix {
    let p = theta.dim();
    let mut w = theta.antipode().into_inner();
    w[p - 1] += 1.0;
    let ww = dot(&w, &w);
    if ww == 0.0 {
        return SquareMatrix::identity(p);
    }
    let mut o = SquareMatrix::zeros(p);
    for i in 0..p {
        for j in 0..p {
            let id = if i == j { 1.0 } else { 0.0 };
            o.set(i, j, id - 2.0 * w[i] * w[j] / ww);
        }
    }
    for i in 0..p {
        o.set(i, 0, -o.get(i, 0));
    }
    o
}

/// A grid of directions on `S^1` or `S^2` together with its antipodal pairing.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    points: Vec<UnitVector>,
    antipodes: Vec<Option<usize>>,
}

impl SphereGrid {
    pub fn points(&self) -> &[UnitVector] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, UnitVector::dim)
    }

    /// Index of the grid point at `-points[i]`, if the grid contains one.
    pub fn antipode(&self, i: usize) -> Option<usize> {
        self.antipodes[i]
    }

    pub fn into_points(self) -> Vec<UnitVector> {
        self.points
    }
}

/// Smallest grid accepted by [`sphere_grid`].
pub const MIN_GRID_RESOLUTION: usize = 4;

/// Equally spaced angles for `p = 2`; for `p = 3` the Fibonacci lattice
/// `z_i = 1 - (2i+1)/N`, longitude `i` times the golden angle. Heights are
/// symmetric about the equator, so each open hemisphere `z > 0`, `z < 0`
/// holds `⌊N/2⌋` points.
pub fn sphere_grid(p: usize, resolution: usize) -> Result<SphereGrid> {
    if !(2..=3).contains(&p) {
        return Err(Error::UnsupportedDimension(p));
    }
    if resolution < MIN_GRID_RESOLUTION {
        return Err(Error::domain(format!(
            "grid resolution {resolution} is below the minimum of {MIN_GRID_RESOLUTION}"
        )));
    }
    let n = resolution;
    if p == 2 {
        let points = (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                UnitVector::from_unit_unchecked(vec![a.cos(), a.sin()])
            })
            .collect();
        let antipodes = (0..n)
            .map(|k| (n % 2 == 0).then_some((k + n / 2) % n))
            .collect();
        return Ok(SphereGrid { points, antipodes });
    }

    let golden_angle = PI * (3.0 - 5.0_f64.sqrt());
    let points = (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden_angle * i as f64;
            UnitVector::from_unit_unchecked(vec![r * phi.cos(), r * phi.sin(), z])
        })
        .collect();
    let antipodes = vec![None; n];
    Ok(SphereGrid { points, antipodes })
}

/// Symmetrised `k`-nearest-neighbour adjacency lists (chordal distance).
///
/// Points are swept in order of their last coordinate; since the chordal
/// distance bounds the difference in any coordinate, a window in that
/// coordinate that already holds `k` candidates closer than its half-width
/// contains the true `k` nearest neighbours.
pub fn knn_adjacency(points: &[UnitVector], k: usize) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut adj = vec![Vec::new(); n];
    if n < 2 || k == 0 {
        return adj;
    }
    let k = k.min(n - 1);
    let last = points[0].dim() - 1;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| points[a][last].total_cmp(&points[b][last]));
    let mut rank = vec![0usize; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let mut width = (4.0 * PI * k as f64 / n as f64).sqrt().max(1e-6);
    let mut cand: Vec<(f64, usize)> = Vec::new();
    for i in 0..n {
        let zi = points[i][last];
        let mut w = width;
        loop {
            cand.clear();
            let mut lo = rank[i];
            while lo > 0 && zi - points[order[lo - 1]][last] <= w {
                lo -= 1;
            }
            let mut hi = rank[i];
            while hi + 1 < n && points[order[hi + 1]][last] - zi <= w {
                hi += 1;
            }
            for &j in &order[lo..=hi] {
                if j != i {
                    let d2: f64 = points[i]
                        .iter()
                        .zip(points[j].iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    cand.push((d2, j));
                }
            }
            let within = cand.iter().filter(|(d2, _)| d2.sqrt() <= w).count();
            if within >= k || (lo == 0 && hi + 1 == n) {
                break;
            }
            w *= 2.0;
        }
        if w > width {
            width = w.min(2.0);
        }
        cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, j) in cand.iter().take(k) {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}
