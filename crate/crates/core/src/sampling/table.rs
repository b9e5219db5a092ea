//! Inverse-CDF table for the angle `φ = arccos(X'θ)` of a general
//! rotationally symmetric law, with monotone cubic (Fritsch–Carlson)
//! interpolation of `φ` as a function of the CDF.

use std::f64::consts::PI;

use crate::error::Result;
use crate::model::RotSymModel;
use crate::specfn::{integrate_interval, QuadratureSpec};

pub(crate) const TABLE_NODES: usize = 4096;

#[derive(Debug, Clone)]
pub(crate) struct InverseCdfTable {
    /// CDF values, strictly increasing from 0 to 1.
    probs: Vec<f64>,
    /// Angles (descending from π) matching `probs`, measured so that the
    /// CDF is that of `u = cos φ`.
    phis: Vec<f64>,
    slopes: Vec<f64>,
}

impl InverseCdfTable {
    pub(crate) fn new(model: &RotSymModel) -> Result<Self> {
        let spec = QuadratureSpec::default();
        let h = PI / (TABLE_NODES - 1) as f64;
        // accumulate from φ = π (u = -1) towards φ = 0 (u = 1)
        let mut probs = Vec::with_capacity(TABLE_NODES);
        let mut phis = Vec::with_capacity(TABLE_NODES);
        let mut acc = 0.0;
        probs.push(0.0);
        phis.push(PI);
        for i in (0..TABLE_NODES - 1).rev() {
            let lo = i as f64 * h;
            let hi = if i + 1 == TABLE_NODES - 1 { PI } else { (i + 1) as f64 * h };
            acc += integrate_interval(|phi| model.angular_weight(phi), lo, hi, &spec)?;
            let phi = lo;
            if acc > *probs.last().unwrap() {
                probs.push(acc);
                phis.push(phi);
            }
        }
        let total = acc;
        for p in probs.iter_mut() {
            *p /= total;
        }
        *probs.last_mut().unwrap() = 1.0;
        *phis.last_mut().unwrap() = 0.0;
        let slopes = fritsch_carlson_slopes(&probs, &phis);
        Ok(InverseCdfTable {
            probs,
            phis,
            slopes,
        })
    }

    /// Angle at CDF level `q ∈ [0, 1]`.
    pub(crate) fn phi(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 1.0);
        let k = match self.probs.partition_point(|&p| p <= q) {
            0 => 0,
            i if i >= self.probs.len() => self.probs.len() - 2,
            i => i - 1,
        };
        let (x0, x1) = (self.probs[k], self.probs[k + 1]);
        let (y0, y1) = (self.phis[k], self.phis[k + 1]);
        let h = x1 - x0;
        let t = (q - x0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        (h00 * y0 + h10 * h * self.slopes[k] + h01 * y1 + h11 * h * self.slopes[k + 1])
            .clamp(0.0, PI)
    }
}

/// Monotone cubic Hermite slopes.
fn fritsch_carlson_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / (x[k + 1] - x[k])).collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for k in 1..n - 1 {
        m[k] = if delta[k - 1] * delta[k] <= 0.0 {
            0.0
        } else {
            0.5 * (delta[k - 1] + delta[k])
        };
    }
    for k in 0..n - 1 {
        if delta[k] == 0.0 {
            m[k] = 0.0;
            m[k + 1] = 0.0;
            continue;
        }
        let a = m[k] / delta[k];
        let b = m[k + 1] / delta[k];
        let s = a * a + b * b;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            m[k] = tau * a * delta[k];
            m[k + 1] = tau * b * delta[k];
        }
    }
    m
}
