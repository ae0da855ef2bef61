use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Forward and backward envelopes sampled on a uniform z grid at time `t`.
/// Under the power convention |A±|² is in W.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeState {
    pub z_min: f64,
    pub dz: f64,
    pub a_plus: Vec<Complex64>,
    pub a_minus: Vec<Complex64>,
    pub t: f64,
}

impl EnvelopeState {
    /// Samples `f(z) -> (A₊, A₋)` at `n` points covering [z_min, z_max].
    pub fn from_fn<F>(z_min: f64, z_max: f64, n: usize, t: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> (Complex64, Complex64),
    {
        if n < 2 || !(z_max > z_min) {
            return Err(Error::InvalidParameter(format!(
                "envelope grid needs n >= 2 and z_max > z_min (n = {n}, [{z_min}, {z_max}])"
            )));
        }
        let dz = (z_max - z_min) / (n - 1) as f64;
        let (a_plus, a_minus) = (0..n).map(|i| f(z_min + i as f64 * dz)).unzip();
        Ok(Self { z_min, dz, a_plus, a_minus, t })
    }

    pub fn len(&self) -> usize {
        self.a_plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a_plus.is_empty()
    }

    pub fn z(&self, i: usize) -> f64 {
        self.z_min + i as f64 * self.dz
    }

    pub fn z_grid(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.z(i)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.a_plus.len() != self.a_minus.len() {
            return Err(Error::InvalidParameter("A+ and A- lengths differ".into()));
        }
        if !(self.dz > 0.0) {
            return Err(Error::InvalidParameter(format!("dz must be positive, got {}", self.dz)));
        }
        if self.a_plus.iter().chain(&self.a_minus).any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::InvalidParameter("non-finite envelope sample".into()));
        }
        Ok(())
    }

    /// |A₊|² + |A₋|² at each sample.
    pub fn density(&self) -> Vec<f64> {
        self.a_plus.iter().zip(&self.a_minus).map(|(p, m)| p.norm_sqr() + m.norm_sqr()).collect()
    }

    /// ∫(|A₊|² + |A₋|²) dz (trapezoid), in W·m.
    pub fn energy(&self) -> f64 {
        let d = self.density();
        trapezoid(&d, self.dz)
    }

    /// Energy-weighted mean position.
    pub fn centroid(&self) -> f64 {
        let d = self.density();
        let e = trapezoid(&d, self.dz);
        if e == 0.0 {
            return f64::NAN;
        }
        let w: Vec<f64> = d.iter().enumerate().map(|(i, v)| v * self.z(i)).collect();
        trapezoid(&w, self.dz) / e
    }

    /// Largest |A₊|² + |A₋|².
    pub fn peak(&self) -> f64 {
        self.density().into_iter().fold(0.0, f64::max)
    }

    /// Forward minus backward power, ∫(|A₊|² − |A₋|²) dz.
    pub fn momentum(&self) -> f64 {
        let d: Vec<f64> =
            self.a_plus.iter().zip(&self.a_minus).map(|(p, m)| p.norm_sqr() - m.norm_sqr()).collect();
        trapezoid(&d, self.dz)
    }
}

fn trapezoid(v: &[f64], h: f64) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => 0.0,
        n => h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[n - 1])),
    }
}
