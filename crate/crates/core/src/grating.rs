//! Cosine index grating written by the control standing wave.
//!
//! With |Ω_s(z)|² = Ω₁²cos²(k_B z) the linear response χ_a is affine in
//! |Ω_s|², so the medium splits exactly into a mean part χ̄ (evaluated at
//! Ω₁²/2) and a first-harmonic modulation δχ·cos(2k_B z).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::atomic::{self, checked, AtomicParams, Detunings, FieldParams};
use crate::constants::SPEED_OF_LIGHT;
use crate::error::{Error, Result};

pub const DEFAULT_SLABS_PER_PERIOD: usize = 64;

/// How the grating susceptibilities depend on probe frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dispersion {
    /// Frequency-independent χ̄, δχ, χ⁽³⁾ (synthetic test media).
    Static,
    /// Re-evaluated from the atomic model at every probe detuning.
    Atomic { atomic: AtomicParams, fields: FieldParams },
}

/// Susceptibilities of the grating at one probe frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalChi {
    pub chi_bar: Complex64,
    pub delta_chi: Complex64,
    pub chi3: Complex64,
}

impl LocalChi {
    /// Drops all imaginary parts.
    pub fn lossless(self) -> Self {
        Self {
            chi_bar: self.chi_bar.re.into(),
            delta_chi: self.delta_chi.re.into(),
            chi3: self.chi3.re.into(),
        }
    }

    pub fn n_bar(&self) -> f64 {
        (1.0 + self.chi_bar).sqrt().re
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GratingSpec {
    pub chi_bar: Complex64,
    pub delta_chi: Complex64,
    /// Kerr coefficient in (V/m)⁻².
    pub chi3: Complex64,
    /// Bragg wavevector in m⁻¹; the period is π/k_B.
    pub k_b: f64,
    pub length: f64,
    pub slabs_per_period: usize,
    /// Probe angular frequency at zero detuning (ω₃₁ for atomic media).
    pub omega_ref: f64,
    /// Rad/s per unit of detuning (γ_a for atomic media).
    pub detuning_unit: f64,
    /// Detuning at which the stored susceptibilities were evaluated.
    pub detuning: f64,
    pub dispersion: Dispersion,
}

impl GratingSpec {
    /// A dispersionless grating with fixed susceptibilities, evaluated at its
    /// own carrier `omega_p` (detuning zero).
    pub fn synthetic(
        chi_bar: f64,
        delta_chi: f64,
        k_b: f64,
        length: f64,
        omega_p: f64,
        detuning_unit: f64,
    ) -> Self {
        Self {
            chi_bar: chi_bar.into(),
            delta_chi: delta_chi.into(),
            chi3: Complex64::new(0.0, 0.0),
            k_b,
            length,
            slabs_per_period: DEFAULT_SLABS_PER_PERIOD,
            omega_ref: omega_p,
            detuning_unit,
            detuning: 0.0,
            dispersion: Dispersion::Static,
        }
    }

    pub fn with_slabs_per_period(mut self, slabs: usize) -> Self {
        self.slabs_per_period = slabs;
        self
    }

    pub fn period(&self) -> f64 {
        std::f64::consts::PI / self.k_b
    }

    /// Whole periods in the sample.
    pub fn period_count(&self) -> u64 {
        (self.length / self.period()).round().max(1.0) as u64
    }

    pub fn n_bar(&self) -> f64 {
        (1.0 + self.chi_bar).sqrt().re
    }

    /// Carrier angular frequency at which the stored values hold.
    pub fn omega_p(&self) -> f64 {
        self.omega_at(self.detuning)
    }

    pub fn omega_at(&self, detuning: f64) -> f64 {
        self.omega_ref + detuning * self.detuning_unit
    }

    pub fn local(&self) -> LocalChi {
        LocalChi { chi_bar: self.chi_bar, delta_chi: self.delta_chi, chi3: self.chi3 }
    }

    /// Susceptibilities at another probe detuning.
    pub fn local_at(&self, detuning: f64) -> Result<LocalChi> {
        match &self.dispersion {
            Dispersion::Static => Ok(self.local()),
            Dispersion::Atomic { atomic, fields } => {
                let f = fields.with_delta1(detuning);
                grating_susceptibilities(atomic, &f)
            }
        }
    }

    /// n²(z) = 1 + χ̄ + δχ cos(2k_B z) + χ⁽³⁾|E_p|².
    pub fn index_squared(&self, z: f64, probe_intensity: f64) -> Complex64 {
        1.0 + self.chi_bar
            + self.delta_chi * (2.0 * self.k_b * z).cos()
            + self.chi3 * probe_intensity
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) {
            return Err(Error::NonPositiveLength(self.length));
        }
        if !(self.k_b.is_finite() && self.k_b > 0.0) {
            return Err(Error::InvalidParameter(format!("k_B must be positive, got {}", self.k_b)));
        }
        if self.slabs_per_period < 8 {
            return Err(Error::InvalidParameter(format!(
                "slabs_per_period must be >= 8, got {}",
                self.slabs_per_period
            )));
        }
        Ok(())
    }

    /// Non-fatal construction diagnostics.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let periods = self.length / self.period();
        if periods < 10.0 {
            out.push(format!("sample holds only {periods:.2} grating periods (< 10)"));
        }
        let n = self.n_bar();
        if n < 1.0 - 1e-3 {
            out.push(format!("mean index {n:.6} below 1 - 1e-3: medium is not dilute"));
        }
        out
    }
}

/// δχ = (K₀/4)·Ω₁²/(4δ̃Δ̃Δ̃₅₂ − Δ̃₅₂|Ω_c|²).
pub fn modulation_depth(atomic: &AtomicParams, fields: &FieldParams) -> Result<Complex64> {
    let d = Detunings::new(atomic, fields);
    let den = checked("delta_chi", d.d52 * d.lambda_factor(fields.omega_c))?;
    Ok(0.25 * atomic.k0() / atomic.gamma_a * fields.omega_1 * fields.omega_1 / den)
}

fn grating_susceptibilities(atomic: &AtomicParams, fields: &FieldParams) -> Result<LocalChi> {
    let mean = FieldParams { omega_s_sq: 0.5 * fields.omega_1 * fields.omega_1, ..*fields };
    Ok(LocalChi {
        chi_bar: atomic::chi_a(atomic, &mean)?.value,
        delta_chi: modulation_depth(atomic, fields)?,
        chi3: atomic::chi3_self(atomic, fields)?.value,
    })
}

/// k_B = n̄·ω_p/c at the detuning carried by `fields` (Bragg-matched, Δk = 0).
pub fn matched_bragg_wavevector(atomic: &AtomicParams, fields: &FieldParams) -> Result<f64> {
    let local = grating_susceptibilities(atomic, fields)?;
    let omega = atomic.omega31() + fields.delta1 * atomic.gamma_a;
    Ok(local.n_bar() * omega / SPEED_OF_LIGHT)
}

pub fn build_grating(
    atomic: &AtomicParams,
    fields: &FieldParams,
    length: f64,
    k_b: f64,
) -> Result<GratingSpec> {
    let local = grating_susceptibilities(atomic, fields)?;
    let spec = GratingSpec {
        chi_bar: local.chi_bar,
        delta_chi: local.delta_chi,
        chi3: local.chi3,
        k_b,
        length,
        slabs_per_period: DEFAULT_SLABS_PER_PERIOD,
        omega_ref: atomic.omega31(),
        detuning_unit: atomic.gamma_a,
        detuning: fields.delta1,
        dispersion: Dispersion::Atomic { atomic: *atomic, fields: *fields },
    };
    spec.validate()?;
    Ok(spec)
}

/// Angle φ with k_s cos φ = k_B between the control standing wave and the probe.
pub fn bragg_angle(k_s: f64, k_b: f64) -> Result<f64> {
    if !(k_b > 0.0) {
        return Err(Error::InvalidParameter(format!("k_B must be positive, got {k_b}")));
    }
    if !(k_s >= k_b) {
        return Err(Error::GeometryInfeasible { k_s, k_b });
    }
    Ok((k_b / k_s).acos())
}
