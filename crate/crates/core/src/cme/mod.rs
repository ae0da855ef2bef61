//! Coupled-mode reduction of the grating: coefficients of
//!
//! ```text
//!  ∂_z A₊ + v_g⁻¹ ∂_t A₊ = iκ e^{-2iΔkz} A₋ + iγ(|A₊|² + 2|A₋|²) A₊
//! −∂_z A₋ + v_g⁻¹ ∂_t A₋ = iκ e^{+2iΔkz} A₊ + iγ(|A₋|² + 2|A₊|²) A₋
//! ```
//!
//! and the linear dispersion they imply.

mod envelope;
mod soliton;

pub use envelope::EnvelopeState;
pub use soliton::{
    analytic_soliton, default_prefactor, select_soliton_variant, selection_grid, soliton_period_of,
    soliton_profile_table, soliton_state, soliton_residual, soliton_width, PhaseForm, PrefactorVariant,
    SolitonOptions, SolitonParams, VariantResidual, VariantSelection, RESIDUAL_TOLERANCE,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::atomic::{AtomicParams, FieldParams};
use crate::constants::{EPSILON_0, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::grating::{self, GratingSpec};

/// 50 µm-radius beam.
pub const DEFAULT_A_EFF: f64 = 7.85e-9;

/// Base half-step (detuning units) of the Richardson derivative.
const DERIVATIVE_STEP: f64 = 1e-2;
const RICHARDSON_TOLERANCE: f64 = 1e-3;

/// Ratios behind the slowly-varying assumptions δχ ≫ ∂χ̄/∂ω·γ_a ≫ ∂δχ/∂ω·γ_a
/// and χ⁽³⁾ ≫ ∂χ⁽³⁾/∂ω·γ_a. "≫" is read as a factor of at least 10.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub delta_chi: f64,
    pub dchi_bar_scaled: f64,
    pub ddelta_chi_scaled: f64,
    pub chi3: f64,
    pub dchi3_scaled: f64,
    pub modulation_over_dispersion: f64,
    pub dispersion_over_modulation_slope: f64,
    pub kerr_over_slope: f64,
    pub ordering_holds: bool,
    /// Relative disagreement of the last two Richardson levels.
    pub richardson_rel_diff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CmeCoefficients {
    /// Group velocity without the grating, m/s.
    pub v_g: f64,
    /// Coupling constant, m⁻¹ (imaginary part: modulated loss).
    pub kappa: Complex64,
    /// Nonlinear coefficient under the power convention, W⁻¹·m⁻¹.
    pub gamma_nl: Complex64,
    /// Nonlinear coefficient under the field convention, m⁻¹·(V/m)⁻².
    pub gamma_field: Complex64,
    /// Mean amplitude attenuation ω_p Im χ̄/(2n̄c), m⁻¹.
    pub alpha: f64,
    /// k_p − k_B, m⁻¹.
    pub delta_k: f64,
    pub n_bar: f64,
    /// Effective mode area, m².
    pub a_eff: f64,
    /// Carrier angular frequency, rad/s.
    pub omega_p: f64,
    pub validity: Option<ValidityReport>,
}

impl CmeCoefficients {
    /// Unit-normalised lossless coefficients (κ = γ = v_g = 1) used for
    /// scale-free checks of the soliton family.
    pub fn canonical() -> Self {
        Self {
            v_g: 1.0,
            kappa: 1.0.into(),
            gamma_nl: 1.0.into(),
            gamma_field: 1.0.into(),
            alpha: 0.0,
            delta_k: 0.0,
            n_bar: 1.0,
            a_eff: 1.0,
            omega_p: 1.0,
            validity: None,
        }
    }

    /// Copy with every loss term removed.
    pub fn lossless(&self) -> Self {
        Self {
            kappa: self.kappa.re.into(),
            gamma_nl: self.gamma_nl.re.into(),
            gamma_field: self.gamma_field.re.into(),
            alpha: 0.0,
            ..*self
        }
    }

    /// sign(Re κ)·sign(Re γ).
    pub fn sign_product(&self) -> f64 {
        self.kappa.re.signum() * self.gamma_nl.re.signum()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_g > 0.0 && self.v_g < SPEED_OF_LIGHT) {
            return Err(Error::InvalidParameter(format!(
                "group velocity {} m/s outside (0, c)",
                self.v_g
            )));
        }
        let finite = [self.kappa.re, self.kappa.im, self.gamma_nl.re, self.gamma_nl.im, self.alpha, self.delta_k];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coupled-mode coefficient".into()));
        }
        Ok(())
    }
}

/// Central difference with two Richardson levels; returns the derivative and
/// the relative disagreement of the last two extrapolations.
fn richardson<F>(f: F, x: f64, h: f64) -> Result<(Complex64, f64)>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let central = |h: f64| -> Result<Complex64> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
    let d0 = central(h)?;
    let d1 = central(h / 2.0)?;
    let d2 = central(h / 4.0)?;
    let r10 = (4.0 * d1 - d0) / 3.0;
    let r11 = (4.0 * d2 - d1) / 3.0;
    let r2 = (16.0 * r11 - r10) / 15.0;
    let scale = r2.norm();
    let rel = if scale == 0.0 { 0.0 } else { (r2 - r11).norm() / scale };
    if rel > RICHARDSON_TOLERANCE {
        return Err(Error::DerivativeNonConvergent { rel_diff: rel });
    }
    Ok((r2, rel))
}

/// ∂χ̄/∂ω in s (per rad/s) at the grating's evaluation detuning, plus the
/// Richardson disagreement.
pub fn mean_chi_slope(grating: &GratingSpec) -> Result<(Complex64, f64)> {
    let x0 = grating.detuning;
    let (d, rel) = richardson(|x| Ok(grating.local_at(x)?.chi_bar), x0, DERIVATIVE_STEP)?;
    Ok((d / grating.detuning_unit, rel))
}

/// Coupled-mode coefficients at the grating's evaluation frequency.
pub fn derive_coefficients(grating: &GratingSpec, a_eff: f64) -> Result<CmeCoefficients> {
    if !(a_eff > 0.0) {
        return Err(Error::InvalidParameter(format!("A_eff must be positive, got {a_eff}")));
    }
    let c = SPEED_OF_LIGHT;
    let omega = grating.omega_p();
    let n_bar = grating.n_bar();
    let (dchi, rel) = mean_chi_slope(grating)?;

    let v_g = 1.0 / (n_bar / c + omega / (2.0 * n_bar * c) * dchi.re);
    let kappa = grating.delta_chi * omega / (4.0 * n_bar * c);
    let gamma_field = grating.chi3 * omega / (2.0 * n_bar * c);
    let gamma_nl = gamma_field * 2.0 / (n_bar * EPSILON_0 * c * a_eff);
    let alpha = omega * grating.chi_bar.im / (2.0 * n_bar * c);
    let delta_k = n_bar * omega / c - grating.k_b;

    let x0 = grating.detuning;
    let h = DERIVATIVE_STEP;
    let slope = |pick: fn(&grating::LocalChi) -> Complex64| -> Result<f64> {
        let up = pick(&grating.local_at(x0 + h)?);
        let down = pick(&grating.local_at(x0 - h)?);
        Ok(((up - down) / (2.0 * h)).norm())
    };
    let ddelta = slope(|l| l.delta_chi)?;
    let dchi3 = slope(|l| l.chi3)?;
    let dchi_scaled = dchi.norm() * grating.detuning_unit;
    let ratio = |a: f64, b: f64| if b == 0.0 { f64::INFINITY } else { a / b };
    let m1 = ratio(grating.delta_chi.norm(), dchi_scaled);
    let m2 = ratio(dchi_scaled, ddelta);
    let m3 = ratio(grating.chi3.norm(), dchi3);
    let validity = ValidityReport {
        delta_chi: grating.delta_chi.norm(),
        dchi_bar_scaled: dchi_scaled,
        ddelta_chi_scaled: ddelta,
        chi3: grating.chi3.norm(),
        dchi3_scaled: dchi3,
        modulation_over_dispersion: m1,
        dispersion_over_modulation_slope: m2,
        kerr_over_slope: m3,
        ordering_holds: m1 >= 10.0 && m2 >= 10.0 && m3 >= 10.0,
        richardson_rel_diff: rel,
    };

    let coeffs = CmeCoefficients {
        v_g,
        kappa,
        gamma_nl,
        gamma_field,
        alpha,
        delta_k,
        n_bar,
        a_eff,
        omega_p: omega,
        validity: Some(validity),
    };
    coeffs.validate()?;
    Ok(coeffs)
}

/// Builds the Bragg-matched grating for `atomic`/`fields` and derives its
/// coefficients.
pub fn coefficients_for(
    atomic: &AtomicParams,
    fields: &FieldParams,
    length: f64,
    a_eff: f64,
) -> Result<(GratingSpec, CmeCoefficients)> {
    let kb = grating::matched_bragg_wavevector(atomic, fields)?;
    let g = grating::build_grating(atomic, fields, length, kb)?;
    let c = derive_coefficients(&g, a_eff)?;
    Ok((g, c))
}

/// Group velocity and GVD of the linear grating at δ_ω = (ω − ω_p)/v_g (m⁻¹).
/// Returns (V_g in m/s, β₂ in s²/m).
pub fn linear_dispersion(coeffs: &CmeCoefficients, delta_omega: f64) -> Result<(f64, f64)> {
    let k = coeffs.kappa.re;
    let d2 = delta_omega * delta_omega;
    if !(d2 > k * k) {
        return Err(Error::InsideGap { delta: delta_omega.abs(), kappa: k.abs() });
    }
    let vg = coeffs.v_g * (1.0 - k * k / d2).sqrt();
    let beta2 = -delta_omega.signum() * (k * k / (coeffs.v_g * coeffs.v_g)) / (d2 - k * k).powf(1.5);
    Ok((vg, beta2))
}

/// Linear band-gap width 2|v_g Re κ| in rad/s.
pub fn gap_width_cme(coeffs: &CmeCoefficients) -> f64 {
    2.0 * (coeffs.v_g * coeffs.kappa.re).abs()
}

/// Finds the k0_scale at which Re κ equals `target_kappa` (m⁻¹) by fixed-point
/// iteration on κ ∝ k0_scale/n̄(k0_scale).
pub fn calibrate_k0_scale(atomic: &AtomicParams, fields: &FieldParams, target_kappa: f64) -> Result<f64> {
    let kappa_at = |s: f64| -> Result<f64> {
        let a = atomic.with_k0_scale(s);
        let local_delta = grating::modulation_depth(&a, fields)?;
        let kb = grating::matched_bragg_wavevector(&a, fields)?;
        let omega = a.omega31() + fields.delta1 * a.gamma_a;
        let n_bar = kb * SPEED_OF_LIGHT / omega;
        Ok((local_delta * omega / (4.0 * n_bar * SPEED_OF_LIGHT)).re)
    };
    let mut s = atomic.k0_scale;
    for _ in 0..100 {
        let k = kappa_at(s)?;
        if k == 0.0 || (k.signum() != target_kappa.signum()) {
            return Err(Error::InvalidParameter(format!(
                "cannot reach kappa = {target_kappa} m^-1: coupling is {k} m^-1"
            )));
        }
        let next = s * target_kappa / k;
        if ((next - s) / s).abs() < 1e-14 {
            return Ok(next);
        }
        s = next;
    }
    Err(Error::InvalidParameter("k0_scale calibration did not converge".into()))
}
