//! Steady-state probe susceptibility of the five-level EIT atom.
//!
//! Level scheme: the probe drives |1⟩↔|3⟩ (Rabi Ω_p) and |2⟩↔|4⟩ (Ω_p′), the
//! coupling laser drives |2⟩↔|3⟩ (Ω_c), and the control standing wave drives
//! |2⟩↔|5⟩ (Ω_s). All rates, detunings and Rabi frequencies are angular and
//! expressed in multiples of the reference linewidth γ_a; only γ_a itself
//! carries rad/s.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{DENOMINATOR_FLOOR, EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomicParams {
    /// Reference rate in rad/s.
    pub gamma_a: f64,
    /// Ground-state coherence decay, in γ_a. Zero is allowed.
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    pub gamma5: f64,
    /// Dipole moment of |1⟩↔|3⟩ in C·m.
    pub mu13: f64,
    /// Dipole moment of |2⟩↔|4⟩ in C·m.
    pub mu24: f64,
    /// Number density in m⁻³.
    pub density: f64,
    /// Probe vacuum wavelength in m.
    pub lambda_p: f64,
    /// Dimensionless factor multiplying both K₀ and K₁.
    pub k0_scale: f64,
}

impl AtomicParams {
    /// ⁸⁷Rb cold-cloud parameter set: μ₁₃ = 2.5×10⁻²⁹ C·m, 10¹² cm⁻³,
    /// Γ₂ = 0.01γ_a, Γ₃ = Γ₄ = Γ₅ = γ_a, γ_a = 2π·6 MHz, λ = 780 nm.
    pub fn rubidium87() -> Self {
        Self {
            gamma_a: crate::constants::GAMMA_A_DEFAULT,
            gamma2: 0.01,
            gamma3: 1.0,
            gamma4: 1.0,
            gamma5: 1.0,
            mu13: 2.5e-29,
            mu24: 2.5e-29,
            density: 1e18,
            lambda_p: 780e-9,
            k0_scale: 1.0,
        }
    }

    pub fn with_k0_scale(mut self, k0_scale: f64) -> Self {
        self.k0_scale = k0_scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma_a", self.gamma_a),
            ("Gamma3", self.gamma3),
            ("Gamma4", self.gamma4),
            ("Gamma5", self.gamma5),
            ("mu13", self.mu13),
            ("mu24", self.mu24),
            ("density", self.density),
            ("lambda_p", self.lambda_p),
            ("k0_scale", self.k0_scale),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.gamma2.is_finite() && self.gamma2 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Gamma2 must be non-negative, got {}",
                self.gamma2
            )));
        }
        Ok(())
    }

    /// K₀ = k0_scale·ρ|μ₁₃|²/(ħε₀), in rad/s.
    pub fn k0(&self) -> f64 {
        self.k0_scale * self.density * self.mu13 * self.mu13 / (HBAR * EPSILON_0)
    }

    /// K₁ = k0_scale·ρ|μ₁₃|²|μ₂₄|²/(ε₀ħ³), in rad³·s⁻³·(V/m)⁻².
    pub fn k1(&self) -> f64 {
        let r24 = self.mu24 / HBAR;
        self.k0() * r24 * r24
    }

    /// Transition angular frequency ω₃₁ = 2πc/λ_p.
    pub fn omega31(&self) -> f64 {
        2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / self.lambda_p
    }

    /// Resonant absorption cross section σ = 3λ²/2π.
    pub fn cross_section(&self) -> f64 {
        3.0 * self.lambda_p * self.lambda_p / (2.0 * std::f64::consts::PI)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    pub delta1: f64,
    pub delta2: f64,
    pub delta4: f64,
    pub delta5: f64,
    pub omega_c: f64,
    /// Peak Rabi frequency of the control standing wave.
    pub omega_1: f64,
    pub omega_p_prime: f64,
    /// Local |Ω_s|² in γ_a² for point evaluations.
    pub omega_s_sq: f64,
}

impl FieldParams {
    /// Δ₁ = Δ₂ = 0, Δ₄ = 5, Δ₅ = 20, Ω_c = Ω₁ = 10 (γ_a units), weak probe,
    /// local |Ω_s|² at its spatial mean Ω₁²/2.
    pub fn rubidium_default() -> Self {
        Self {
            delta1: 0.0,
            delta2: 0.0,
            delta4: 5.0,
            delta5: 20.0,
            omega_c: 10.0,
            omega_1: 10.0,
            omega_p_prime: 0.0,
            omega_s_sq: 50.0,
        }
    }

    pub fn with_delta1(mut self, delta1: f64) -> Self {
        self.delta1 = delta1;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_c.is_finite() && self.omega_c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Omega_c must be positive, got {}",
                self.omega_c
            )));
        }
        for (name, v) in [
            ("Omega_1", self.omega_1),
            ("Omega_p_prime", self.omega_p_prime),
            ("Omega_s_sq", self.omega_s_sq),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be non-negative, got {v}")));
            }
        }
        for (name, v) in [
            ("Delta1", self.delta1),
            ("Delta2", self.delta2),
            ("Delta4", self.delta4),
            ("Delta5", self.delta5),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    /// Ω_p′ < 0.1·min(Γ₃, Ω_c).
    pub fn weak_probe(&self, atomic: &AtomicParams) -> bool {
        self.omega_p_prime < 0.1 * atomic.gamma3.min(self.omega_c)
    }

    /// |Ω_c|² > Γ₂Γ₃: a transparency window exists near two-photon resonance.
    pub fn eit_condition(&self, atomic: &AtomicParams) -> bool {
        self.omega_c * self.omega_c > atomic.gamma2 * atomic.gamma3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiKind {
    Full,
    ChiA,
    Chi3Self,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexChi {
    pub value: Complex64,
    pub kind: ChiKind,
}

/// Complex detunings δ̃, Δ̃, Δ̃₄₂, Δ̃₅₂ (γ_a units), each carrying +iΓ/2.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Detunings {
    pub two_photon: Complex64,
    pub one_photon: Complex64,
    pub d42: Complex64,
    pub d52: Complex64,
}

impl Detunings {
    pub(crate) fn new(atomic: &AtomicParams, fields: &FieldParams) -> Self {
        let raman = fields.delta1 - fields.delta2;
        Self {
            two_photon: Complex64::new(raman, 0.5 * atomic.gamma2),
            one_photon: Complex64::new(fields.delta1, 0.5 * atomic.gamma3),
            d42: Complex64::new(raman + fields.delta4, 0.5 * atomic.gamma4),
            d52: Complex64::new(raman + fields.delta5, 0.5 * atomic.gamma5),
        }
    }

    /// 4δ̃Δ̃ − |Ω_c|², the Λ-system resonance factor.
    pub(crate) fn lambda_factor(&self, omega_c: f64) -> Complex64 {
        4.0 * self.two_photon * self.one_photon - omega_c * omega_c
    }
}

pub(crate) fn checked(what: &'static str, den: Complex64) -> Result<Complex64> {
    let magnitude = den.norm();
    if !(magnitude >= DENOMINATOR_FLOOR) {
        return Err(Error::DenominatorUnderflow { what, magnitude });
    }
    Ok(den)
}

/// Full rational susceptibility of the five-level system at the probe frequency.
pub fn susceptibility_full(atomic: &AtomicParams, fields: &FieldParams) -> Result<ComplexChi> {
    let d = Detunings::new(atomic, fields);
    let os = fields.omega_s_sq;
    let op = fields.omega_p_prime * fields.omega_p_prime;
    let oc = fields.omega_c * fields.omega_c;

    let num = -4.0 * d.two_photon * d.d42 * d.d52 + d.d42 * os + d.d52 * op;
    let den = 4.0 * d.two_photon * d.one_photon * d.d42 * d.d52
        - d.one_photon * d.d52 * op
        - d.one_photon * d.d42 * os
        - d.d42 * d.d52 * oc;
    let den = checked("susceptibility_full", den)?;
    Ok(ComplexChi {
        value: 0.5 * atomic.k0() / atomic.gamma_a * num / den,
        kind: ChiKind::Full,
    })
}

/// Linear plus control-induced cross-Kerr part, valid for |Ω_p′|² ≪ |Ω_c|²
/// and (Δ, δ) ≪ (Δ₄₂, Δ₅₂).
pub fn chi_a(atomic: &AtomicParams, fields: &FieldParams) -> Result<ComplexChi> {
    let d = Detunings::new(atomic, fields);
    let num = -4.0 * d.two_photon * d.d52 + fields.omega_s_sq;
    let den = checked("chi_a", d.d52 * d.lambda_factor(fields.omega_c))?;
    Ok(ComplexChi {
        value: 0.5 * atomic.k0() / atomic.gamma_a * num / den,
        kind: ChiKind::ChiA,
    })
}

/// Self-Kerr χ⁽³⁾(ω_p; ω_p, −ω_p, ω_p) in (V/m)⁻², field convention
/// |Ω_p′|² = |μ₂₄E/ħ|².
pub fn chi3_self(atomic: &AtomicParams, fields: &FieldParams) -> Result<ComplexChi> {
    let d = Detunings::new(atomic, fields);
    let den = checked("chi3_self", d.d42 * d.lambda_factor(fields.omega_c))?;
    let ga3 = atomic.gamma_a.powi(3);
    Ok(ComplexChi {
        value: 0.5 * atomic.k1() / ga3 / den,
        kind: ChiKind::Chi3Self,
    })
}

/// EIT window width |Ω_c|²/(Γ₃√(ρσL)) in rad/s; `omega_c` in γ_a units.
pub fn transparency_window(atomic: &AtomicParams, omega_c: f64, length: f64) -> Result<f64> {
    if !(length > 0.0) {
        return Err(Error::NonPositiveLength(length));
    }
    let optical_depth = atomic.density * atomic.cross_section() * length;
    let oc = omega_c * atomic.gamma_a;
    let g3 = atomic.gamma3 * atomic.gamma_a;
    Ok(oc * oc / (g3 * optical_depth.sqrt()))
}
