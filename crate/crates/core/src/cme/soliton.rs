//! Two-parameter family of moving Bragg solitons of the lossless,
//! Bragg-matched coupled-mode equations.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CmeCoefficients, EnvelopeState};
use crate::error::{Error, Result};
use crate::table::Table;

/// Largest normalised residual accepted by the residual oracle.
pub const RESIDUAL_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    /// Velocity in units of v_g, −1 < ν < 1.
    pub nu: f64,
    /// Shape parameter in (0, π).
    pub psi: f64,
}

impl SolitonParams {
    pub fn new(nu: f64, psi: f64) -> Result<Self> {
        let sp = Self { nu, psi };
        sp.validate()?;
        Ok(sp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > -1.0 && self.nu < 1.0) {
            return Err(Error::InvalidParameter(format!("nu must lie in (-1, 1), got {}", self.nu)));
        }
        if !(self.psi > 0.0 && self.psi < PI) {
            return Err(Error::InvalidParameter(format!("psi must lie in (0, pi), got {}", self.psi)));
        }
        Ok(())
    }
}

/// Denominator C in the amplitude factor √(κ(1−ν²)/(γ(C−ν²))) and in the
/// phase-chirp term 4ν/(C−ν²).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrefactorVariant {
    /// C = 2.
    TwoMinusNuSq,
    /// C = 3.
    ThreeMinusNuSq,
}

impl PrefactorVariant {
    pub const ALL: [PrefactorVariant; 2] = [Self::TwoMinusNuSq, Self::ThreeMinusNuSq];

    pub fn constant(self) -> f64 {
        match self {
            Self::TwoMinusNuSq => 2.0,
            Self::ThreeMinusNuSq => 3.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::TwoMinusNuSq => "2-nu^2",
            Self::ThreeMinusNuSq => "3-nu^2",
        }
    }
}

/// Linear part of the soliton phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseForm {
    /// κ cosψ·ν(z − νv_g t)/√(1−ν²).
    Scaled,
    /// κ cosψ·(νz − v_g t)/√(1−ν²); the form that solves the equations.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonOptions {
    pub prefactor: PrefactorVariant,
    pub phase: PhaseForm,
}

impl Default for SolitonOptions {
    fn default() -> Self {
        Self { prefactor: default_prefactor(), phase: PhaseForm::Exact }
    }
}

/// Precomputed constants of one family member.
struct Profile {
    a_plus: f64,
    a_minus: f64,
    kappa: f64,
    v_g: f64,
    nu: f64,
    half_psi: f64,
    sin_psi: f64,
    cos_psi: f64,
    root: f64,
    chirp: f64,
    cot_half: f64,
    phase: PhaseForm,
    /// −1 when the A₋ → −A₋ gauge was needed to make κ/γ positive.
    gauge: f64,
}

impl Profile {
    fn new(coeffs: &CmeCoefficients, sp: &SolitonParams, opts: &SolitonOptions) -> Result<Self> {
        sp.validate()?;
        let k = coeffs.kappa.re;
        let g = coeffs.gamma_nl.re;
        if k == 0.0 || g == 0.0 || !k.is_finite() || !g.is_finite() {
            return Err(Error::InvalidSolitonRegime { kappa: k, gamma: g });
        }
        if !(coeffs.v_g > 0.0) {
            return Err(Error::InvalidParameter(format!("v_g must be positive, got {}", coeffs.v_g)));
        }
        // A₋ → −A₋ flips the sign of κ and leaves γ alone.
        let (kappa, gauge) = if k / g < 0.0 { (-k, -1.0) } else { (k, 1.0) };
        let nu = sp.nu;
        let c = opts.prefactor.constant();
        let one_minus = 1.0 - nu * nu;
        let root = one_minus.sqrt();
        let amp = (kappa * one_minus / (g * (c - nu * nu))).sqrt() * sp.psi.sin();
        Ok(Self {
            a_plus: ((1.0 + nu) / (1.0 - nu)).powf(0.25) * amp,
            a_minus: -((1.0 - nu) / (1.0 + nu)).powf(0.25) * amp,
            kappa,
            v_g: coeffs.v_g,
            nu,
            half_psi: 0.5 * sp.psi,
            sin_psi: sp.psi.sin(),
            cos_psi: sp.psi.cos(),
            root,
            chirp: 4.0 * nu / (c - nu * nu),
            cot_half: 1.0 / (0.5 * sp.psi).tan(),
            phase: opts.phase,
            gauge,
        })
    }

    fn eval(&self, z: f64, t: f64) -> (Complex64, Complex64) {
        let vt = self.v_g * t;
        let zeta = self.kappa * self.sin_psi * (z - self.nu * vt) / self.root;
        let linear = match self.phase {
            PhaseForm::Exact => self.kappa * self.cos_psi * (self.nu * z - vt) / self.root,
            PhaseForm::Scaled => self.kappa * self.cos_psi * self.nu * (z - self.nu * vt) / self.root,
        };
        // atan2 keeps tan⁻¹[cot(ψ/2)·coth ζ] continuous through ζ = 0.
        let theta = linear - self.chirp * self.cot_half.atan2(zeta.tanh());
        let rot = Complex64::from_polar(1.0, theta);
        let ap = self.a_plus * sech(Complex64::new(zeta, -self.half_psi)) * rot;
        let am = self.gauge * self.a_minus * sech(Complex64::new(zeta, self.half_psi)) * rot;
        (ap, am)
    }
}

/// sech w without overflow for large |Re w|.
fn sech(w: Complex64) -> Complex64 {
    let s = if w.re >= 0.0 { -w } else { w };
    let e = s.exp();
    2.0 * e / (1.0 + e * e)
}

/// (A₊, A₋) of the family member `sp` at (z, t). Loss terms in `coeffs` are
/// ignored; Δk is taken as zero.
pub fn analytic_soliton(
    coeffs: &CmeCoefficients,
    sp: &SolitonParams,
    z: f64,
    t: f64,
    opts: &SolitonOptions,
) -> Result<(Complex64, Complex64)> {
    Ok(Profile::new(coeffs, sp, opts)?.eval(z, t))
}

/// Samples the soliton at time `t` on `n` points of [z_min, z_max].
pub fn soliton_state(
    coeffs: &CmeCoefficients,
    sp: &SolitonParams,
    opts: &SolitonOptions,
    z_min: f64,
    z_max: f64,
    n: usize,
    t: f64,
) -> Result<EnvelopeState> {
    let p = Profile::new(coeffs, sp, opts)?;
    EnvelopeState::from_fn(z_min, z_max, n, t, |z| p.eval(z, t))
}

/// Spatial scale √(1−ν²)/(|κ| sinψ) of the sech envelope, m.
pub fn soliton_width(coeffs: &CmeCoefficients, sp: &SolitonParams) -> f64 {
    (1.0 - sp.nu * sp.nu).sqrt() / (coeffs.kappa.re.abs() * sp.psi.sin())
}

/// Soliton period π/(2|κ| sin²ψ √(1−ν²)), m.
pub fn soliton_period_of(coeffs: &CmeCoefficients, sp: &SolitonParams) -> f64 {
    let s = sp.psi.sin();
    PI / (2.0 * coeffs.kappa.re.abs() * s * s * (1.0 - sp.nu * sp.nu).sqrt())
}

const FD6: [f64; 6] = [-1.0, 9.0, -45.0, 45.0, -9.0, 1.0];
const FD6_OFFSETS: [f64; 6] = [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0];

/// Largest residual of the lossless matched coupled-mode equations over
/// ±12 widths around the soliton, normalised by |κ|·max|A|. Derivatives use
/// sixth-order central differences.
pub fn soliton_residual(coeffs: &CmeCoefficients, sp: &SolitonParams, opts: &SolitonOptions) -> Result<f64> {
    let p = Profile::new(coeffs, sp, opts)?;
    let k = coeffs.kappa.re;
    let g = coeffs.gamma_nl.re;
    let v = coeffs.v_g;
    let w = soliton_width(coeffs, sp);
    let t0 = 0.37 / (k.abs() * v);
    let centre = sp.nu * v * t0;
    let hz = 1e-3 * w;
    let ht = hz / v;
    let i = Complex64::i();

    let n = 401;
    let mut worst = 0.0_f64;
    let mut peak = 0.0_f64;
    for j in 0..n {
        let z = centre - 12.0 * w + 24.0 * w * j as f64 / (n - 1) as f64;
        let (ap, am) = p.eval(z, t0);
        let (mut dzp, mut dzm, mut dtp, mut dtm) = (Complex64::default(), Complex64::default(), Complex64::default(), Complex64::default());
        for (c, o) in FD6.iter().zip(FD6_OFFSETS) {
            let (zp, zm) = p.eval(z + o * hz, t0);
            dzp += c * zp;
            dzm += c * zm;
            let (tp, tm) = p.eval(z, t0 + o * ht);
            dtp += c * tp;
            dtm += c * tm;
        }
        dzp /= 60.0 * hz;
        dzm /= 60.0 * hz;
        dtp /= 60.0 * ht;
        dtm /= 60.0 * ht;
        let ip = ap.norm_sqr();
        let im = am.norm_sqr();
        let rp = dzp + dtp / v - i * k * am - i * g * (ip + 2.0 * im) * ap;
        let rm = -dzm + dtm / v - i * k * ap - i * g * (im + 2.0 * ip) * am;
        worst = worst.max(rp.norm()).max(rm.norm());
        peak = peak.max(ap.norm()).max(am.norm());
    }
    Ok(worst / (k.abs() * peak))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariantResidual {
    pub prefactor: PrefactorVariant,
    pub phase: PhaseForm,
    /// Worst normalised residual over the (ν, ψ) grid.
    pub worst: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSelection {
    pub entries: Vec<VariantResidual>,
    /// The unique prefactor passing with the exact phase, if exactly one does.
    pub winner: Option<PrefactorVariant>,
}

/// 5×5 grid over ν ∈ [−0.9, 0.9], ψ ∈ [0.2, π−0.2].
pub fn selection_grid() -> Vec<SolitonParams> {
    let mut out = Vec::with_capacity(25);
    for a in 0..5 {
        for b in 0..5 {
            let nu = -0.9 + 1.8 * a as f64 / 4.0;
            let psi = 0.2 + (PI - 0.4) * b as f64 / 4.0;
            out.push(SolitonParams { nu, psi });
        }
    }
    out
}

/// Residual oracle over both prefactors and both phase forms.
pub fn select_soliton_variant(coeffs: &CmeCoefficients) -> Result<VariantSelection> {
    let grid = selection_grid();
    let mut entries = Vec::new();
    for phase in [PhaseForm::Exact, PhaseForm::Scaled] {
        for prefactor in PrefactorVariant::ALL {
            let opts = SolitonOptions { prefactor, phase };
            let mut worst = 0.0_f64;
            for sp in &grid {
                worst = worst.max(soliton_residual(coeffs, sp, &opts)?);
            }
            entries.push(VariantResidual { prefactor, phase, worst });
        }
    }
    let passing: Vec<_> = entries
        .iter()
        .filter(|e| e.phase == PhaseForm::Exact && e.worst < RESIDUAL_TOLERANCE)
        .map(|e| e.prefactor)
        .collect();
    let winner = if passing.len() == 1 { Some(passing[0]) } else { None };
    Ok(VariantSelection { entries, winner })
}

/// Prefactor selected by the residual oracle on unit coefficients.
pub fn default_prefactor() -> PrefactorVariant {
    static CHOICE: OnceLock<PrefactorVariant> = OnceLock::new();
    *CHOICE.get_or_init(|| {
        select_soliton_variant(&CmeCoefficients::canonical())
            .ok()
            .and_then(|s| s.winner)
            .expect("exactly one soliton prefactor solves the coupled-mode equations")
    })
}

/// Soliton profile at time `t` as a CSV table.
pub fn soliton_profile_table(state: &EnvelopeState, sp: &SolitonParams, opts: &SolitonOptions) -> Table {
    let mut t = Table::new(["z[m]", "Re(A+)[W^0.5]", "Im(A+)[W^0.5]", "Re(A-)[W^0.5]", "Im(A-)[W^0.5]"])
        .comment(format!("bragg soliton nu = {}, psi = {} rad, t = {} s", sp.nu, sp.psi, state.t))
        .comment(format!("prefactor {}, phase {:?}", opts.prefactor.label(), opts.phase));
    for (i, (p, m)) in state.a_plus.iter().zip(&state.a_minus).enumerate() {
        t.push(vec![state.z(i), p.re, p.im, m.re, m.im]);
    }
    t
}
