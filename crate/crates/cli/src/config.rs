//! TOML scenario schema. Every physical quantity carries its unit in the key:
//! `_gamma_a` for rates and detunings in units of γ_a, `_m`, `_s`, `_us`,
//! `_w`, `_rad`, `_per_m` and so on. Unknown keys are rejected.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use eitbragg_core::bandstructure::Boundary;
use eitbragg_core::cme::{PhaseForm, PrefactorVariant};
use eitbragg_core::constants::GAMMA_A_DEFAULT;
use eitbragg_core::{AtomicParams, FieldParams, OrderFactor};

use crate::error::CliError;
use crate::presets;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Susceptibility,
    Bandstructure,
    Coefficients,
    Soliton,
    Propagate,
    DesignMap,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Susceptibility => "susceptibility",
            Kind::Bandstructure => "bandstructure",
            Kind::Coefficients => "coefficients",
            Kind::Soliton => "soliton",
            Kind::Propagate => "propagate",
            Kind::DesignMap => "design-map",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSection,
    pub atomic: AtomicSection,
    pub fields: FieldsSection,
    pub geometry: GeometrySection,
    pub susceptibility: SusceptibilitySection,
    pub bandstructure: BandSection,
    pub soliton: SolitonSection,
    pub propagate: PropagateSection,
    pub design: DesignSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    /// Scenario executed by `eitbragg run`.
    pub kind: Option<Kind>,
    pub out_dir: Option<String>,
    /// Multiplies K₀ and K₁. Ignored when `calibrate_kappa_per_m` is set.
    pub k0_scale: f64,
    /// Choose k0_scale so that Re κ takes this value.
    pub calibrate_kappa_per_m: Option<f64>,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self { kind: None, out_dir: None, k0_scale: 1.0, calibrate_kappa_per_m: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AtomicSection {
    pub gamma_a_rad_per_s: f64,
    pub gamma2_gamma_a: f64,
    pub gamma3_gamma_a: f64,
    pub gamma4_gamma_a: f64,
    pub gamma5_gamma_a: f64,
    pub mu13_c_m: f64,
    /// Defaults to `mu13_c_m`.
    pub mu24_c_m: Option<f64>,
    pub density_per_cm3: f64,
    pub lambda_p_nm: f64,
}

impl Default for AtomicSection {
    fn default() -> Self {
        let rb = AtomicParams::rubidium87();
        Self {
            gamma_a_rad_per_s: GAMMA_A_DEFAULT,
            gamma2_gamma_a: rb.gamma2,
            gamma3_gamma_a: rb.gamma3,
            gamma4_gamma_a: rb.gamma4,
            gamma5_gamma_a: rb.gamma5,
            mu13_c_m: rb.mu13,
            mu24_c_m: None,
            density_per_cm3: rb.density * 1e-6,
            lambda_p_nm: rb.lambda_p * 1e9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldsSection {
    pub delta1_gamma_a: f64,
    pub delta2_gamma_a: f64,
    pub delta4_gamma_a: f64,
    pub delta5_gamma_a: f64,
    pub omega_c_gamma_a: f64,
    pub omega_1_gamma_a: f64,
    pub omega_p_prime_gamma_a: f64,
}

impl Default for FieldsSection {
    fn default() -> Self {
        let f = FieldParams::rubidium_default();
        Self {
            delta1_gamma_a: f.delta1,
            delta2_gamma_a: f.delta2,
            delta4_gamma_a: f.delta4,
            delta5_gamma_a: f.delta5,
            omega_c_gamma_a: f.omega_c,
            omega_1_gamma_a: f.omega_1,
            omega_p_prime_gamma_a: f.omega_p_prime,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    pub length_m: f64,
    pub a_eff_m2: f64,
    pub boundary: Boundary,
    /// Bragg wavevector; Bragg-matched to the probe when absent.
    pub k_b_per_m: Option<f64>,
    /// Control-field wavevector; when given, the crossing angle is derived.
    pub k_s_per_m: Option<f64>,
    pub slabs_per_period: usize,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self {
            length_m: 5e-3,
            a_eff_m2: eitbragg_core::cme::DEFAULT_A_EFF,
            boundary: Boundary::IndexMatched,
            k_b_per_m: None,
            k_s_per_m: None,
            slabs_per_period: eitbragg_core::grating::DEFAULT_SLABS_PER_PERIOD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SusceptibilitySection {
    pub delta1_min_gamma_a: f64,
    pub delta1_max_gamma_a: f64,
    pub points: usize,
    /// Local |Ω_s|²; the spatial mean Ω₁²/2 when absent.
    pub omega_s_sq_gamma_a2: Option<f64>,
}

impl Default for SusceptibilitySection {
    fn default() -> Self {
        Self { delta1_min_gamma_a: -3.0, delta1_max_gamma_a: 3.0, points: 601, omega_s_sq_gamma_a2: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Absorption {
    On,
    Off,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandSection {
    pub detuning_min_gamma_a: f64,
    pub detuning_max_gamma_a: f64,
    pub points: usize,
    pub absorption: Absorption,
    pub check_convergence: bool,
    pub probe_intensity_v2_per_m2: f64,
    /// Level used by the reflectivity gap criterion.
    pub reflectivity_level: f64,
}

impl Default for BandSection {
    fn default() -> Self {
        Self {
            detuning_min_gamma_a: -1.0,
            detuning_max_gamma_a: 1.0,
            points: 401,
            absorption: Absorption::Both,
            check_convergence: true,
            probe_intensity_v2_per_m2: 0.0,
            reflectivity_level: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrefactorChoice {
    /// Whichever variant passes the residual oracle.
    Auto,
    TwoMinusNuSq,
    ThreeMinusNuSq,
}

impl PrefactorChoice {
    pub fn resolve(self, winner: PrefactorVariant) -> PrefactorVariant {
        match self {
            Self::Auto => winner,
            Self::TwoMinusNuSq => PrefactorVariant::TwoMinusNuSq,
            Self::ThreeMinusNuSq => PrefactorVariant::ThreeMinusNuSq,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolitonSection {
    pub nu: f64,
    pub psi_rad: f64,
    pub prefactor: PrefactorChoice,
    pub phase: PhaseForm,
    /// Half-extent of the sampled window in soliton widths.
    pub half_window_widths: f64,
    pub points: usize,
    pub t_s: f64,
}

impl Default for SolitonSection {
    fn default() -> Self {
        Self {
            nu: 0.3,
            psi_rad: PI / 2.0,
            prefactor: PrefactorChoice::Auto,
            phase: PhaseForm::Exact,
            half_window_widths: 12.0,
            points: 801,
            t_s: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initial {
    /// The analytic soliton of the `[soliton]` section at t = 0.
    Soliton,
    /// Zero field; only the injected pulse enters.
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Binary,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    Sech,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectionSection {
    pub shape: PulseShape,
    pub t0_s: f64,
    pub peak_power_w: f64,
    pub delay_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagateSection {
    pub initial: Initial,
    pub lossless: bool,
    /// Grid step in units of 1/|κ|.
    pub dz_kappa: f64,
    /// Domain margin around the soliton path, in soliton widths.
    pub margin_widths: f64,
    /// Explicit domain; overrides the soliton-derived one.
    pub z_min_m: Option<f64>,
    pub z_max_m: Option<f64>,
    /// Duration in soliton periods of travel; ignored when `t_end_s` is set.
    pub periods: f64,
    pub t_end_s: Option<f64>,
    pub snapshots: usize,
    pub format: OutputFormat,
    /// Repeat at half step and report the error ratio.
    pub convergence_check: bool,
    pub injection: Option<InjectionSection>,
}

impl Default for PropagateSection {
    fn default() -> Self {
        Self {
            initial: Initial::Soliton,
            lossless: true,
            dz_kappa: 0.05,
            margin_widths: 25.0,
            z_min_m: None,
            z_max_m: None,
            periods: 1.0,
            t_end_s: None,
            snapshots: 20,
            format: OutputFormat::Csv,
            convergence_check: false,
            injection: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DesignSection {
    pub t0_us: Vec<f64>,
    pub nu_min: f64,
    pub nu_max: f64,
    pub nu_points: usize,
    /// Coupling-laser power; calibrated from `calibrate_lower_nu` when absent.
    pub p_c_w: Option<f64>,
    pub calibrate_lower_nu: f64,
    /// Pulse width at which the calibration anchors apply.
    pub calibrate_t0_us: f64,
    /// When set, the sample length is calibrated so the upper endpoint lands
    /// here, overriding `geometry.length_m`.
    pub calibrate_upper_nu: Option<f64>,
    pub power_margin: f64,
    pub min_t_factor: f64,
    pub order_factor: OrderFactor,
}

impl Default for DesignSection {
    fn default() -> Self {
        Self {
            t0_us: vec![2.0, 10.0],
            nu_min: 1e-4,
            nu_max: 0.99,
            nu_points: 400,
            p_c_w: None,
            calibrate_lower_nu: 0.05,
            calibrate_t0_us: 2.0,
            calibrate_upper_nu: None,
            power_margin: 10.0,
            min_t_factor: 10.0,
            order_factor: OrderFactor::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn atomic(&self) -> AtomicParams {
        let a = &self.atomic;
        AtomicParams {
            gamma_a: a.gamma_a_rad_per_s,
            gamma2: a.gamma2_gamma_a,
            gamma3: a.gamma3_gamma_a,
            gamma4: a.gamma4_gamma_a,
            gamma5: a.gamma5_gamma_a,
            mu13: a.mu13_c_m,
            mu24: a.mu24_c_m.unwrap_or(a.mu13_c_m),
            density: a.density_per_cm3 * 1e6,
            lambda_p: a.lambda_p_nm * 1e-9,
            k0_scale: self.scenario.k0_scale,
        }
    }

    pub fn fields(&self) -> FieldParams {
        let f = &self.fields;
        FieldParams {
            delta1: f.delta1_gamma_a,
            delta2: f.delta2_gamma_a,
            delta4: f.delta4_gamma_a,
            delta5: f.delta5_gamma_a,
            omega_c: f.omega_c_gamma_a,
            omega_1: f.omega_1_gamma_a,
            omega_p_prime: f.omega_p_prime_gamma_a,
            omega_s_sq: 0.5 * f.omega_1_gamma_a * f.omega_1_gamma_a,
        }
    }

    /// Checks that do not need any physics beyond the parameter blocks.
    pub fn check(&self) -> Result<(), CliError> {
        let bad = |field: &str, msg: String| Err(CliError::Config(format!("{field}: {msg}")));
        let atomic = self.atomic();
        atomic.validate().map_err(|e| CliError::Config(format!("[atomic] {e}")))?;
        let fields = self.fields();
        if !fields.eit_condition(&atomic) {
            return bad(
                "fields.omega_c_gamma_a",
                format!(
                    "EIT condition |Omega_c|^2 > Gamma2*Gamma3 violated (no transparent window): \
                     Omega_c = {} gamma_a, Gamma2*Gamma3 = {} gamma_a^2",
                    fields.omega_c,
                    atomic.gamma2 * atomic.gamma3
                ),
            );
        }
        fields.validate().map_err(|e| CliError::Config(format!("[fields] {e}")))?;
        if !(self.scenario.k0_scale > 0.0) {
            return bad("scenario.k0_scale", format!("must be positive, got {}", self.scenario.k0_scale));
        }
        let g = &self.geometry;
        if !(g.length_m > 0.0) {
            return bad("geometry.length_m", format!("must be positive, got {}", g.length_m));
        }
        if !(g.a_eff_m2 > 0.0) {
            return bad("geometry.a_eff_m2", format!("must be positive, got {}", g.a_eff_m2));
        }
        if g.slabs_per_period < 8 {
            return bad("geometry.slabs_per_period", "must be at least 8".into());
        }
        let s = &self.susceptibility;
        if s.points < 2 || !(s.delta1_max_gamma_a > s.delta1_min_gamma_a) {
            return bad("susceptibility", "needs points >= 2 and delta1_max > delta1_min".into());
        }
        let b = &self.bandstructure;
        if b.points < 3 || !(b.detuning_max_gamma_a > b.detuning_min_gamma_a) {
            return bad("bandstructure", "needs points >= 3 and detuning_max > detuning_min".into());
        }
        if !(b.reflectivity_level > 0.0 && b.reflectivity_level < 1.0) {
            return bad("bandstructure.reflectivity_level", "must lie in (0, 1)".into());
        }
        let so = &self.soliton;
        if !(so.nu.abs() < 1.0) || !(so.psi_rad > 0.0 && so.psi_rad < PI) {
            return bad("soliton", format!("needs |nu| < 1 and 0 < psi < pi, got nu = {}, psi = {}", so.nu, so.psi_rad));
        }
        if so.points < 2 || !(so.half_window_widths > 0.0) {
            return bad("soliton", "needs points >= 2 and half_window_widths > 0".into());
        }
        let p = &self.propagate;
        if !(p.dz_kappa > 0.0) || p.snapshots == 0 || !(p.periods > 0.0) || !(p.margin_widths > 0.0) {
            return bad("propagate", "dz_kappa, snapshots, periods and margin_widths must be positive".into());
        }
        if p.initial == Initial::Soliton && p.t_end_s.is_none() && self.soliton.nu == 0.0 {
            return bad("propagate", "a stationary soliton (nu = 0) needs an explicit t_end_s".into());
        }
        if let Some(inj) = &p.injection {
            if !(inj.t0_s > 0.0 && inj.peak_power_w >= 0.0) {
                return bad("propagate.injection", "needs t0_s > 0 and peak_power_w >= 0".into());
            }
        }
        let d = &self.design;
        if d.t0_us.is_empty() || d.t0_us.iter().any(|t| !(*t > 0.0)) {
            return bad("design.t0_us", "needs at least one positive pulse width".into());
        }
        if !(d.nu_min > 0.0 && d.nu_max < 1.0 && d.nu_max > d.nu_min) || d.nu_points < 2 {
            return bad("design", "needs 0 < nu_min < nu_max < 1 and nu_points >= 2".into());
        }
        Ok(())
    }
}

/// Loads a configuration: the named preset (if any) with the file's keys
/// merged over it.
pub fn load(path: Option<&Path>, preset: Option<&str>) -> Result<ScenarioConfig, CliError> {
    if path.is_none() && preset.is_none() {
        return Err(CliError::Config("either --config or --preset is required".into()));
    }
    let mut table = toml::Table::new();
    if let Some(name) = preset {
        let text = presets::get(name).ok_or_else(|| {
            CliError::Config(format!("unknown preset '{name}' (available: {})", presets::names().join(", ")))
        })?;
        table = text.parse().map_err(|e| CliError::Config(format!("preset {name}: {e}")))?;
    }
    if let Some(p) = path {
        let text = std::fs::read_to_string(p)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
        // Parsed on its own first so schema errors point at lines of this file.
        toml::from_str::<ScenarioConfig>(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        let file: toml::Table =
            text.parse().map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        merge(&mut table, file);
    }
    let cfg: ScenarioConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    cfg.check()?;
    Ok(cfg)
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}
