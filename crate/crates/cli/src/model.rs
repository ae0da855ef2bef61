//! Grating and coupled-mode coefficients derived from a configuration.

use serde_json::{json, Value};

use eitbragg_core::atomic::transparency_window;
use eitbragg_core::cme::{self, select_soliton_variant, VariantSelection};
use eitbragg_core::design::bandwidth_time;
use eitbragg_core::grating::{self, bragg_angle};
use eitbragg_core::{AtomicParams, CmeCoefficients, Error, FieldParams, GratingSpec};

use crate::config::ScenarioConfig;
use crate::error::{CliError, Context};

pub struct Model {
    pub atomic: AtomicParams,
    pub fields: FieldParams,
    pub grating: GratingSpec,
    pub coeffs: CmeCoefficients,
    pub bragg_angle_rad: Option<f64>,
}

fn geometry_error(e: Error) -> CliError {
    match e {
        Error::GeometryInfeasible { .. } | Error::NonPositiveLength(_) => CliError::Config(format!("[geometry] {e}")),
        other => CliError::Numerical { context: "building the grating".into(), source: other },
    }
}

pub fn build(cfg: &ScenarioConfig) -> Result<Model, CliError> {
    let mut atomic = cfg.atomic();
    let fields = cfg.fields();
    if let Some(target) = cfg.scenario.calibrate_kappa_per_m {
        let s = cme::calibrate_k0_scale(&atomic, &fields, target).context("calibrating k0_scale")?;
        atomic = atomic.with_k0_scale(s);
    }
    let g = &cfg.geometry;
    let k_b = match g.k_b_per_m {
        Some(k) => k,
        None => grating::matched_bragg_wavevector(&atomic, &fields).context("Bragg wavevector")?,
    };
    let bragg_angle_rad = match g.k_s_per_m {
        Some(k_s) => Some(bragg_angle(k_s, k_b).map_err(geometry_error)?),
        None => None,
    };
    let grating = grating::build_grating(&atomic, &fields, g.length_m, k_b)
        .map_err(geometry_error)?
        .with_slabs_per_period(g.slabs_per_period);
    let coeffs = cme::derive_coefficients(&grating, g.a_eff_m2).context("coupled-mode coefficients")?;
    Ok(Model { atomic, fields, grating, coeffs, bragg_angle_rad })
}

impl Model {
    pub fn variant_selection(&self) -> Result<VariantSelection, CliError> {
        select_soliton_variant(&self.coeffs.lossless()).context("soliton variant selection")
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = self.grating.warnings();
        if !self.fields.weak_probe(&self.atomic) {
            w.push("probe is not weak: Omega_p' >= 0.1 min(Gamma3, Omega_c)".into());
        }
        if let Some(v) = self.coeffs.validity {
            if !v.ordering_holds {
                w.push(format!(
                    "slowly-varying ordering violated: dchi/(dchi_bar/domega gamma_a) = {:.3}, \
                     (dchi_bar/domega)/(ddchi/domega) = {:.3}, chi3/(dchi3/domega gamma_a) = {:.3}",
                    v.modulation_over_dispersion, v.dispersion_over_modulation_slope, v.kerr_over_slope
                ));
            }
        }
        w
    }

    /// Derived constants for the manifest and the `validate` preview.
    pub fn summary(&self) -> Value {
        let c = &self.coeffs;
        let g = &self.grating;
        let gamma_a = self.atomic.gamma_a;
        let window = transparency_window(&self.atomic, self.fields.omega_c, g.length).ok();
        json!({
            "k0_scale": self.atomic.k0_scale,
            "k0_rad_per_s": self.atomic.k0(),
            "k1_rad3_per_s3_per_v2_m2": self.atomic.k1(),
            "gamma_a_rad_per_s": gamma_a,
            "chi_bar": [g.chi_bar.re, g.chi_bar.im],
            "delta_chi": [g.delta_chi.re, g.delta_chi.im],
            "chi3_m2_per_v2": [g.chi3.re, g.chi3.im],
            "n_bar": c.n_bar,
            "k_b_per_m": g.k_b,
            "period_m": g.period(),
            "period_count": g.period_count(),
            "bragg_angle_rad": self.bragg_angle_rad,
            "omega_p_rad_per_s": c.omega_p,
            "v_g_m_per_s": c.v_g,
            "kappa_per_m": [c.kappa.re, c.kappa.im],
            "gamma_w_per_m": [c.gamma_nl.re, c.gamma_nl.im],
            "gamma_field_m_per_v2": [c.gamma_field.re, c.gamma_field.im],
            "alpha_per_m": c.alpha,
            "delta_k_per_m": c.delta_k,
            "a_eff_m2": c.a_eff,
            "kappa_l": c.kappa.re.abs() * g.length,
            "gap_width_cme_gamma_a": cme::gap_width_cme(c) / gamma_a,
            "bandwidth_time_s": bandwidth_time(c),
            "transparency_window_rad_per_s": window,
            "eit_condition": self.fields.eit_condition(&self.atomic),
            "weak_probe": self.fields.weak_probe(&self.atomic),
        })
    }
}
