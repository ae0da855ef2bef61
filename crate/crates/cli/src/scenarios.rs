//! One runner per scenario kind. Each writes its CSVs through `Run` and
//! records scalar results in the manifest.

use rayon::prelude::*;
use serde_json::json;

use eitbragg_core::atomic::{chi3_self, chi_a, susceptibility_full};
use eitbragg_core::bandstructure::{
    gap_width, linear_grid, slab_convergence, transfer_matrix_spectrum, GapCriterion, SpectrumOptions,
};
use eitbragg_core::cme::{
    soliton_period_of, soliton_profile_table, soliton_residual, soliton_state, soliton_width, SolitonOptions,
    SolitonParams,
};
use eitbragg_core::design::{self, calibrate_length, calibrate_power_cap, design_table, workable_region};
use eitbragg_core::propagator::{
    self, centroid_velocity, diagnostics, diagnostics_table, shape_error, trajectory_table, write_binary,
};
use eitbragg_core::cme::analytic_soliton;
use eitbragg_core::{BoundaryCondition, CmeCoefficients, Constraints, EnvelopeState, FieldParams, PropagationGrid, Pulse, Table};

use crate::config::{Absorption, Initial, OutputFormat, PulseShape, ScenarioConfig};
use crate::error::{CliError, Context};
use crate::model::Model;
use crate::output::Run;

/// Refuses grids that would not fit comfortably in memory.
const MAX_GRID_POINTS: usize = 4_000_000;

pub fn susceptibility(cfg: &ScenarioConfig, model: &Model, run: &mut Run) -> Result<(), CliError> {
    let s = &cfg.susceptibility;
    let base = FieldParams { omega_s_sq: s.omega_s_sq_gamma_a2.unwrap_or(model.fields.omega_s_sq), ..model.fields };
    let grid = linear_grid(s.delta1_min_gamma_a, s.delta1_max_gamma_a, s.points);
    let atomic = &model.atomic;
    let rows = grid
        .par_iter()
        .map(|&d| {
            let f = base.with_delta1(d);
            let a = chi_a(atomic, &f)?.value;
            let k = chi3_self(atomic, &f)?.value;
            let full = susceptibility_full(atomic, &f)?.value;
            Ok(vec![d, a.re, a.im, k.re, k.im, full.re, full.im])
        })
        .collect::<eitbragg_core::Result<Vec<_>>>()
        .context("susceptibility sweep")?;
    let mut t = Table::new([
        "delta1[gamma_a]",
        "Re(chi_a)[1]",
        "Im(chi_a)[1]",
        "Re(chi3)[m^2/V^2]",
        "Im(chi3)[m^2/V^2]",
        "Re(chi_full)[1]",
        "Im(chi_full)[1]",
    ])
    .comment(format!("local |Omega_s|^2 = {} gamma_a^2, k0_scale = {}", base.omega_s_sq, atomic.k0_scale));
    for r in rows {
        t.push(r);
    }
    let im = t.column("Im(chi_a)[1]").unwrap_or_default();
    if let Some((j, v)) = im.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)) {
        run.result("im_chi_a_minimum", json!({ "delta1_gamma_a": grid[j], "value": v }));
    }
    run.csv("susceptibility", &t)
}

pub fn bandstructure(cfg: &ScenarioConfig, model: &Model, run: &mut Run) -> Result<(), CliError> {
    let b = &cfg.bandstructure;
    let grid = linear_grid(b.detuning_min_gamma_a, b.detuning_max_gamma_a, b.points);
    let cases: &[(bool, &str)] = match b.absorption {
        Absorption::On => &[(true, "absorbing")],
        Absorption::Off => &[(false, "lossless")],
        Absorption::Both => &[(true, "absorbing"), (false, "lossless")],
    };
    for &(include_absorption, label) in cases {
        let opts = SpectrumOptions {
            include_absorption,
            probe_intensity: b.probe_intensity_v2_per_m2,
            boundary: cfg.geometry.boundary,
            check_convergence: b.check_convergence,
            ..Default::default()
        };
        let band = transfer_matrix_spectrum(&model.grating, &grid, &opts).context("transfer-matrix spectrum")?;
        let conv = slab_convergence(&model.grating, &grid, &opts).context("slab convergence")?;
        let width = |c: GapCriterion| match gap_width(&band, c) {
            Ok(w) => json!({ "lower_gamma_a": w.lower, "upper_gamma_a": w.upper, "width_gamma_a": w.width }),
            Err(e) => json!({ "error": e.to_string() }),
        };
        let peak = band.reflectivity.iter().cloned().fold(0.0, f64::max);
        run.result(
            &format!("band_{label}"),
            json!({
                "gap_imk_half_max": width(GapCriterion::ImKHalfMax),
                "gap_reflectivity_threshold": width(GapCriterion::ReflectivityThreshold(b.reflectivity_level)),
                "reflectivity_level": b.reflectivity_level,
                "peak_reflectivity": peak,
                "slab_doubling_max_delta_r": conv,
            }),
        );
        run.csv(&format!("band_{label}"), &band.to_table())?;
    }
    Ok(())
}

pub fn coefficients(_cfg: &ScenarioConfig, model: &Model, run: &mut Run) -> Result<(), CliError> {
    let c = &model.coeffs;
    let mut t = Table::new([
        "v_g[m/s]",
        "Re(kappa)[1/m]",
        "Im(kappa)[1/m]",
        "Re(gamma)[1/(W*m)]",
        "Im(gamma)[1/(W*m)]",
        "alpha[1/m]",
        "delta_k[1/m]",
        "n_bar[1]",
        "gap_width[gamma_a]",
        "bandwidth_time[s]",
        "kappa_L[1]",
    ])
    .comment(format!("A_eff = {} m^2, L = {} m", c.a_eff, model.grating.length));
    t.push(vec![
        c.v_g,
        c.kappa.re,
        c.kappa.im,
        c.gamma_nl.re,
        c.gamma_nl.im,
        c.alpha,
        c.delta_k,
        c.n_bar,
        eitbragg_core::cme::gap_width_cme(c) / model.atomic.gamma_a,
        design::bandwidth_time(c),
        c.kappa.re.abs() * model.grating.length,
    ]);
    run.csv("coefficients", &t)
}

fn soliton_setup(cfg: &ScenarioConfig, run: &mut Run, model: &Model) -> Result<(SolitonParams, SolitonOptions), CliError> {
    let sel = model.variant_selection()?;
    let winner = sel.winner.ok_or_else(|| CliError::Numerical {
        context: "soliton variant selection".into(),
        source: eitbragg_core::Error::InvalidParameter(
            "residual oracle did not single out one prefactor variant".into(),
        ),
    })?;
    let s = &cfg.soliton;
    let sp = SolitonParams::new(s.nu, s.psi_rad).context("soliton parameters")?;
    let opts = SolitonOptions { prefactor: s.prefactor.resolve(winner), phase: s.phase };
    run.result("soliton_options", opts);
    Ok((sp, opts))
}

pub fn soliton(cfg: &ScenarioConfig, model: &Model, run: &mut Run) -> Result<(), CliError> {
    let (sp, opts) = soliton_setup(cfg, run, model)?;
    let c = model.coeffs.lossless();
    let s = &cfg.soliton;
    let w = soliton_width(&c, &sp);
    let half = s.half_window_widths * w;
    let state = soliton_state(&c, &sp, &opts, -half, half, s.points, s.t_s).context("soliton profile")?;
    let residual = soliton_residual(&c, &sp, &opts).context("soliton residual")?;
    run.result(
        "soliton",
        json!({
            "width_m": w,
            "period_m": soliton_period_of(&c, &sp),
            "residual": residual,
            "peak_power_w": state.peak(),
            "energy_w_m": state.energy(),
        }),
    );
    run.csv("soliton_profile", &soliton_profile_table(&state, &sp, &opts))
}

struct PropagationPlan {
    coeffs: CmeCoefficients,
    initial: EnvelopeState,
    grid: PropagationGrid,
    boundary: BoundaryCondition,
}

fn plan(
    cfg: &ScenarioConfig,
    model: &Model,
    soliton: Option<(SolitonParams, SolitonOptions)>,
    dz_kappa: f64,
) -> Result<PropagationPlan, CliError> {
    let p = &cfg.propagate;
    let coeffs = if p.lossless { model.coeffs.lossless() } else { model.coeffs };
    let k = coeffs.kappa.re.abs();
    if !(k > 0.0) {
        return Err(CliError::Config("propagate: grid step is set in units of 1/|kappa|, which is zero".into()));
    }
    let lossless = coeffs.lossless();
    let (z_min, z_max) = match (p.z_min_m, p.z_max_m, soliton) {
        (Some(a), Some(b), _) => (a, b),
        (None, None, Some((sp, _))) => {
            let w = soliton_width(&lossless, &sp);
            let travel = p.periods * soliton_period_of(&lossless, &sp) * sp.nu.signum();
            let m = p.margin_widths * w;
            (travel.min(0.0) - m, travel.max(0.0) + m)
        }
        _ => return Err(CliError::Config("propagate: set both z_min_m and z_max_m for this initial state".into())),
    };
    if !(z_max > z_min) {
        return Err(CliError::Config(format!("propagate: z_max_m ({z_max}) must exceed z_min_m ({z_min})")));
    }
    let n = ((z_max - z_min) * k / dz_kappa).round() as usize + 1;
    if n > MAX_GRID_POINTS {
        return Err(CliError::Config(format!("propagate: {n} grid points exceed the limit of {MAX_GRID_POINTS}")));
    }
    let n = n.max(propagator::MIN_GRID_POINTS);
    let t_end = match (p.t_end_s, soliton) {
        (Some(t), _) => t,
        (None, Some((sp, _))) => p.periods * soliton_period_of(&lossless, &sp) / (sp.nu.abs() * coeffs.v_g),
        (None, None) => return Err(CliError::Config("propagate: t_end_s is required without a soliton".into())),
    };
    let dz = (z_max - z_min) / (n - 1) as f64;
    let steps = (t_end / (dz / coeffs.v_g)).round().max(1.0) as usize;
    let stride = (steps / p.snapshots).max(1);
    let grid = PropagationGrid::aligned(z_min, z_max, n, coeffs.v_g, t_end, stride).context("propagation grid")?;
    let initial = match soliton {
        Some((sp, opts)) => soliton_state(&lossless, &sp, &opts, z_min, z_max, n, 0.0).context("initial soliton")?,
        None => EnvelopeState::from_fn(z_min, z_max, n, 0.0, |_| (0.0.into(), 0.0.into())).context("initial state")?,
    };
    let boundary = match &p.injection {
        None => BoundaryCondition::Open,
        Some(inj) => {
            let (t0, peak_power, delay) = (inj.t0_s, inj.peak_power_w, inj.delay_s);
            let pulse = match inj.shape {
                PulseShape::Sech => Pulse::Sech { t0, peak_power, delay },
                PulseShape::Gaussian => Pulse::Gaussian { t0, peak_power, delay },
            };
            BoundaryCondition::Injected { pulse }
        }
    };
    Ok(PropagationPlan { coeffs, initial, grid, boundary })
}

/// Shift- and phase-minimised error against the analytic soliton at the
/// final time.
fn soliton_error(plan: &PropagationPlan, sp: &SolitonParams, opts: &SolitonOptions, last: &EnvelopeState) -> f64 {
    let c = plan.coeffs;
    let w = soliton_width(&c, sp);
    shape_error(last, |z| analytic_soliton(&c, sp, z, last.t, opts).unwrap_or_default(), 2.0 * w)
}

pub fn propagate(cfg: &ScenarioConfig, model: &Model, run: &mut Run) -> Result<(), CliError> {
    let p = &cfg.propagate;
    let soliton = match p.initial {
        Initial::Soliton => Some(soliton_setup(cfg, run, model)?),
        Initial::Empty => None,
    };
    let pl = plan(cfg, model, soliton, p.dz_kappa)?;
    let traj = propagator::propagate(&pl.coeffs, &pl.initial, &pl.grid, &pl.boundary).context("propagation")?;
    let diag = diagnostics(&traj);
    let e0 = diag.first().map(|d| d.energy).unwrap_or(0.0);
    let drift = diag.iter().map(|d| ((d.energy - e0) / e0).abs()).fold(0.0, f64::max);
    let reference = soliton.filter(|_| p.lossless && pl.boundary == BoundaryCondition::Open);
    let error = reference.map(|(sp, opts)| soliton_error(&pl, &sp, &opts, traj.last()));
    run.result(
        "propagation",
        json!({
            "scheme": "Strang split: nonlinear half step, coupling half step, exact characteristic shift, coupling half step, nonlinear half step",
            "grid": {
                "z_min_m": pl.grid.z_min,
                "z_max_m": pl.grid.z_max,
                "n_z": pl.grid.n_z,
                "dz_m": pl.grid.dz(),
                "dt_s": pl.grid.dt,
                "t_end_s": pl.grid.t_end,
                "steps": pl.grid.steps(),
                "snapshot_stride": pl.grid.snapshot_stride,
            },
            "lossless": p.lossless,
            "complete": traj.is_complete(),
            "max_relative_energy_change": drift,
            "centroid_velocity_m_per_s": centroid_velocity(&diag),
            "shape_error_vs_analytic": error,
        }),
    );

    if let (true, Some((sp, opts)), Some(coarse)) = (p.convergence_check, reference, error) {
        let fine_plan = plan(cfg, model, Some((sp, opts)), 0.5 * p.dz_kappa)?;
        let fine = propagator::propagate(&fine_plan.coeffs, &fine_plan.initial, &fine_plan.grid, &fine_plan.boundary)
            .context("half-step propagation")?;
        let e_fine = soliton_error(&fine_plan, &sp, &opts, fine.last());
        run.result(
            "convergence",
            json!({ "dz_kappa": p.dz_kappa, "shape_error": coarse, "half_step_shape_error": e_fine, "ratio": coarse / e_fine }),
        );
    }

    if matches!(p.format, OutputFormat::Csv | OutputFormat::Both) {
        run.csv("trajectory", &trajectory_table(&traj))?;
    }
    if matches!(p.format, OutputFormat::Binary | OutputFormat::Both) {
        let mut buf = Vec::new();
        write_binary(&traj, &mut buf)?;
        run.file("trajectory.ebtr", &buf)?;
    }
    run.csv("diagnostics", &diagnostics_table(&diag))?;
    match traj.failure {
        None => Ok(()),
        Some(e) => Err(CliError::Numerical { context: "propagation stopped early".into(), source: e }),
    }
}

pub fn design_map(cfg: &ScenarioConfig, model: &Model, run: &mut Run) -> Result<(), CliError> {
    let d = &cfg.design;
    let c = &model.coeffs;
    let t_cal = d.calibrate_t0_us * 1e-6;
    let p_c = match d.p_c_w {
        Some(p) => p,
        None => calibrate_power_cap(c, t_cal, d.calibrate_lower_nu, d.power_margin).context("P_c calibration")?,
    };
    let length = match d.calibrate_upper_nu {
        Some(nu) => calibrate_length(c, t_cal, nu).context("length calibration")?,
        None => cfg.geometry.length_m,
    };
    let cons = Constraints { p_c, length, power_margin: d.power_margin, min_t_factor: d.min_t_factor };
    run.result("constraints", cons);
    let (l0, l1) = (d.nu_min.log10(), d.nu_max.log10());
    let nus: Vec<f64> =
        (0..d.nu_points).map(|j| 10f64.powf(l0 + (l1 - l0) * j as f64 / (d.nu_points - 1) as f64)).collect();
    let mut regions = Vec::new();
    for &t0_us in &d.t0_us {
        let t0 = t0_us * 1e-6;
        let region = workable_region(c, t0, &cons).context("workable region")?;
        let table = design_table(c, t0, &nus, &cons, d.order_factor).context("design table")?;
        run.csv(&format!("design_t0_{t0_us}us"), &table)?;
        regions.push(region);
    }
    run.result("workable_regions", regions);
    Ok(())
}
