use std::f64::consts::PI;

use num_complex::Complex64;

use eitbragg_core::bandstructure::bloch_dispersion;
use eitbragg_core::cme::{
    analytic_soliton, derive_coefficients, linear_dispersion, soliton_period_of, soliton_state,
    soliton_width, CmeCoefficients, EnvelopeState, SolitonOptions, SolitonParams,
};
use eitbragg_core::constants::SPEED_OF_LIGHT;
use eitbragg_core::propagator::{
    centroid_velocity, diagnostics, l2_norm, propagate, shape_error, BoundaryCondition, PropagationGrid, Pulse,
};
use eitbragg_core::GratingSpec;

mod common;

struct SolitonRun {
    shape_error: f64,
    energy_drift: f64,
    velocity: f64,
}

/// Propagates the analytic soliton for one soliton period with Δz·|κ| = `dz_kappa`.
fn soliton_run(c: &CmeCoefficients, sp: &SolitonParams, dz_kappa: f64) -> SolitonRun {
    let opts = SolitonOptions::default();
    let k = c.kappa.re.abs();
    let w = soliton_width(c, sp);
    let z0 = soliton_period_of(c, sp);
    let (z_min, z_max) = (-25.0 * w, 25.0 * w + z0);
    let n = ((z_max - z_min) * k / dz_kappa).round() as usize + 1;
    let t_end = z0 / (sp.nu.abs() * c.v_g);
    let steps = (t_end / ((z_max - z_min) / (n - 1) as f64 / c.v_g)).round() as usize;
    let grid = PropagationGrid::aligned(z_min, z_max, n, c.v_g, t_end, (steps / 20).max(1)).unwrap();
    let init = soliton_state(c, sp, &opts, z_min, z_max, n, 0.0).unwrap();
    let traj = propagate(c, &init, &grid, &BoundaryCondition::Open).unwrap();
    assert!(traj.is_complete());
    let last = traj.last();
    let reference = |z: f64| analytic_soliton(c, sp, z, last.t, &opts).unwrap();
    let err = shape_error(last, reference, 2.0 * w);
    let d = diagnostics(&traj);
    let e0 = d[0].energy;
    let drift = d.iter().map(|x| (x.energy - e0).abs() / e0).fold(0.0, f64::max);
    SolitonRun { shape_error: err, energy_drift: drift, velocity: centroid_velocity(&d).unwrap() }
}

#[test]
fn soliton_keeps_its_shape_over_one_period() {
    let (_, c) = common::calibrated(common::LENGTH);
    let c = c.lossless();
    let sp = SolitonParams::new(0.3, PI / 2.0).unwrap();
    let coarse = soliton_run(&c, &sp, 0.05);
    let fine = soliton_run(&c, &sp, 0.025);
    assert!(coarse.shape_error < 0.02, "{}", coarse.shape_error);
    assert!(coarse.energy_drift < 1e-3, "{}", coarse.energy_drift);
    assert!(common::rel(coarse.velocity, 0.3 * c.v_g) < 0.02);
    let ratio = coarse.shape_error / fine.shape_error;
    assert!(ratio >= 3.0, "halving the step gave only {ratio}x");
}

#[test]
fn moving_solitons_in_both_directions() {
    let c = CmeCoefficients { v_g: 4000.0, kappa: 2000.0.into(), gamma_nl: 0.5.into(), ..CmeCoefficients::canonical() };
    for (nu, psi) in [(-0.5, 1.0), (0.6, 2.2)] {
        let sp = SolitonParams::new(nu, psi).unwrap();
        let run = soliton_run(&c, &sp, 0.05);
        assert!(run.shape_error < 0.02, "{nu} {psi}: {}", run.shape_error);
        assert!(common::rel(run.velocity, nu * c.v_g) < 0.02);
    }
}

#[test]
fn linear_pulse_moves_at_bloch_group_velocity() {
    let c = CmeCoefficients { v_g: 4393.0, kappa: (-2600.0).into(), gamma_nl: 0.0.into(), ..CmeCoefficients::canonical() };
    let k = c.kappa.re;
    let ka = k.abs();
    let big = 2.0 * ka;
    let q = (big * big - k * k).sqrt();
    let ratio = (q - big) / k;
    let width = 30.0 / ka;
    let (z_min, z_max) = (-150.0 / ka, 200.0 / ka);
    let n = (350.0 / 0.05) as usize + 1;
    let (vg, _) = linear_dispersion(&c, big).unwrap();
    let t_end = 40.0 / (ka * vg);
    let dz = (z_max - z_min) / (n - 1) as f64;
    let stride = ((t_end / (dz / c.v_g)) as usize / 16).max(1);
    let grid = PropagationGrid::aligned(z_min, z_max, n, c.v_g, t_end, stride).unwrap();
    let init = EnvelopeState::from_fn(z_min, z_max, n, 0.0, |z| {
        let g = (-(z * z) / (2.0 * width * width)).exp();
        let p = Complex64::from_polar(g, q * z);
        (p, p * ratio)
    })
    .unwrap();
    let traj = propagate(&c, &init, &grid, &BoundaryCondition::Open).unwrap();
    let v = centroid_velocity(&diagnostics(&traj)).unwrap();
    assert!(common::rel(v, vg) < 0.03, "{v} vs {vg}");
}

#[test]
fn in_gap_injection_decays_at_bloch_rate() {
    let unit = 1e10;
    let omega = 2.0 * PI * SPEED_OF_LIGHT / 780e-9;
    let chi_bar = 2e-4f64;
    let n_bar = (1.0 + chi_bar).sqrt();
    let kappa = 2600.0;
    let length = 10.0 / kappa;
    let delta_chi = 4.0 * n_bar * SPEED_OF_LIGHT * kappa / omega;
    let g = GratingSpec::synthetic(chi_bar, delta_chi, n_bar * omega / SPEED_OF_LIGHT, 5e-3, omega, unit);
    let c = derive_coefficients(&g, 1.0).unwrap();
    assert_eq!(c.gamma_nl, Complex64::new(0.0, 0.0));

    let detuning = 0.5 * c.v_g * kappa;
    let im_k = bloch_dispersion(&g, &[detuning / unit - 1e-3, detuning / unit], false).unwrap()[1].im / g.period();

    let n = 1024;
    let t_end = 20.0 * length / c.v_g;
    let grid = PropagationGrid::aligned(0.0, length, n, c.v_g, t_end, 1 << 30).unwrap();
    let init = EnvelopeState::from_fn(0.0, length, n, 0.0, |_| (0.0.into(), 0.0.into())).unwrap();
    let pulse = Pulse::Cw { power: 1e-6, detuning, rise: 2.0 * length / c.v_g };
    let traj = propagate(&c, &init, &grid, &BoundaryCondition::Injected { pulse }).unwrap();
    let last = traj.last();
    // Log-linear fit of |A₊| over the entrance half, away from the far-end reflection.
    let (lo, hi) = ((0.05 * n as f64) as usize, (0.4 * n as f64) as usize);
    let pts: Vec<(f64, f64)> = (lo..hi).map(|i| (last.z(i), last.a_plus[i].norm().ln())).collect();
    let m = pts.len() as f64;
    let mz = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let slope = pts.iter().map(|p| (p.0 - mz) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mz).powi(2)).sum::<f64>();
    assert!(common::rel(-slope, im_k) < 0.03, "{} vs {im_k}", -slope);
}

#[test]
fn lossy_energy_never_grows() {
    let (_, c) = common::calibrated(common::LENGTH);
    let sp = SolitonParams::new(0.3, PI / 2.0).unwrap();
    let lossless = c.lossless();
    let w = soliton_width(&lossless, &sp);
    let (z_min, z_max) = (-20.0 * w, 40.0 * w);
    let n = 1200;
    let init = soliton_state(&lossless, &sp, &SolitonOptions::default(), z_min, z_max, n, 0.0).unwrap();
    let dz = (z_max - z_min) / (n - 1) as f64;
    let grid = PropagationGrid::aligned(z_min, z_max, n, c.v_g, 600.0 * dz / c.v_g, 10).unwrap();
    let traj = propagate(&c, &init, &grid, &BoundaryCondition::Open).unwrap();
    let d = diagnostics(&traj);
    assert!(d.windows(2).all(|w| w[1].energy <= w[0].energy * (1.0 + 1e-14)));
    assert!(d.last().unwrap().energy < 0.9 * d[0].energy);
}

#[test]
fn mismatch_alone_only_translates() {
    let c = CmeCoefficients { v_g: 4000.0, kappa: 0.0.into(), gamma_nl: 0.0.into(), delta_k: 3.7e3, ..CmeCoefficients::canonical() };
    let n = 600;
    let init = EnvelopeState::from_fn(0.0, 0.02, n, 0.0, |z| {
        let g = (-((z - 0.006) / 1e-3).powi(2)).exp();
        (Complex64::new(g, 0.2 * g), Complex64::new(0.0, g))
    })
    .unwrap();
    let dz = init.dz;
    let shift = 50;
    let grid = PropagationGrid::aligned(0.0, 0.02, n, c.v_g, shift as f64 * dz / c.v_g, 1).unwrap();
    let traj = propagate(&c, &init, &grid, &BoundaryCondition::Open).unwrap();
    let last = traj.last();
    for i in shift..n - shift {
        assert!((last.a_plus[i] - init.a_plus[i - shift]).norm() < 1e-12);
        assert!((last.a_minus[i] - init.a_minus[i + shift]).norm() < 1e-12);
    }
    assert!(common::rel(l2_norm(last), l2_norm(&init)) < 1e-10);
}

#[test]
fn injected_sech_enters_through_left_edge() {
    let c = CmeCoefficients { v_g: 4000.0, kappa: 0.0.into(), gamma_nl: 0.0.into(), ..CmeCoefficients::canonical() };
    let n = 512;
    let length = 0.05;
    let dz = length / (n - 1) as f64;
    let t0 = 20.0 * dz / c.v_g;
    let pulse = Pulse::Sech { t0, peak_power: 2.0, delay: 100.0 * dz / c.v_g };
    let grid = PropagationGrid::aligned(0.0, length, n, c.v_g, 300.0 * dz / c.v_g, 300).unwrap();
    let init = EnvelopeState::from_fn(0.0, length, n, 0.0, |_| (0.0.into(), 0.0.into())).unwrap();
    let traj = propagate(&c, &init, &grid, &BoundaryCondition::Injected { pulse }).unwrap();
    let last = traj.last();
    // Peak launched at 100 steps, observed 200 cells downstream.
    let peak = (0..n).max_by(|&a, &b| last.a_plus[a].norm().total_cmp(&last.a_plus[b].norm())).unwrap();
    assert_eq!(peak, 200);
    assert!((last.a_plus[peak].norm_sqr() - 2.0).abs() < 1e-12);
}
