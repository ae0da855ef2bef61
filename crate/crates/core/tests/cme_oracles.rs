use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use eitbragg_core::cme::{
    analytic_soliton, default_prefactor, mean_chi_slope, select_soliton_variant, selection_grid,
    soliton_residual, CmeCoefficients, PrefactorVariant, SolitonOptions, SolitonParams, RESIDUAL_TOLERANCE,
};

mod common;

/// Least-squares quadratic through samples of f on [−h, h]; returns the slope at 0.
fn quadratic_fit_slope(f: impl Fn(f64) -> Complex64, h: f64) -> Complex64 {
    let n = 21;
    let xs: Vec<f64> = (0..n).map(|j| -h + 2.0 * h * j as f64 / (n - 1) as f64).collect();
    // Symmetric nodes decouple the odd coefficient: b = Σx·f / Σx².
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxf: Complex64 = xs.iter().map(|&x| x * f(x)).sum();
    sxf / sxx
}

#[test]
fn mean_chi_derivative_matches_quadratic_fit() {
    let (g, _) = common::calibrated(common::LENGTH);
    let (slope, rel) = mean_chi_slope(&g).unwrap();
    assert!(rel < 1e-6);
    let fit = quadratic_fit_slope(|x| g.local_at(x).unwrap().chi_bar, 0.01) / g.detuning_unit;
    assert!((slope - fit).norm() < 1e-4 * fit.norm(), "{slope} vs {fit}");
}

#[test]
fn reference_ordering_flags_are_reported() {
    let (_, c) = common::calibrated(common::LENGTH);
    let v = c.validity.unwrap();
    // δχ and ∂χ̄/∂ω·γ_a are of the same size here; the flag says so.
    assert!(v.modulation_over_dispersion < 10.0);
    assert!(!v.ordering_holds);
    assert!(v.dispersion_over_modulation_slope > 10.0);
}

#[test]
fn selected_variant_solves_reference_coefficients() {
    let (_, c) = common::calibrated(common::LENGTH);
    let lossless = c.lossless();
    let opts = SolitonOptions::default();
    assert_eq!(opts.prefactor, default_prefactor());
    for sp in selection_grid() {
        let r = soliton_residual(&lossless, &sp, &opts).unwrap();
        assert!(r < RESIDUAL_TOLERANCE, "{sp:?}: {r}");
    }
    let sel = select_soliton_variant(&lossless).unwrap();
    assert_eq!(sel.winner, Some(PrefactorVariant::ThreeMinusNuSq));
}

proptest! {
    #[test]
    fn amplitude_scales_as_root_kappa_over_gamma(
        nu in -0.9..0.9f64,
        psi in 0.1..3.0f64,
        zeta in -4.0..4.0f64,
        tau in -2.0..2.0f64,
        s in 0.2..5.0f64,
    ) {
        let base = CmeCoefficients { v_g: 4000.0, kappa: (-2600.0).into(), gamma_nl: (-0.6).into(), ..CmeCoefficients::canonical() };
        let scaled = CmeCoefficients { kappa: base.kappa * s, gamma_nl: base.gamma_nl * s, ..base };
        let sp = SolitonParams::new(nu, psi).unwrap();
        let opts = SolitonOptions::default();
        let (z, t) = (zeta / 2600.0, tau / (2600.0 * 4000.0));
        let (p, m) = analytic_soliton(&base, &sp, z, t, &opts).unwrap();
        let (ps, ms) = analytic_soliton(&scaled, &sp, z / s, t / s, &opts).unwrap();
        prop_assert!((p - ps).norm() <= 1e-12 * p.norm().max(1e-300));
        prop_assert!((m - ms).norm() <= 1e-12 * m.norm().max(1e-300));
        // Amplitude at fixed (z, t) scales as √(κ/γ) when only γ changes.
        let weaker = CmeCoefficients { gamma_nl: base.gamma_nl * 4.0, ..base };
        let (pw, _) = analytic_soliton(&weaker, &sp, z, t, &opts).unwrap();
        prop_assert!((pw * 2.0 - p).norm() <= 1e-12 * p.norm().max(1e-300));
    }
}

#[test]
fn stationary_soliton_has_equal_amplitudes() {
    let (_, c) = common::calibrated(common::LENGTH);
    let sp = SolitonParams::new(0.0, PI / 3.0).unwrap();
    let opts = SolitonOptions::default();
    for z in [-1e-4, 0.0, 2e-4] {
        let (p, m) = analytic_soliton(&c, &sp, z, 0.0, &opts).unwrap();
        assert!((p.norm() - m.norm()).abs() < 1e-12 * p.norm().max(1e-300));
    }
}
