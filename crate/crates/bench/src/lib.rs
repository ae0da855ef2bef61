//! Fixtures shared by the benchmarks.

use eitbragg_core::cme::{self, calibrate_k0_scale, DEFAULT_A_EFF};
use eitbragg_core::{AtomicParams, CmeCoefficients, FieldParams, GratingSpec};

/// The 5 mm rubidium grating calibrated to Re κ = −2600 m⁻¹.
pub fn rubidium_grating() -> (GratingSpec, CmeCoefficients) {
    let atomic = AtomicParams::rubidium87();
    let fields = FieldParams::rubidium_default();
    let s = calibrate_k0_scale(&atomic, &fields, -2600.0).expect("calibration");
    cme::coefficients_for(&atomic.with_k0_scale(s), &fields, 5e-3, DEFAULT_A_EFF).expect("coefficients")
}
