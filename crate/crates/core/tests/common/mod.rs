#![allow(dead_code)]

use eitbragg_core::cme::{self, CmeCoefficients};
use eitbragg_core::{AtomicParams, FieldParams, GratingSpec};

pub const KAPPA_TARGET: f64 = -2600.0;
pub const LENGTH: f64 = 5e-3;

pub fn reference() -> (AtomicParams, FieldParams) {
    (AtomicParams::rubidium87(), FieldParams::rubidium_default())
}

/// Atomic parameters with k0_scale chosen so that Re κ = −2600 m⁻¹.
pub fn calibrated_atomic() -> AtomicParams {
    let (atomic, fields) = reference();
    let s = cme::calibrate_k0_scale(&atomic, &fields, KAPPA_TARGET).unwrap();
    atomic.with_k0_scale(s)
}

pub fn calibrated(length: f64) -> (GratingSpec, CmeCoefficients) {
    let fields = FieldParams::rubidium_default();
    cme::coefficients_for(&calibrated_atomic(), &fields, length, cme::DEFAULT_A_EFF).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
