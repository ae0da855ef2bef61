//! CODATA 2018 values, SI units.

pub const HBAR: f64 = 1.054_571_817e-34;
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Reference linewidth used as the rate unit, 2π·6 MHz.
pub const GAMMA_A_DEFAULT: f64 = 2.0 * std::f64::consts::PI * 6.0e6;

/// Below this magnitude (in γ_a units) a susceptibility denominator is rejected.
pub const DENOMINATOR_FLOOR: f64 = 1e-30;
