//! Bragg-soliton design formulas and the workable range of the velocity
//! parameter ν.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cme::CmeCoefficients;
use crate::error::{Error, Result};
use crate::table::Table;

/// T_FWHM = 1.76·T₀ for a sech² pulse.
pub const FWHM_PER_T0: f64 = 1.76;
pub const SCAN_MIN: f64 = 1e-5;
pub const SCAN_MAX: f64 = 0.99;
pub const POINTS_PER_DECADE: usize = 2000;

/// Form of the ν-dependent factor in N_s².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderFactor {
    /// (3 − ν)².
    ThreeMinusNuSquared,
    /// 3 − ν²; consistent with P_in = P₀ν at N_s = 1.
    #[default]
    ThreeMinusNuSq,
}

impl OrderFactor {
    fn eval(self, nu: f64) -> f64 {
        match self {
            Self::ThreeMinusNuSquared => (3.0 - nu) * (3.0 - nu),
            Self::ThreeMinusNuSq => 3.0 - nu * nu,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraints {
    /// Coupling-laser power, W.
    pub p_c: f64,
    /// Sample length, m.
    pub length: f64,
    /// P_in must stay below P_c/power_margin.
    pub power_margin: f64,
    /// T_FWHM must reach min_t_factor/Δν.
    pub min_t_factor: f64,
}

impl Constraints {
    pub fn new(p_c: f64, length: f64) -> Self {
        Self { p_c, length, power_margin: 10.0, min_t_factor: 10.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.p_c, self.length, self.power_margin, self.min_t_factor];
        if all.iter().all(|v| *v > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("design constraints must be positive: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub t0: f64,
    pub nu: f64,
    /// Order reached by launching P_in (unity under the default factor).
    pub n_s: f64,
    pub z0: f64,
    pub p_in: f64,
    pub feasible: bool,
}

impl DesignPoint {
    pub fn t_fwhm(&self) -> f64 {
        FWHM_PER_T0 * self.t0
    }
}

fn check_nu_t0(t0: f64, nu: f64) -> Result<f64> {
    if !(t0 > 0.0) {
        return Err(Error::InvalidParameter(format!("T0 must be positive, got {t0}")));
    }
    let a = nu.abs();
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidParameter(format!("|nu| must lie in (0, 1), got {nu}")));
    }
    Ok(a)
}

/// |κγ| after checking that κ and γ share a sign.
fn kappa_gamma(coeffs: &CmeCoefficients) -> Result<f64> {
    let (k, g) = (coeffs.kappa.re, coeffs.gamma_nl.re);
    if !(k * g > 0.0) || !(k * g).is_finite() {
        return Err(Error::InvalidSolitonRegime { kappa: k, gamma: g });
    }
    Ok(k * g)
}

/// N_s = √(F(ν)·|γ|T₀²v_g²|κ|ν²P₀ / (2(1−ν²)^{3/2})).
pub fn soliton_order(coeffs: &CmeCoefficients, t0: f64, nu: f64, p0: f64, factor: OrderFactor) -> Result<f64> {
    let a = check_nu_t0(t0, nu)?;
    let kg = kappa_gamma(coeffs)?;
    if !(p0 > 0.0) {
        return Err(Error::InvalidParameter(format!("P0 must be positive, got {p0}")));
    }
    let v = coeffs.v_g;
    let n2 = factor.eval(a) * kg * t0 * t0 * v * v * a * a * p0 / (2.0 * (1.0 - a * a).powf(1.5));
    Ok(n2.sqrt())
}

/// z₀ = πν²v_g²T₀²|κ| / (2(1−ν²)^{3/2}), m.
pub fn soliton_period(coeffs: &CmeCoefficients, t0: f64, nu: f64) -> Result<f64> {
    let a = check_nu_t0(t0, nu)?;
    let k = coeffs.kappa.re.abs();
    if !(k > 0.0) {
        return Err(Error::InvalidSolitonRegime { kappa: coeffs.kappa.re, gamma: coeffs.gamma_nl.re });
    }
    let v = coeffs.v_g;
    Ok(PI * a * a * v * v * t0 * t0 * k / (2.0 * (1.0 - a * a).powf(1.5)))
}

/// P_in = 2(1−ν²)^{3/2} / (|ν|(3−ν²)v_g²T₀²κγ), W.
pub fn input_power(coeffs: &CmeCoefficients, t0: f64, nu: f64) -> Result<f64> {
    let a = check_nu_t0(t0, nu)?;
    let kg = kappa_gamma(coeffs)?;
    let v = coeffs.v_g;
    Ok(2.0 * (1.0 - a * a).powf(1.5) / (a * (3.0 - a * a) * v * v * t0 * t0 * kg))
}

/// 1/Δν with Δν = 2|v_g κ|/2π, s.
pub fn bandwidth_time(coeffs: &CmeCoefficients) -> f64 {
    PI / (coeffs.v_g * coeffs.kappa.re).abs()
}

pub fn design_point(
    coeffs: &CmeCoefficients,
    t0: f64,
    nu: f64,
    constraints: &Constraints,
    factor: OrderFactor,
) -> Result<DesignPoint> {
    let z0 = soliton_period(coeffs, t0, nu)?;
    let p_in = input_power(coeffs, t0, nu)?;
    let n_s = soliton_order(coeffs, t0, nu, p_in / nu.abs(), factor)?;
    let feasible = p_in <= constraints.p_c / constraints.power_margin
        && z0 <= constraints.length
        && FWHM_PER_T0 * t0 >= constraints.min_t_factor * bandwidth_time(coeffs);
    Ok(DesignPoint { t0, nu, n_s, z0, p_in, feasible })
}

/// Constraint that closes an interval at one end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    /// P_in = P_c/margin.
    Power,
    /// z₀ = L.
    Length,
    /// Edge of the scanned ν range.
    ScanEdge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub lower_binding: Binding,
    pub upper_binding: Binding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkableRegion {
    pub t0: f64,
    pub constraints: Constraints,
    /// Maximal feasible intervals in |ν|; the region for −ν is the mirror image.
    pub intervals: Vec<Interval>,
    /// Whether T_FWHM clears the bandwidth floor (ν-independent).
    pub width_floor_met: bool,
}

impl WorkableRegion {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// Log-spaced ν grid on [SCAN_MIN, SCAN_MAX].
pub fn scan_grid() -> Vec<f64> {
    let (l0, l1) = (SCAN_MIN.log10(), SCAN_MAX.log10());
    let n = ((l1 - l0) * POINTS_PER_DECADE as f64).ceil() as usize + 1;
    let mut g: Vec<f64> = (0..n).map(|j| 10f64.powf(l0 + (l1 - l0) * j as f64 / (n - 1) as f64)).collect();
    g[0] = SCAN_MIN;
    g[n - 1] = SCAN_MAX;
    g
}

/// Feasible |ν| intervals for pulse width T₀. An empty region is a valid
/// result, not an error.
pub fn workable_region(coeffs: &CmeCoefficients, t0: f64, constraints: &Constraints) -> Result<WorkableRegion> {
    constraints.validate()?;
    kappa_gamma(coeffs)?;
    if !(t0 > 0.0) {
        return Err(Error::InvalidParameter(format!("T0 must be positive, got {t0}")));
    }
    let floor = FWHM_PER_T0 * t0 >= constraints.min_t_factor * bandwidth_time(coeffs);
    let p_cap = constraints.p_c / constraints.power_margin;
    // Each constraint as g(ν) ≤ 0 in relative form.
    let power = |nu: f64| input_power(coeffs, t0, nu).map(|p| p / p_cap - 1.0);
    let length = |nu: f64| soliton_period(coeffs, t0, nu).map(|z| z / constraints.length - 1.0);

    let grid = scan_grid();
    let flags: Vec<(bool, bool)> = grid
        .par_iter()
        .map(|&nu| Ok((power(nu)? <= 0.0, length(nu)? <= 0.0)))
        .collect::<Result<_>>()?;

    let mut intervals = Vec::new();
    if floor {
        let ok = |f: (bool, bool)| f.0 && f.1;
        let mut j = 0;
        while j < grid.len() {
            if !ok(flags[j]) {
                j += 1;
                continue;
            }
            let start = j;
            while j + 1 < grid.len() && ok(flags[j + 1]) {
                j += 1;
            }
            let end = j;
            let (lower, lower_binding) = if start == 0 {
                (grid[0], Binding::ScanEdge)
            } else {
                let which = if !flags[start - 1].0 { Binding::Power } else { Binding::Length };
                (refine(grid[start - 1], grid[start], which, &power, &length)?, which)
            };
            let (upper, upper_binding) = if end + 1 == grid.len() {
                (grid[end], Binding::ScanEdge)
            } else {
                let which = if !flags[end + 1].0 { Binding::Power } else { Binding::Length };
                (refine(grid[end], grid[end + 1], which, &power, &length)?, which)
            };
            intervals.push(Interval { lower, upper, lower_binding, upper_binding });
            j += 1;
        }
    }
    Ok(WorkableRegion { t0, constraints: *constraints, intervals, width_floor_met: floor })
}

/// Bisection in log ν for the root of the binding constraint in [a, b].
fn refine<P, L>(a: f64, b: f64, which: Binding, power: &P, length: &L) -> Result<f64>
where
    P: Fn(f64) -> Result<f64>,
    L: Fn(f64) -> Result<f64>,
{
    let g = |nu: f64| match which {
        Binding::Power => power(nu),
        _ => length(nu),
    };
    let (mut lo, mut hi) = (a.ln(), b.ln());
    let g_lo = g(a)?;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if (g(mid.exp())? <= 0.0) == (g_lo <= 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Return the feasible side so the endpoint itself satisfies the bound.
    Ok(if g_lo <= 0.0 { lo.exp() } else { hi.exp() })
}

/// P_c that puts the power bound exactly at `nu_low` for pulse width T₀.
pub fn calibrate_power_cap(coeffs: &CmeCoefficients, t0: f64, nu_low: f64, power_margin: f64) -> Result<f64> {
    Ok(power_margin * input_power(coeffs, t0, nu_low)?)
}

/// Sample length that puts the z₀ bound exactly at `nu_high`.
pub fn calibrate_length(coeffs: &CmeCoefficients, t0: f64, nu_high: f64) -> Result<f64> {
    soliton_period(coeffs, t0, nu_high)
}

/// Launch power, period and order over a ν grid.
pub fn design_table(
    coeffs: &CmeCoefficients,
    t0: f64,
    nus: &[f64],
    constraints: &Constraints,
    factor: OrderFactor,
) -> Result<Table> {
    let mut t = Table::new(["nu[1]", "P_in[W]", "z0[m]", "N_s[1]", "feasible[1]"])
        .comment(format!("T0 = {t0} s, T_FWHM = {} s", FWHM_PER_T0 * t0))
        .comment(format!(
            "P_c = {} W, L = {} m, power_margin = {}, min_T_factor = {}",
            constraints.p_c, constraints.length, constraints.power_margin, constraints.min_t_factor
        ));
    for &nu in nus {
        let p = design_point(coeffs, t0, nu, constraints, factor)?;
        t.push(vec![nu, p.p_in, p.z0, p.n_s, if p.feasible { 1.0 } else { 0.0 }]);
    }
    Ok(t)
}
