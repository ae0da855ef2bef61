//! Reflectivity and complex Bloch dispersion of the finite cosine grating by
//! the transfer-matrix (characteristic-matrix) method.
//!
//! One period is cut into `slabs_per_period` homogeneous layers sampled at
//! their midpoints. A piecewise-constant staircase of a cosine has its first
//! Fourier harmonic reduced by sinc(π/N); the sampled modulation is scaled by
//! the inverse of that factor so the Bragg-coupling harmonic equals δχ for
//! every N. The period matrix is raised to the number of periods by repeated
//! squaring with a separately tracked logarithmic scale, so arbitrarily deep
//! gaps do not overflow.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{Error, Result};
use crate::grating::{GratingSpec, LocalChi};
use crate::table::Table;

/// Convergence threshold on max |ΔR| when the slab count is doubled.
pub const SLAB_CONVERGENCE_LIMIT: f64 = 1e-3;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Embedded in a uniform medium of index Re n̄ (no Fresnel edges).
    #[default]
    IndexMatched,
    Vacuum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Incidence {
    #[default]
    Left,
    /// Light entering from the far end (layer order reversed).
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    pub include_absorption: bool,
    /// |E_p|² in (V/m)²; zero is the linear regime.
    pub probe_intensity: f64,
    pub boundary: Boundary,
    pub incidence: Incidence,
    /// Recompute with doubled slab count and fail if R moves by more than
    /// [`SLAB_CONVERGENCE_LIMIT`].
    pub check_convergence: bool,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            include_absorption: true,
            probe_intensity: 0.0,
            boundary: Boundary::IndexMatched,
            incidence: Incidence::Left,
            check_convergence: false,
        }
    }
}

impl SpectrumOptions {
    pub fn lossless() -> Self {
        Self { include_absorption: false, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandStructure {
    /// Probe detunings in units of the grating's detuning unit (γ_a).
    pub omega_grid: Vec<f64>,
    pub reflectivity: Vec<f64>,
    pub transmissivity: Vec<f64>,
    /// Bloch wavevector times the period, K·d.
    pub bloch_kd: Vec<Complex64>,
    pub include_absorption: bool,
    pub boundary: Boundary,
}

/// 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self([[one, zero], [zero, one]])
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let a = &self.0;
        let b = &rhs.0;
        Self([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn scaled(&self, s: f64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|c| *c *= s);
        m
    }

    fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Characteristic matrix of a homogeneous layer (normal incidence).
    fn layer(n: Complex64, k0: f64, thickness: f64) -> Self {
        let phi = n * k0 * thickness;
        let (s, c) = (phi.sin(), phi.cos());
        Self([[c, -I * s / n], [-I * n * s, c]])
    }
}

/// A matrix `m · exp(log_scale)` kept normalised to unit max-entry.
#[derive(Debug, Clone, Copy)]
struct ScaledMat {
    m: Mat2,
    log_scale: f64,
}

impl ScaledMat {
    fn from(m: Mat2) -> Self {
        Self { m, log_scale: 0.0 }.normalised()
    }

    fn normalised(self) -> Self {
        let a = self.m.max_abs();
        if a > 0.0 && a.is_finite() {
            Self { m: self.m.scaled(1.0 / a), log_scale: self.log_scale + a.ln() }
        } else {
            self
        }
    }

    fn mul(&self, rhs: &Self) -> Self {
        Self { m: self.m.mul(&rhs.m), log_scale: self.log_scale + rhs.log_scale }.normalised()
    }

    fn pow(self, mut n: u64) -> Self {
        let mut acc = Self { m: Mat2::identity(), log_scale: 0.0 };
        let mut base = self;
        while n > 0 {
            if n & 1 == 1 {
                acc = base.mul(&acc);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }
}

fn slab_indices(
    grating: &GratingSpec,
    local: &LocalChi,
    probe_intensity: f64,
    slabs: usize,
) -> Vec<Complex64> {
    let h = grating.period() / slabs as f64;
    let x = std::f64::consts::PI / slabs as f64;
    let harmonic_fix = x / x.sin();
    (0..slabs)
        .map(|j| {
            let z = (j as f64 + 0.5) * h;
            let n2 = 1.0
                + local.chi_bar
                + harmonic_fix * local.delta_chi * (2.0 * grating.k_b * z).cos()
                + local.chi3 * probe_intensity;
            n2.sqrt()
        })
        .collect()
}

/// Transfer matrix of one grating period at the given local susceptibilities.
pub fn period_matrix(
    grating: &GratingSpec,
    local: &LocalChi,
    omega: f64,
    probe_intensity: f64,
    slabs: usize,
    incidence: Incidence,
) -> Mat2 {
    let k0 = omega / SPEED_OF_LIGHT;
    let h = grating.period() / slabs as f64;
    let n = slab_indices(grating, local, probe_intensity, slabs);
    let product = |acc: Mat2, nj: &Complex64| acc.mul(&Mat2::layer(*nj, k0, h));
    match incidence {
        Incidence::Left => n.iter().fold(Mat2::identity(), product),
        Incidence::Right => n.iter().rev().fold(Mat2::identity(), product),
    }
}

#[derive(Debug, Clone, Copy)]
struct PointResult {
    r: f64,
    t: f64,
    /// Principal-branch K·d.
    kd: Complex64,
}

fn local_for(grating: &GratingSpec, detuning: f64, include_absorption: bool) -> Result<LocalChi> {
    let local = grating.local_at(detuning)?;
    Ok(if include_absorption { local } else { local.lossless() })
}

fn evaluate_point(
    grating: &GratingSpec,
    detuning: f64,
    opts: &SpectrumOptions,
    slabs: usize,
) -> Result<PointResult> {
    let local = local_for(grating, detuning, opts.include_absorption)?;
    let omega = grating.omega_at(detuning);
    let period = period_matrix(grating, &local, omega, opts.probe_intensity, slabs, opts.incidence);
    let total = ScaledMat::from(period).pow(grating.period_count());
    if !total.m.is_finite() || !period.is_finite() {
        return Err(Error::MatrixOverflow { detuning });
    }
    let ns = match opts.boundary {
        Boundary::IndexMatched => {
            (1.0 + local.chi_bar + local.chi3 * opts.probe_intensity).sqrt().re
        }
        Boundary::Vacuum => 1.0,
    };
    let m = &total.m.0;
    let a = ns * m[0][0] + ns * ns * m[0][1];
    let b = m[1][0] + ns * m[1][1];
    let den = a + b;
    let r = (a - b) / den;
    // Same medium on both sides: T = |t|² with no index factor.
    let t = 2.0 * ns / den * (-total.log_scale).exp();
    Ok(PointResult { r: r.norm_sqr(), t: t.norm_sqr(), kd: principal_kd(period.trace() * 0.5) })
}

/// Principal acos with Re ∈ [0, π], computing 1 − c² as (1 − c)(1 + c).
fn principal_kd(c: Complex64) -> Complex64 {
    let root = ((1.0 - c) * (1.0 + c)).sqrt();
    -I * (c + I * root).ln()
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty frequency grid".into()));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("frequency grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

fn evaluate_grid(
    grating: &GratingSpec,
    grid: &[f64],
    opts: &SpectrumOptions,
    slabs: usize,
) -> Result<Vec<PointResult>> {
    grid.par_iter().map(|&x| evaluate_point(grating, x, opts, slabs)).collect()
}

/// Continuity-based branch selection along the grid. Picks the root with
/// Im K ≥ 0 (decaying towards +z) and unwraps Re(K·d) by multiples of 2π,
/// starting from the uniform-medium estimate Re(n̄)·k₀·d.
pub fn track_branches(principal: &[Complex64], reference_kd: f64) -> Result<Vec<Complex64>> {
    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
    let mut out: Vec<Complex64> = Vec::with_capacity(principal.len());
    let mut prev_re = reference_kd;
    let mut slope = 0.0;
    for (j, &s) in principal.iter().enumerate() {
        // Linear extrapolation keeps the extended-zone branch through Re(Kd) = π.
        let predicted = prev_re + slope;
        let candidates: &[Complex64] = if s.im.abs() < 1e-12 {
            &[Complex64::new(s.re, 0.0), Complex64::new(-s.re, 0.0)]
        } else if s.im > 0.0 {
            &[s]
        } else {
            &[-s]
        };
        let pick = candidates
            .iter()
            .map(|c| {
                let m = ((predicted - c.re) / TWO_PI).round();
                c + TWO_PI * m
            })
            .min_by(|a, b| (a.re - predicted).abs().total_cmp(&(b.re - predicted).abs()))
            .expect("at least one candidate");
        if j > 0 && (pick.re - prev_re).abs() > std::f64::consts::FRAC_PI_2 {
            return Err(Error::BranchAmbiguity { index: j - 1, jump: pick.re - prev_re });
        }
        if j > 0 {
            slope = pick.re - prev_re;
        }
        prev_re = pick.re;
        out.push(pick);
    }
    Ok(out)
}

fn reference_kd(grating: &GratingSpec, detuning: f64, include_absorption: bool) -> Result<f64> {
    let local = local_for(grating, detuning, include_absorption)?;
    Ok(local.n_bar() * grating.omega_at(detuning) / SPEED_OF_LIGHT * grating.period())
}

/// Reflectivity, transmissivity and Bloch dispersion over a detuning grid.
pub fn transfer_matrix_spectrum(
    grating: &GratingSpec,
    omega_grid: &[f64],
    opts: &SpectrumOptions,
) -> Result<BandStructure> {
    grating.validate()?;
    validate_grid(omega_grid)?;
    if !(opts.probe_intensity >= 0.0) {
        return Err(Error::InvalidParameter("probe intensity must be non-negative".into()));
    }
    let points = evaluate_grid(grating, omega_grid, opts, grating.slabs_per_period)?;
    if opts.check_convergence {
        let fine = evaluate_grid(grating, omega_grid, opts, 2 * grating.slabs_per_period)?;
        let max_diff = points.iter().zip(&fine).map(|(a, b)| (a.r - b.r).abs()).fold(0.0, f64::max);
        if max_diff > SLAB_CONVERGENCE_LIMIT {
            return Err(Error::NonConvergent { max_diff });
        }
    }
    let principal: Vec<_> = points.iter().map(|p| p.kd).collect();
    let kd = track_branches(
        &principal,
        reference_kd(grating, omega_grid[0], opts.include_absorption)?,
    )?;
    Ok(BandStructure {
        omega_grid: omega_grid.to_vec(),
        reflectivity: points.iter().map(|p| p.r).collect(),
        transmissivity: points.iter().map(|p| p.t).collect(),
        bloch_kd: kd,
        include_absorption: opts.include_absorption,
        boundary: opts.boundary,
    })
}

/// Max |R(N) − R(2N)| over the grid for N = `slabs_per_period`.
pub fn slab_convergence(grating: &GratingSpec, omega_grid: &[f64], opts: &SpectrumOptions) -> Result<f64> {
    validate_grid(omega_grid)?;
    let coarse = evaluate_grid(grating, omega_grid, opts, grating.slabs_per_period)?;
    let fine = evaluate_grid(grating, omega_grid, opts, 2 * grating.slabs_per_period)?;
    Ok(coarse.iter().zip(&fine).map(|(a, b)| (a.r - b.r).abs()).fold(0.0, f64::max))
}

/// Bloch wavevectors K·d over the grid (period matrix only).
pub fn bloch_dispersion(
    grating: &GratingSpec,
    omega_grid: &[f64],
    include_absorption: bool,
) -> Result<Vec<Complex64>> {
    grating.validate()?;
    validate_grid(omega_grid)?;
    let principal = omega_grid
        .par_iter()
        .map(|&x| {
            let local = local_for(grating, x, include_absorption)?;
            let p = period_matrix(
                grating,
                &local,
                grating.omega_at(x),
                0.0,
                grating.slabs_per_period,
                Incidence::Left,
            );
            Ok(principal_kd(p.trace() * 0.5))
        })
        .collect::<Result<Vec<_>>>()?;
    track_branches(&principal, reference_kd(grating, omega_grid[0], include_absorption)?)
}

/// Indicator values below this are roundoff: acos near ±1 turns an O(ε)
/// trace error into an O(√ε) Im(Kd).
const GAP_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapCriterion {
    /// Interval where Im K exceeds half its in-gap maximum.
    ImKHalfMax,
    /// Interval where R exceeds the given level.
    ReflectivityThreshold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapWidth {
    pub lower: f64,
    pub upper: f64,
    /// Width in detuning units (γ_a for atomic media).
    pub width: f64,
    pub criterion: GapCriterion,
}

/// Width of the contiguous gap interval around the maximum of the chosen
/// indicator. The interval must be bracketed inside the grid.
pub fn gap_width(band: &BandStructure, criterion: GapCriterion) -> Result<GapWidth> {
    let (values, threshold): (Vec<f64>, Box<dyn Fn(f64) -> f64>) = match criterion {
        GapCriterion::ImKHalfMax => {
            (band.bloch_kd.iter().map(|k| k.im).collect(), Box::new(|max| 0.5 * max))
        }
        GapCriterion::ReflectivityThreshold(level) => {
            (band.reflectivity.clone(), Box::new(move |_| level))
        }
    };
    let grid = &band.omega_grid;
    let (peak, &max) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::NoGapDetected)?;
    let thr = threshold(max);
    if !(max > GAP_FLOOR) || !(max > thr) {
        return Err(Error::NoGapDetected);
    }
    let mut lo = peak;
    while lo > 0 && values[lo - 1] > thr {
        lo -= 1;
    }
    let mut hi = peak;
    while hi + 1 < values.len() && values[hi + 1] > thr {
        hi += 1;
    }
    if lo == 0 || hi + 1 == values.len() {
        return Err(Error::NoGapDetected);
    }
    let cross = |i: usize, j: usize| {
        let f = (thr - values[i]) / (values[j] - values[i]);
        grid[i] + f * (grid[j] - grid[i])
    };
    let lower = cross(lo - 1, lo);
    let upper = cross(hi, hi + 1);
    Ok(GapWidth { lower, upper, width: upper - lower, criterion })
}

impl BandStructure {
    /// Columns: detuning, R, T, Re(Kd)/π, Im(Kd).
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["detuning[gamma_a]", "R[1]", "T[1]", "Re(Kd)/pi[1]", "Im(Kd)[1]"])
            .comment(format!(
                "absorption: {}, boundary: {:?}",
                if self.include_absorption { "included" } else { "removed" },
                self.boundary
            ))
            .comment("detuning = Delta1/gamma_a; K is the Bloch wavevector, d the grating period");
        for j in 0..self.omega_grid.len() {
            let k = self.bloch_kd[j];
            t.push(vec![
                self.omega_grid[j],
                self.reflectivity[j],
                self.transmissivity[j],
                k.re / std::f64::consts::PI,
                k.im,
            ]);
        }
        t
    }
}

/// `n` evenly spaced points on [lo, hi].
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect()
}
