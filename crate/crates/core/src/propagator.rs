//! Time integration of the coupled-mode equations by characteristic-aligned
//! Strang splitting.
//!
//! With dt = Δz/v_g each step is `N(h/2) L(h/2) T L(h/2) N(h/2)`, where T
//! shifts A₊ one cell right and A₋ one cell left, L is the exact 2×2 coupling
//! flow (with Δk and mean loss as a common factor) and N the pointwise
//! SPM/XPM phase. Mismatch is folded in through Ã± = A±·e^{±iΔkz}, which turns
//! e^{∓2iΔkz} into a common detuning iΔk.

use std::io::{self, Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cme::{CmeCoefficients, EnvelopeState};
use crate::error::{Error, Result};
use crate::table::Table;

pub const MIN_GRID_POINTS: usize = 256;
/// Intensity growth over the initial peak that counts as blow-up.
pub const BLOWUP_FACTOR: f64 = 1e6;
const CFL_TOLERANCE: f64 = 1e-9;
const PARALLEL_MIN_LEN: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationGrid {
    pub z_min: f64,
    pub z_max: f64,
    pub n_z: usize,
    /// Time step, s. Must equal Δz/v_g.
    pub dt: f64,
    pub t_end: f64,
    /// Keep every this many steps (the final state is always kept).
    pub snapshot_stride: usize,
}

impl PropagationGrid {
    /// Grid with dt = Δz/v_g.
    pub fn aligned(z_min: f64, z_max: f64, n_z: usize, v_g: f64, t_end: f64, snapshot_stride: usize) -> Result<Self> {
        if n_z < 2 || !(z_max > z_min) {
            return Err(Error::InvalidParameter(format!("bad z grid [{z_min}, {z_max}] with {n_z} points")));
        }
        if !(v_g > 0.0) {
            return Err(Error::InvalidParameter(format!("v_g must be positive, got {v_g}")));
        }
        let dz = (z_max - z_min) / (n_z - 1) as f64;
        let grid = Self { z_min, z_max, n_z, dt: dz / v_g, t_end, snapshot_stride };
        grid.validate(v_g)?;
        Ok(grid)
    }

    pub fn dz(&self) -> f64 {
        (self.z_max - self.z_min) / (self.n_z - 1) as f64
    }

    /// Steps taken: t_end/dt rounded to the nearest integer (at least one).
    pub fn steps(&self) -> usize {
        ((self.t_end / self.dt).round() as usize).max(1)
    }

    pub fn validate(&self, v_g: f64) -> Result<()> {
        if self.n_z < MIN_GRID_POINTS {
            return Err(Error::InvalidParameter(format!(
                "n_z = {} below the minimum of {MIN_GRID_POINTS}",
                self.n_z
            )));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::InvalidParameter(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidParameter("snapshot_stride must be at least 1".into()));
        }
        let expected = self.dz() / v_g;
        if !((self.dt - expected).abs() <= CFL_TOLERANCE * expected) {
            return Err(Error::CflViolation { dt: self.dt, expected });
        }
        Ok(())
    }
}

/// Temporal profile prescribed for A₊ at z_min.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Pulse {
    /// √P·sech((t − delay)/T₀).
    Sech { t0: f64, peak_power: f64, delay: f64 },
    /// √P·exp(−(t − delay)²/(2T₀²)).
    Gaussian { t0: f64, peak_power: f64, delay: f64 },
    /// √P·e^{−iδω t}, switched on with a sin² ramp of duration `rise`.
    Cw { power: f64, detuning: f64, rise: f64 },
}

impl Pulse {
    pub fn amplitude(&self, t: f64) -> Complex64 {
        match *self {
            Pulse::Sech { t0, peak_power, delay } => {
                let x = ((t - delay) / t0).abs();
                // sech x = 2e^{-x}/(1 + e^{-2x})
                let e = (-x).exp();
                (peak_power.sqrt() * 2.0 * e / (1.0 + e * e)).into()
            }
            Pulse::Gaussian { t0, peak_power, delay } => {
                let x = (t - delay) / t0;
                (peak_power.sqrt() * (-0.5 * x * x).exp()).into()
            }
            Pulse::Cw { power, detuning, rise } => {
                let ramp = if t >= rise || rise <= 0.0 {
                    1.0
                } else if t <= 0.0 {
                    0.0
                } else {
                    (0.5 * std::f64::consts::PI * t / rise).sin().powi(2)
                };
                Complex64::from_polar(power.sqrt() * ramp, -detuning * t)
            }
        }
    }

    pub fn peak_power(&self) -> f64 {
        match *self {
            Pulse::Sech { peak_power, .. } | Pulse::Gaussian { peak_power, .. } => peak_power,
            Pulse::Cw { power, .. } => power,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Pulse::Sech { t0, peak_power, delay } | Pulse::Gaussian { t0, peak_power, delay } => {
                t0 > 0.0 && peak_power >= 0.0 && delay.is_finite()
            }
            Pulse::Cw { power, detuning, rise } => power >= 0.0 && detuning.is_finite() && rise >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid injected pulse {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// Outflow at both ends, nothing enters.
    Open,
    /// A₊(z_min, t) prescribed; A₋ leaves freely.
    Injected { pulse: Pulse },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<EnvelopeState>,
    pub grid: PropagationGrid,
    /// Set when the run stopped early; snapshots hold everything up to it.
    pub failure: Option<Error>,
}

impl Trajectory {
    pub fn last(&self) -> &EnvelopeState {
        self.snapshots.last().expect("trajectory holds at least the initial state")
    }

    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }
}

/// Coefficients rescaled to z in units of ℓ and amplitudes in units of a_s.
struct Scaled {
    length: f64,
    amp: f64,
    kappa: Complex64,
    gamma: Complex64,
    alpha: f64,
    delta_k: f64,
}

impl Scaled {
    fn new(c: &CmeCoefficients, domain: f64) -> Self {
        let k = c.kappa.re.abs();
        let length = if k > 0.0 { 1.0 / k } else { domain };
        let g = c.gamma_nl.re.abs();
        let amp = if k > 0.0 && g > 0.0 { (k / g).sqrt() } else { 1.0 };
        Self {
            length,
            amp,
            kappa: c.kappa * length,
            gamma: c.gamma_nl * length * amp * amp,
            alpha: c.alpha * length,
            delta_k: c.delta_k * length,
        }
    }
}

struct Stepper {
    /// Half-step coupling matrix entries and common factor.
    diag: Complex64,
    off: Complex64,
    /// iγ̃·h/2
    nl: Complex64,
    lossy_nl: bool,
}

impl Stepper {
    fn new(s: &Scaled, h: f64) -> Self {
        let half = 0.5 * h;
        let common = Complex64::new(-s.alpha * half, s.delta_k * half).exp();
        let x = s.kappa * half;
        Self {
            diag: common * x.cos(),
            off: common * Complex64::i() * x.sin(),
            nl: Complex64::i() * s.gamma * half,
            lossy_nl: s.gamma.im != 0.0,
        }
    }

    fn nonlinear(&self, p: &mut Complex64, m: &mut Complex64) {
        let (ip, im) = (p.norm_sqr(), m.norm_sqr());
        let fp = (self.nl * (ip + 2.0 * im)).exp();
        let fm = (self.nl * (im + 2.0 * ip)).exp();
        if self.lossy_nl {
            // Midpoint intensities: second order for the damping part too.
            let mp = 0.5 * ip * (1.0 + fp.norm_sqr());
            let mm = 0.5 * im * (1.0 + fm.norm_sqr());
            let gp = (self.nl * (mp + 2.0 * mm)).exp();
            let gm = (self.nl * (mm + 2.0 * mp)).exp();
            *p *= gp;
            *m *= gm;
        } else {
            *p *= fp;
            *m *= fm;
        }
    }

    fn half_step(&self, p: &mut [Complex64], m: &mut [Complex64], order_nl_first: bool) {
        let body = |(a, b): (&mut Complex64, &mut Complex64)| {
            if order_nl_first {
                self.nonlinear(a, b);
            }
            let (x, y) = (*a, *b);
            *a = self.diag * x + self.off * y;
            *b = self.off * x + self.diag * y;
            if !order_nl_first {
                self.nonlinear(a, b);
            }
        };
        if p.len() >= PARALLEL_MIN_LEN {
            p.par_iter_mut().zip(m.par_iter_mut()).with_min_len(PARALLEL_MIN_LEN / 4).for_each(body);
        } else {
            p.iter_mut().zip(m.iter_mut()).for_each(body);
        }
    }
}

/// Integrates the coupled-mode equations from `initial` over `grid`.
///
/// Blow-up (non-finite values, or density above [`BLOWUP_FACTOR`] times the
/// initial peak) ends the run early with `failure` set; configuration errors
/// are returned as `Err`.
pub fn propagate(
    coeffs: &CmeCoefficients,
    initial: &EnvelopeState,
    grid: &PropagationGrid,
    boundary: &BoundaryCondition,
) -> Result<Trajectory> {
    coeffs.validate()?;
    grid.validate(coeffs.v_g)?;
    initial.validate()?;
    if initial.len() != grid.n_z
        || (initial.z_min - grid.z_min).abs() > 1e-9 * grid.dz()
        || (initial.dz - grid.dz()).abs() > 1e-9 * grid.dz()
    {
        return Err(Error::InvalidParameter("initial state is not sampled on the propagation grid".into()));
    }
    if let BoundaryCondition::Injected { pulse } = boundary {
        pulse.validate()?;
    }

    let dz = grid.dz();
    let sc = Scaled::new(coeffs, grid.z_max - grid.z_min);
    let stepper = Stepper::new(&sc, dz / sc.length);
    let dk = coeffs.delta_k;
    let to_internal = |a: Complex64, z: f64, sign: f64| a * Complex64::from_polar(1.0 / sc.amp, sign * dk * z);
    let z_of = |i: usize| grid.z_min + i as f64 * dz;

    let mut p: Vec<Complex64> = initial.a_plus.iter().enumerate().map(|(i, &a)| to_internal(a, z_of(i), 1.0)).collect();
    let mut m: Vec<Complex64> = initial.a_minus.iter().enumerate().map(|(i, &a)| to_internal(a, z_of(i), -1.0)).collect();

    let injected_peak = match boundary {
        BoundaryCondition::Injected { pulse } => pulse.peak_power(),
        BoundaryCondition::Open => 0.0,
    };
    let ceiling = BLOWUP_FACTOR * initial.peak().max(injected_peak) / (sc.amp * sc.amp);

    let snapshot = |p: &[Complex64], m: &[Complex64], t: f64| EnvelopeState {
        z_min: grid.z_min,
        dz,
        a_plus: p.iter().enumerate().map(|(i, &a)| a * Complex64::from_polar(sc.amp, -dk * z_of(i))).collect(),
        a_minus: m.iter().enumerate().map(|(i, &a)| a * Complex64::from_polar(sc.amp, dk * z_of(i))).collect(),
        t,
    };

    let steps = grid.steps();
    let mut snapshots = vec![snapshot(&p, &m, initial.t)];
    let mut failure = None;
    let n = grid.n_z;
    for step in 1..=steps {
        let t = initial.t + step as f64 * grid.dt;
        stepper.half_step(&mut p, &mut m, true);
        p.rotate_right(1);
        p[0] = Complex64::new(0.0, 0.0);
        m.rotate_left(1);
        m[n - 1] = Complex64::new(0.0, 0.0);
        stepper.half_step(&mut p, &mut m, false);
        if let BoundaryCondition::Injected { pulse } = boundary {
            p[0] = to_internal(pulse.amplitude(t), grid.z_min, 1.0);
        }

        let blown = p.iter().zip(&m).any(|(a, b)| {
            let d = a.norm_sqr() + b.norm_sqr();
            !d.is_finite() || (ceiling > 0.0 && d > ceiling)
        });
        if blown {
            failure = Some(Error::NonFiniteField { step, time: t });
            break;
        }
        if step % grid.snapshot_stride == 0 || step == steps {
            snapshots.push(snapshot(&p, &m, t));
        }
    }
    Ok(Trajectory { snapshots, grid: *grid, failure })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub t: f64,
    /// W·m under the power convention.
    pub energy: f64,
    pub centroid: f64,
    /// Peak |A₊|² + |A₋|², W.
    pub peak: f64,
    pub momentum: f64,
}

pub fn diagnostics(traj: &Trajectory) -> Vec<Diagnostic> {
    traj.snapshots
        .iter()
        .map(|s| Diagnostic {
            t: s.t,
            energy: s.energy(),
            centroid: s.centroid(),
            peak: s.peak(),
            momentum: s.momentum(),
        })
        .collect()
}

/// Least-squares slope of centroid against time, m/s.
pub fn centroid_velocity(diag: &[Diagnostic]) -> Option<f64> {
    if diag.len() < 2 {
        return None;
    }
    let n = diag.len() as f64;
    let mt = diag.iter().map(|d| d.t).sum::<f64>() / n;
    let mz = diag.iter().map(|d| d.centroid).sum::<f64>() / n;
    let sxy: f64 = diag.iter().map(|d| (d.t - mt) * (d.centroid - mz)).sum();
    let sxx: f64 = diag.iter().map(|d| (d.t - mt) * (d.t - mt)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Discrete L2 norm √(Σ(|A₊|² + |A₋|²)Δz).
pub fn l2_norm(s: &EnvelopeState) -> f64 {
    (s.density().iter().sum::<f64>() * s.dz).sqrt()
}

/// L2 distance between two states on the same grid.
pub fn l2_distance(a: &EnvelopeState, b: &EnvelopeState) -> Result<f64> {
    if a.len() != b.len() || (a.dz - b.dz).abs() > 1e-12 * a.dz {
        return Err(Error::InvalidParameter("states live on different grids".into()));
    }
    let sum: f64 = a
        .a_plus
        .iter()
        .zip(&b.a_plus)
        .chain(a.a_minus.iter().zip(&b.a_minus))
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    Ok((sum * a.dz).sqrt())
}

/// min over shift s and global phase φ of ‖A − e^{iφ}R(· − s)‖ / ‖R‖ with
/// |s| ≤ `max_shift`. `reference(z)` returns (R₊, R₋).
pub fn shape_error<F>(state: &EnvelopeState, reference: F, max_shift: f64) -> f64
where
    F: Fn(f64) -> (Complex64, Complex64),
{
    let misfit = |s: f64| -> f64 {
        let mut overlap = Complex64::new(0.0, 0.0);
        let (mut na, mut nr) = (0.0, 0.0);
        for i in 0..state.len() {
            let (rp, rm) = reference(state.z(i) - s);
            let (ap, am) = (state.a_plus[i], state.a_minus[i]);
            overlap += rp.conj() * ap + rm.conj() * am;
            na += ap.norm_sqr() + am.norm_sqr();
            nr += rp.norm_sqr() + rm.norm_sqr();
        }
        if nr == 0.0 {
            return if na == 0.0 { 0.0 } else { f64::INFINITY };
        }
        ((na + nr - 2.0 * overlap.norm()).max(0.0) / nr).sqrt()
    };
    if max_shift <= 0.0 {
        return misfit(0.0);
    }
    // Coarse scan, then golden-section refinement around the best sample.
    let samples = 41;
    let step = 2.0 * max_shift / (samples - 1) as f64;
    let (best, _) = (0..samples)
        .map(|j| -max_shift + j as f64 * step)
        .map(|s| (s, misfit(s)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty scan");
    let (mut lo, mut hi) = (best - step, best + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (misfit(x1), misfit(x2));
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = misfit(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = misfit(x2);
        }
    }
    f1.min(f2).min(misfit(best))
}

/// Long-format table: one row per (snapshot, grid point).
pub fn trajectory_table(traj: &Trajectory) -> Table {
    let mut t = Table::new([
        "t[s]",
        "z[m]",
        "Re(A+)[W^0.5]",
        "Im(A+)[W^0.5]",
        "Re(A-)[W^0.5]",
        "Im(A-)[W^0.5]",
    ])
    .comment(format!(
        "split-step characteristic scheme, n_z = {}, dz = {} m, dt = {} s",
        traj.grid.n_z,
        traj.grid.dz(),
        traj.grid.dt
    ));
    if let Some(f) = &traj.failure {
        t = t.comment(format!("run stopped early: {f}"));
    }
    for s in &traj.snapshots {
        for i in 0..s.len() {
            let (p, m) = (s.a_plus[i], s.a_minus[i]);
            t.push(vec![s.t, s.z(i), p.re, p.im, m.re, m.im]);
        }
    }
    t
}

pub fn diagnostics_table(diag: &[Diagnostic]) -> Table {
    let mut t = Table::new(["t[s]", "energy[W*m]", "centroid[m]", "peak[W]", "momentum[W*m]"]);
    for d in diag {
        t.push(vec![d.t, d.energy, d.centroid, d.peak, d.momentum]);
    }
    t
}

const MAGIC: &[u8; 4] = b"EBTR";
const FORMAT_VERSION: u32 = 1;

/// Binary snapshot stream, all little-endian:
///
/// ```text
/// "EBTR" | u32 version | u64 n_z | f64 dz | f64 dt | f64 z_min | u64 count
/// count × ( f64 t | n_z × (f64 Re A₊, f64 Im A₊, f64 Re A₋, f64 Im A₋) )
/// ```
pub fn write_binary<W: Write>(traj: &Trajectory, mut w: W) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(traj.grid.n_z as u64).to_le_bytes())?;
    w.write_all(&traj.grid.dz().to_le_bytes())?;
    w.write_all(&traj.grid.dt.to_le_bytes())?;
    w.write_all(&traj.grid.z_min.to_le_bytes())?;
    w.write_all(&(traj.snapshots.len() as u64).to_le_bytes())?;
    for s in &traj.snapshots {
        w.write_all(&s.t.to_le_bytes())?;
        for (p, m) in s.a_plus.iter().zip(&s.a_minus) {
            for v in [p.re, p.im, m.re, m.im] {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

/// Header of a binary snapshot stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryHeader {
    pub n_z: usize,
    pub dz: f64,
    pub dt: f64,
    pub z_min: f64,
}

pub fn read_binary<R: Read>(mut r: R) -> io::Result<(BinaryHeader, Vec<EnvelopeState>)> {
    let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    if &b4 != MAGIC {
        return Err(bad("not a trajectory stream"));
    }
    r.read_exact(&mut b4)?;
    if u32::from_le_bytes(b4) != FORMAT_VERSION {
        return Err(bad("unsupported trajectory format version"));
    }
    let mut f64_next = |r: &mut R| -> io::Result<f64> {
        r.read_exact(&mut b8)?;
        Ok(f64::from_le_bytes(b8))
    };
    let mut u = [0u8; 8];
    r.read_exact(&mut u)?;
    let n_z = u64::from_le_bytes(u) as usize;
    let dz = f64_next(&mut r)?;
    let dt = f64_next(&mut r)?;
    let z_min = f64_next(&mut r)?;
    r.read_exact(&mut u)?;
    let count = u64::from_le_bytes(u) as usize;
    let mut out = Vec::with_capacity(count.min(1 << 16));
    for _ in 0..count {
        let t = f64_next(&mut r)?;
        let mut a_plus = Vec::with_capacity(n_z);
        let mut a_minus = Vec::with_capacity(n_z);
        for _ in 0..n_z {
            let (pr, pi, mr, mi) = (f64_next(&mut r)?, f64_next(&mut r)?, f64_next(&mut r)?, f64_next(&mut r)?);
            a_plus.push(Complex64::new(pr, pi));
            a_minus.push(Complex64::new(mr, mi));
        }
        out.push(EnvelopeState { z_min, dz, a_plus, a_minus, t });
    }
    Ok((BinaryHeader { n_z, dz, dt, z_min }, out))
}
