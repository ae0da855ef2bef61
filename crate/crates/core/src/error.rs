use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: denominator magnitude {magnitude:e} below floor (unphysical parameter set)")]
    DenominatorUnderflow { what: &'static str, magnitude: f64 },

    #[error("length must be positive, got {0} m")]
    NonPositiveLength(f64),

    #[error("Bragg matching infeasible: k_s = {k_s:e} m^-1 < k_B = {k_b:e} m^-1")]
    GeometryInfeasible { k_s: f64, k_b: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("transfer matrix overflow at detuning {detuning} gamma_a")]
    MatrixOverflow { detuning: f64 },

    #[error("reflectivity not converged in slab count: max |dR| = {max_diff:e}")]
    NonConvergent { max_diff: f64 },

    #[error("Bloch branch ambiguity between grid points {index} and {next}: jump of {jump} rad in Re(Kd)", next = index + 1)]
    BranchAmbiguity { index: usize, jump: f64 },

    #[error("no band gap detected")]
    NoGapDetected,

    #[error("dispersion derivative not converged: Richardson levels differ by {rel_diff:e} (relative)")]
    DerivativeNonConvergent { rel_diff: f64 },

    #[error("no soliton for kappa = {kappa:e}, gamma = {gamma:e}")]
    InvalidSolitonRegime { kappa: f64, gamma: f64 },

    #[error("frequency inside the band gap: |delta_omega| = {delta:e} <= |kappa| = {kappa:e}")]
    InsideGap { delta: f64, kappa: f64 },

    #[error("grid not characteristic-aligned: dt = {dt:e} s but dz/v_g = {expected:e} s")]
    CflViolation { dt: f64, expected: f64 },

    #[error("field blow-up at step {step} (t = {time:e} s)")]
    NonFiniteField { step: usize, time: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
