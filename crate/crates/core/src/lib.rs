//! EIT five-level medium under a standing-wave control field, treated as a
//! Kerr Bragg grating: susceptibilities, transfer-matrix band structure,
//! coupled-mode coefficients, Bragg solitons and their propagation, and the
//! soliton design map.

pub mod atomic;
pub mod bandstructure;
pub mod cme;
pub mod constants;
pub mod design;
pub mod error;
pub mod grating;
pub mod propagator;
pub mod table;

pub use atomic::{AtomicParams, ChiKind, ComplexChi, FieldParams};
pub use bandstructure::{BandStructure, GapCriterion, GapWidth, SpectrumOptions};
pub use cme::{CmeCoefficients, EnvelopeState, SolitonOptions, SolitonParams};
pub use design::{Constraints, DesignPoint, OrderFactor, WorkableRegion};
pub use error::{Error, Result};
pub use grating::{Dispersion, GratingSpec, LocalChi};
pub use propagator::{BoundaryCondition, PropagationGrid, Pulse, Trajectory};
pub use table::Table;
