//! Numerical laboratory for geometric phases of a two-qubit system whose
//! first spin follows a rotating magnetic field.
//!
//! The crate covers the Abelian Berry phase of non-degenerate levels, the
//! non-Abelian connection and Wilson loop over the doubly degenerate level
//! at zero coupling, Schrödinger dynamics around the loop, and the
//! subsystem (mixed-state) phase built from Bloch-sphere areas.

pub mod abelian;
pub mod angle;
pub mod dynamics;
mod error;
pub mod holonomy;
pub mod linalg;
pub mod mixed;
pub mod model;

pub use abelian::{
    berry_phase, product_split_phase, smooth_eigenpath, BerryResult, Gauge, StatePath,
};
pub use dynamics::{
    adiabaticity_ratio, breakdown_sweep, evolve_loop, phase_report, BreakdownRow, PhaseReport,
    Trajectory,
};
pub use error::{Error, Result};
pub use holonomy::{
    connection_analytic, connection_numeric, gauge_transform, holonomy_invariants, wilson_loop,
    Connection, Holonomy, Provenance,
};
pub use linalg::{
    expm_i_hermitian, herm_eig, partial_trace, tensor_product, ComplexMatrix, HermEig, StateVector,
    Subsystem, C64,
};
pub use mixed::{
    bloch_decompose, prolong, reduced_bloch_path, solid_angle, subsystem_phase, BlochPath,
    MixedPhaseResult, SolidAngle,
};
pub use model::{
    degenerate_basis, effective_coupling_operator, field_direction, hamiltonian, primed_basis,
    spectral_gap, BasisLabel, CouplingKind, DegeneratePair, Member, ModelParams,
};

/// Attached to every serialized result: the Hamiltonian is a reconstruction.
pub const RECONSTRUCTION_DISCLAIMER: &str =
    "Hamiltonian assumed as H = (B/2) n(theta,phi).sigma1 x I + g C(kind); \
the default xx-minus-yy coupling is the preset whose first-order degenerate states are the \
zero-coupling pair used throughout; other presets are for comparison";
