use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (max |M - M^dagger| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("density matrix trace {trace:.12} differs from 1")]
    BadTrace { trace: f64 },

    #[error("density matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("state vector is not normalized (norm {norm:.12})")]
    NotNormalized { norm: f64 },

    #[error("invalid model parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("level index {level} out of range for dimension {dim}")]
    LevelOutOfRange { level: usize, dim: usize },

    #[error(
        "degenerate level {level} at phi = {phi:.6}: gap {gap:.3e} below threshold {threshold:.3e}"
    )]
    DegenerateLevel {
        level: usize,
        phi: f64,
        gap: f64,
        threshold: f64,
    },

    #[error("path is not closed: |<psi_N|psi_0>| = {overlap:.12}")]
    OpenPath { overlap: f64 },

    #[error("malformed path: {0}")]
    MalformedPath(String),

    #[error("basis is not orthonormal (Gram deviation {deviation:.3e})")]
    NonOrthonormalBasis { deviation: f64 },

    #[error("finite-difference step {step:e} outside [1e-6, 1e-2]")]
    StepOutOfRange { step: f64 },

    #[error("gauge transformation is not unitary at phi = {phi:.6} (deviation {deviation:.3e})")]
    NonUnitaryGauge { phi: f64, deviation: f64 },

    #[error("gauge transformation is not periodic (|omega(2pi) - omega(0)| = {deviation:.3e})")]
    NonPeriodicGauge { deviation: f64 },

    #[error("wilson loop needs at least 16 steps, got {0}")]
    TooFewSteps(usize),

    #[error(
        "norm drift {drift:.3e} at step {step} exceeds 1e-6; reduce the time step (dt = {dt:.3e})"
    )]
    NormDrift { step: usize, drift: f64, dt: f64 },

    #[error("steps_per_loop = {got} is below the minimum {min} for these parameters")]
    TooFewTimeSteps { got: usize, min: usize },

    #[error("trajectory does not cover an integer number of loops")]
    NonIntegerLoops,

    #[error("adiabatic condition undefined; gap closes (g = {g}, sin(theta) = {sin_theta:.3e})")]
    AdiabaticityUndefined { g: f64, sin_theta: f64 },

    #[error("prolongation undefined: Bloch vector length {length:.3e} (maximally mixed state)")]
    ProlongationUndefined { length: f64 },

    #[error("reduced state is degenerate at phi = {phi:.6} (Bloch vector length {length:.3e})")]
    DegenerateReducedState { phi: f64, length: f64 },

    #[error("path undersampled: geodesic step {angle:.4} rad between points {index} and {next}")]
    Undersampled {
        index: usize,
        next: usize,
        angle: f64,
    },

    #[error("spectral weights vary along the loop by {variation:.3e} (tolerance {tolerance:.1e})")]
    WeightVariation { variation: f64, tolerance: f64 },
}
