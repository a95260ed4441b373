//! Finite quantum clocks and relational system dynamics.
//!
//! The crate builds a finite clock with evenly spaced levels, its discrete
//! Fourier time basis and Gaussian quasi-ideal clock states, assembles
//! constrained clock-system global states with the coupling
//! `H = H_S + H_C - g H_S H_C`, and extracts the relational system
//! trajectory either exactly (by conditioning on the clock) or through the
//! approximate equations of motion in [`dynamics`].
//!
//! Conventions used throughout:
//!
//! * joint vectors are clock-major: index `j * d_s + m` for clock energy
//!   level `j` and system basis index `m`;
//! * dynamical time `tau` is measured in clock ticks, so one unit of `tau`
//!   is a physical time `T / d`;
//! * error vectors are returned in the clock energy basis.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod clock;
pub mod constraint;
pub mod dynamics;
pub mod linalg;
mod precise;
pub mod runner;

pub use num_complex::Complex64 as C64;

/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<C64>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("incommensurate spectrum: {0}")]
    Incommensurate(String),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("no kernel state with |eigenvalue| < {tol:e} (smallest is {smallest:e})")]
    NoKernelState { tol: f64, smallest: f64 },
    #[error("conditioned norm {norm:e} below floor at tau = {tau}")]
    NormFloor { tau: f64, norm: f64 },
    #[error("degenerate effective state at tau = {tau} (norm {norm:e})")]
    DegenerateState { tau: f64, norm: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use clock::{ClockModel, ErrorReport, QuasiIdealParams, QuasiIdealState};
pub use constraint::{Ensemble, GlobalState, SystemModel};
pub use dynamics::{IntegratorConfig, Trajectory};
