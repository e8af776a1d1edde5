//! Integrators for the continuous QR flow of a linear time-varying system.
//!
//! Given `Ẋ = A(t) X` with `X(t) ∈ ℝ^{n×p}` of full column rank, the
//! orthonormal factor of `X = Q R` satisfies
//!
//! ```text
//! Q̇ = A Q − Q Qᵀ A Q + Q S,    S = tril(QᵀAQ) − tril(QᵀAQ)ᵀ
//! ```
//!
//! This crate integrates that flow in factored coordinates (Householder
//! reflectors or Givens rotations, see [`frames`]) column by column, so that
//! `Q` stays orthonormal to roundoff without any projection, and reports the
//! diagonal of `Ã = QᵀAQ − QᵀQ̇` along the way. A projected Runge–Kutta
//! baseline is provided for comparison.

pub mod error;
pub mod flows;
pub mod frames;
pub mod integrate;
pub mod linalg;
pub mod problems;

pub use error::{Error, Result};
pub use frames::{Coordinates, Frames};
pub use integrate::{
    integrate, integrate_projected, AcceptedStep, ButcherPair, IntegrationConfig,
    LyapunovAccumulator, Method, NoObserver, Observer, PairKind, RunStats, Solution, StepMode,
};
pub use linalg::{Matrix, Variant};
pub use problems::ProblemSpec;
