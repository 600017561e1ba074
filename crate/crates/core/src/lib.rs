//! Superintegrable magnetic-monopole systems on a conformally flat curved
//! background: Hamiltonian evaluation, integrals of motion (including the
//! higher-order polynomial integral for rational deformation parameter),
//! exact parity certification of that integral, symplectic integration and
//! orbit-closure experiments, and the maps to generalized Taub-NUT
//! coordinates and to the 2D Post-Winternitz system.
//!
//! Evaluators are generic over [`Real`], so the same code runs on `f32`,
//! `f64` and on the dual numbers used for exact derivatives.

pub mod curvature;
pub mod dual;
pub mod dynamics;
pub mod error;
pub mod integrals;
pub mod model;
pub mod parity;
pub mod rational;
pub mod sampling;
pub mod scalar;
pub mod transforms;
pub mod verify;

pub use dual::Dual;
pub use error::{Error, Result};
pub use model::{DomainWindow, Model, ModelParams, PhasePoint};
pub use rational::RationalM;
pub use scalar::Real;

/// First-order dual over the six phase-space variables.
pub type Grad6 = Dual<f64, 6>;
/// Second-order (nested) dual over the six phase-space variables.
pub type Hess6 = Dual<Grad6, 6>;
pub type PhasePoint64 = PhasePoint<f64>;
pub type PhasePoint32 = PhasePoint<f32>;
