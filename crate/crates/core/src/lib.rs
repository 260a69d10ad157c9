//! Simulator and security benchmark for the three-party circle-type quantum key
//! agreement protocol built on Bell states and dense coding.
//!
//! The kernel in [`qcore`] is generic over the real scalar type; the protocol,
//! adversary and analysis layers run on `f64`.

pub mod adversary;
pub mod analysis;
pub mod error;
pub mod protocol;
pub mod qcore;
pub mod rng;
pub mod scalar;

pub use error::{QkaError, Result};
pub use scalar::Real;

/// Double-precision state vector used throughout the protocol simulation.
pub type State = qcore::StateVector<f64>;
pub type StateF32 = qcore::StateVector<f32>;
pub type Unitary = qcore::Matrix4<f64>;
pub type UnitaryF32 = qcore::Matrix4<f32>;
pub type Decomposition = qcore::EveDecomposition<f64>;
