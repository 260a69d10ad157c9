//! Dense state-vector kernel over at most four qubits.
//!
//! Values are immutable: every operation returns a new state. Global phase is
//! unobservable, so equality checks go through [`StateVector::equals_up_to_phase`].

mod measure;
mod pauli;
mod state;
mod unitary;

pub use num_complex::Complex;

pub use measure::{measure, outcome_distribution, BasisKind, Branch, MeasurementOutcome, Outcome};
pub use pauli::{apply_pauli, compose_codes, PauliCode};
pub use state::{make_state, overlap, Matrix2, Matrix4, StateLabel, StateVector, MAX_QUBITS};
pub use unitary::{
    apply_unitary, eve_decomposition, random_unitary, random_unitary2, zero_disturbance_unitary,
    AncillaVector, EveDecomposition,
};
