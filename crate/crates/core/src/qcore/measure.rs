use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QkaError, Result};
use crate::qcore::pauli::PauliCode;
use crate::qcore::state::{StateLabel, StateVector};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Z,
    X,
    Bell,
}

impl BasisKind {
    pub fn arity(self) -> usize {
        match self {
            BasisKind::Z | BasisKind::X => 1,
            BasisKind::Bell => 2,
        }
    }

    /// Eigenstates in outcome order: bit 0 then 1 for Z/X, codes 00..11 for Bell.
    pub fn eigenstates(self) -> [(Outcome, StateLabel); 4] {
        match self {
            BasisKind::Z => [
                (Outcome::Bit(false), StateLabel::Zero),
                (Outcome::Bit(true), StateLabel::One),
                (Outcome::Bit(false), StateLabel::Zero),
                (Outcome::Bit(true), StateLabel::One),
            ],
            BasisKind::X => [
                (Outcome::Bit(false), StateLabel::Plus),
                (Outcome::Bit(true), StateLabel::Minus),
                (Outcome::Bit(false), StateLabel::Plus),
                (Outcome::Bit(true), StateLabel::Minus),
            ],
            BasisKind::Bell => PauliCode::ALL.map(|c| (Outcome::Bell(c), StateLabel::from_bell_code(c))),
        }
    }

    fn outcome_count(self) -> usize {
        2 * self.arity()
    }

    /// The Z or X eigenstate for `bit`.
    pub fn single_state(self, bit: bool) -> Option<StateLabel> {
        match (self, bit) {
            (BasisKind::Z, false) => Some(StateLabel::Zero),
            (BasisKind::Z, true) => Some(StateLabel::One),
            (BasisKind::X, false) => Some(StateLabel::Plus),
            (BasisKind::X, true) => Some(StateLabel::Minus),
            (BasisKind::Bell, _) => None,
        }
    }

    /// Basis in which a single-photon label is an eigenstate.
    pub fn of_label(label: StateLabel) -> Option<BasisKind> {
        match label {
            StateLabel::Zero | StateLabel::One => Some(BasisKind::Z),
            StateLabel::Plus | StateLabel::Minus => Some(BasisKind::X),
            _ => None,
        }
    }
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisKind::Z => "Z",
            BasisKind::X => "X",
            BasisKind::Bell => "BELL",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Bit(bool),
    Bell(PauliCode),
}

impl Outcome {
    pub fn bit(self) -> Option<bool> {
        match self {
            Outcome::Bit(b) => Some(b),
            Outcome::Bell(_) => None,
        }
    }

    pub fn code(self) -> Option<PauliCode> {
        match self {
            Outcome::Bell(c) => Some(c),
            Outcome::Bit(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome<T: Real = f64> {
    pub outcome: Outcome,
    pub collapsed: StateVector<T>,
}

/// One branch of a projective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch<T: Real = f64> {
    pub outcome: Outcome,
    pub probability: T,
    /// `None` when the branch has zero probability.
    pub collapsed: Option<StateVector<T>>,
}

/// Exact outcome distribution of measuring `indices` in `basis`.
pub fn outcome_distribution<T: Real>(
    state: &StateVector<T>,
    basis: BasisKind,
    indices: &[usize],
) -> Result<Vec<Branch<T>>> {
    if indices.len() != basis.arity() {
        return Err(QkaError::rejected(format!(
            "{basis} measurement takes {} qubit index(es), got {}",
            basis.arity(),
            indices.len()
        )));
    }
    state.check_indices(indices)?;
    let n = state.num_qubits();
    basis.eigenstates()[..basis.outcome_count()]
        .iter()
        .map(|&(outcome, label)| {
            let eigen: StateVector<T> = label.state();
            let rest = state.partial_contract(indices, eigen.amplitudes())?;
            let probability = rest.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr());
            let collapsed = if probability > T::tolerance() * T::tolerance() {
                let amps = StateVector::embed(n, indices, eigen.amplitudes(), &rest);
                Some(StateVector::normalized(amps)?)
            } else {
                None
            };
            Ok(Branch { outcome, probability, collapsed })
        })
        .collect()
}

/// Samples a measurement by the Born rule and returns the outcome with the collapsed state.
pub fn measure<T: Real, R: Rng + ?Sized>(
    state: &StateVector<T>,
    basis: BasisKind,
    indices: &[usize],
    rng: &mut R,
) -> Result<MeasurementOutcome<T>> {
    let branches = outcome_distribution(state, basis, indices)?;
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut chosen = None;
    for branch in branches.iter().filter(|b| b.collapsed.is_some()) {
        cumulative += branch.probability.to_f64().unwrap_or(0.0);
        chosen = Some(branch);
        if u < cumulative {
            break;
        }
    }
    let branch = chosen.ok_or_else(|| QkaError::internal("measurement with no possible outcome"))?;
    Ok(MeasurementOutcome {
        outcome: branch.outcome,
        collapsed: branch.collapsed.clone().expect("filtered to possible branches"),
    })
}
