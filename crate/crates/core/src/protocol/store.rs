//! Joint-state bookkeeping for every photon alive in a run.
//!
//! Photons are addressed by [`QubitId`]. Each id lives in exactly one system, a
//! [`State`] over the qubits that are (possibly) entangled with it. Systems are
//! merged when a two-qubit operation spans them and split again whenever a
//! measurement leaves a qubit in a known product state, which keeps every
//! register well inside the four-qubit kernel limit.

use rand::Rng;

use crate::error::{QkaError, Result};
use crate::qcore::{self, BasisKind, Outcome, PauliCode, StateLabel};
use crate::{State, Unitary};

pub type QubitId = usize;

#[derive(Debug, Clone)]
struct System {
    state: State,
    qubits: Vec<QubitId>,
}

#[derive(Debug, Clone, Default)]
pub struct QuantumStore {
    systems: Vec<Option<System>>,
    location: Vec<Option<(usize, usize)>>,
}

impl QuantumStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a fresh system and returns ids for its qubits in order.
    pub fn prepare(&mut self, state: State) -> Vec<QubitId> {
        let sys = self.systems.len();
        let ids: Vec<QubitId> = (0..state.num_qubits()).map(|k| self.location.len() + k).collect();
        for (k, _) in ids.iter().enumerate() {
            self.location.push(Some((sys, k)));
        }
        self.systems.push(Some(System { state, qubits: ids.clone() }));
        ids
    }

    pub fn prepare_label(&mut self, label: StateLabel) -> Vec<QubitId> {
        self.prepare(label.state())
    }

    /// Number of live qubits.
    pub fn live_qubits(&self) -> usize {
        self.location.iter().filter(|l| l.is_some()).count()
    }

    fn locate(&self, q: QubitId) -> Result<(usize, usize)> {
        self.location
            .get(q)
            .copied()
            .flatten()
            .ok_or_else(|| QkaError::internal(format!("qubit {q} is not live")))
    }

    fn take(&mut self, sys: usize) -> System {
        self.systems[sys].take().expect("located systems are live")
    }

    fn install(&mut self, system: System) -> usize {
        let sys = self.systems.len();
        for (k, &q) in system.qubits.iter().enumerate() {
            self.location[q] = Some((sys, k));
        }
        self.systems.push(Some(system));
        sys
    }

    /// Brings `qubits` into one system and returns their local indices there.
    fn join(&mut self, qubits: &[QubitId]) -> Result<(usize, Vec<usize>)> {
        let mut sys = self.locate(qubits[0])?.0;
        for &q in &qubits[1..] {
            let other = self.locate(q)?.0;
            if other != sys {
                let a = self.take(sys);
                let b = self.take(other);
                let state = a.state.tensor(&b.state)?;
                let mut ids = a.qubits;
                ids.extend(b.qubits);
                sys = self.install(System { state, qubits: ids });
            }
        }
        let locals = qubits.iter().map(|&q| self.locate(q).map(|l| l.1)).collect::<Result<_>>()?;
        Ok((sys, locals))
    }

    /// Joint state of the system holding `q`, with `q`'s local index.
    pub fn system_of(&self, q: QubitId) -> Result<(&State, usize)> {
        let (sys, local) = self.locate(q)?;
        Ok((&self.systems[sys].as_ref().expect("live").state, local))
    }

    /// Qubit ids sharing a system with `q` (including `q`), in local order.
    pub fn partners(&self, q: QubitId) -> Result<&[QubitId]> {
        let (sys, _) = self.locate(q)?;
        Ok(&self.systems[sys].as_ref().expect("live").qubits)
    }

    pub fn apply_pauli(&mut self, q: QubitId, code: PauliCode) -> Result<()> {
        let (sys, local) = self.locate(q)?;
        let system = self.systems[sys].as_mut().expect("live");
        system.state = qcore::apply_pauli(&system.state, code, local)?;
        Ok(())
    }

    /// Applies `matrix` to the ordered pair `(a, b)`, merging their systems if needed.
    pub fn apply_pair(&mut self, a: QubitId, b: QubitId, matrix: &Unitary) -> Result<()> {
        let (sys, locals) = self.join(&[a, b])?;
        let system = self.systems[sys].as_mut().expect("live");
        system.state = qcore::apply_unitary(&system.state, matrix, (locals[0], locals[1]))?;
        Ok(())
    }

    /// Z or X measurement of one qubit. The qubit is left alone in its own system,
    /// in the eigenstate matching the outcome.
    pub fn measure<R: Rng + ?Sized>(&mut self, q: QubitId, basis: BasisKind, rng: &mut R) -> Result<bool> {
        if basis == BasisKind::Bell {
            return Err(QkaError::rejected("Bell measurement needs two qubits"));
        }
        let (sys, local) = self.locate(q)?;
        let state = &self.systems[sys].as_ref().expect("live").state;
        let result = qcore::measure(state, basis, &[local], rng)?;
        let bit = result.outcome.bit().expect("single-qubit basis yields a bit");
        let eigen = basis.single_state(bit).expect("single-qubit basis");
        self.split(sys, &[q], eigen.state(), result.collapsed)?;
        Ok(bit)
    }

    /// Bell measurement of the ordered pair `(a, b)`; the pair is left in the measured Bell state.
    pub fn bell_measure<R: Rng + ?Sized>(&mut self, a: QubitId, b: QubitId, rng: &mut R) -> Result<PauliCode> {
        let (sys, locals) = self.join(&[a, b])?;
        let state = &self.systems[sys].as_ref().expect("live").state;
        let result = qcore::measure(state, BasisKind::Bell, &locals, rng)?;
        let code = match result.outcome {
            Outcome::Bell(c) => c,
            Outcome::Bit(_) => return Err(QkaError::internal("Bell measurement returned a bit")),
        };
        self.split(sys, &[a, b], StateLabel::from_bell_code(code).state(), result.collapsed)?;
        Ok(code)
    }

    // `collapsed` is `eigen` on `measured` times something on the rest of system `sys`.
    fn split(&mut self, sys: usize, measured: &[QubitId], eigen: State, collapsed: State) -> Result<()> {
        let system = self.take(sys);
        if system.qubits.len() == measured.len() {
            // Nothing else in the system: it is the eigenstate, up to phase.
            self.install(System { state: eigen, qubits: measured.to_vec() });
            return Ok(());
        }
        let locals: Vec<usize> = measured
            .iter()
            .map(|q| system.qubits.iter().position(|x| x == q).expect("member"))
            .collect();
        let rest_state = collapsed.factor_out(&locals, &eigen)?;
        let rest_ids: Vec<QubitId> = system.qubits.iter().copied().filter(|q| !measured.contains(q)).collect();
        self.install(System { state: eigen, qubits: measured.to_vec() });
        self.install(System { state: rest_state, qubits: rest_ids });
        Ok(())
    }

    /// Drops qubits that form whole systems on their own (e.g. measured decoys).
    pub fn release(&mut self, qubits: &[QubitId]) -> Result<()> {
        for &q in qubits {
            let Ok((sys, _)) = self.locate(q) else { continue };
            let members = &self.systems[sys].as_ref().expect("live").qubits;
            if members.iter().any(|m| !qubits.contains(m)) {
                return Err(QkaError::internal(format!("qubit {q} is still entangled with live qubits")));
            }
            let system = self.take(sys);
            for m in system.qubits {
                self.location[m] = None;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bell_pair_round_trip() {
        let mut store = QuantumStore::new();
        let ids = store.prepare_label(StateLabel::PhiPlus);
        store.apply_pauli(ids[0], PauliCode::X).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(store.bell_measure(ids[0], ids[1], &mut rng).unwrap(), PauliCode::X);
        store.release(&ids).unwrap();
        assert_eq!(store.live_qubits(), 0);
    }

    #[test]
    fn measuring_one_half_splits_the_pair() {
        let mut store = QuantumStore::new();
        let ids = store.prepare_label(StateLabel::PhiPlus);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bit = store.measure(ids[0], BasisKind::Z, &mut rng).unwrap();
        assert_eq!(store.partners(ids[0]).unwrap(), &[ids[0]]);
        assert_eq!(store.partners(ids[1]).unwrap(), &[ids[1]]);
        // Perfect correlation in Z for φ+.
        assert_eq!(store.measure(ids[1], BasisKind::Z, &mut rng).unwrap(), bit);
    }

    #[test]
    fn cross_system_bell_measurement_merges() {
        let mut store = QuantumStore::new();
        let a = store.prepare_label(StateLabel::Zero)[0];
        let b = store.prepare_label(StateLabel::Zero)[0];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let code = store.bell_measure(a, b, &mut rng).unwrap();
        assert!(code == PauliCode::I || code == PauliCode::Z);
        assert_eq!(store.partners(a).unwrap(), &[a, b]);
    }

    #[test]
    fn reversed_pair_measurement_keeps_order() {
        let mut store = QuantumStore::new();
        let ids = store.prepare_label(StateLabel::PsiMinus);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // ψ− is antisymmetric, so swapping the pair only changes the global phase.
        assert_eq!(store.bell_measure(ids[1], ids[0], &mut rng).unwrap(), PauliCode::Y);
        assert_eq!(store.partners(ids[0]).unwrap(), &[ids[1], ids[0]]);
    }

    #[test]
    fn entangling_then_measuring_ancilla() {
        let mut store = QuantumStore::new();
        let pair = store.prepare_label(StateLabel::PhiPlus);
        let anc = store.prepare_label(StateLabel::Zero)[0];
        store.apply_pair(pair[0], anc, &Unitary::cnot()).unwrap();
        assert_eq!(store.partners(anc).unwrap().len(), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a_bit = store.measure(anc, BasisKind::Z, &mut rng).unwrap();
        store.release(&[anc]).unwrap();
        assert_eq!(store.partners(pair[0]).unwrap().len(), 2);
        assert_eq!(store.measure(pair[1], BasisKind::Z, &mut rng).unwrap(), a_bit);
    }

    #[test]
    fn release_refuses_entangled_qubit() {
        let mut store = QuantumStore::new();
        let pair = store.prepare_label(StateLabel::PhiPlus);
        assert!(store.release(&pair[..1]).is_err());
        assert!(store.apply_pauli(99, PauliCode::X).is_err());
    }
}
