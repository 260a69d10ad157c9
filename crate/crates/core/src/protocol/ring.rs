//! Operations on one ring's travelling sequence.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QkaError, Result};
use crate::protocol::store::{QuantumStore, QubitId};
use crate::protocol::types::{Announcement, BitString, DecoyRecord, Participant, SubKey};
use crate::qcore::{BasisKind, PauliCode, StateLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SlotKind {
    BellHalf { pair: usize },
    InsertedSingle,
    Decoy { id: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub kind: SlotKind,
    pub qubit: QubitId,
}

/// Ordered photons travelling around one ring. Payload slots keep their order;
/// decoys are spliced in for a single hop and removed by the receiving check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TravelSequence {
    pub ring: Participant,
    pub slots: Vec<Slot>,
}

impl TravelSequence {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn has_decoys(&self) -> bool {
        self.slots.iter().any(|s| matches!(s.kind, SlotKind::Decoy { .. }))
    }

    pub fn qubits(&self) -> impl Iterator<Item = QubitId> + '_ {
        self.slots.iter().map(|s| s.qubit)
    }

    // Places `new` at `positions` (sorted, indices into the result) and keeps the
    // existing slots in order everywhere else.
    fn splice(&mut self, positions: &[usize], new: Vec<Slot>) {
        let total = self.slots.len() + new.len();
        let mut old = std::mem::take(&mut self.slots).into_iter();
        let mut new = new.into_iter();
        let mut next = positions.iter().peekable();
        self.slots = (0..total)
            .map(|i| {
                if next.peek() == Some(&&i) {
                    next.next();
                    new.next().expect("one new slot per position")
                } else {
                    old.next().expect("remaining old slots fill the gaps")
                }
            })
            .collect();
    }
}

/// Preparation: `m` fresh `φ+` pairs. Returns the travelling first halves and the
/// preparer's second halves in the same pair order.
pub fn prepare_ring(store: &mut QuantumStore, preparer: Participant, m: usize) -> (TravelSequence, Vec<QubitId>) {
    let mut slots = Vec::with_capacity(m);
    let mut home = Vec::with_capacity(m);
    for pair in 0..m {
        let ids = store.prepare_label(StateLabel::PhiPlus);
        slots.push(Slot {
            kind: SlotKind::BellHalf { pair },
            qubit: ids[0],
        });
        home.push(ids[1]);
    }
    (TravelSequence { ring: preparer, slots }, home)
}

fn sorted_sample<R: Rng + ?Sized>(rng: &mut R, length: usize, amount: usize) -> Vec<usize> {
    let mut positions = sample(rng, length, amount).into_vec();
    positions.sort_unstable();
    positions
}

/// Splices `count` decoys, uniform over `{0, 1, +, −}`, at uniformly random positions.
pub fn insert_decoys<R: Rng + ?Sized>(
    store: &mut QuantumStore,
    seq: &mut TravelSequence,
    count: usize,
    rng: &mut R,
) -> DecoyRecord {
    let states: Vec<StateLabel> = (0..count)
        .map(|_| StateLabel::SINGLE[rng.random_range(0..4)])
        .collect();
    let positions = sorted_sample(rng, seq.len() + count, count);
    let slots = states
        .iter()
        .enumerate()
        .map(|(id, &label)| Slot {
            kind: SlotKind::Decoy { id },
            qubit: store.prepare_label(label)[0],
        })
        .collect();
    seq.splice(&positions, slots);
    let bases = states
        .iter()
        .map(|&s| BasisKind::of_label(s).expect("decoys are single-photon states"))
        .collect();
    DecoyRecord { positions, states, bases }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoyCheck {
    pub decoys: usize,
    pub errors: usize,
    pub error_rate: f64,
}

/// Measures every announced decoy in its basis, counts mismatches and removes the decoys.
pub fn check_decoys<R: Rng + ?Sized>(
    store: &mut QuantumStore,
    seq: &mut TravelSequence,
    record: &DecoyRecord,
    rng: &mut R,
) -> Result<DecoyCheck> {
    let mut errors = 0;
    let mut measured = Vec::with_capacity(record.positions.len());
    for (k, &pos) in record.positions.iter().enumerate() {
        let slot = seq
            .slots
            .get(pos)
            .ok_or_else(|| QkaError::internal(format!("decoy position {pos} beyond sequence end")))?;
        if slot.kind != (SlotKind::Decoy { id: k }) {
            return Err(QkaError::internal(format!("slot {pos} is not decoy {k}")));
        }
        let bit = store.measure(slot.qubit, record.bases[k], rng)?;
        if Some(bit) != record.states[k].bit() {
            errors += 1;
        }
        measured.push(slot.qubit);
    }
    seq.slots.retain(|s| !matches!(s.kind, SlotKind::Decoy { .. }));
    store.release(&measured)?;
    let decoys = record.positions.len();
    let error_rate = if decoys == 0 { 0.0 } else { errors as f64 / decoys as f64 };
    Ok(DecoyCheck { decoys, errors, error_rate })
}

/// The first encoder splices `l` photons in `|0⟩` at uniformly random payload positions.
pub fn insert_singles<R: Rng + ?Sized>(
    store: &mut QuantumStore,
    seq: &mut TravelSequence,
    l: usize,
    rng: &mut R,
) -> Result<Announcement> {
    if seq.has_decoys() {
        return Err(QkaError::rejected("single photons are inserted after the decoys are removed"));
    }
    let positions = sorted_sample(rng, seq.len() + l, l);
    let slots = (0..l)
        .map(|_| Slot {
            kind: SlotKind::InsertedSingle,
            qubit: store.prepare_label(StateLabel::Zero)[0],
        })
        .collect();
    seq.splice(&positions, slots);
    Ok(Announcement {
        ring: seq.ring,
        inserter: seq.ring.inserter(),
        single_positions: positions,
    })
}

/// Applies `U_{key[i]}` to payload slot `i`.
pub fn encode(store: &mut QuantumStore, seq: &TravelSequence, key: &SubKey) -> Result<()> {
    if seq.has_decoys() {
        return Err(QkaError::rejected("encoding requires a decoy-free sequence"));
    }
    if seq.len() != key.groups.len() {
        return Err(QkaError::rejected(format!(
            "payload length {} does not match key length {}",
            seq.len(),
            key.groups.len()
        )));
    }
    for (slot, &code) in seq.slots.iter().zip(&key.groups) {
        store.apply_pauli(slot.qubit, code)?;
    }
    Ok(())
}

/// Applies depolarizing noise to every photon: with probability `3p/2` a uniformly
/// random non-identity Pauli, which flips a Z or X eigenstate with probability `p`.
pub fn apply_channel_noise<R: Rng + ?Sized>(
    store: &mut QuantumStore,
    seq: &TravelSequence,
    flip_prob: f64,
    rng: &mut R,
) -> Result<()> {
    if flip_prob <= 0.0 {
        return Ok(());
    }
    let hit = (1.5 * flip_prob).min(1.0);
    for q in seq.qubits() {
        if rng.random_bool(hit) {
            let code = [PauliCode::Z, PauliCode::X, PauliCode::Y][rng.random_range(0..3)];
            store.apply_pauli(q, code)?;
        }
    }
    Ok(())
}

/// Final measurement: returns `K′`.
///
/// Home qubit `j` is paired with the `j`-th payload position not in `inserted`
/// (this ring's announcement). Positions outside `union_positions` emit both
/// Bell-code bits in place; union positions emit one bit each, appended in
/// ascending order: the Z outcome for an inserted single, otherwise the first
/// bit of the Bell code.
pub fn decode<R: Rng + ?Sized>(
    store: &mut QuantumStore,
    home: &[QubitId],
    seq: &TravelSequence,
    inserted: &[usize],
    union_positions: &[usize],
    rng: &mut R,
) -> Result<BitString> {
    if seq.has_decoys() {
        return Err(QkaError::internal("decoding a sequence that still holds decoys"));
    }
    let n = seq.len();
    if n - inserted.len().min(n) != home.len() || inserted.iter().any(|&p| p >= n) {
        return Err(QkaError::internal(format!(
            "ring {}: {n} payload slots with {} insertions cannot pair with {} home qubits",
            seq.ring,
            inserted.len(),
            home.len()
        )));
    }
    if inserted.iter().any(|p| union_positions.binary_search(p).is_err()) {
        return Err(QkaError::internal("union of positions misses this ring's insertions"));
    }
    let mut home_iter = home.iter();
    let mut in_place = Vec::with_capacity(2 * n);
    let mut appended = Vec::with_capacity(union_positions.len());
    for (pos, slot) in seq.slots.iter().enumerate() {
        let in_union = union_positions.binary_search(&pos).is_ok();
        if inserted.binary_search(&pos).is_ok() {
            appended.push(store.measure(slot.qubit, BasisKind::Z, rng)?);
            continue;
        }
        let partner = *home_iter.next().expect("count checked above");
        let code = store.bell_measure(slot.qubit, partner, rng)?;
        if in_union {
            appended.push(code.x_bit());
        } else {
            in_place.push(code.x_bit());
            in_place.push(code.z_bit());
        }
    }
    in_place.extend(appended);
    Ok(BitString(in_place))
}
