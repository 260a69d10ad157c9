use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::adversary::{Capture, HopCapture, TrojanVerdict};
use crate::error::{QkaError, Result};
use crate::protocol::{HopId, QuantumStore, TravelSequence, TrojanCountermeasures};
use crate::qcore::{eve_decomposition, BasisKind, StateLabel};
use crate::Unitary;

fn random_basis<R: Rng + ?Sized>(rng: &mut R) -> BasisKind {
    if rng.random_bool(0.5) {
        BasisKind::X
    } else {
        BasisKind::Z
    }
}

/// Measures every photon in a random Z/X basis and injects a fresh photon drawn
/// from `resend` (weights over `|0⟩, |1⟩, |+⟩, |−⟩`) in its place.
pub fn intercept_resend<R: Rng + ?Sized>(
    store: &mut QuantumStore,
    seq: &mut TravelSequence,
    hop: HopId,
    resend: &[f64; 4],
    rng: &mut R,
) -> Result<HopCapture> {
    let pick = WeightedIndex::new(resend)
        .map_err(|e| QkaError::rejected(format!("resend distribution {resend:?}: {e}")))?;
    let mut captures = Vec::with_capacity(seq.len());
    for (position, slot) in seq.slots.iter_mut().enumerate() {
        let basis = random_basis(rng);
        let bit = store.measure(slot.qubit, basis, rng)?;
        store.release(&[slot.qubit])?;
        let label = StateLabel::SINGLE[pick.sample(rng)];
        slot.qubit = store.prepare_label(label)[0];
        captures.push(Capture { position, basis, bit, resent: Some(label) });
    }
    Ok(HopCapture { hop, captures })
}

/// Measures every photon in a random Z/X basis and forwards the collapsed photon.
pub fn measure_resend<R: Rng + ?Sized>(
    store: &mut QuantumStore,
    seq: &TravelSequence,
    hop: HopId,
    rng: &mut R,
) -> Result<HopCapture> {
    let mut captures = Vec::with_capacity(seq.len());
    for (position, slot) in seq.slots.iter().enumerate() {
        let basis = random_basis(rng);
        let bit = store.measure(slot.qubit, basis, rng)?;
        captures.push(Capture { position, basis, bit, resent: basis.single_state(bit) });
    }
    Ok(HopCapture { hop, captures })
}

/// Entangles each photon with a fresh `|0⟩` ancilla through `unitary` (photon
/// first) and measures the ancilla in Z.
///
/// The ancilla measurement commutes with everything the legitimate parties do
/// later, so reading it out immediately leaves their statistics unchanged.
pub fn entangle_measure<R: Rng + ?Sized>(
    store: &mut QuantumStore,
    seq: &TravelSequence,
    hop: HopId,
    unitary: &Unitary,
    rng: &mut R,
) -> Result<HopCapture> {
    unitary.ensure_unitary()?;
    let mut captures = Vec::with_capacity(seq.len());
    for (position, slot) in seq.slots.iter().enumerate() {
        let ancilla = store.prepare_label(StateLabel::Zero)[0];
        store.apply_pair(slot.qubit, ancilla, unitary)?;
        let bit = store.measure(ancilla, BasisKind::Z, rng)?;
        store.release(&[ancilla])?;
        captures.push(Capture { position, basis: BasisKind::Z, bit, resent: None });
    }
    Ok(HopCapture { hop, captures })
}

/// Decoy error rate an entangle-measure attack with `unitary` induces, averaged
/// over the four equally likely decoy states.
pub fn predicted_decoy_error(unitary: &Unitary) -> Result<f64> {
    let probs = eve_decomposition(unitary)?.decoy_error_probabilities();
    Ok(probs.iter().sum::<f64>() / 4.0)
}

/// A Trojan-horse probe is blocked only when both the wavelength filter and the
/// photon-number splitter are installed.
pub fn trojan(countermeasures: &TrojanCountermeasures) -> TrojanVerdict {
    if countermeasures.wavelength_filter && countermeasures.photon_number_splitter {
        TrojanVerdict::Blocked
    } else {
        TrojanVerdict::UndetectedByAssumption
    }
}
