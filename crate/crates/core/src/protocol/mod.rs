//! The three-ring key agreement: data types, joint-state store, ring steps and
//! the full run.

mod keys;
mod ring;
mod run;
mod store;
mod types;

pub use keys::{derive_final, generate_subkey, restructure_key, verify_sample};
pub use ring::{
    apply_channel_noise, check_decoys, decode, encode, insert_decoys, insert_singles, prepare_ring, DecoyCheck, Slot,
    SlotKind, TravelSequence,
};
pub use run::{run_protocol, run_protocol_with_subkeys, AbortStage, HopReport, RunRecord};
pub use store::{QuantumStore, QubitId};
pub use types::{
    final_key_len, Announcement, BitString, DecoyRecord, DerivedKey, HopId, Participant, ProtocolParams, SubKey,
    TrojanCountermeasures, DEFAULT_QBER_THRESHOLD, MAX_FLIP_PROB,
};
