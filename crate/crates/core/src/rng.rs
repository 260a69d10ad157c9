//! Deterministic random substreams.
//!
//! Every random decision in a run draws from a ChaCha8 stream seeded by
//! `derive_seed(master, labels)`, where the labels name the ring, protocol step
//! and role. Streams never share state, so the order in which rings or trials
//! execute cannot change any outcome.
//!
//! `derive_seed` folds the labels through the SplitMix64 finalizer:
//! `h0 = mix(master ^ 0x51_7C_C1_B7_27_22_0A_95)`, `h(i+1) = mix(h(i) ^ mix(label_i + 0x9E37_79B9_7F4A_7C15))`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::protocol::{HopId, Participant};

const SEED_SALT: u64 = 0x517C_C1B7_2722_0A95;
const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(mix(master ^ SEED_SALT), |h, &label| {
        mix(h ^ mix(label.wrapping_add(GOLDEN_GAMMA)))
    })
}

pub fn substream(master: u64, labels: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, labels))
}

/// Named (ring, step, role) slots for one protocol run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    SubKey(Participant),
    DecoyPrep(HopId),
    Channel(HopId),
    Eve(HopId),
    DecoyCheck(HopId),
    Insertion(Participant),
    Collusion(Participant),
    Decode(Participant),
    Sample,
}

impl Stream {
    fn labels(self) -> [u64; 3] {
        let hop = |h: HopId| [h.ring.index() as u64, h.leg as u64];
        match self {
            Stream::SubKey(p) => [p.index() as u64, 0, 1],
            Stream::DecoyPrep(h) => [hop(h)[0], hop(h)[1], 2],
            Stream::Channel(h) => [hop(h)[0], hop(h)[1], 3],
            Stream::Eve(h) => [hop(h)[0], hop(h)[1], 4],
            Stream::DecoyCheck(h) => [hop(h)[0], hop(h)[1], 5],
            Stream::Insertion(r) => [r.index() as u64, 3, 6],
            Stream::Collusion(r) => [r.index() as u64, 5, 7],
            Stream::Decode(r) => [r.index() as u64, 7, 8],
            Stream::Sample => [3, 6, 9],
        }
    }

    pub fn rng(self, master: u64) -> ChaCha8Rng {
        substream(master, &self.labels())
    }
}
