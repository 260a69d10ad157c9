use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{QkaError, Result};
use crate::qcore::{BasisKind, PauliCode, StateLabel};

/// One of the three parties. A ring is named after the participant who prepares it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Participant {
    #[serde(rename = "A")]
    Alice,
    #[serde(rename = "B")]
    Bob,
    #[serde(rename = "C")]
    Charlie,
}

impl Participant {
    pub const ALL: [Participant; 3] = [Participant::Alice, Participant::Bob, Participant::Charlie];

    pub fn index(self) -> usize {
        self as usize
    }

    fn next(self) -> Participant {
        Self::ALL[(self.index() + 1) % 3]
    }

    /// Route of the ring prepared by `self`: preparer, first encoder, second encoder.
    /// Ring A runs Alice → Bob → Charlie → Alice, and so on cyclically.
    pub fn route(self) -> [Participant; 3] {
        [self, self.next(), self.next().next()]
    }

    /// First encoder, who also inserts the single photons on this ring.
    pub fn inserter(self) -> Participant {
        self.next()
    }

    pub fn letter(self) -> char {
        ['A', 'B', 'C'][self.index()]
    }
}

impl fmt::Display for Participant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Participant {
    type Err = QkaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" | "alice" => Ok(Participant::Alice),
            "b" | "bob" => Ok(Participant::Bob),
            "c" | "charlie" => Ok(Participant::Charlie),
            _ => Err(QkaError::rejected(format!("unknown participant '{s}'"))),
        }
    }
}

/// A channel hop: ring plus leg 1..=3 (preparer → first encoder → second encoder → preparer).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HopId {
    pub ring: Participant,
    pub leg: u8,
}

impl HopId {
    pub fn new(ring: Participant, leg: u8) -> Result<Self> {
        if !(1..=3).contains(&leg) {
            return Err(QkaError::rejected(format!("hop leg {leg} is outside 1..=3")));
        }
        Ok(HopId { ring, leg })
    }

    /// The nine hops in ring-major order: A1, A2, A3, B1, ..., C3.
    pub fn all() -> impl Iterator<Item = HopId> {
        Participant::ALL
            .into_iter()
            .flat_map(|ring| (1..=3).map(move |leg| HopId { ring, leg }))
    }

    /// Position in [`HopId::all`].
    pub fn index(self) -> usize {
        self.ring.index() * 3 + (self.leg as usize - 1)
    }

    pub fn sender(self) -> Participant {
        self.ring.route()[self.leg as usize - 1]
    }

    pub fn receiver(self) -> Participant {
        self.ring.route()[self.leg as usize % 3]
    }
}

impl fmt::Display for HopId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.ring, self.leg)
    }
}

impl FromStr for HopId {
    type Err = QkaError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || QkaError::rejected(format!("invalid hop id '{s}' (expected A1..C3)"));
        let mut chars = s.chars();
        let (Some(r), Some(l), None) = (chars.next(), chars.next(), chars.next()) else {
            return Err(bad());
        };
        let ring = r.to_string().parse().map_err(|_| bad())?;
        let leg = l.to_digit(10).ok_or_else(bad)? as u8;
        HopId::new(ring, leg).map_err(|_| bad())
    }
}

impl Serialize for HopId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HopId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Bit sequence that serializes as a `'0'`/`'1'` string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString(pub Vec<bool>);

impl BitString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        if self.len() != other.len() {
            return Err(QkaError::rejected(format!(
                "bit strings of lengths {} and {} cannot be combined",
                self.len(),
                other.len()
            )));
        }
        Ok(BitString(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect()))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = QkaError;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(QkaError::rejected(format!("'{other}' is not a bit"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TrojanCountermeasures {
    pub wavelength_filter: bool,
    pub photon_number_splitter: bool,
}

pub const DEFAULT_QBER_THRESHOLD: f64 = 0.10;
/// Largest decoy error rate a depolarizing channel can produce.
pub const MAX_FLIP_PROB: f64 = 2.0 / 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Bell pairs prepared per ring.
    pub m: usize,
    /// Single photons inserted per ring by its first encoder.
    pub l: usize,
    /// Decoy photons added on every hop.
    pub decoy_count: usize,
    pub qber_threshold: f64,
    /// Bits sampled by the final correctness check; `None` means 10% of the final key, rounded up.
    pub check_sample_size: Option<usize>,
    pub seed: u64,
    /// Per-photon decoy error probability of the depolarizing channel noise.
    pub channel_flip_prob: f64,
    pub trojan_countermeasures: TrojanCountermeasures,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        ProtocolParams {
            m: 8,
            l: 2,
            decoy_count: 16,
            qber_threshold: DEFAULT_QBER_THRESHOLD,
            check_sample_size: None,
            seed: 0,
            channel_flip_prob: 0.0,
            trojan_countermeasures: TrojanCountermeasures::default(),
        }
    }
}

impl ProtocolParams {
    /// Payload length per ring, `m + l`.
    pub fn n(&self) -> usize {
        self.m + self.l
    }

    /// Shortest possible final key: every position of every ring's insertions is distinct.
    pub fn min_final_key_len(&self) -> usize {
        let n = self.n();
        2 * n - n.min(3 * self.l)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(QkaError::rejected("m must satisfy m >= 1"));
        }
        if !(0.0..=1.0).contains(&self.qber_threshold) {
            return Err(QkaError::rejected(format!(
                "qber_threshold {} must lie in [0, 1]",
                self.qber_threshold
            )));
        }
        if !(0.0..=MAX_FLIP_PROB).contains(&self.channel_flip_prob) {
            return Err(QkaError::rejected(format!(
                "channel_flip_prob {} must lie in [0, 2/3]",
                self.channel_flip_prob
            )));
        }
        if let Some(size) = self.check_sample_size {
            if size > self.min_final_key_len() {
                return Err(QkaError::rejected(format!(
                    "check_sample_size {size} exceeds the shortest possible final key ({})",
                    self.min_final_key_len()
                )));
            }
        }
        Ok(())
    }

    pub fn sample_size_for(&self, final_len: usize) -> usize {
        self.check_sample_size
            .unwrap_or_else(|| final_len.div_ceil(10))
            .min(final_len)
    }
}

/// A participant's secret: `n` two-bit groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubKey {
    pub owner: Participant,
    #[serde(with = "groups_as_bits")]
    pub groups: Vec<PauliCode>,
}

impl SubKey {
    pub fn bits(&self) -> BitString {
        BitString(self.groups.iter().flat_map(|g| [g.x_bit(), g.z_bit()]).collect())
    }
}

mod groups_as_bits {
    use super::*;

    pub fn serialize<S: Serializer>(groups: &[PauliCode], serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let s: String = groups.iter().map(|g| g.to_string()).collect();
        serializer.serialize_str(&s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Vec<PauliCode>, D::Error> {
        let bits: BitString = BitString::deserialize(deserializer)?;
        if !bits.len().is_multiple_of(2) {
            return Err(serde::de::Error::custom("sub-key bit string has odd length"));
        }
        Ok(bits.0.chunks(2).map(|p| PauliCode::from_bits(p[0], p[1])).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoyRecord {
    pub positions: Vec<usize>,
    pub states: Vec<StateLabel>,
    pub bases: Vec<BasisKind>,
}

/// Positions of the single photons inserted on a ring, published after the last decoy check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Announcement {
    pub ring: Participant,
    pub inserter: Participant,
    pub single_positions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedKey {
    pub source: Participant,
    pub bits: BitString,
}

/// Length of the final key when `union_size` positions are reduced to one bit.
pub fn final_key_len(n: usize, union_size: usize) -> usize {
    2 * (n - union_size) + union_size
}
