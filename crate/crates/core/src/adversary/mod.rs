//! Attacks attachable to channel hops.
//!
//! Outside attacks (intercept-resend, measure-resend, entangle-measure, Trojan
//! horse) act on every photon of a targeted hop, since Eve cannot tell decoys
//! from payload. The inside attack is a collusion between a ring's preparer and
//! its second encoder against the honest first encoder.

mod inside;
mod outside;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{QkaError, Result};
use crate::protocol::{BitString, HopId, Participant};
use crate::qcore::{BasisKind, StateLabel};
use crate::Unitary;

pub use inside::{inside_collusion, CollusionOutcome};
pub use outside::{entangle_measure, intercept_resend, measure_resend, predicted_decoy_error, trojan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    InterceptResend,
    MeasureResend,
    EntangleMeasure,
    Trojan,
    InsideCollusion,
}

impl AttackKind {
    fn as_str(self) -> &'static str {
        match self {
            AttackKind::InterceptResend => "intercept-resend",
            AttackKind::MeasureResend => "measure-resend",
            AttackKind::EntangleMeasure => "entangle-measure",
            AttackKind::Trojan => "trojan",
            AttackKind::InsideCollusion => "inside-collusion",
        }
    }

    pub fn is_outside(self) -> bool {
        self != AttackKind::InsideCollusion
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttackKind {
    type Err = QkaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "intercept-resend" => Ok(AttackKind::InterceptResend),
            "measure-resend" => Ok(AttackKind::MeasureResend),
            "entangle-measure" => Ok(AttackKind::EntangleMeasure),
            "trojan" => Ok(AttackKind::Trojan),
            "inside-collusion" => Ok(AttackKind::InsideCollusion),
            _ => Err(QkaError::rejected(format!("unknown attack kind '{s}'"))),
        }
    }
}

/// How colluders pair the received payload with their retained home qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CollusionStrategy {
    /// Pair payload index `i` with home qubit `i`, treating the last `l` slots as singles.
    NaiveAlign,
    /// Guess the `l` insertion positions uniformly at random.
    #[default]
    RandomPairing,
}

impl FromStr for CollusionStrategy {
    type Err = QkaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "naive-align" => Ok(CollusionStrategy::NaiveAlign),
            "random-pairing" => Ok(CollusionStrategy::RandomPairing),
            _ => Err(QkaError::rejected(format!("unknown collusion strategy '{s}'"))),
        }
    }
}

/// Eve's resend distribution over `|0⟩, |1⟩, |+⟩, |−⟩` when none is configured.
pub const UNIFORM_RESEND: [f64; 4] = [0.25; 4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackDescriptor {
    pub kind: AttackKind,
    pub target_hops: Vec<HopId>,
    pub eve_unitary: Option<Unitary>,
    pub colluders: Option<[Participant; 2]>,
    pub strategy: Option<CollusionStrategy>,
    pub resend_distribution: Option<[f64; 4]>,
}

impl AttackDescriptor {
    fn outside(kind: AttackKind, hops: &[HopId]) -> Self {
        let mut target_hops = hops.to_vec();
        target_hops.sort_unstable();
        target_hops.dedup();
        AttackDescriptor {
            kind,
            target_hops,
            eve_unitary: None,
            colluders: None,
            strategy: None,
            resend_distribution: None,
        }
    }

    pub fn intercept_resend(hops: &[HopId]) -> Self {
        Self::outside(AttackKind::InterceptResend, hops)
    }

    pub fn measure_resend(hops: &[HopId]) -> Self {
        Self::outside(AttackKind::MeasureResend, hops)
    }

    pub fn entangle_measure(hops: &[HopId], unitary: Unitary) -> Self {
        AttackDescriptor {
            eve_unitary: Some(unitary),
            ..Self::outside(AttackKind::EntangleMeasure, hops)
        }
    }

    pub fn trojan(hops: &[HopId]) -> Self {
        Self::outside(AttackKind::Trojan, hops)
    }

    pub fn inside_collusion(colluders: [Participant; 2], strategy: CollusionStrategy) -> Self {
        AttackDescriptor {
            colluders: Some(colluders),
            strategy: Some(strategy),
            ..Self::outside(AttackKind::InsideCollusion, &[])
        }
    }

    pub fn validate(&self) -> Result<()> {
        let is = |k| self.kind == k;
        if self.eve_unitary.is_some() != is(AttackKind::EntangleMeasure) {
            return Err(QkaError::rejected("eve_unitary is required for, and only for, entangle-measure"));
        }
        if let Some(u) = &self.eve_unitary {
            u.ensure_unitary()?;
        }
        if self.colluders.is_some() != is(AttackKind::InsideCollusion) {
            return Err(QkaError::rejected("colluders are required for, and only for, inside-collusion"));
        }
        if self.strategy.is_some() && !is(AttackKind::InsideCollusion) {
            return Err(QkaError::rejected("a collusion strategy only applies to inside-collusion"));
        }
        if let Some([a, b]) = self.colluders {
            if a == b {
                return Err(QkaError::rejected(format!("colluders must be two different participants, got {a} twice")));
            }
        }
        if let Some(dist) = &self.resend_distribution {
            if !is(AttackKind::InterceptResend) {
                return Err(QkaError::rejected("resend_distribution only applies to intercept-resend"));
            }
            let sum: f64 = dist.iter().sum();
            if dist.iter().any(|p| !(0.0..=1.0).contains(p)) || (sum - 1.0).abs() > 1e-9 {
                return Err(QkaError::rejected(format!("resend_distribution {dist:?} is not a probability vector")));
            }
        }
        if self.kind.is_outside() && self.target_hops.is_empty() {
            return Err(QkaError::rejected(format!("{} needs at least one target hop", self.kind)));
        }
        if !self.kind.is_outside() && !self.target_hops.is_empty() {
            return Err(QkaError::rejected("inside-collusion acts at the second encoder, not on hops"));
        }
        Ok(())
    }

    pub fn targets(&self, hop: HopId) -> bool {
        self.target_hops.contains(&hop)
    }

    /// Ring attacked by the colluders: the one they prepare and encode second.
    pub fn collusion_ring(&self) -> Option<Participant> {
        let [a, b] = self.colluders?;
        Participant::ALL.into_iter().find(|r| {
            let route = r.route();
            (route[0] == a && route[2] == b) || (route[0] == b && route[2] == a)
        })
    }
}

/// What Eve (or the colluders) did to one photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capture {
    /// Slot index within the hop's transmitted sequence.
    pub position: usize,
    pub basis: BasisKind,
    /// Outcome of Eve's measurement (of the photon, or of her ancilla for entangle-measure).
    pub bit: bool,
    pub resent: Option<StateLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HopCapture {
    pub hop: HopId,
    pub captures: Vec<Capture>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrojanVerdict {
    Blocked,
    UndetectedByAssumption,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollusionReport {
    pub ring: Participant,
    pub colluders: [Participant; 2],
    pub honest: Participant,
    pub strategy: CollusionStrategy,
    pub guessed_positions: Vec<usize>,
    pub actual_positions: Vec<usize>,
    pub positions_recovered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EveRecord {
    pub kind: AttackKind,
    pub hops: Vec<HopCapture>,
    pub trojan: Option<TrojanVerdict>,
    pub collusion: Option<CollusionReport>,
    pub inferred_key_guess: Option<BitString>,
    /// Fraction of guessed key bits that are correct, minus the 1/2 chance level.
    pub bits_correct_beyond_chance: Option<f64>,
}

impl EveRecord {
    pub fn new(kind: AttackKind) -> Self {
        EveRecord {
            kind,
            hops: Vec::new(),
            trojan: None,
            collusion: None,
            inferred_key_guess: None,
            bits_correct_beyond_chance: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hop(s: &str) -> HopId {
        s.parse().unwrap()
    }

    #[test]
    fn descriptor_invariants() {
        assert!(AttackDescriptor::intercept_resend(&[hop("A1")]).validate().is_ok());
        assert!(AttackDescriptor::intercept_resend(&[]).validate().is_err());
        assert!(AttackDescriptor::entangle_measure(&[hop("B2")], Unitary::cnot()).validate().is_ok());

        let mut bad = AttackDescriptor::measure_resend(&[hop("A1")]);
        bad.eve_unitary = Some(Unitary::identity());
        assert!(bad.validate().is_err());

        let mut bad = AttackDescriptor::entangle_measure(&[hop("A1")], Unitary::identity());
        bad.eve_unitary.as_mut().unwrap().0[0][1].re = 0.3;
        assert!(matches!(bad.validate(), Err(QkaError::NonUnitary { .. })));

        use Participant::*;
        let ok = AttackDescriptor::inside_collusion([Alice, Charlie], CollusionStrategy::NaiveAlign);
        assert!(ok.validate().is_ok());
        let bad = AttackDescriptor::inside_collusion([Bob, Bob], CollusionStrategy::NaiveAlign);
        assert!(bad.validate().unwrap_err().to_string().contains("different"));

        let mut bad = AttackDescriptor::intercept_resend(&[hop("A1")]);
        bad.resend_distribution = Some([0.5, 0.5, 0.5, 0.0]);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn collusion_ring_is_prepared_by_a_colluder() {
        use Participant::*;
        let ring = |a, b| AttackDescriptor::inside_collusion([a, b], CollusionStrategy::RandomPairing).collusion_ring();
        assert_eq!(ring(Alice, Charlie), Some(Alice));
        assert_eq!(ring(Charlie, Alice), Some(Alice));
        assert_eq!(ring(Bob, Alice), Some(Bob));
        assert_eq!(ring(Charlie, Bob), Some(Charlie));
    }

    #[test]
    fn hops_are_sorted_and_unique() {
        let d = AttackDescriptor::measure_resend(&[hop("C2"), hop("A1"), hop("C2")]);
        assert_eq!(d.target_hops, vec![hop("A1"), hop("C2")]);
        assert!(d.targets(hop("C2")) && !d.targets(hop("B1")));
    }

    #[test]
    fn kind_names_round_trip() {
        for k in [
            AttackKind::InterceptResend,
            AttackKind::MeasureResend,
            AttackKind::EntangleMeasure,
            AttackKind::Trojan,
            AttackKind::InsideCollusion,
        ] {
            assert_eq!(k.to_string().parse::<AttackKind>().unwrap(), k);
        }
        assert!("eavesdrop".parse::<AttackKind>().is_err());
    }

    #[test]
    fn descriptor_json_round_trip() {
        let d = AttackDescriptor::entangle_measure(&[hop("A2")], Unitary::cnot());
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(serde_json::from_str::<AttackDescriptor>(&json).unwrap(), d);
    }
}
