//! Orchestration of all three rings through one protocol execution.
//!
//! Rings advance in lock-step, one step at a time and in ring order A, B, C, so
//! that the first failing decoy check (in that order) ends the run. Every random
//! choice draws from its own [`Stream`], which makes the record a pure function
//! of the parameters and the attack.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::adversary::{
    entangle_measure, inside_collusion, intercept_resend, measure_resend, trojan, AttackDescriptor, AttackKind,
    EveRecord, UNIFORM_RESEND,
};
use crate::error::{QkaError, Result};
use crate::protocol::keys::{derive_final, generate_subkey, restructure_key, verify_sample};
use crate::protocol::ring::{
    apply_channel_noise, check_decoys, decode, encode, insert_decoys, insert_singles, prepare_ring, TravelSequence,
};
use crate::protocol::store::{QuantumStore, QubitId};
use crate::protocol::types::{Announcement, DerivedKey, HopId, Participant, ProtocolParams, SubKey};
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopReport {
    pub hop: HopId,
    /// Photons put on the channel, decoys included.
    pub photons_sent: usize,
    pub decoys: usize,
    pub errors: usize,
    /// `None` when the run aborted before this hop was checked.
    pub error_rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "stage")]
pub enum AbortStage {
    DecoyCheck { hop: HopId },
    KeyCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub params: ProtocolParams,
    pub attack: Option<AttackDescriptor>,
    pub subkeys: Vec<SubKey>,
    pub announcements: Vec<Announcement>,
    /// All nine hops in ring-major order.
    pub hops: Vec<HopReport>,
    pub aborted: bool,
    pub abort_stage: Option<AbortStage>,
    pub union_positions: Vec<usize>,
    pub derived_keys: Vec<DerivedKey>,
    pub check_positions: Vec<usize>,
    pub check_passed: bool,
    /// Total photon transmission events over all hops.
    pub transmissions: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eve: Option<EveRecord>,
}

impl RunRecord {
    pub fn hop(&self, hop: HopId) -> &HopReport {
        &self.hops[hop.index()]
    }

    /// The common final key, when all derived keys agree in full.
    pub fn agreed_key(&self) -> Option<&DerivedKey> {
        let first = self.derived_keys.first()?;
        (self.derived_keys.len() == 3 && self.derived_keys.iter().all(|k| k.bits == first.bits)).then_some(first)
    }

    pub fn aborted_at_decoy_check(&self) -> bool {
        matches!(self.abort_stage, Some(AbortStage::DecoyCheck { .. }))
    }
}

struct Ring {
    seq: TravelSequence,
    home: Vec<QubitId>,
    pending: Option<crate::protocol::types::DecoyRecord>,
}

struct Run<'a> {
    params: &'a ProtocolParams,
    attack: Option<&'a AttackDescriptor>,
    store: QuantumStore,
    rings: Vec<Ring>,
    record: RunRecord,
}

impl Run<'_> {
    fn hop(ring: Participant, leg: u8) -> HopId {
        HopId::new(ring, leg).expect("legs 1..=3")
    }

    fn subkey(&self, p: Participant) -> &SubKey {
        &self.record.subkeys[p.index()]
    }

    fn eve(&mut self) -> &mut EveRecord {
        let kind = self.attack.expect("attack present").kind;
        self.record.eve.get_or_insert_with(|| EveRecord::new(kind))
    }

    // Sender adds fresh decoys and puts the sequence on the channel.
    fn transmit(&mut self, ring: Participant, leg: u8) -> Result<()> {
        let hop = Self::hop(ring, leg);
        let seed = self.params.seed;
        let r = &mut self.rings[ring.index()];
        r.pending = Some(insert_decoys(
            &mut self.store,
            &mut r.seq,
            self.params.decoy_count,
            &mut Stream::DecoyPrep(hop).rng(seed),
        ));
        let sent = r.seq.len();
        let report = &mut self.record.hops[hop.index()];
        report.photons_sent = sent;
        report.decoys = self.params.decoy_count;
        self.record.transmissions += sent;

        if let Some(attack) = self.attack.filter(|a| a.targets(hop)) {
            let mut rng = Stream::Eve(hop).rng(seed);
            let r = &mut self.rings[ring.index()];
            let capture = match attack.kind {
                AttackKind::InterceptResend => {
                    let dist = attack.resend_distribution.unwrap_or(UNIFORM_RESEND);
                    Some(intercept_resend(&mut self.store, &mut r.seq, hop, &dist, &mut rng)?)
                }
                AttackKind::MeasureResend => Some(measure_resend(&mut self.store, &r.seq, hop, &mut rng)?),
                AttackKind::EntangleMeasure => {
                    let u = attack
                        .eve_unitary
                        .as_ref()
                        .ok_or_else(|| QkaError::rejected("entangle-measure needs eve_unitary"))?;
                    Some(entangle_measure(&mut self.store, &r.seq, hop, u, &mut rng)?)
                }
                AttackKind::Trojan => {
                    let verdict = trojan(&self.params.trojan_countermeasures);
                    self.eve().trojan = Some(verdict);
                    None
                }
                AttackKind::InsideCollusion => None,
            };
            if let Some(c) = capture {
                self.eve().hops.push(c);
            }
        }

        let r = &mut self.rings[ring.index()];
        apply_channel_noise(
            &mut self.store,
            &r.seq,
            self.params.channel_flip_prob,
            &mut Stream::Channel(hop).rng(seed),
        )
    }

    // Receivers of leg `leg` check their decoys in ring order; true means abort.
    fn check(&mut self, leg: u8) -> Result<bool> {
        for ring in Participant::ALL {
            let hop = Self::hop(ring, leg);
            let r = &mut self.rings[ring.index()];
            let pending = r.pending.take().ok_or_else(|| QkaError::internal("no decoys in flight"))?;
            let check = check_decoys(
                &mut self.store,
                &mut r.seq,
                &pending,
                &mut Stream::DecoyCheck(hop).rng(self.params.seed),
            )?;
            let report = &mut self.record.hops[hop.index()];
            report.errors = check.errors;
            report.error_rate = Some(check.error_rate);
            if check.error_rate > self.params.qber_threshold {
                self.record.aborted = true;
                self.record.abort_stage = Some(AbortStage::DecoyCheck { hop });
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn execute(&mut self) -> Result<()> {
        let p = self.params;
        // Prepare all rings; first leg.
        for ring in Participant::ALL {
            let (seq, home) = prepare_ring(&mut self.store, ring, p.m);
            self.rings.push(Ring { seq, home, pending: None });
            self.transmit(ring, 1)?;
        }
        // First decoy check.
        if self.check(1)? {
            return Ok(());
        }
        // Insert singles, first encoding; second leg.
        for ring in Participant::ALL {
            let r = &mut self.rings[ring.index()];
            let ann = insert_singles(&mut self.store, &mut r.seq, p.l, &mut Stream::Insertion(ring).rng(p.seed))?;
            self.record.announcements.push(ann);
            let key = self.subkey(ring.route()[1]).clone();
            encode(&mut self.store, &self.rings[ring.index()].seq, &key)?;
            self.transmit(ring, 2)?;
        }
        // Second decoy check.
        if self.check(2)? {
            return Ok(());
        }
        // Second encoding; third leg.
        let collusion_ring = self
            .attack
            .filter(|a| a.kind == AttackKind::InsideCollusion)
            .and_then(|a| a.collusion_ring());
        for ring in Participant::ALL {
            if collusion_ring == Some(ring) {
                let attack = self.attack.expect("collusion ring implies an attack");
                let honest = self.subkey(ring.route()[1]).clone();
                let actual = self.record.announcements[ring.index()].clone();
                let r = &mut self.rings[ring.index()];
                let outcome = inside_collusion(
                    &mut self.store,
                    &mut r.seq,
                    &mut r.home,
                    attack,
                    &actual,
                    &honest,
                    &mut Stream::Collusion(ring).rng(p.seed),
                )?;
                let eve = self.eve();
                eve.collusion = Some(outcome.report);
                eve.inferred_key_guess = Some(outcome.key_guess);
                eve.bits_correct_beyond_chance = Some(outcome.bits_correct_beyond_chance);
            }
            let key = self.subkey(ring.route()[2]).clone();
            encode(&mut self.store, &self.rings[ring.index()].seq, &key)?;
            self.transmit(ring, 3)?;
        }
        // Third decoy check.
        if self.check(3)? {
            return Ok(());
        }
        let mut union: Vec<usize> = self
            .record
            .announcements
            .iter()
            .flat_map(|a| a.single_positions.iter().copied())
            .collect();
        union.sort_unstable();
        union.dedup();
        // Announce, decode, derive, sample check.
        for ring in Participant::ALL {
            let own = self.record.announcements[ring.index()].single_positions.clone();
            let r = &self.rings[ring.index()];
            let k_prime = decode(
                &mut self.store,
                &r.home,
                &r.seq,
                &own,
                &union,
                &mut Stream::Decode(ring).rng(p.seed),
            )?;
            let k_star = restructure_key(self.subkey(ring), &union);
            self.record.derived_keys.push(derive_final(ring, &k_star, &k_prime)?);
        }
        let final_len = self.record.derived_keys[0].bits.len();
        let mut positions = sample(
            &mut Stream::Sample.rng(p.seed),
            final_len,
            p.sample_size_for(final_len),
        )
        .into_vec();
        positions.sort_unstable();
        self.record.check_passed = verify_sample(&self.record.derived_keys, &positions);
        self.record.check_positions = positions;
        self.record.union_positions = union;
        if !self.record.check_passed {
            self.record.aborted = true;
            self.record.abort_stage = Some(AbortStage::KeyCheck);
        }
        Ok(())
    }
}

/// Runs Steps 1-7 on all three rings. Detected attacks end in an aborted record,
/// never in an error; errors signal invalid parameters or descriptors.
pub fn run_protocol(params: &ProtocolParams, attack: Option<&AttackDescriptor>) -> Result<RunRecord> {
    let subkeys = Participant::ALL.map(|p| generate_subkey(&mut Stream::SubKey(p).rng(params.seed), p, params.n()));
    run_protocol_with_subkeys(params, attack, subkeys)
}

/// [`run_protocol`] with caller-chosen sub-keys (Alice, Bob, Charlie order). All
/// other randomness still comes from `params.seed`, so two calls differing only
/// in the sub-keys are paired runs.
pub fn run_protocol_with_subkeys(
    params: &ProtocolParams,
    attack: Option<&AttackDescriptor>,
    subkeys: [SubKey; 3],
) -> Result<RunRecord> {
    params.validate()?;
    if let Some(a) = attack {
        a.validate()?;
    }
    for (k, p) in subkeys.iter().zip(Participant::ALL) {
        if k.owner != p || k.groups.len() != params.n() {
            return Err(QkaError::rejected(format!(
                "sub-key {} must belong to {p} and hold n = {} groups",
                k.owner,
                params.n()
            )));
        }
    }
    let hops = HopId::all()
        .map(|hop| HopReport { hop, photons_sent: 0, decoys: 0, errors: 0, error_rate: None })
        .collect();
    let mut run = Run {
        params,
        attack,
        store: QuantumStore::new(),
        rings: Vec::with_capacity(3),
        record: RunRecord {
            params: params.clone(),
            attack: attack.cloned(),
            subkeys: subkeys.to_vec(),
            announcements: Vec::with_capacity(3),
            hops,
            aborted: false,
            abort_stage: None,
            union_positions: Vec::new(),
            derived_keys: Vec::new(),
            check_positions: Vec::new(),
            check_passed: false,
            transmissions: 0,
            eve: None,
        },
    };
    if let Some(a) = attack {
        run.record.eve = Some(EveRecord::new(a.kind));
    }
    run.execute()?;
    Ok(run.record)
}
