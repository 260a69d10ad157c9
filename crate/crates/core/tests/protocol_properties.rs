use proptest::prelude::*;
use qka_core::adversary::{AttackDescriptor, CollusionStrategy};
use qka_core::analysis::{run_experiment, ExperimentPlan};
use qka_core::protocol::{
    final_key_len, restructure_key, run_protocol, run_protocol_with_subkeys, AbortStage, BitString, HopId,
    Participant, ProtocolParams, RunRecord, SubKey,
};
use qka_core::qcore::PauliCode;

fn params(m: usize, l: usize, decoys: usize, seed: u64) -> ProtocolParams {
    ProtocolParams { m, l, decoy_count: decoys, seed, ..ProtocolParams::default() }
}

fn honest(p: &ProtocolParams) -> RunRecord {
    run_protocol(p, None).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn honest_runs_agree(m in 1usize..=16, l in 0usize..=4, seed in any::<u64>()) {
        let rec = honest(&params(m, l, 4, seed));
        prop_assert!(!rec.aborted);
        let key = rec.agreed_key().expect("three identical keys");
        prop_assert_eq!(key.bits.len(), final_key_len(m + l, rec.union_positions.len()));
    }

    #[test]
    fn final_key_is_restructured_group_sum(m in 1usize..=8, l in 0usize..=3, seed in any::<u64>()) {
        let rec = honest(&params(m, l, 2, seed));
        let groups = (0..m + l)
            .map(|i| rec.subkeys.iter().fold(PauliCode::I, |acc, k| acc.compose(k.groups[i])))
            .collect();
        let sum = SubKey { owner: Participant::Alice, groups };
        prop_assert_eq!(&rec.agreed_key().unwrap().bits, &restructure_key(&sum, &rec.union_positions));
    }

    #[test]
    fn single_group_change_moves_exactly_its_bits(
        seed in any::<u64>(),
        who in 0usize..3,
        pos in 0usize..6,
        flip in 1u8..4,
    ) {
        let p = params(4, 2, 2, seed);
        let base = honest(&p);
        let mut keys: [SubKey; 3] = base.subkeys.clone().try_into().unwrap();
        let delta = PauliCode::new(flip).unwrap();
        keys[who].groups[pos] = keys[who].groups[pos].compose(delta);
        let paired = run_protocol_with_subkeys(&p, None, keys).unwrap();
        prop_assert_eq!(&paired.union_positions, &base.union_positions);

        let before = base.agreed_key().unwrap().bits.bits().to_vec();
        let after = paired.agreed_key().unwrap().bits.bits().to_vec();
        let changed: Vec<usize> = (0..before.len()).filter(|&i| before[i] != after[i]).collect();

        let union = &base.union_positions;
        let expected: Vec<usize> = match union.binary_search(&pos) {
            Ok(u) => {
                if delta.x_bit() {
                    vec![2 * (6 - union.len()) + u]
                } else {
                    vec![]
                }
            }
            Err(before_pos) => {
                let slot = 2 * (pos - before_pos);
                [(slot, delta.x_bit()), (slot + 1, delta.z_bit())]
                    .into_iter()
                    .filter(|&(_, f)| f)
                    .map(|(i, _)| i)
                    .collect()
            }
        };
        prop_assert_eq!(changed, expected);
    }
}

#[test]
fn one_subkey_leaves_the_others_open() {
    // n = 2. Alice knows her sub-key, the public announcements and the final key
    // (her K* ⊕ K′). Every Bob sub-key remains consistent with some Charlie sub-key.
    let rec = honest(&params(1, 1, 2, 2024));
    let alice = &rec.subkeys[0];
    let key = &rec.agreed_key().unwrap().bits;
    let union = &rec.union_positions;
    let all_keys: Vec<Vec<PauliCode>> = (0..16u8)
        .map(|v| vec![PauliCode::new(v >> 2).unwrap(), PauliCode::new(v & 3).unwrap()])
        .collect();
    let mut consistent = Vec::new();
    for b in &all_keys {
        for c in &all_keys {
            let groups = (0..2).map(|i| alice.groups[i].compose(b[i]).compose(c[i])).collect();
            let sum = SubKey { owner: Participant::Alice, groups };
            if &restructure_key(&sum, union) == key {
                consistent.push((b.clone(), c.clone()));
            }
        }
    }
    let mut bobs: Vec<_> = consistent.iter().map(|(b, _)| b.clone()).collect();
    bobs.sort_by_key(|k| (k[0].bits(), k[1].bits()));
    bobs.dedup();
    assert!(consistent.len() >= 16, "{} completions", consistent.len());
    assert_eq!(bobs.len(), 16);
    assert!(consistent.contains(&(rec.subkeys[1].groups.clone(), rec.subkeys[2].groups.clone())));
}

#[test]
fn detected_runs_produce_no_keys() {
    for hop in HopId::all() {
        let attack = AttackDescriptor::intercept_resend(&[hop]);
        for seed in 0..20 {
            let rec = run_protocol(&params(4, 1, 12, seed), Some(&attack)).unwrap();
            let over = rec.hops.iter().any(|h| h.error_rate.is_some_and(|r| r > 0.1));
            assert_eq!(over, rec.aborted_at_decoy_check());
            if over {
                assert!(rec.derived_keys.is_empty() && rec.aborted);
                assert_eq!(rec.abort_stage, Some(AbortStage::DecoyCheck { hop }));
            }
        }
    }
}

#[test]
fn records_are_byte_identical() {
    let attack = AttackDescriptor::entangle_measure(&["B2".parse().unwrap()], qka_core::Unitary::cnot());
    let p = ProtocolParams { channel_flip_prob: 0.05, ..params(6, 2, 10, 77) };
    let a = serde_json::to_vec(&run_protocol(&p, Some(&attack)).unwrap()).unwrap();
    let b = serde_json::to_vec(&run_protocol(&p, Some(&attack)).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn noise_rate_matches_flip_probability() {
    for flip in [0.02, 0.089] {
        let base = ProtocolParams { channel_flip_prob: flip, ..params(4, 1, 50, 31) };
        let result = run_experiment(&ExperimentPlan::new(base, None, 100), 0).unwrap();
        let point = &result.points[0];
        let decoys: usize = point.hops.iter().map(|h| h.decoys).sum();
        assert!(decoys >= 10_000, "{decoys}");
        let qber = point.mean_qber.unwrap();
        assert!((qber - flip).abs() < 0.01, "{flip}: {qber}");
    }
}

#[test]
fn misaligned_collusion_is_caught_by_the_key_check() {
    let attack = AttackDescriptor::inside_collusion(
        [Participant::Alice, Participant::Charlie],
        CollusionStrategy::NaiveAlign,
    );
    let result = run_experiment(&ExperimentPlan::new(params(8, 2, 4, 8), Some(attack), 1000), 0).unwrap();
    let point = &result.points[0];
    assert_eq!(point.detections, 0);
    assert!(point.key_check_failure_rate > 0.0);
}

#[test]
fn honest_transcripts_round_trip() {
    let rec = honest(&params(3, 1, 2, 5));
    let json = serde_json::to_string(&rec).unwrap();
    assert!(json.contains("\"groups\":\"") && !json.contains("\"eve\""));
    let back: RunRecord = serde_json::from_str(&json).unwrap();
    assert_eq!(back, rec);
    let _: BitString = rec.derived_keys[0].bits.to_string().parse().unwrap();
}
