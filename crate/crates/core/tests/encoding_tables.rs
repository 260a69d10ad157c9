//! The two encoding tables, transcribed by hand and replayed through the kernel
//! in both precisions.

use qka_core::qcore::{apply_pauli, measure, outcome_distribution, BasisKind, Outcome, PauliCode, StateLabel};
use qka_core::rng::substream;
use qka_core::Real;

use StateLabel::*;

const OPS: [&str; 4] = ["00", "01", "10", "11"];

// Row: input Bell state; columns: result of U00, U01, U10, U11 on the first qubit.
const BELL_TABLE: [(StateLabel, [StateLabel; 4]); 4] = [
    (PhiPlus, [PhiPlus, PhiMinus, PsiPlus, PsiMinus]),
    (PhiMinus, [PhiMinus, PhiPlus, PsiMinus, PsiPlus]),
    (PsiPlus, [PsiPlus, PsiMinus, PhiPlus, PhiMinus]),
    (PsiMinus, [PsiMinus, PsiPlus, PhiMinus, PhiPlus]),
];

// U00 and U01 keep |0⟩ and |1⟩; U10 and U11 swap them.
const SINGLE_TABLE: [(StateLabel, [StateLabel; 4]); 2] =
    [(Zero, [Zero, Zero, One, One]), (One, [One, One, Zero, Zero])];

fn check_bell<T: Real>() {
    for (input, row) in BELL_TABLE {
        for (op, expected) in OPS.iter().zip(row) {
            let code: PauliCode = op.parse().unwrap();
            let out = apply_pauli(&input.state::<T>(), code, 0).unwrap();
            assert!(out.equals_up_to_phase(&expected.state()), "U{op} on {input}");
            let dist = outcome_distribution(&out, BasisKind::Bell, &[0, 1]).unwrap();
            for b in dist {
                let p = b.probability.to_f64().unwrap();
                let want = if b.outcome == Outcome::Bell(expected.bell_code().unwrap()) { 1.0 } else { 0.0 };
                assert!((p - want).abs() < 1e-5, "U{op} on {input}: {:?} has {p}", b.outcome);
            }
            let sampled = measure(&out, BasisKind::Bell, &[0, 1], &mut substream(1, &[])).unwrap();
            assert_eq!(sampled.outcome, Outcome::Bell(expected.bell_code().unwrap()));
        }
    }
}

fn check_single<T: Real>() {
    for (input, row) in SINGLE_TABLE {
        for (op, expected) in OPS.iter().zip(row) {
            let out = apply_pauli(&input.state::<T>(), op.parse().unwrap(), 0).unwrap();
            assert!(out.equals_up_to_phase(&expected.state()), "U{op} on {input}");
            let sampled = measure(&out, BasisKind::Z, &[0], &mut substream(2, &[])).unwrap();
            assert_eq!(sampled.outcome.bit(), expected.bit(), "U{op} on {input}");
        }
    }
}

#[test]
fn bell_table_f64() {
    check_bell::<f64>();
}

#[test]
fn bell_table_f32() {
    check_bell::<f32>();
}

#[test]
fn single_photon_table_f64() {
    check_single::<f64>();
}

#[test]
fn single_photon_table_f32() {
    check_single::<f32>();
}

#[test]
fn bell_code_shifts_by_xor() {
    // Reading the table as arithmetic: the code of U_k|B_j⟩ is j ⊕ k.
    for (input, row) in BELL_TABLE {
        for (k, expected) in PauliCode::ALL.iter().zip(row) {
            assert_eq!(input.bell_code().unwrap().compose(*k), expected.bell_code().unwrap());
        }
    }
}

#[test]
fn single_table_reads_the_first_bit() {
    for (input, row) in SINGLE_TABLE {
        for (k, expected) in PauliCode::ALL.iter().zip(row) {
            assert_eq!(expected.bit().unwrap(), input.bit().unwrap() ^ k.x_bit());
        }
    }
}
