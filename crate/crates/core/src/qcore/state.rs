use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{QkaError, Result};
use crate::qcore::pauli::PauliCode;
use crate::scalar::Real;

pub const MAX_QUBITS: usize = 4;

pub type Matrix2<T> = [[Complex<T>; 2]; 2];

/// Normalized pure state over 1 to 4 qubits.
///
/// Amplitude index bits are big-endian in qubit order: qubit 0 is the most
/// significant bit, so `|q0 q1⟩` sits at index `2*q0 + q1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real = f64> {
    num_qubits: usize,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn new(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let num_qubits = qubits_for_len(amplitudes.len())?;
        let state = StateVector { num_qubits, amplitudes };
        let deviation = (state.norm_sqr() - T::one()).abs();
        if deviation >= T::tolerance() {
            return Err(QkaError::rejected(format!(
                "amplitudes are not normalized (|norm^2 - 1| = {deviation:e})"
            )));
        }
        Ok(state)
    }

    /// Rescales `amplitudes` to unit norm. Fails on the zero vector.
    pub fn normalized(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let num_qubits = qubits_for_len(amplitudes.len())?;
        let norm = norm_sqr(&amplitudes).sqrt();
        if norm <= T::tolerance() {
            return Err(QkaError::rejected("cannot normalize a zero vector"));
        }
        let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(StateVector { num_qubits, amplitudes })
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(QkaError::rejected(format!("{num_qubits} qubits is outside 1..={MAX_QUBITS}")));
        }
        let dim = 1 << num_qubits;
        if index >= dim {
            return Err(QkaError::rejected(format!("basis index {index} >= {dim}")));
        }
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); dim];
        amplitudes[index] = Complex::new(T::one(), T::zero());
        Ok(StateVector { num_qubits, amplitudes })
    }

    pub fn from_label(label: StateLabel) -> Self {
        let h = T::FRAC_1_SQRT_2();
        let z = T::zero();
        let amps: Vec<T> = match label {
            StateLabel::Zero => vec![T::one(), z],
            StateLabel::One => vec![z, T::one()],
            StateLabel::Plus => vec![h, h],
            StateLabel::Minus => vec![h, -h],
            StateLabel::PhiPlus => vec![h, z, z, h],
            StateLabel::PhiMinus => vec![h, z, z, -h],
            StateLabel::PsiPlus => vec![z, h, h, z],
            StateLabel::PsiMinus => vec![z, h, -h, z],
        };
        let amplitudes: Vec<Complex<T>> = amps.into_iter().map(|re| Complex::new(re, z)).collect();
        StateVector { num_qubits: label.num_qubits(), amplitudes }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        norm_sqr(&self.amplitudes)
    }

    /// `self ⊗ other`; the qubits of `other` follow those of `self`.
    pub fn tensor(&self, other: &StateVector<T>) -> Result<Self> {
        let num_qubits = self.num_qubits + other.num_qubits;
        if num_qubits > MAX_QUBITS {
            return Err(QkaError::rejected(format!(
                "tensor product of {} and {} qubits exceeds {MAX_QUBITS}",
                self.num_qubits, other.num_qubits
            )));
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Ok(StateVector { num_qubits, amplitudes })
    }

    /// Applies a 2×2 matrix to one qubit. The matrix is assumed unitary.
    pub fn apply_single(&self, matrix: &Matrix2<T>, qubit: usize) -> Result<Self> {
        self.check_index(qubit)?;
        let mask = self.bit_mask(qubit);
        let mut amplitudes = self.amplitudes.clone();
        for i in 0..amplitudes.len() {
            if i & mask == 0 {
                let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | mask]);
                amplitudes[i] = matrix[0][0] * a0 + matrix[0][1] * a1;
                amplitudes[i | mask] = matrix[1][0] * a0 + matrix[1][1] * a1;
            }
        }
        Ok(StateVector { num_qubits: self.num_qubits, amplitudes })
    }

    /// Applies a 4×4 matrix to the ordered pair `(first, second)`; `first` is the
    /// more significant bit of the matrix index. The matrix is assumed unitary.
    pub fn apply_pair(&self, matrix: &Matrix4<T>, first: usize, second: usize) -> Result<Self> {
        self.check_index(first)?;
        self.check_index(second)?;
        if first == second {
            return Err(QkaError::rejected(format!("qubit pair ({first}, {second}) is not distinct")));
        }
        let (ma, mb) = (self.bit_mask(first), self.bit_mask(second));
        let mut amplitudes = self.amplitudes.clone();
        for base in 0..amplitudes.len() {
            if base & (ma | mb) != 0 {
                continue;
            }
            let idx = [base, base | mb, base | ma, base | ma | mb];
            let input = idx.map(|i| self.amplitudes[i]);
            for (row, &target) in idx.iter().enumerate() {
                amplitudes[target] = (0..4).fold(Complex::new(T::zero(), T::zero()), |acc, col| {
                    acc + matrix.0[row][col] * input[col]
                });
            }
        }
        Ok(StateVector { num_qubits: self.num_qubits, amplitudes })
    }

    /// Inner product `⟨self|other⟩`.
    pub fn overlap(&self, other: &StateVector<T>) -> Result<Complex<T>> {
        overlap(&self.amplitudes, &other.amplitudes)
    }

    /// Equality up to a global unit phase: `|⟨self|other⟩| = 1` within tolerance.
    pub fn equals_up_to_phase(&self, other: &StateVector<T>) -> bool {
        match self.overlap(other) {
            Ok(o) => (o.norm() - T::one()).abs() < T::tolerance(),
            Err(_) => false,
        }
    }

    /// Contracts the qubits at `indices` with `bra` and renormalizes what is left:
    /// `(⟨bra| ⊗ I)|self⟩ / ‖…‖`. Used to drop qubits known to be in product with
    /// the rest, e.g. after a measurement.
    pub fn factor_out(&self, indices: &[usize], bra: &StateVector<T>) -> Result<Self> {
        if indices.len() >= self.num_qubits {
            return Err(QkaError::rejected("cannot factor out every qubit of a state"));
        }
        let rest = self.partial_contract(indices, bra.amplitudes())?;
        StateVector::normalized(rest)
    }

    /// Unnormalized `(⟨bra| ⊗ I)|self⟩` over the qubits not in `indices`, which keep
    /// their relative order. Length is `2^(n - k)` (1 when every qubit is contracted).
    pub(crate) fn partial_contract(&self, indices: &[usize], bra: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        self.check_indices(indices)?;
        if bra.len() != 1 << indices.len() {
            return Err(QkaError::rejected(format!(
                "bra of length {} does not match {} qubits",
                bra.len(),
                indices.len()
            )));
        }
        let rest_qubits = self.rest_qubits(indices);
        let mut rest = vec![Complex::new(T::zero(), T::zero()); 1 << rest_qubits.len()];
        for (i, amp) in self.amplitudes.iter().enumerate() {
            let s = self.gather(i, indices);
            let r = self.gather(i, &rest_qubits);
            rest[r] = rest[r] + bra[s].conj() * amp;
        }
        Ok(rest)
    }

    /// Inverse of [`Self::partial_contract`]: `|ket⟩_indices ⊗ |rest⟩` as a full amplitude vector.
    pub(crate) fn embed(num_qubits: usize, indices: &[usize], ket: &[Complex<T>], rest: &[Complex<T>]) -> Vec<Complex<T>> {
        let shape = StateVector::<T> {
            num_qubits,
            amplitudes: Vec::new(),
        };
        let rest_qubits = shape.rest_qubits(indices);
        (0..1usize << num_qubits)
            .map(|i| ket[shape.gather(i, indices)] * rest[shape.gather(i, &rest_qubits)])
            .collect()
    }

    pub(crate) fn check_index(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(QkaError::rejected(format!(
                "qubit index {qubit} out of range for {} qubits",
                self.num_qubits
            )));
        }
        Ok(())
    }

    pub(crate) fn check_indices(&self, indices: &[usize]) -> Result<()> {
        for (k, &q) in indices.iter().enumerate() {
            self.check_index(q)?;
            if indices[..k].contains(&q) {
                return Err(QkaError::rejected(format!("qubit index {q} repeated")));
            }
        }
        Ok(())
    }

    fn bit_mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    fn rest_qubits(&self, indices: &[usize]) -> Vec<usize> {
        (0..self.num_qubits).filter(|q| !indices.contains(q)).collect()
    }

    // Packs the bits of `index` at `qubits` into a small integer, first qubit most significant.
    fn gather(&self, index: usize, qubits: &[usize]) -> usize {
        qubits
            .iter()
            .fold(0, |acc, &q| (acc << 1) | usize::from(index & self.bit_mask(q) != 0))
    }
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if !len.is_power_of_two() || len < 2 {
        return Err(QkaError::rejected(format!(
            "amplitude count {len} is not 2^n for n in 1..={MAX_QUBITS}"
        )));
    }
    let n = len.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(QkaError::rejected(format!("{n} qubits exceeds {MAX_QUBITS}")));
    }
    Ok(n)
}

fn norm_sqr<T: Real>(amplitudes: &[Complex<T>]) -> T {
    amplitudes.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr())
}

/// Inner product `⟨a|b⟩` of two equal-length amplitude vectors.
pub fn overlap<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Result<Complex<T>> {
    if a.len() != b.len() {
        return Err(QkaError::rejected(format!(
            "overlap of vectors with dimensions {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a
        .iter()
        .zip(b)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y))
}

/// Dense 4×4 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix4<T: Real = f64>(pub [[Complex<T>; 4]; 4]);

impl<T: Real> Matrix4<T> {
    pub fn identity() -> Self {
        let mut m = [[Complex::new(T::zero(), T::zero()); 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = Complex::new(T::one(), T::zero());
        }
        Matrix4(m)
    }

    /// Controlled-NOT with the first qubit of the pair as control.
    pub fn cnot() -> Self {
        let mut m = Self::identity().0;
        m[2].swap(2, 3);
        m[3].swap(2, 3);
        Matrix4(m)
    }

    pub fn kron(a: &Matrix2<T>, b: &Matrix2<T>) -> Self {
        let mut m = [[Complex::new(T::zero(), T::zero()); 4]; 4];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = a[r >> 1][c >> 1] * b[r & 1][c & 1];
            }
        }
        Matrix4(m)
    }

    pub fn adjoint(&self) -> Self {
        let mut m = self.0;
        for (r, row) in m.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = self.0[c][r].conj();
            }
        }
        Matrix4(m)
    }

    pub fn mul(&self, other: &Matrix4<T>) -> Self {
        let mut m = [[Complex::new(T::zero(), T::zero()); 4]; 4];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = (0..4).fold(Complex::new(T::zero(), T::zero()), |acc, k| {
                    acc + self.0[r][k] * other.0[k][c]
                });
            }
        }
        Matrix4(m)
    }

    /// Frobenius norm of `M M† - I`.
    pub fn unitarity_deviation(&self) -> T {
        let product = self.mul(&self.adjoint());
        let identity = Self::identity();
        let mut sum = T::zero();
        for r in 0..4 {
            for c in 0..4 {
                sum = sum + (product.0[r][c] - identity.0[r][c]).norm_sqr();
            }
        }
        sum.sqrt()
    }

    pub fn ensure_unitary(&self) -> Result<()> {
        let deviation = self.unitarity_deviation();
        if deviation.is_nan() || deviation >= T::tolerance() {
            return Err(QkaError::NonUnitary {
                deviation: deviation.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }
}

// Serialized as four rows of four `[re, im]` pairs.
impl<T: Real + Serialize> Serialize for Matrix4<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[T; 2]>> = self
            .0
            .iter()
            .map(|row| row.iter().map(|c| [c.re, c.im]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for Matrix4<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows: [[[T; 2]; 4]; 4] = Deserialize::deserialize(deserializer)?;
        Ok(Matrix4(rows.map(|row| row.map(|[re, im]| Complex::new(re, im)))))
    }
}

/// Names of the eight canonical states: the Z and X eigenstates and the four Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateLabel {
    Zero,
    One,
    Plus,
    Minus,
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl StateLabel {
    pub const SINGLE: [StateLabel; 4] = [Self::Zero, Self::One, Self::Plus, Self::Minus];
    pub const BELL: [StateLabel; 4] = [Self::PhiPlus, Self::PhiMinus, Self::PsiPlus, Self::PsiMinus];

    pub fn num_qubits(self) -> usize {
        match self {
            Self::Zero | Self::One | Self::Plus | Self::Minus => 1,
            _ => 2,
        }
    }

    /// `φ+ = 00`, `φ− = 01`, `ψ+ = 10`, `ψ− = 11`.
    pub fn bell_code(self) -> Option<PauliCode> {
        match self {
            Self::PhiPlus => Some(PauliCode::I),
            Self::PhiMinus => Some(PauliCode::Z),
            Self::PsiPlus => Some(PauliCode::X),
            Self::PsiMinus => Some(PauliCode::Y),
            _ => None,
        }
    }

    pub fn from_bell_code(code: PauliCode) -> Self {
        Self::BELL[code.bits() as usize]
    }

    /// Eigenstate bit of a single-photon label: 0 for `|0⟩`/`|+⟩`, 1 for `|1⟩`/`|−⟩`.
    pub fn bit(self) -> Option<bool> {
        match self {
            Self::Zero | Self::Plus => Some(false),
            Self::One | Self::Minus => Some(true),
            _ => None,
        }
    }

    pub fn state<T: Real>(self) -> StateVector<T> {
        StateVector::from_label(self)
    }

    fn as_str(self) -> &'static str {
        match self {
            Self::Zero => "0",
            Self::One => "1",
            Self::Plus => "+",
            Self::Minus => "-",
            Self::PhiPlus => "phi+",
            Self::PhiMinus => "phi-",
            Self::PsiPlus => "psi+",
            Self::PsiMinus => "psi-",
        }
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StateLabel {
    type Err = QkaError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "0" => Self::Zero,
            "1" => Self::One,
            "+" => Self::Plus,
            "-" | "−" => Self::Minus,
            "phi+" | "φ+" => Self::PhiPlus,
            "phi-" | "φ-" | "φ−" => Self::PhiMinus,
            "psi+" | "ψ+" => Self::PsiPlus,
            "psi-" | "ψ-" | "ψ−" => Self::PsiMinus,
            other => return Err(QkaError::rejected(format!("unknown state label '{other}'"))),
        })
    }
}

impl Serialize for StateLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for StateLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Canonical state for one of the eight names `0 1 + − φ+ φ− ψ+ ψ−`.
pub fn make_state<T: Real>(label: &str) -> Result<StateVector<T>> {
    Ok(label.parse::<StateLabel>()?.state())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::pauli::apply_pauli;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn canonical_states() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi: StateVector = make_state("φ+").unwrap();
        assert_eq!(phi.amplitudes(), &[c(h), c(0.0), c(0.0), c(h)]);
        let zero: StateVector = make_state("0").unwrap();
        assert_eq!(zero.amplitudes(), &[c(1.0), c(0.0)]);
        let minus: StateVector = make_state("−").unwrap();
        assert_eq!(minus.amplitudes(), &[c(h), c(-h)]);
        assert!(make_state::<f64>("2").is_err());
    }

    #[test]
    fn all_labels_normalized_in_both_precisions() {
        for label in StateLabel::SINGLE.into_iter().chain(StateLabel::BELL) {
            let s64: StateVector<f64> = label.state();
            assert!((s64.norm_sqr() - 1.0).abs() < 1e-9);
            let s32: StateVector<f32> = label.state();
            assert!((s32.norm_sqr() - 1.0).abs() < 1e-5);
            assert_eq!(s64.num_qubits(), label.num_qubits());
        }
    }

    #[test]
    fn constructor_validates_shape_and_norm() {
        assert!(StateVector::<f64>::new(vec![c(1.0)]).is_err());
        assert!(StateVector::<f64>::new(vec![c(1.0), c(0.0), c(0.0)]).is_err());
        assert!(StateVector::<f64>::new(vec![c(1.0), c(1.0)]).is_err());
        assert!(StateVector::<f64>::new(vec![c(0.0); 32]).is_err());
        assert!(StateVector::<f64>::normalized(vec![c(0.0); 2]).is_err());
        assert!(StateVector::<f64>::basis(5, 0).is_err());
    }

    #[test]
    fn pauli_on_single_qubit_states() {
        let zero: StateVector = StateLabel::Zero.state();
        assert!(apply_pauli(&zero, PauliCode::Z, 0).unwrap().equals_up_to_phase(&zero));
        let one: StateVector = StateLabel::One.state();
        assert!(apply_pauli(&zero, PauliCode::Y, 0).unwrap().equals_up_to_phase(&one));
        assert!(apply_pauli(&zero, PauliCode::X, 1).is_err());
    }

    #[test]
    fn pauli_on_bell_states() {
        let phi_p: StateVector = StateLabel::PhiPlus.state();
        let phi_m: StateVector = StateLabel::PhiMinus.state();
        let psi_p: StateVector = StateLabel::PsiPlus.state();
        assert!(apply_pauli(&phi_p, PauliCode::X, 0).unwrap().equals_up_to_phase(&psi_p));
        assert!(apply_pauli(&phi_m, PauliCode::Y, 0).unwrap().equals_up_to_phase(&psi_p));
    }

    #[test]
    fn cnot_on_plus_zero_is_phi_plus() {
        let plus: StateVector = StateLabel::Plus.state();
        let zero: StateVector = StateLabel::Zero.state();
        let input = plus.tensor(&zero).unwrap();
        let out = input.apply_pair(&Matrix4::cnot(), 0, 1).unwrap();
        // (|00⟩ + |10⟩)/√2 → (|00⟩ + |11⟩)/√2
        assert!(out.equals_up_to_phase(&StateLabel::PhiPlus.state()));
    }

    #[test]
    fn pair_order_matters() {
        // CNOT with qubit 1 as control on |0⟩|1⟩ flips qubit 0.
        let input: StateVector = StateVector::basis(2, 0b01).unwrap();
        let out = input.apply_pair(&Matrix4::cnot(), 1, 0).unwrap();
        assert_eq!(out, StateVector::basis(2, 0b11).unwrap());
        assert!(input.apply_pair(&Matrix4::cnot(), 1, 1).is_err());
    }

    #[test]
    fn kron_matches_sequential_application() {
        let phi: StateVector = StateLabel::PhiPlus.state();
        let x_i = Matrix4::kron(&PauliCode::X.matrix(), &PauliCode::I.matrix());
        let out = phi.apply_pair(&x_i, 0, 1).unwrap();
        assert!(out.equals_up_to_phase(&StateLabel::PsiPlus.state()));
    }

    #[test]
    fn overlaps() {
        let zero: StateVector = StateLabel::Zero.state();
        let one: StateVector = StateLabel::One.state();
        let plus: StateVector = StateLabel::Plus.state();
        assert!((zero.overlap(&zero).unwrap() - c(1.0)).norm() < 1e-12);
        assert!(zero.overlap(&one).unwrap().norm() < 1e-12);
        assert!((plus.overlap(&zero).unwrap().norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(zero.overlap(&StateLabel::PhiPlus.state()).is_err());
    }

    #[test]
    fn factor_out_recovers_product_component() {
        let plus: StateVector = StateLabel::Plus.state();
        let one: StateVector = StateLabel::One.state();
        let joint = plus.tensor(&one).unwrap();
        let rest = joint.factor_out(&[0], &plus).unwrap();
        assert!(rest.equals_up_to_phase(&one));
        let rest = joint.factor_out(&[1], &one).unwrap();
        assert!(rest.equals_up_to_phase(&plus));
        assert!(joint.factor_out(&[0, 1], &StateLabel::PhiPlus.state()).is_err());
    }

    #[test]
    fn tensor_limit() {
        let phi: StateVector = StateLabel::PhiPlus.state();
        let four = phi.tensor(&phi).unwrap();
        assert_eq!(four.num_qubits(), 4);
        assert!(four.tensor(&StateLabel::Zero.state()).is_err());
    }

    #[test]
    fn unitarity_check() {
        assert!(Matrix4::<f64>::identity().ensure_unitary().is_ok());
        assert!(Matrix4::<f64>::cnot().ensure_unitary().is_ok());
        let mut m = Matrix4::<f64>::identity();
        m.0[0][0] = c(2.0);
        match m.ensure_unitary() {
            Err(QkaError::NonUnitary { deviation }) => assert!((deviation - 3.0).abs() < 1e-12),
            other => panic!("expected NonUnitary, got {other:?}"),
        }
    }
}
