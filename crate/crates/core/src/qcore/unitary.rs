use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::qcore::state::{overlap, Matrix2, Matrix4, StateVector};
use crate::scalar::Real;

/// Applies a 4×4 unitary to an ordered qubit pair after checking unitarity.
pub fn apply_unitary<T: Real>(
    state: &StateVector<T>,
    matrix: &Matrix4<T>,
    qubit_pair: (usize, usize),
) -> Result<StateVector<T>> {
    matrix.ensure_unitary()?;
    state.apply_pair(matrix, qubit_pair.0, qubit_pair.1)
}

fn gaussian_complex<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::from_f64_lossy(re), T::from_f64_lossy(im))
}

// Modified Gram-Schmidt on the columns of a square matrix given as columns.
fn orthonormalize<T: Real, const N: usize>(mut cols: [[Complex<T>; N]; N]) -> [[Complex<T>; N]; N] {
    for j in 0..N {
        for k in 0..j {
            let proj = overlap(&cols[k], &cols[j]).expect("equal dimensions");
            let basis = cols[k];
            for (entry, v) in cols[j].iter_mut().zip(basis) {
                *entry = *entry - proj * v;
            }
        }
        let norm = cols[j].iter().fold(T::zero(), |acc, a| acc + a.norm_sqr()).sqrt();
        for entry in cols[j].iter_mut() {
            *entry = *entry / norm;
        }
    }
    cols
}

/// Random unitary from orthonormalized complex Gaussian columns.
pub fn random_unitary<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Matrix4<T> {
    let mut cols = [[Complex::new(T::zero(), T::zero()); 4]; 4];
    for col in cols.iter_mut() {
        for entry in col.iter_mut() {
            *entry = gaussian_complex(rng);
        }
    }
    let cols = orthonormalize(cols);
    let mut m = [[Complex::new(T::zero(), T::zero()); 4]; 4];
    for (c, col) in cols.iter().enumerate() {
        for (r, &v) in col.iter().enumerate() {
            m[r][c] = v;
        }
    }
    Matrix4(m)
}

pub fn random_unitary2<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Matrix2<T> {
    let mut cols = [[Complex::new(T::zero(), T::zero()); 2]; 2];
    for col in cols.iter_mut() {
        for entry in col.iter_mut() {
            *entry = gaussian_complex(rng);
        }
    }
    let cols = orthonormalize(cols);
    [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]]
}

/// Random photon⊗ancilla unitary whose decomposition has `E01 = E10 = 0` and `E00 = E11`.
///
/// Built as `|0⟩⟨0| ⊗ V + |1⟩⟨1| ⊗ V'`, where `V'` shares the first column of a random
/// `V` and carries a random phase on its second column.
pub fn zero_disturbance_unitary<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Matrix4<T> {
    let v: Matrix2<T> = random_unitary2(rng);
    let theta = T::from_f64_lossy(rng.random::<f64>() * std::f64::consts::TAU);
    let phase = Complex::new(theta.cos(), theta.sin());
    let v_prime = [[v[0][0], v[0][1] * phase], [v[1][0], v[1][1] * phase]];
    let mut m = [[Complex::new(T::zero(), T::zero()); 4]; 4];
    for a in 0..2 {
        for b in 0..2 {
            m[a][b] = v[a][b];
            m[2 + a][2 + b] = v_prime[a][b];
        }
    }
    Matrix4(m)
}

pub type AncillaVector<T> = [Complex<T>; 2];

/// Ancilla components of a photon⊗ancilla unitary acting on `|x⟩|E⟩` with `|E⟩ = |0⟩`:
/// `U|x⟩|E⟩ = |0⟩|E_x0⟩ + |1⟩|E_x1⟩`. Vectors are unnormalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveDecomposition<T: Real = f64> {
    pub e00: AncillaVector<T>,
    pub e01: AncillaVector<T>,
    pub e10: AncillaVector<T>,
    pub e11: AncillaVector<T>,
}

/// Splits `matrix` (photon first, ancilla second) into its four ancilla components.
pub fn eve_decomposition<T: Real>(matrix: &Matrix4<T>) -> Result<EveDecomposition<T>> {
    matrix.ensure_unitary()?;
    // Column 2x of the matrix is U|x⟩|0⟩; rows 2y and 2y+1 hold the ancilla part for photon y.
    let component = |x: usize, y: usize| [matrix.0[2 * y][2 * x], matrix.0[2 * y + 1][2 * x]];
    Ok(EveDecomposition {
        e00: component(0, 0),
        e01: component(0, 1),
        e10: component(1, 0),
        e11: component(1, 1),
    })
}

fn norm_sqr<T: Real>(v: &AncillaVector<T>) -> T {
    v[0].norm_sqr() + v[1].norm_sqr()
}

fn combine<T: Real>(terms: [(T, &AncillaVector<T>); 4]) -> AncillaVector<T> {
    let half = T::from_f64_lossy(0.5);
    let mut out = [Complex::new(T::zero(), T::zero()); 2];
    for (sign, v) in terms {
        for i in 0..2 {
            out[i] = out[i] + v[i] * sign * half;
        }
    }
    out
}

impl<T: Real> EveDecomposition<T> {
    /// `(‖E00‖² + ‖E01‖², ‖E10‖² + ‖E11‖²)`; both equal 1 for a unitary.
    pub fn unitarity_sums(&self) -> (T, T) {
        (
            norm_sqr(&self.e00) + norm_sqr(&self.e01),
            norm_sqr(&self.e10) + norm_sqr(&self.e11),
        )
    }

    /// Ancilla vectors left behind when the photon passes the check, and when it fails,
    /// for decoys `|0⟩, |1⟩, |+⟩, |−⟩` in that order. Unnormalized.
    pub fn decoy_branches(&self) -> [(AncillaVector<T>, AncillaVector<T>); 4] {
        let (p, n) = (T::one(), -T::one());
        let (e00, e01, e10, e11) = (&self.e00, &self.e01, &self.e10, &self.e11);
        [
            (*e00, *e01),
            (*e11, *e10),
            (
                combine([(p, e00), (p, e01), (p, e10), (p, e11)]),
                combine([(p, e00), (n, e01), (p, e10), (n, e11)]),
            ),
            (
                combine([(p, e00), (n, e01), (n, e10), (p, e11)]),
                combine([(p, e00), (p, e01), (n, e10), (n, e11)]),
            ),
        ]
    }

    /// Probability that each decoy `|0⟩, |1⟩, |+⟩, |−⟩` fails its announced-basis check.
    pub fn decoy_error_probabilities(&self) -> [T; 4] {
        self.decoy_branches().map(|(_, fail)| norm_sqr(&fail))
    }

    /// Normalized ancilla states Eve keeps when each decoy passes, skipping empty branches.
    pub fn conditional_ancilla_states(&self) -> Vec<AncillaVector<T>> {
        self.decoy_branches()
            .iter()
            .filter_map(|(pass, _)| {
                let norm = norm_sqr(pass).sqrt();
                (norm > T::tolerance()).then(|| [pass[0] / norm, pass[1] / norm])
            })
            .collect()
    }

    /// Smallest `|⟨a|b⟩|` over pairs of conditional ancilla states; 1 means Eve's
    /// ancilla carries no information about which state passed.
    pub fn min_conditional_overlap(&self) -> T {
        let states = self.conditional_ancilla_states();
        let mut min = T::one();
        for (i, a) in states.iter().enumerate() {
            for b in &states[i + 1..] {
                let o = overlap(a, b).expect("ancilla vectors share a dimension").norm();
                min = min.min(o);
            }
        }
        min
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::state::StateLabel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn identity_decomposition() {
        let d = eve_decomposition(&Matrix4::<f64>::identity()).unwrap();
        assert_eq!(d.e00, [c(1.0), c(0.0)]);
        assert_eq!(d.e01, [c(0.0), c(0.0)]);
        assert_eq!(d.e10, [c(0.0), c(0.0)]);
        assert_eq!(d.e11, [c(1.0), c(0.0)]);
        assert_eq!(d.decoy_error_probabilities(), [0.0; 4]);
    }

    #[test]
    fn cnot_decomposition() {
        let d = eve_decomposition(&Matrix4::<f64>::cnot()).unwrap();
        assert_eq!(d.e00, [c(1.0), c(0.0)]);
        assert_eq!(d.e01, [c(0.0), c(0.0)]);
        assert_eq!(d.e10, [c(0.0), c(0.0)]);
        assert_eq!(d.e11, [c(0.0), c(1.0)]);
        let errs = d.decoy_error_probabilities();
        for (got, want) in errs.iter().zip([0.0, 0.0, 0.5, 0.5]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(d.min_conditional_overlap() < 1e-12);
    }

    #[test]
    fn non_unitary_rejected() {
        let mut m = Matrix4::<f64>::identity();
        m.0[1][0] = c(0.5);
        assert!(eve_decomposition(&m).is_err());
        let s: StateVector = StateLabel::PhiPlus.state();
        assert!(apply_unitary(&s, &m, (0, 1)).is_err());
    }

    #[test]
    fn identity_unitary_leaves_state() {
        let s: StateVector = StateLabel::PsiMinus.state();
        let out = apply_unitary(&s, &Matrix4::identity(), (1, 0)).unwrap();
        assert!(out.equals_up_to_phase(&s));
    }

    #[test]
    fn random_unitaries_are_unitary_and_decompose() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let u: Matrix4<f64> = random_unitary(&mut rng);
            assert!(u.unitarity_deviation() < 1e-9);
            let (s0, s1) = eve_decomposition(&u).unwrap().unitarity_sums();
            assert!((s0 - 1.0).abs() < 1e-9 && (s1 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_disturbance_family() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let u: Matrix4<f64> = zero_disturbance_unitary(&mut rng);
            let d = eve_decomposition(&u).unwrap();
            assert!(norm_sqr(&d.e01) < 1e-18 && norm_sqr(&d.e10) < 1e-18);
            assert!((d.e00[0] - d.e11[0]).norm() < 1e-12 && (d.e00[1] - d.e11[1]).norm() < 1e-12);
            assert!(d.decoy_error_probabilities().iter().all(|p| *p < 1e-9));
            assert!(d.min_conditional_overlap() > 1.0 - 1e-9);
        }
    }

    #[test]
    fn decoy_error_matches_direct_simulation() {
        // Apply U to |s⟩|0⟩ and project the photon on the orthogonal eigenstate.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u: Matrix4<f64> = random_unitary(&mut rng);
        let d = eve_decomposition(&u).unwrap();
        let predicted = d.decoy_error_probabilities();
        let orthogonal = [StateLabel::One, StateLabel::Zero, StateLabel::Minus, StateLabel::Plus];
        for (k, label) in StateLabel::SINGLE.into_iter().enumerate() {
            let joint = label.state::<f64>().tensor(&StateLabel::Zero.state()).unwrap();
            let out = joint.apply_pair(&u, 0, 1).unwrap();
            let bra: StateVector = orthogonal[k].state();
            let rest = out.partial_contract(&[0], bra.amplitudes()).unwrap();
            let p: f64 = rest.iter().map(|a| a.norm_sqr()).sum();
            assert!((p - predicted[k]).abs() < 1e-12, "{label}");
        }
    }

    #[test]
    fn single_precision_random_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u: Matrix4<f32> = random_unitary(&mut rng);
        assert!(u.unitarity_deviation() < 1e-5);
    }
}
