use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{QkaError, Result};
use crate::qcore::state::{Matrix2, StateVector};
use crate::scalar::Real;

/// Two-bit label of a dense-coding operation.
///
/// The first bit is the x-component and the second the z-component, so
/// `00 = I`, `01 = σz`, `10 = σx`, `11 = iσy`. The same labels name the Bell
/// states reached from `φ+` by applying the operation to the first qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PauliCode(u8);

impl PauliCode {
    pub const I: PauliCode = PauliCode(0b00);
    pub const Z: PauliCode = PauliCode(0b01);
    pub const X: PauliCode = PauliCode(0b10);
    pub const Y: PauliCode = PauliCode(0b11);

    pub const ALL: [PauliCode; 4] = [Self::I, Self::Z, Self::X, Self::Y];

    pub fn new(bits: u8) -> Result<Self> {
        if bits > 0b11 {
            return Err(QkaError::rejected(format!("pauli code {bits} is not a two-bit value")));
        }
        Ok(PauliCode(bits))
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        PauliCode(((x as u8) << 1) | z as u8)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn x_bit(self) -> bool {
        self.0 & 0b10 != 0
    }

    pub fn z_bit(self) -> bool {
        self.0 & 0b01 != 0
    }

    /// Label of the product of the two operations, exact up to global phase.
    pub fn compose(self, other: PauliCode) -> PauliCode {
        PauliCode(self.0 ^ other.0)
    }

    pub fn matrix<T: Real>(self) -> Matrix2<T> {
        let o = Complex::new(T::zero(), T::zero());
        let p = Complex::new(T::one(), T::zero());
        let n = -p;
        match self.0 {
            0b00 => [[p, o], [o, p]],
            0b01 => [[p, o], [o, n]],
            0b10 => [[o, p], [p, o]],
            // iσy = [[0, 1], [-1, 0]]
            _ => [[o, p], [n, o]],
        }
    }
}

pub fn compose_codes(a: PauliCode, b: PauliCode) -> PauliCode {
    a.compose(b)
}

/// Applies the operation named by `code` to one qubit of `state`.
pub fn apply_pauli<T: Real>(
    state: &StateVector<T>,
    code: PauliCode,
    qubit_index: usize,
) -> Result<StateVector<T>> {
    state.apply_single(&code.matrix(), qubit_index)
}

impl fmt::Display for PauliCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.x_bit() as u8, self.z_bit() as u8)
    }
}

impl FromStr for PauliCode {
    type Err = QkaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "00" => Ok(Self::I),
            "01" => Ok(Self::Z),
            "10" => Ok(Self::X),
            "11" => Ok(Self::Y),
            other => Err(QkaError::rejected(format!("invalid pauli code '{other}'"))),
        }
    }
}

impl Serialize for PauliCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
