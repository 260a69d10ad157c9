//! Qubit efficiency `η = c / (q + b)` under two counting conventions.
//!
//! `c` is the expected final key length `2n − E|P∪|`. With each ring inserting
//! `l` uniform positions out of `n`, a position avoids all three rings with
//! probability `(1 − l/n)^3`, so `c = n + (n − l)^3 / n^2` exactly.
//!
//! PAPER counts one ring's payload over its three legs, `q = m + 2n`, and no
//! classical bits. EXACT counts every photon on all nine hops, decoys included,
//! and charges `b` for each announced insertion index and, per decoy, its
//! position index, basis bit and outcome bit.

use num_rational::Ratio;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::protocol::ProtocolParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    Paper,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EfficiencyReport {
    pub convention: Convention,
    pub c: Ratio<i128>,
    pub q: u64,
    pub b: u64,
    pub eta: Ratio<i128>,
}

impl EfficiencyReport {
    pub fn eta_f64(&self) -> f64 {
        ratio_f64(&self.eta)
    }
}

fn ratio_f64(r: &Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl Serialize for EfficiencyReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("EfficiencyReport", 7)?;
        s.serialize_field("convention", &self.convention)?;
        s.serialize_field("c", &ratio_f64(&self.c))?;
        s.serialize_field("c_exact", &self.c.to_string())?;
        s.serialize_field("q", &self.q)?;
        s.serialize_field("b", &self.b)?;
        s.serialize_field("eta", &self.eta_f64())?;
        s.serialize_field("eta_exact", &self.eta.to_string())?;
        s.end()
    }
}

/// Bits needed to name one of `count` positions; at least one.
fn index_width(count: usize) -> u64 {
    if count <= 2 {
        1
    } else {
        (usize::BITS - (count - 1).leading_zeros()) as u64
    }
}

pub fn efficiency(params: &ProtocolParams, convention: Convention) -> EfficiencyReport {
    let (m, l, d) = (params.m as i128, params.l as i128, params.decoy_count);
    let n = m + l;
    let c = Ratio::from_integer(n) + Ratio::new((n - l).pow(3), n * n);
    let nu = n as u64;
    let (q, b) = match convention {
        Convention::Paper => (params.m as u64 + 2 * nu, 0),
        Convention::Exact => {
            let q = 3 * (params.m as u64 + 2 * nu) + 9 * d as u64;
            let insertions = 3 * params.l as u64 * index_width(n as usize);
            let legs = [params.m, n as usize, n as usize];
            let decoys: u64 = legs.iter().map(|&len| d as u64 * (index_width(len + d) + 2)).sum::<u64>() * 3;
            (q, insertions + decoys)
        }
    };
    let eta = c / Ratio::from_integer((q + b) as i128);
    EfficiencyReport { convention, c, q, b, eta }
}
