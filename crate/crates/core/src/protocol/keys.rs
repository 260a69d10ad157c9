use rand::Rng;

use crate::error::{QkaError, Result};
use crate::protocol::types::{BitString, DerivedKey, Participant, SubKey};
use crate::qcore::PauliCode;

pub fn generate_subkey<R: Rng + ?Sized>(rng: &mut R, owner: Participant, n: usize) -> SubKey {
    let groups = (0..n)
        .map(|_| PauliCode::new(rng.random_range(0..4u8)).expect("two-bit value"))
        .collect();
    SubKey { owner, groups }
}

/// Builds `K*`: groups outside `union_positions` keep both bits in place, groups
/// inside contribute only their first bit, appended in ascending position order.
pub fn restructure_key(key: &SubKey, union_positions: &[usize]) -> BitString {
    let mut bits = Vec::with_capacity(2 * key.groups.len());
    for (i, g) in key.groups.iter().enumerate() {
        if union_positions.binary_search(&i).is_err() {
            bits.push(g.x_bit());
            bits.push(g.z_bit());
        }
    }
    bits.extend(union_positions.iter().map(|&p| key.groups[p].x_bit()));
    BitString(bits)
}

/// `K = K* ⊕ K′`.
pub fn derive_final(source: Participant, k_star: &BitString, k_prime: &BitString) -> Result<DerivedKey> {
    let bits = k_star
        .xor(k_prime)
        .map_err(|e| QkaError::rejected(format!("cannot derive final key for {source}: {e}")))?;
    Ok(DerivedKey { source, bits })
}

/// True iff every key agrees with the first on every sampled index.
pub fn verify_sample(keys: &[DerivedKey], positions: &[usize]) -> bool {
    let Some(first) = keys.first() else { return true };
    keys.iter().all(|k| {
        k.bits.len() == first.bits.len() && positions.iter().all(|&p| k.bits.0.get(p) == first.bits.0.get(p))
    })
}
