use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EvalError;
use crate::corpus::LabelInventory;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Repaired {
    pub labels: Vec<String>,
    pub repairs: usize,
}

/// Canonicalizes generated labels, replacing anything outside the inventory
/// with a uniform draw. Draws happen only for invalid entries, in input order,
/// so the same seed and input always yield the same output.
pub fn repair_labels<S: AsRef<str>>(
    raw: &[S],
    inv: &LabelInventory,
    seed: u64,
) -> Result<Repaired, EvalError> {
    if inv.is_empty() {
        return Err(EvalError::EmptyInventory);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut repairs = 0;
    let labels = raw
        .iter()
        .map(|r| match inv.canonical(r.as_ref()) {
            Some(l) => l.to_string(),
            None => {
                repairs += 1;
                let pick = inv.labels()[rng.random_range(0..inv.len())].clone();
                log::debug!("replaced invalid label '{}' with '{pick}'", r.as_ref());
                pick
            }
        })
        .collect();
    Ok(Repaired { labels, repairs })
}
