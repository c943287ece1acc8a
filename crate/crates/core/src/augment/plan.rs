use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{structural_filter, AugmentError, AugmentationMapping, Predicate};
use crate::corpus::{CorpusId, RelationInstance};

/// A source-corpus instance offered for translation.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceInstance {
    pub corpus: CorpusId,
    pub genre: String,
    pub instance: RelationInstance,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Selection {
    pub corpus: CorpusId,
    pub instance_id: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationPlan {
    pub mapping: AugmentationMapping,
    pub target_train_size: usize,
    /// Apportioned per-label quota; sums to `round(ratio * target_train_size)`.
    pub quota: BTreeMap<String, usize>,
    /// Per-label quota that the filtered source supply could not cover.
    pub shortfall: BTreeMap<String, usize>,
    /// Sorted by corpus, then instance id.
    pub selected: Vec<Selection>,
    pub seed: u64,
}

impl AugmentationPlan {
    pub fn total_quota(&self) -> usize {
        self.quota.values().sum()
    }

    pub fn selected_histogram(&self) -> BTreeMap<String, usize> {
        let mut h = BTreeMap::new();
        for s in &self.selected {
            *h.entry(s.label.clone()).or_default() += 1;
        }
        h
    }
}

/// `round(ratio * size)`, halves rounded up.
pub fn total_quota(ratio: f64, size: usize) -> usize {
    (ratio * size as f64).round() as usize
}

/// Largest-remainder apportionment of `n` seats over `histogram`. Remainder
/// ties go to the larger count, then to the label that sorts first.
pub fn apportion(histogram: &BTreeMap<String, usize>, n: usize) -> BTreeMap<String, usize> {
    let total: usize = histogram.values().sum();
    if total == 0 {
        return histogram.keys().map(|k| (k.clone(), 0)).collect();
    }
    let mut quota: BTreeMap<String, usize> = BTreeMap::new();
    let mut remainders: Vec<(usize, usize, &String)> = Vec::new();
    for (label, &count) in histogram {
        let exact = n as u128 * count as u128;
        quota.insert(label.clone(), (exact / total as u128) as usize);
        remainders.push(((exact % total as u128) as usize, count, label));
    }
    let assigned: usize = quota.values().sum();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)).then(a.2.cmp(b.2)));
    for (_, _, label) in remainders.into_iter().take(n - assigned) {
        *quota.get_mut(label).expect("label present") += 1;
    }
    quota
}

/// Chooses source instances for one target so that the augmented label
/// distribution follows the target's, restricted to admissible genres and to
/// instances passing every structural predicate.
pub fn plan_augmentation(
    mapping: &AugmentationMapping,
    sources: &[SourceInstance],
    target_histogram: &BTreeMap<String, usize>,
    target_train_size: usize,
    predicates: &[Predicate],
    seed: u64,
) -> Result<AugmentationPlan, AugmentError> {
    let n = total_quota(mapping.ratio, target_train_size);
    let quota = apportion(target_histogram, n);

    let mut pools: BTreeMap<&str, Vec<&SourceInstance>> = BTreeMap::new();
    for s in sources {
        if mapping.sources.contains(&s.corpus)
            && mapping.genres.admits(&s.genre)
            && structural_filter(&s.instance, predicates)
        {
            pools.entry(s.instance.label.as_str()).or_default().push(s);
        }
    }
    let supply: usize = quota
        .keys()
        .map(|l| pools.get(l.as_str()).map_or(0, Vec::len))
        .sum();
    if supply == 0 {
        return Err(AugmentError::EmptySupply(mapping.target.clone()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut selected = Vec::new();
    let mut shortfall = BTreeMap::new();
    for (label, &want) in &quota {
        let mut pool: Vec<&SourceInstance> = pools.get(label.as_str()).cloned().unwrap_or_default();
        pool.sort_by(|a, b| {
            (&a.corpus, a.instance.instance_id).cmp(&(&b.corpus, b.instance.instance_id))
        });
        let take = if pool.len() <= want {
            if pool.len() < want {
                log::warn!(
                    "{}: label '{label}' needs {want} source instances, only {} available",
                    mapping.target,
                    pool.len()
                );
                shortfall.insert(label.clone(), want - pool.len());
            }
            pool
        } else {
            let (chosen, _) = pool.partial_shuffle(&mut rng, want);
            chosen.to_vec()
        };
        selected.extend(take.into_iter().map(|s| Selection {
            corpus: s.corpus.clone(),
            instance_id: s.instance.instance_id,
            label: label.clone(),
        }));
    }
    selected.sort();
    Ok(AugmentationPlan {
        mapping: mapping.clone(),
        target_train_size,
        quota,
        shortfall,
        selected,
        seed,
    })
}
