use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Split;
use crate::error::{Error, Result};

/// Source-level split assignment. Variants generated later inherit the split
/// of their source, so no source ever spans two splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub assignment: BTreeMap<String, Split>,
    pub fractions: [f64; 3],
    pub seed: u64,
}

impl SplitAssignment {
    pub fn get(&self, source_id: &str) -> Option<Split> {
        self.assignment.get(source_id).copied()
    }

    pub fn counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for s in self.assignment.values() {
            c[*s as usize] += 1;
        }
        c
    }
}

/// Seeded shuffle of the distinct source ids followed by a contiguous
/// partition into train, validation and test.
pub fn split_by_source<I, S>(source_ids: I, fractions: [f64; 3], seed: u64) -> Result<SplitAssignment>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    if fractions.iter().any(|f| !f.is_finite() || *f < 0.0) {
        return Err(Error::invalid("split fractions must be non-negative"));
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("split fractions sum to {total}, not 1")));
    }
    // Sorting first makes the result independent of input order.
    let unique: BTreeSet<String> = source_ids.into_iter().map(Into::into).collect();
    let mut ids: Vec<String> = unique.into_iter().collect();
    let requested = fractions.iter().filter(|f| **f > 0.0).count();
    if ids.len() < requested {
        return Err(Error::invalid(format!(
            "{} source ids cannot fill {requested} splits",
            ids.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);

    let n = ids.len();
    let n_train = (fractions[0] * n as f64).round() as usize;
    let n_val = ((fractions[1] * n as f64).round() as usize).min(n - n_train.min(n));
    let n_train = n_train.min(n);
    let mut assignment = BTreeMap::new();
    for (i, id) in ids.into_iter().enumerate() {
        let split = if i < n_train {
            Split::Train
        } else if i < n_train + n_val {
            Split::Validation
        } else {
            Split::Test
        };
        assignment.insert(id, split);
    }
    Ok(SplitAssignment {
        assignment,
        fractions,
        seed,
    })
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn every_source_lands_in_one_split(n in 3usize..300, seed in any::<u64>()) {
            let ids: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
            let s = split_by_source(ids.clone(), [0.65, 0.15, 0.20], seed).unwrap();
            prop_assert_eq!(s.counts().iter().sum::<usize>(), n);
            prop_assert!(ids.iter().all(|id| s.get(id).is_some()));
            // Input order and duplicates do not change the assignment.
            let mut shuffled: Vec<String> = ids.iter().rev().cloned().collect();
            shuffled.extend(ids.iter().take(3).cloned());
            let again = split_by_source(shuffled, [0.65, 0.15, 0.20], seed).unwrap();
            prop_assert!(ids.iter().all(|id| s.get(id) == again.get(id)));
        }
    }
}
