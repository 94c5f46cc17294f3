//! Partition of integer vectors by the positions of their nonnegative entries.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// One class J_S(j_S): vectors whose nonnegative entries sit exactly at the
/// positions in `subset` and whose restriction to those positions is `key`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignGroup {
    /// Zero-based positions S, ascending.
    pub subset: Vec<usize>,
    /// j_S = π_S(j), all entries nonnegative.
    pub key: Vec<i64>,
    /// Indices into the input list, in input order.
    pub members: Vec<usize>,
    pub vectors: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignPatternDecomposition {
    pub dim: usize,
    /// Ordered by |S|, then S lexicographically, then j_S lexicographically.
    pub groups: Vec<SignGroup>,
}

/// The set of positions with entry ≥ 0 (zero counts as nonnegative).
pub fn pattern_of(v: &[i64]) -> Vec<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, &x)| x >= 0)
        .map(|(i, _)| i)
        .collect()
}

pub fn sign_pattern_decompose(vectors: &[Vec<i64>]) -> Result<SignPatternDecomposition> {
    let dim = vectors.first().map_or(0, Vec::len);
    if let Some(bad) = vectors.iter().position(|v| v.len() != dim) {
        return Err(Error::Precondition(format!("vector {bad} has length {} (expected {dim})", vectors[bad].len())));
    }
    let mut groups: BTreeMap<(usize, Vec<usize>, Vec<i64>), Vec<usize>> = BTreeMap::new();
    for (i, v) in vectors.iter().enumerate() {
        let subset = pattern_of(v);
        let key = subset.iter().map(|&s| v[s]).collect();
        groups.entry((subset.len(), subset, key)).or_default().push(i);
    }
    let groups = groups
        .into_iter()
        .map(|((_, subset, key), members)| SignGroup {
            vectors: members.iter().map(|&i| vectors[i].clone()).collect(),
            subset,
            key,
            members,
        })
        .collect();
    Ok(SignPatternDecomposition { dim, groups })
}

impl SignPatternDecomposition {
    /// Each input index exactly once, and every member consistent with its group.
    pub fn is_partition_of(&self, vectors: &[Vec<i64>]) -> bool {
        let mut seen = vec![0usize; vectors.len()];
        for g in &self.groups {
            for (&i, v) in g.members.iter().zip(&g.vectors) {
                if i >= vectors.len() || vectors[i] != *v {
                    return false;
                }
                seen[i] += 1;
                if pattern_of(v) != g.subset {
                    return false;
                }
                if g.subset.iter().map(|&s| v[s]).collect::<Vec<_>>() != g.key {
                    return false;
                }
            }
        }
        seen.iter().all(|&c| c == 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_example() {
        let j = vec![vec![1, 0], vec![-1, 0], vec![1, 1]];
        let d = sign_pattern_decompose(&j).unwrap();
        let summary: Vec<(Vec<usize>, Vec<i64>, Vec<Vec<i64>>)> =
            d.groups.iter().map(|g| (g.subset.clone(), g.key.clone(), g.vectors.clone())).collect();
        assert_eq!(
            summary,
            vec![
                (vec![1], vec![0], vec![vec![-1, 0]]),
                (vec![0, 1], vec![1, 0], vec![vec![1, 0]]),
                (vec![0, 1], vec![1, 1], vec![vec![1, 1]]),
            ]
        );
    }

    #[test]
    fn all_nonnegative_and_all_negative() {
        let j = vec![vec![0, 2, 1], vec![3, 0, 0]];
        let d = sign_pattern_decompose(&j).unwrap();
        assert!(d.groups.iter().all(|g| g.subset == vec![0, 1, 2]));
        let j = vec![vec![-1, -2], vec![-3, -1], vec![-1, -1]];
        let d = sign_pattern_decompose(&j).unwrap();
        assert_eq!(d.groups.len(), 1);
        assert!(d.groups[0].subset.is_empty());
        assert_eq!(d.groups[0].members, vec![0, 1, 2]);
    }

    #[test]
    fn ragged_input_is_rejected() {
        assert!(sign_pattern_decompose(&[vec![1], vec![1, 2]]).is_err());
        assert!(sign_pattern_decompose(&[]).unwrap().groups.is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn decomposition_partitions(
            j in (1usize..=4).prop_flat_map(|k| prop::collection::vec(prop::collection::vec(-3i64..=3, k), 0..20))
        ) {
            let d = sign_pattern_decompose(&j).unwrap();
            prop_assert!(d.is_partition_of(&j));
        }
    }
}
