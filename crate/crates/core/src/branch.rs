//! Branches: conjunctions of `feature = category` clauses.
//!
//! A branch is identified by its clauses sorted by feature, which makes the
//! key independent of the order in which splits were applied. Its statistics
//! are the rows it contains and their class counts.

use std::fmt;
use std::str::FromStr;

use crate::dataset::EncodedDataset;
use crate::error::{Error, Result};

/// Canonical identity of a branch. The empty key is the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BranchKey(Vec<(u32, u32)>);

impl BranchKey {
    pub fn root() -> Self {
        BranchKey(Vec::new())
    }

    pub fn clauses(&self) -> &[(u32, u32)] {
        &self.0
    }

    /// Number of splits taken to reach the branch.
    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn uses(&self, feature: u32) -> bool {
        self.0.binary_search_by_key(&feature, |c| c.0).is_ok()
    }

    /// The branch extended by one clause on an unused feature.
    pub fn with(&self, feature: u32, category: u32) -> Result<Self> {
        match self.0.binary_search_by_key(&feature, |c| c.0) {
            Ok(_) => Err(Error::DuplicateFeature {
                feature: feature as usize,
            }),
            Err(pos) => {
                let mut clauses = Vec::with_capacity(self.0.len() + 1);
                clauses.extend_from_slice(&self.0[..pos]);
                clauses.push((feature, category));
                clauses.extend_from_slice(&self.0[pos..]);
                Ok(BranchKey(clauses))
            }
        }
    }

    /// Whether a row with the given encoded values satisfies every clause.
    pub fn contains(&self, row: &[u32]) -> bool {
        self.0.iter().all(|&(f, c)| row[f as usize] == c)
    }
}

/// Sorts clauses by feature; a repeated feature is rejected.
pub fn canonical_key(clauses: &[(u32, u32)]) -> Result<BranchKey> {
    let mut sorted = clauses.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateFeature {
            feature: w[0].0 as usize,
        });
    }
    Ok(BranchKey(sorted))
}

impl fmt::Display for BranchKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, j) in &self.0 {
            write!(f, "({i},{j})")?;
        }
        Ok(())
    }
}

impl FromStr for BranchKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownFormat(s.to_string());
        let body = s.trim();
        if body.is_empty() {
            return Ok(BranchKey::root());
        }
        let inner = body.strip_prefix('(').and_then(|b| b.strip_suffix(')')).ok_or_else(bad)?;
        let mut clauses = Vec::new();
        for part in inner.split(")(") {
            let (i, j) = part.split_once(',').ok_or_else(bad)?;
            clauses.push((i.trim().parse().map_err(|_| bad())?, j.trim().parse().map_err(|_| bad())?));
        }
        let key = canonical_key(&clauses)?;
        if key.0 != clauses {
            return Err(bad());
        }
        Ok(key)
    }
}

/// Rows in a branch and their class distribution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchStats {
    /// Sorted row indices.
    pub members: Vec<u32>,
    pub class_counts: Vec<u32>,
    pub n_l: usize,
    /// Most frequent class; the smallest index wins ties.
    pub majority: u32,
    /// `class_counts[majority]`.
    pub accuracy_count: usize,
}

impl BranchStats {
    pub fn from_members(members: Vec<u32>, labels: &[u32], k: usize) -> Self {
        let mut class_counts = vec![0u32; k.max(1)];
        for &m in &members {
            class_counts[labels[m as usize] as usize] += 1;
        }
        let mut majority = 0;
        for (c, &count) in class_counts.iter().enumerate() {
            if count > class_counts[majority] {
                majority = c;
            }
        }
        BranchStats {
            n_l: members.len(),
            accuracy_count: class_counts[majority] as usize,
            majority: majority as u32,
            class_counts,
            members,
        }
    }

    pub fn root(dataset: &EncodedDataset) -> Self {
        Self::from_members((0..dataset.n() as u32).collect(), dataset.labels(), dataset.k())
    }
}

/// Probability that a datum falls in the branch and is classified correctly
/// by its majority class.
pub fn branch_accuracy(stats: &BranchStats, n: usize) -> f64 {
    stats.accuracy_count as f64 / n as f64
}

/// Splits a branch on `feature`, returning one child per category in
/// category order. Categories are peeled off one at a time from the rows
/// not yet assigned; the last category takes the remainder.
pub fn split_branch(
    key: &BranchKey,
    stats: &BranchStats,
    feature: u32,
    dataset: &EncodedDataset,
) -> Result<Vec<(BranchKey, BranchStats)>> {
    if feature as usize >= dataset.q() {
        return Err(Error::Contract(format!(
            "feature {feature} out of range for {} features",
            dataset.q()
        )));
    }
    if key.uses(feature) {
        return Err(Error::Contract(format!(
            "feature {feature} already used by branch {key}"
        )));
    }
    let column = dataset.column(feature as usize);
    let cats = dataset.categories()[feature as usize];
    let mut remaining = stats.members.clone();
    let mut children = Vec::with_capacity(cats);
    for j in 0..cats as u32 {
        let members = if j + 1 == cats as u32 {
            std::mem::take(&mut remaining)
        } else {
            let (hit, rest): (Vec<u32>, Vec<u32>) =
                remaining.iter().partition(|&&m| column[m as usize] == j);
            remaining = rest;
            hit
        };
        let child_key = key.with(feature, j)?;
        children.push((child_key, BranchStats::from_members(members, dataset.labels(), dataset.k())));
    }
    Ok(children)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_key_sorts_and_prints() {
        assert_eq!(canonical_key(&[(3, 1), (1, 0)]).unwrap().to_string(), "(1,0)(3,1)");
        assert_eq!(canonical_key(&[]).unwrap().to_string(), "");
        assert!(matches!(
            canonical_key(&[(2, 1), (2, 0)]),
            Err(Error::DuplicateFeature { feature: 2 })
        ));
    }

    #[test]
    fn key_parse_round_trip() {
        let key = canonical_key(&[(4, 2), (0, 1), (2, 0)]).unwrap();
        assert_eq!(key.to_string().parse::<BranchKey>().unwrap(), key);
        assert_eq!("".parse::<BranchKey>().unwrap(), BranchKey::root());
        assert!("(2,0)(1,0)".parse::<BranchKey>().is_err());
        assert!("(1,0".parse::<BranchKey>().is_err());
    }

    #[test]
    fn with_inserts_in_order() {
        let key = BranchKey::root().with(3, 1).unwrap().with(1, 0).unwrap();
        assert_eq!(key.to_string(), "(1,0)(3,1)");
        assert!(key.uses(3) && !key.uses(2));
        assert!(key.with(1, 1).is_err());
    }

    #[test]
    fn accuracy_examples() {
        let labels = [0, 0, 0, 1, 0, 0, 1, 1];
        let s = BranchStats::from_members(vec![0, 1, 2, 3], &labels, 2);
        assert_eq!(s.class_counts, vec![3, 1]);
        assert_eq!(branch_accuracy(&s, 8), 0.375);
        let empty = BranchStats::from_members(vec![], &labels, 2);
        assert_eq!(branch_accuracy(&empty, 8), 0.0);
        let even = BranchStats::from_members((0..8).collect(), &[1, 1, 1, 1, 0, 0, 0, 0], 2);
        assert_eq!((even.majority, branch_accuracy(&even, 8)), (0, 0.5));
    }

    #[test]
    fn split_binary_partition() {
        let ds = EncodedDataset::from_rows(vec![2], &[vec![0], vec![1], vec![0], vec![1]], vec![0, 1, 0, 1]).unwrap();
        let root = BranchStats::root(&ds);
        let kids = split_branch(&BranchKey::root(), &root, 0, &ds).unwrap();
        assert_eq!(kids[0].1.members, vec![0, 2]);
        assert_eq!(kids[1].1.members, vec![1, 3]);
        assert_eq!(kids[1].0.to_string(), "(0,1)");
    }

    #[test]
    fn split_empty_parent() {
        let ds = EncodedDataset::from_rows(vec![3, 2], &[vec![0, 0], vec![1, 1], vec![2, 0]], vec![0, 1, 0]).unwrap();
        let empty = BranchStats::from_members(vec![], ds.labels(), 2);
        let kids = split_branch(&BranchKey::root(), &empty, 0, &ds).unwrap();
        assert_eq!(kids.len(), 3);
        assert!(kids.iter().all(|(_, s)| s.n_l == 0));
    }

    #[test]
    fn split_ternary_sizes() {
        let rows: Vec<Vec<u32>> = [0, 0, 1, 1, 2, 2].iter().map(|&v| vec![v]).collect();
        let ds = EncodedDataset::from_rows(vec![3], &rows, vec![0, 1, 0, 1, 0, 1]).unwrap();
        let kids = split_branch(&BranchKey::root(), &BranchStats::root(&ds), 0, &ds).unwrap();
        assert_eq!(kids.iter().map(|(_, s)| s.n_l).collect::<Vec<_>>(), vec![2, 2, 2]);
    }

    #[test]
    fn split_rejects_used_feature() {
        let ds = EncodedDataset::from_rows(vec![2], &[vec![0], vec![1]], vec![0, 1]).unwrap();
        let key = BranchKey::root().with(0, 1).unwrap();
        let stats = BranchStats::from_members(vec![1], ds.labels(), 2);
        assert!(matches!(split_branch(&key, &stats, 0, &ds), Err(Error::Contract(_))));
        assert!(split_branch(&BranchKey::root(), &stats, 1, &ds).is_err());
    }
}
