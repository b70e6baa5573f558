//! Verification instruments that do not depend on the search engine.
//!
//! [`Oracle`] evaluates the Bellman recursion over every branch with no
//! bounds and no pruning. [`tree_profiles`] enumerates the achievable
//! `(splits, correct)` pairs of all trees. The bound calculators count
//! branch evaluations in exact integer arithmetic.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;

use crate::dataset::EncodedDataset;
use crate::error::{Error, Result};
use crate::tree::{DecisionTree, Provenance, TreeNode};

/// Largest feature count the exhaustive tools accept by default.
pub const MAX_ORACLE_FEATURES: usize = 12;

/// Margin by which a split must beat the current best to be preferred.
const TIE: f64 = 1e-12;

type Clauses = Vec<(u32, u32)>;

/// Exhaustive optimum of `accuracy - lambda * splits` below any branch.
pub struct Oracle<'a> {
    dataset: &'a EncodedDataset,
    lambda: f64,
    max_depth: Option<usize>,
    memo: HashMap<Clauses, (f64, Option<u32>)>,
}

impl<'a> Oracle<'a> {
    pub fn new(dataset: &'a EncodedDataset, lambda: f64, max_depth: Option<usize>) -> Result<Self> {
        if dataset.q() > MAX_ORACLE_FEATURES {
            return Err(Error::SizeGuard(format!(
                "{} features exceed the oracle limit of {MAX_ORACLE_FEATURES}",
                dataset.q()
            )));
        }
        Ok(Self::unguarded(dataset, lambda, max_depth))
    }

    /// No size check; the caller accepts exponential cost.
    pub fn unguarded(dataset: &'a EncodedDataset, lambda: f64, max_depth: Option<usize>) -> Self {
        Oracle {
            dataset,
            lambda,
            max_depth,
            memo: HashMap::new(),
        }
    }

    /// Optimal value of the sub-tree rooted at the branch `clauses`
    /// (sorted by feature), as a fraction of the whole dataset.
    pub fn value(&mut self, clauses: &[(u32, u32)]) -> f64 {
        let members: Vec<usize> = (0..self.dataset.n())
            .filter(|&r| clauses.iter().all(|&(f, c)| self.dataset.value(r, f as usize) == c))
            .collect();
        self.solve(clauses.to_vec(), &members)
    }

    fn solve(&mut self, clauses: Clauses, members: &[usize]) -> f64 {
        if let Some(&(v, _)) = self.memo.get(&clauses) {
            return v;
        }
        let ds = self.dataset;
        let n = ds.n() as f64;
        let mut counts = vec![0usize; ds.k()];
        for &r in members {
            counts[ds.labels()[r] as usize] += 1;
        }
        let mut best = counts.iter().copied().max().unwrap_or(0) as f64 / n;
        let mut action = None;
        let depth = clauses.len();
        if depth < ds.q() && self.max_depth.map_or(true, |m| depth < m) {
            for f in 0..ds.q() as u32 {
                if clauses.iter().any(|c| c.0 == f) {
                    continue;
                }
                let mut total = -self.lambda;
                for j in 0..ds.categories()[f as usize] as u32 {
                    let sub: Vec<usize> = members
                        .iter()
                        .copied()
                        .filter(|&r| ds.value(r, f as usize) == j)
                        .collect();
                    let mut child = clauses.clone();
                    child.push((f, j));
                    child.sort_unstable();
                    total += self.solve(child, &sub);
                }
                if total > best + TIE {
                    best = total;
                    action = Some(f);
                }
            }
        }
        self.memo.insert(clauses, (best, action));
        best
    }

    /// An optimal tree for the whole dataset and its value.
    pub fn optimal_tree(&mut self) -> (f64, DecisionTree) {
        let value = self.value(&[]);
        let root = self.build(Vec::new());
        let ds = self.dataset;
        let tree = DecisionTree::new(root, self.lambda, ds.encoding(), Provenance::Solved, ds.maps().clone());
        (value, tree)
    }

    fn build(&self, clauses: Clauses) -> TreeNode {
        let ds = self.dataset;
        match self.memo[&clauses].1 {
            None => {
                let mut counts = vec![0usize; ds.k()];
                for r in (0..ds.n()).filter(|&r| clauses.iter().all(|&(f, c)| ds.value(r, f as usize) == c)) {
                    counts[ds.labels()[r] as usize] += 1;
                }
                let mut majority = 0;
                for (c, &count) in counts.iter().enumerate() {
                    if count > counts[majority] {
                        majority = c;
                    }
                }
                TreeNode::Leaf { leaf: majority as u32 }
            }
            Some(f) => TreeNode::Split {
                feature: f,
                children: (0..ds.categories()[f as usize] as u32)
                    .map(|j| {
                        let mut child = clauses.clone();
                        child.push((f, j));
                        child.sort_unstable();
                        self.build(child)
                    })
                    .collect(),
            },
        }
    }
}

/// Optimal objective and a tree attaining it, by exhaustive dynamic
/// programming. Ties prefer a leaf, then the smallest feature.
pub fn brute_force_optimal(dataset: &EncodedDataset, lambda: f64, max_depth: Option<usize>) -> Result<(f64, DecisionTree)> {
    Ok(Oracle::new(dataset, lambda, max_depth)?.optimal_tree())
}

/// Every `(splits, correctly classified rows)` pair achieved by some tree.
pub fn tree_profiles(dataset: &EncodedDataset, max_depth: Option<usize>) -> Result<BTreeSet<(usize, usize)>> {
    if dataset.q() > MAX_ORACLE_FEATURES {
        return Err(Error::SizeGuard(format!("{} features", dataset.q())));
    }
    let members: Vec<usize> = (0..dataset.n()).collect();
    let mut memo = HashMap::new();
    Ok(profiles(dataset, max_depth, Vec::new(), &members, &mut memo))
}

fn profiles(
    ds: &EncodedDataset,
    max_depth: Option<usize>,
    clauses: Clauses,
    members: &[usize],
    memo: &mut HashMap<Clauses, BTreeSet<(usize, usize)>>,
) -> BTreeSet<(usize, usize)> {
    if let Some(p) = memo.get(&clauses) {
        return p.clone();
    }
    let mut counts = vec![0usize; ds.k()];
    for &r in members {
        counts[ds.labels()[r] as usize] += 1;
    }
    let mut out = BTreeSet::from([(0, counts.iter().copied().max().unwrap_or(0))]);
    let depth = clauses.len();
    if depth < ds.q() && max_depth.map_or(true, |m| depth < m) {
        for f in 0..ds.q() as u32 {
            if clauses.iter().any(|c| c.0 == f) {
                continue;
            }
            let mut acc = BTreeSet::from([(1usize, 0usize)]);
            for j in 0..ds.categories()[f as usize] as u32 {
                let sub: Vec<usize> = members.iter().copied().filter(|&r| ds.value(r, f as usize) == j).collect();
                let mut child = clauses.clone();
                child.push((f, j));
                child.sort_unstable();
                let child_profiles = profiles(ds, max_depth, child, &sub, memo);
                acc = acc
                    .iter()
                    .flat_map(|&(s, c)| child_profiles.iter().map(move |&(s2, c2)| (s + s2, c + c2)))
                    .collect();
            }
            out.extend(acc);
        }
    }
    memo.insert(clauses, out.clone());
    out
}

/// Inputs of the evaluation-count bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundInputs {
    pub q: usize,
    /// Categories per feature.
    pub c: usize,
    /// Number of classes.
    pub k: usize,
    pub lambda: f64,
    /// Split count of an optimal tree.
    pub s_star: Option<usize>,
    /// Accuracy of an optimal tree.
    pub h_star: Option<f64>,
}

impl BoundInputs {
    pub fn new(q: usize, c: usize, k: usize, lambda: f64) -> Self {
        BoundInputs {
            q,
            c,
            k,
            lambda,
            s_star: None,
            h_star: None,
        }
    }

    pub fn with_solution(mut self, s_star: usize, h_star: f64) -> Self {
        self.s_star = Some(s_star);
        self.h_star = Some(h_star);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 2 || self.c < 2 || self.k < 2 {
            return Err(Error::InvalidConfig(format!(
                "bounds need q, C, K >= 2 (got q={}, C={}, K={})",
                self.q, self.c, self.k
            )));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::InvalidConfig(format!("lambda {} outside (0, 1)", self.lambda)));
        }
        if self.s_star.is_some() != self.h_star.is_some() {
            return Err(Error::InvalidConfig("s_star and h_star must be given together".into()));
        }
        if let Some(h) = self.h_star {
            if !(0.0..=1.0).contains(&h) {
                return Err(Error::InvalidConfig(format!("h_star {h} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Depth limit from the class count alone.
    pub fn kappa_independent(&self) -> i64 {
        let raw = floor(1.0 / (self.k as f64 * self.lambda)) - 1;
        raw.min(self.q as i64)
    }

    /// Depth limit from a known optimal tree, if one was supplied.
    pub fn kappa_dependent(&self) -> Option<i64> {
        let (s, h) = (self.s_star?, self.h_star?);
        let raw = floor(s as f64 - 1.0 + (1.0 - h) / self.lambda);
        Some(raw.min(self.q as i64))
    }
}

/// Floor that absorbs representation error just below an integer.
fn floor(x: f64) -> i64 {
    (x + 1e-9).floor() as i64
}

/// `sum_{h=0}^{kappa} (q - h) * C^(h+1) * binom(q, h)`; empty when `kappa < 0`.
pub fn gamma_sum(q: usize, c: usize, kappa: i64) -> BigUint {
    let mut total = BigUint::from(0u32);
    if kappa < 0 {
        return total;
    }
    let c_big = BigUint::from(c);
    let mut binom = BigUint::from(1u32);
    let mut power = c_big.clone();
    for h in 0..=(kappa as usize).min(q) {
        total += BigUint::from(q - h) * &power * &binom;
        binom = binom * BigUint::from(q - h) / BigUint::from(h + 1);
        power *= &c_big;
    }
    total
}

/// The problem-independent bound.
pub fn gamma_independent(inputs: &BoundInputs) -> Result<BigUint> {
    inputs.validate()?;
    Ok(gamma_sum(inputs.q, inputs.c, inputs.kappa_independent()))
}

/// The problem-dependent bound when an optimal tree is supplied, otherwise
/// the problem-independent one.
pub fn gamma_bound(inputs: &BoundInputs) -> Result<BigUint> {
    inputs.validate()?;
    let kappa = inputs.kappa_dependent().unwrap_or_else(|| inputs.kappa_independent());
    Ok(gamma_sum(inputs.q, inputs.c, kappa))
}

/// `floor(log10(x))`, or `None` for zero.
pub fn log10_floor(x: &BigUint) -> Option<u32> {
    if x == &BigUint::from(0u32) {
        None
    } else {
        Some(x.to_str_radix(10).len() as u32 - 1)
    }
}

/// Closed form `3^(qC) - (2C + 1)^q` for the branches binary encoding adds.
pub fn unnecessary_branch_count(q: usize, c: usize) -> BigUint {
    BigUint::from(3u32).pow((q * c) as u32) - BigUint::from(2 * c + 1).pow(q as u32)
}

/// Counts, by enumeration, branches over the one-hot encoding of `q`
/// features with `C` categories each that no encoded point satisfies.
pub fn enumerate_empty_branches(q: usize, c: usize) -> Result<u64> {
    let width = q * c;
    if width > 12 {
        return Err(Error::SizeGuard(format!("q*C = {width} exceeds 12")));
    }
    // Each encoded point as the bitmask of indicators equal to 1.
    let mut points: Vec<u32> = vec![0];
    for i in 0..q {
        points = points
            .iter()
            .flat_map(|&p| (0..c).map(move |j| p | 1 << (i * c + j)))
            .collect();
    }
    let mut empty = 0u64;
    for code in 0..3u64.pow(width as u32) {
        let (mut pos, mut neg, mut rest) = (0u32, 0u32, code);
        for bit in 0..width {
            match rest % 3 {
                1 => neg |= 1 << bit,
                2 => pos |= 1 << bit,
                _ => {}
            }
            rest /= 3;
        }
        if !points.iter().any(|&p| p & pos == pos && p & neg == 0) {
            empty += 1;
        }
    }
    Ok(empty)
}
