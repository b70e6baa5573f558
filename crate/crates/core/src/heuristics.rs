//! Value estimates and the per-branch action queue.
//!
//! Every value the search manipulates has the form `count / n - lambda * splits`
//! with integer `count` and `splits`, so values are carried as a [`Score`]
//! and only converted to `f64` for comparison. Sums stay exact no matter how
//! many children are added.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, AddAssign};

use crate::branch::BranchStats;

/// Absolute tolerance for value comparisons.
pub const EPS: f64 = 1e-10;

/// `count / n - lambda * splits`, kept symbolic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Score {
    pub count: i64,
    pub splits: i64,
}

impl Score {
    pub const ZERO: Score = Score { count: 0, splits: 0 };
    /// The `-lambda` paid by one split.
    pub const SPLIT: Score = Score { count: 0, splits: 1 };

    pub fn new(count: usize, splits: usize) -> Self {
        Score {
            count: count as i64,
            splits: splits as i64,
        }
    }
}

impl Add for Score {
    type Output = Score;

    fn add(self, rhs: Score) -> Score {
        Score {
            count: self.count + rhs.count,
            splits: self.splits + rhs.splits,
        }
    }
}

impl AddAssign for Score {
    fn add_assign(&mut self, rhs: Score) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for Score {
    fn sum<I: Iterator<Item = Score>>(iter: I) -> Score {
        iter.fold(Score::ZERO, Add::add)
    }
}

/// Converts scores to values and compares them for one `(n, lambda)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Objective {
    pub n: usize,
    pub lambda: f64,
}

impl Objective {
    pub fn new(n: usize, lambda: f64) -> Self {
        Objective { n, lambda }
    }

    pub fn value(&self, s: Score) -> f64 {
        s.count as f64 / self.n as f64 - self.lambda * s.splits as f64
    }

    /// Tolerance-aware comparison. The difference is formed from the integer
    /// deltas, so equal scores always compare equal.
    pub fn cmp(&self, a: Score, b: Score) -> Ordering {
        let d = (a.count - b.count) as f64 / self.n as f64 - self.lambda * (a.splits - b.splits) as f64;
        if d > EPS {
            Ordering::Greater
        } else if d < -EPS {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }

    pub fn gt(&self, a: Score, b: Score) -> bool {
        self.cmp(a, b) == Ordering::Greater
    }

    /// `Q(l, terminal) = n_{k*}(l) / n`.
    pub fn q_terminal(&self, stats: &BranchStats) -> Score {
        Score::new(stats.accuracy_count, 0)
    }

    /// Initial upper bound and whether the branch is solved by it. Any split
    /// costs at least `lambda` and can at best classify the whole branch.
    pub fn purification_bound(&self, stats: &BranchStats, has_split_actions: bool) -> (Score, bool) {
        let terminal = self.q_terminal(stats);
        if !has_split_actions {
            return (terminal, true);
        }
        let pure = Score::new(stats.n_l, 1);
        if self.gt(pure, terminal) {
            (pure, false)
        } else {
            (terminal, true)
        }
    }

    /// `max(q_terminal, best queued Q)`, and whether the terminal action
    /// attains it. Ties go to the terminal action.
    pub fn v_update(&self, q_terminal: Score, queue: &ActionQueue) -> (Score, bool) {
        match queue.peek() {
            Some(top) if self.gt(top.q, q_terminal) => (top.q, false),
            _ => (q_terminal, true),
        }
    }

    /// Best value found so far: the terminal value or an expanded action's
    /// `-lambda + sum of child greedy values`. Returns the action (`None` for
    /// terminal). Earlier candidates win ties, so pass actions in feature order.
    pub fn greedy_value_update(
        &self,
        h: Score,
        actions: impl IntoIterator<Item = (u32, Score)>,
    ) -> (Score, Option<u32>) {
        let mut best = (h, None);
        for (feature, child_sum) in actions {
            let q = q_split(std::iter::once(child_sum));
            if self.gt(q, best.0) {
                best = (q, Some(feature));
            }
        }
        best
    }
}

/// `Q(l, a) = -lambda + sum of child values`.
pub fn q_split(child_values: impl IntoIterator<Item = Score>) -> Score {
    Score::SPLIT + child_values.into_iter().sum()
}

/// Floating-point form of the purification bound for direct use.
pub fn purification_bound(stats: &BranchStats, n: usize, lambda: f64, has_split_actions: bool) -> (f64, bool) {
    let obj = Objective::new(n, lambda);
    let (v, solved) = obj.purification_bound(stats, has_split_actions);
    (obj.value(v), solved)
}

/// One split action of a branch.
#[derive(Clone, Debug)]
pub struct ActionEntry {
    pub q: Score,
    /// `-lambda` plus the values of children already solved.
    pub solved_contribution: Score,
    pub feature: u32,
    /// Node ids of children not yet known to be solved.
    pub unsolved: Vec<u32>,
    q_value: f64,
    solved_value: f64,
}

impl ActionEntry {
    pub fn new(obj: &Objective, feature: u32, solved_contribution: Score, unsolved: Vec<u32>, unsolved_sum: Score) -> Self {
        let mut e = ActionEntry {
            q: Score::ZERO,
            solved_contribution,
            feature,
            unsolved,
            q_value: 0.0,
            solved_value: 0.0,
        };
        e.set(obj, solved_contribution, unsolved_sum);
        e
    }

    /// Reassigns the entry's values from its two components.
    pub fn set(&mut self, obj: &Objective, solved_contribution: Score, unsolved_sum: Score) {
        self.solved_contribution = solved_contribution;
        self.q = solved_contribution + unsolved_sum;
        self.q_value = obj.value(self.q);
        self.solved_value = obj.value(solved_contribution);
    }

    pub fn q_value(&self) -> f64 {
        self.q_value
    }

    pub fn solved_value(&self) -> f64 {
        self.solved_value
    }
}

fn tolerant(a: f64, b: f64) -> Ordering {
    if a - b > EPS {
        Ordering::Greater
    } else if b - a > EPS {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}

impl Ord for ActionEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        tolerant(self.q_value, other.q_value)
            .then_with(|| tolerant(self.solved_value, other.solved_value))
            .then_with(|| other.feature.cmp(&self.feature))
    }
}

impl PartialOrd for ActionEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for ActionEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ActionEntry {}

/// Max-priority queue of split actions ordered by
/// `(q desc, solved contribution desc, feature asc)`.
#[derive(Clone, Debug, Default)]
pub struct ActionQueue {
    heap: BinaryHeap<ActionEntry>,
}

impl ActionQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, entry: ActionEntry) {
        self.heap.push(entry);
    }

    pub fn pop(&mut self) -> Option<ActionEntry> {
        self.heap.pop()
    }

    pub fn peek(&self) -> Option<&ActionEntry> {
        self.heap.peek()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ActionEntry> {
        self.heap.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(accuracy_count: usize, n_l: usize) -> BranchStats {
        BranchStats {
            members: (0..n_l as u32).collect(),
            class_counts: vec![accuracy_count as u32, (n_l - accuracy_count) as u32],
            n_l,
            majority: 0,
            accuracy_count,
        }
    }

    #[test]
    fn purification_examples() {
        let (v, solved) = purification_bound(&stats(3, 5), 10, 0.1, true);
        assert!((v - 0.4).abs() < 1e-12 && !solved);
        let (v, solved) = purification_bound(&stats(5, 5), 10, 0.1, true);
        assert!((v - 0.5).abs() < 1e-12 && solved);
        let (v, solved) = purification_bound(&stats(2, 5), 10, 0.1, false);
        assert!((v - 0.2).abs() < 1e-12 && solved);
    }

    #[test]
    fn purification_tie_is_solved() {
        // H = 0.4 and -0.1 + 0.5 = 0.4
        let (v, solved) = purification_bound(&stats(4, 5), 10, 0.1, true);
        assert!((v - 0.4).abs() < 1e-12 && solved);
    }

    #[test]
    fn q_terminal_examples() {
        let obj = Objective::new(8, 0.1);
        assert_eq!(obj.value(obj.q_terminal(&stats(3, 4))), 0.375);
        assert_eq!(obj.value(obj.q_terminal(&stats(0, 0))), 0.0);
        assert_eq!(obj.value(obj.q_terminal(&stats(8, 8))), 1.0);
    }

    #[test]
    fn q_split_examples() {
        let obj = Objective::new(10, 0.1);
        assert!((obj.value(q_split([Score::new(3, 0), Score::new(4, 0)])) - 0.6).abs() < 1e-12);
        assert!((obj.value(q_split([Score::ZERO, Score::ZERO])) + 0.1).abs() < 1e-12);
        let obj = Objective::new(2, 0.01);
        assert!((obj.value(q_split([Score::new(1, 0), Score::new(1, 0)])) - 0.99).abs() < 1e-12);
    }

    #[test]
    fn v_update_examples() {
        let obj = Objective::new(40, 0.1);
        let mut queue = ActionQueue::new();
        assert_eq!(obj.v_update(Score::new(8, 0), &queue), (Score::new(8, 0), true));
        // Q = 0.6 = 28/40 - 0.1
        queue.push(ActionEntry::new(&obj, 0, Score::SPLIT, vec![], Score::new(28, 0)));
        assert_eq!(obj.v_update(Score::new(15, 0), &queue), (Score::new(28, 1), false));
        // q_terminal 0.5 beats Q 0.4
        let mut queue = ActionQueue::new();
        queue.push(ActionEntry::new(&obj, 0, Score::SPLIT, vec![], Score::new(20, 0)));
        assert_eq!(obj.v_update(Score::new(20, 0), &queue), (Score::new(20, 0), true));
    }

    #[test]
    fn greedy_examples() {
        let obj = Objective::new(8, 0.01);
        assert_eq!(obj.greedy_value_update(Score::new(3, 0), []), (Score::new(3, 0), None));
        // child sum 0.99 = 8/8 - 0.01
        let (v, a) = obj.greedy_value_update(Score::new(3, 0), [(2, Score::new(8, 1))]);
        assert!((obj.value(v) - 0.98).abs() < 1e-12);
        assert_eq!(a, Some(2));
        // equal-valued actions keep the first one offered
        let (_, a) = obj.greedy_value_update(Score::new(3, 0), [(1, Score::new(8, 1)), (4, Score::new(8, 1))]);
        assert_eq!(a, Some(1));
    }

    #[test]
    fn score_comparison_ignores_rounding() {
        // 0.97 reached through different (count, splits) pairs
        let obj = Objective::new(100, 0.01);
        assert_eq!(obj.cmp(Score::new(97, 0), Score::new(98, 1)), Ordering::Equal);
        assert_eq!(obj.cmp(Score::new(97, 0), Score::new(98, 2)), Ordering::Greater);
    }

    #[test]
    fn queue_orders_ties() {
        let obj = Objective::new(10, 0.1);
        let mut queue = ActionQueue::new();
        queue.push(ActionEntry::new(&obj, 3, Score::new(2, 1), vec![], Score::new(3, 0)));
        queue.push(ActionEntry::new(&obj, 1, Score::new(1, 1), vec![], Score::new(4, 0)));
        queue.push(ActionEntry::new(&obj, 2, Score::new(2, 1), vec![], Score::new(3, 0)));
        queue.push(ActionEntry::new(&obj, 0, Score::new(0, 1), vec![], Score::new(2, 0)));
        let order: Vec<u32> = std::iter::from_fn(|| queue.pop()).map(|e| e.feature).collect();
        assert_eq!(order, vec![2, 3, 1, 0]);
    }
}
