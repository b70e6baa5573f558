//! AO* search over the AND/OR graph of branches.
//!
//! Each iteration selects a frontier branch by following best actions from
//! the root, expands it by evaluating every child of every remaining split,
//! and tightens upper bounds back along the selected path. The root is
//! SOLVED once its best action is terminal or all children of its best split
//! are SOLVED; the tree read off the best actions is then optimal.
//!
//! Alongside the upper bounds the engine keeps greedy values: the best
//! objective of any tree whose internal nodes are already expanded. These
//! give a valid tree at any point, which is what a timeout returns.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::{Duration, Instant};

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::branch::{split_branch, BranchKey, BranchStats};
use crate::dataset::EncodedDataset;
use crate::error::{Error, Result};
use crate::heuristics::{ActionEntry, ActionQueue, Objective, Score};
use crate::tree::{DecisionTree, Provenance, TreeNode};

pub type NodeId = u32;

pub const ROOT: NodeId = 0;

/// Split work below this many row visits stays on the calling thread.
#[cfg(feature = "parallel")]
const PARALLEL_MIN_WORK: usize = 1 << 14;

/// How Selection picks among the unsolved children of a best action.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChildChoice {
    /// Child with the lowest greedy value.
    #[default]
    LowestGreedy,
    /// Child with the lowest upper bound.
    LowestUpper,
}

impl FromStr for ChildChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lowest-greedy" | "greedy" => Ok(ChildChoice::LowestGreedy),
            "lowest-upper" | "upper" => Ok(ChildChoice::LowestUpper),
            _ => Err(Error::UnknownFormat(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub lambda: f64,
    /// Largest number of splits on any path; `None` is unlimited.
    pub max_depth: Option<usize>,
    /// Checked before each Selection.
    pub timeout: Option<Duration>,
    /// Deterministic alternative to a timeout.
    pub max_iterations: Option<u64>,
    pub child_choice: ChildChoice,
    /// Evaluate the children of different features on the rayon pool. Has no
    /// effect when the crate is built without the `parallel` feature.
    pub parallel: bool,
}

impl SearchConfig {
    pub fn new(lambda: f64) -> Self {
        SearchConfig {
            lambda,
            max_depth: None,
            timeout: None,
            max_iterations: None,
            child_choice: ChildChoice::default(),
            parallel: cfg!(feature = "parallel"),
        }
    }

    pub fn max_depth(mut self, depth: Option<usize>) -> Self {
        self.max_depth = depth;
        self
    }

    pub fn timeout(mut self, timeout: Option<Duration>) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn max_iterations(mut self, limit: Option<u64>) -> Self {
        self.max_iterations = limit;
        self
    }

    pub fn child_choice(mut self, choice: ChildChoice) -> Self {
        self.child_choice = choice;
        self
    }

    pub fn parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda must lie strictly between 0 and 1, got {}",
                self.lambda
            )));
        }
        if self.max_depth == Some(0) {
            return Err(Error::InvalidConfig("max_depth must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Solved,
    Timeout,
    IterationLimit,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Solved => "solved",
            Termination::Timeout => "timeout",
            Termination::IterationLimit => "iteration_limit",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchStats {
    /// Number of Selections performed.
    pub iterations: u64,
    /// Branches whose statistics were computed, excluding the root.
    pub evaluations: u64,
    pub elapsed: Duration,
    pub termination: Termination,
    pub memo_size: usize,
    /// Objective of the returned tree, recomputed on the dataset.
    pub objective: f64,
    pub accuracy: f64,
}

/// A memoized branch and everything the search knows about it.
#[derive(Clone, Debug)]
pub struct BranchNode {
    pub key: BranchKey,
    pub stats: BranchStats,
    pub depth: usize,
    pub v_upper: Score,
    pub q_terminal: Score,
    pub v_greedy: Score,
    /// `None` is the terminal action.
    pub best_greedy_action: Option<u32>,
    pub expanded: bool,
    pub solved: bool,
    /// The terminal action attains `v_upper`.
    pub terminal_opt: bool,
    pub has_split_actions: bool,
    /// Child ids per expanded feature, in feature order.
    pub children: Vec<(u32, Vec<NodeId>)>,
    pub queue: ActionQueue,
}

impl BranchNode {
    pub fn children_of(&self, feature: u32) -> Option<&[NodeId]> {
        self.children
            .binary_search_by_key(&feature, |c| c.0)
            .ok()
            .map(|i| self.children[i].1.as_slice())
    }
}

/// What one call to [`Engine::step`] did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Iteration {
    /// 1-based.
    pub number: u64,
    pub selected: NodeId,
    pub expanded: bool,
}

/// Column names of [`Engine::trace_line`].
pub const TRACE_HEADER: &str = "iteration\tbranch\tv_root\tv_greedy_root\tmemo_size\tevaluations";

pub struct Engine<'a> {
    dataset: &'a EncodedDataset,
    config: SearchConfig,
    obj: Objective,
    nodes: Vec<BranchNode>,
    index: HashMap<BranchKey, NodeId>,
    iterations: u64,
    evaluations: u64,
    started: Instant,
}

impl<'a> Engine<'a> {
    /// Creates the memo with the root branch initialized.
    pub fn new(dataset: &'a EncodedDataset, config: SearchConfig) -> Result<Self> {
        config.validate()?;
        let mut engine = Engine {
            dataset,
            obj: Objective::new(dataset.n(), config.lambda),
            config,
            nodes: Vec::new(),
            index: HashMap::new(),
            iterations: 0,
            evaluations: 0,
            started: Instant::now(),
        };
        engine.insert(BranchKey::root(), BranchStats::root(dataset));
        Ok(engine)
    }

    pub fn dataset(&self) -> &EncodedDataset {
        self.dataset
    }

    pub fn config(&self) -> &SearchConfig {
        &self.config
    }

    pub fn objective(&self) -> Objective {
        self.obj
    }

    pub fn value(&self, s: Score) -> f64 {
        self.obj.value(s)
    }

    pub fn nodes(&self) -> &[BranchNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &BranchNode {
        &self.nodes[id as usize]
    }

    pub fn root(&self) -> &BranchNode {
        self.node(ROOT)
    }

    pub fn lookup(&self, key: &BranchKey) -> Option<NodeId> {
        self.index.get(key).copied()
    }

    pub fn is_solved(&self) -> bool {
        self.root().solved
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    fn has_split_actions(&self, depth: usize) -> bool {
        depth < self.dataset.q() && self.config.max_depth.map_or(true, |m| depth < m)
    }

    fn insert(&mut self, key: BranchKey, stats: BranchStats) -> NodeId {
        let depth = key.depth();
        let has_split_actions = self.has_split_actions(depth);
        let (v_upper, solved) = self.obj.purification_bound(&stats, has_split_actions);
        let q_terminal = self.obj.q_terminal(&stats);
        let id = self.nodes.len() as NodeId;
        self.index.insert(key.clone(), id);
        self.nodes.push(BranchNode {
            key,
            stats,
            depth,
            v_upper,
            q_terminal,
            v_greedy: q_terminal,
            best_greedy_action: None,
            expanded: false,
            solved,
            terminal_opt: solved,
            has_split_actions,
            children: Vec::new(),
            queue: ActionQueue::new(),
        });
        id
    }

    /// Runs one Selection, the Expansion it calls for, and Backpropagation.
    /// Returns `None` once the root is solved.
    pub fn step(&mut self) -> Option<Iteration> {
        if self.is_solved() {
            return None;
        }
        let path = self.select();
        let selected = *path.last().expect("path starts at the root");
        let node = self.node(selected);
        let expanded = !node.solved && !node.expanded;
        if expanded {
            self.expand(selected).expect("selected branch is expandable");
        }
        self.backpropagate(&path);
        self.iterations += 1;
        Some(Iteration {
            number: self.iterations,
            selected,
            expanded,
        })
    }

    /// Follows best actions from the root to a branch that is unexpanded,
    /// SOLVED, or whose best action has no unsolved child left.
    pub fn select(&self) -> Vec<NodeId> {
        let mut path = vec![ROOT];
        let mut current = ROOT;
        loop {
            let node = self.node(current);
            if node.solved || !node.expanded {
                return path;
            }
            let top = node.queue.peek().expect("expanded branch has split actions");
            let next = top
                .unsolved
                .iter()
                .copied()
                .filter(|&c| !self.node(c).solved)
                .min_by(|&a, &b| self.child_order(a, b));
            match next {
                Some(child) => {
                    path.push(child);
                    current = child;
                }
                None => return path,
            }
        }
    }

    fn child_order(&self, a: NodeId, b: NodeId) -> Ordering {
        let (na, nb) = (self.node(a), self.node(b));
        let by_value = match self.config.child_choice {
            ChildChoice::LowestGreedy => self.obj.cmp(na.v_greedy, nb.v_greedy),
            ChildChoice::LowestUpper => self.obj.cmp(na.v_upper, nb.v_upper),
        };
        by_value.then_with(|| na.key.cmp(&nb.key))
    }

    /// Creates or looks up every child of every split action of `id`.
    pub fn expand(&mut self, id: NodeId) -> Result<()> {
        let node = self.node(id);
        if node.expanded || node.solved || !node.has_split_actions {
            return Err(Error::Contract(format!(
                "branch {} cannot be expanded (expanded={}, solved={})",
                node.key, node.expanded, node.solved
            )));
        }
        let features: Vec<u32> = (0..self.dataset.q() as u32).filter(|&f| !node.key.uses(f)).collect();
        let splits = self.compute_splits(node, &features);
        for (&feature, kids) in features.iter().zip(splits) {
            let mut ids = Vec::with_capacity(kids.len());
            for (key, stats) in kids {
                let child = match self.index.get(&key) {
                    Some(&c) => c,
                    None => {
                        self.evaluations += 1;
                        self.insert(key, stats)
                    }
                };
                ids.push(child);
            }
            let mut solved_contribution = Score::SPLIT;
            let mut unsolved_sum = Score::ZERO;
            let mut unsolved = Vec::new();
            for &c in &ids {
                let child = self.node(c);
                if child.solved {
                    solved_contribution += child.v_upper;
                } else {
                    unsolved_sum += child.v_upper;
                    unsolved.push(c);
                }
            }
            let entry = ActionEntry::new(&self.obj, feature, solved_contribution, unsolved, unsolved_sum);
            let node = &mut self.nodes[id as usize];
            node.queue.push(entry);
            node.children.push((feature, ids));
        }
        self.nodes[id as usize].expanded = true;
        self.refresh(id);
        Ok(())
    }

    fn compute_splits(&self, node: &BranchNode, features: &[u32]) -> Vec<Vec<(BranchKey, BranchStats)>> {
        let work = |&f: &u32| split_branch(&node.key, &node.stats, f, self.dataset).expect("feature is unused");
        #[cfg(feature = "parallel")]
        if self.config.parallel && features.len() > 1 && node.stats.n_l * features.len() >= PARALLEL_MIN_WORK {
            return features.par_iter().map(work).collect();
        }
        features.iter().map(work).collect()
    }

    /// Refreshes every branch on `path`, deepest first.
    pub fn backpropagate(&mut self, path: &[NodeId]) {
        for &id in path.iter().rev() {
            self.refresh(id);
        }
    }

    /// Brings the best queue entry up to date, then recomputes the upper
    /// bound, the SOLVED flag and the greedy value of one branch.
    fn refresh(&mut self, id: NodeId) {
        let node = self.node(id);
        if node.solved || !node.expanded {
            return;
        }
        loop {
            let mut top = self.nodes[id as usize].queue.pop().expect("expanded branch has split actions");
            let mut solved_contribution = top.solved_contribution;
            let mut unsolved_sum = Score::ZERO;
            let nodes = &self.nodes;
            top.unsolved.retain(|&c| {
                let child = &nodes[c as usize];
                if child.solved {
                    solved_contribution += child.v_upper;
                    false
                } else {
                    unsolved_sum += child.v_upper;
                    true
                }
            });
            let feature = top.feature;
            top.set(&self.obj, solved_contribution, unsolved_sum);
            let queue = &mut self.nodes[id as usize].queue;
            queue.push(top);
            if queue.peek().map(|e| e.feature) == Some(feature) {
                break;
            }
        }

        let actions: Vec<(u32, Score)> = self
            .node(id)
            .children
            .iter()
            .map(|(f, ids)| (*f, ids.iter().map(|&c| self.node(c).v_greedy).sum()))
            .collect();
        let obj = self.obj;
        let node = &mut self.nodes[id as usize];
        let (v, terminal) = obj.v_update(node.q_terminal, &node.queue);
        node.v_upper = v;
        node.terminal_opt = terminal;
        node.solved = terminal || node.queue.peek().is_some_and(|e| e.unsolved.is_empty());
        let (g, action) = obj.greedy_value_update(node.q_terminal, actions);
        node.v_greedy = g;
        node.best_greedy_action = action;
    }

    /// Iterates until the root is solved or a budget runs out.
    pub fn run(&mut self) -> Termination {
        self.run_with(|_, _| {})
    }

    /// As [`Engine::run`], calling `observer` after every iteration.
    pub fn run_with(&mut self, mut observer: impl FnMut(&Self, &Iteration)) -> Termination {
        loop {
            if self.is_solved() {
                return Termination::Solved;
            }
            if self.config.timeout.is_some_and(|t| self.started.elapsed() >= t) {
                return Termination::Timeout;
            }
            if self.config.max_iterations.is_some_and(|m| self.iterations >= m) {
                return Termination::IterationLimit;
            }
            let it = self.step().expect("root is unsolved");
            observer(self, &it);
        }
    }

    /// The optimal tree read off the best actions of a solved root.
    pub fn infer(&self) -> Result<DecisionTree> {
        if !self.is_solved() {
            return Err(Error::Contract("the root branch is not solved".into()));
        }
        Ok(self.make_tree(self.build_solved(ROOT), Provenance::Solved))
    }

    fn build_solved(&self, id: NodeId) -> TreeNode {
        let node = self.node(id);
        if node.terminal_opt || !node.expanded {
            return TreeNode::Leaf { leaf: node.stats.majority };
        }
        let feature = node.queue.peek().expect("expanded branch has split actions").feature;
        let children = node.children_of(feature).expect("queued feature was expanded");
        TreeNode::Split {
            feature,
            children: children.iter().map(|&c| self.build_solved(c)).collect(),
        }
    }

    /// The best tree found so far. Greedy values are recomputed over the
    /// whole expanded graph first, since branches shared by several parents
    /// may have improved along another path.
    pub fn infer_anytime(&self) -> DecisionTree {
        let greedy = self.greedy_values();
        let root = self.build_greedy(ROOT, &greedy);
        self.make_tree(root, Provenance::Anytime)
    }

    /// Objective of the tree [`Engine::infer_anytime`] would return.
    pub fn anytime_value(&self) -> f64 {
        self.value(self.greedy_values()[ROOT as usize].expect("root is visited").0)
    }

    fn greedy_values(&self) -> Vec<Option<(Score, Option<u32>)>> {
        let mut memo = vec![None; self.nodes.len()];
        self.greedy_visit(ROOT, &mut memo);
        memo
    }

    fn greedy_visit(&self, id: NodeId, memo: &mut Vec<Option<(Score, Option<u32>)>>) -> Score {
        if let Some((s, _)) = memo[id as usize] {
            return s;
        }
        let node = self.node(id);
        let mut actions = Vec::with_capacity(node.children.len());
        for (f, ids) in &node.children {
            let sum = ids.iter().map(|&c| self.greedy_visit(c, memo)).sum();
            actions.push((*f, sum));
        }
        let best = self.obj.greedy_value_update(node.q_terminal, actions);
        memo[id as usize] = Some(best);
        best.0
    }

    fn build_greedy(&self, id: NodeId, greedy: &[Option<(Score, Option<u32>)>]) -> TreeNode {
        let node = self.node(id);
        match greedy[id as usize].and_then(|g| g.1) {
            None => TreeNode::Leaf { leaf: node.stats.majority },
            Some(feature) => TreeNode::Split {
                feature,
                children: node
                    .children_of(feature)
                    .expect("greedy action was expanded")
                    .iter()
                    .map(|&c| self.build_greedy(c, greedy))
                    .collect(),
            },
        }
    }

    fn make_tree(&self, root: TreeNode, provenance: Provenance) -> DecisionTree {
        DecisionTree::new(
            root,
            self.config.lambda,
            self.dataset.encoding(),
            provenance,
            self.dataset.maps().clone(),
        )
    }

    /// The tree for `termination` and the run's statistics.
    pub fn finish(&self, termination: Termination) -> Result<(DecisionTree, SearchStats)> {
        let tree = match termination {
            Termination::Solved => self.infer()?,
            Termination::Timeout | Termination::IterationLimit => self.infer_anytime(),
        };
        let eval = tree.evaluate(self.dataset)?;
        let stats = SearchStats {
            iterations: self.iterations,
            evaluations: self.evaluations,
            elapsed: self.started.elapsed(),
            termination,
            memo_size: self.nodes.len(),
            objective: eval.objective,
            accuracy: eval.accuracy,
        };
        Ok((tree, stats))
    }

    /// One tab-separated trace line for an iteration; see [`TRACE_HEADER`].
    pub fn trace_line(&self, it: &Iteration) -> String {
        let root = self.root();
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            it.number,
            self.node(it.selected).key,
            fmt_value(self.value(root.v_upper)),
            fmt_value(self.value(root.v_greedy)),
            self.nodes.len(),
            self.evaluations
        )
    }

    /// Tab-separated dump of every memoized branch in creation order.
    pub fn dump_memo(&self) -> String {
        let mut out = String::from("branch\tdepth\tn_l\tv_upper\tq_terminal\tv_greedy\texpanded\tsolved\n");
        for n in &self.nodes {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                n.key,
                n.depth,
                n.stats.n_l,
                fmt_value(self.value(n.v_upper)),
                fmt_value(self.value(n.q_terminal)),
                fmt_value(self.value(n.v_greedy)),
                n.expanded,
                n.solved
            );
        }
        out
    }
}

/// Decimal rendering with at most 12 significant digits.
pub fn fmt_value(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{}", if x == 0.0 { 0.0 } else { x });
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Learns a tree: optimal when the search terminates solved, otherwise the
/// best tree found within the budget.
pub fn fit(dataset: &EncodedDataset, config: SearchConfig) -> Result<(DecisionTree, SearchStats)> {
    let mut engine = Engine::new(dataset, config)?;
    let termination = engine.run();
    engine.finish(termination)
}
