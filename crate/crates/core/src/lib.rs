//! Provably optimal sparse decision trees for categorical data.
//!
//! The learner maximises `accuracy(T) - lambda * splits(T)` over all
//! decision trees built from multiway categorical splits. It runs an AO*
//! search over the AND/OR graph whose nodes are *branches* (conjunctions of
//! `feature = category` clauses). Upper bounds start from the purification
//! bound `max(H(l), -lambda + n(l)/n)` and are tightened along the selected
//! path after every expansion; the search stops when the root is SOLVED.
//! A greedy lower-bound policy is maintained alongside so a valid tree can be
//! returned at any time.
//!
//! Module map:
//!
//! - [`dataset`]: CSV ingestion and the ordinal / one-hot encodings.
//! - [`branch`]: canonical branch keys, per-branch statistics, splitting.
//! - [`heuristics`]: exact scores, the purification bound, action queues.
//! - [`search`]: the AO* engine, anytime extraction and tracing.
//! - [`tree`]: decision tree values, prediction, objective, JSON / DOT.
//! - [`analysis`]: brute-force oracle, complexity bounds, encoding analytics.
//! - [`suite`]: run reports and regression suites.
//! - [`synth`]: seeded random instances for tests and benchmarks.

pub mod analysis;
pub mod branch;
pub mod dataset;
mod error;
pub mod heuristics;
pub mod search;
pub mod suite;
pub mod synth;
pub mod tree;

pub use dataset::{load_csv, ClassColumn, EncodedDataset, Encoding, RawTable};
pub use error::{Error, Result};
pub use search::{fit, Engine, SearchConfig, SearchStats, Termination};
pub use tree::{DecisionTree, Provenance, TreeNode};
