//! Run reports and regression suites.
//!
//! A suite is a TOML file with one `[[entry]]` table per run:
//!
//! ```toml
//! [[entry]]
//! name = "monk1"
//! data = "../data/monk1.csv"   # relative to the suite file
//! class_column = "class"       # name or index, default: last column
//! encoding = "onehot_full"
//! lambda = 0.01
//! max_depth = 4                # optional
//! timeout = 60.0               # optional, seconds
//! drop_constant = false        # optional
//! expected = { objective = 0.94, accuracy = 1.0, splits = 6 }
//! ```

use std::path::{Path, PathBuf};
use std::time::Duration;

use num_bigint::BigUint;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, brute_force_optimal, BoundInputs};
use crate::dataset::{encode, load_csv, ClassColumn, EncodedDataset, Encoding};
use crate::error::{Error, Result};
use crate::search::{fit, SearchConfig, SearchStats, Termination};
use crate::synth::{random_instance, Instance};
use crate::tree::DecisionTree;

/// Objective and accuracy tolerance when checking expectations.
pub const REPORT_TOLERANCE: f64 = 1e-3;

/// Metrics of one fit, serialized as a JSON line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub dataset: String,
    pub encoding: Encoding,
    pub lambda: f64,
    pub max_depth: Option<usize>,
    pub objective: f64,
    pub accuracy: f64,
    pub splits: usize,
    /// Wall time in seconds.
    pub time: f64,
    pub iterations: u64,
    pub evaluations: u64,
    pub termination: Termination,
}

impl RunReport {
    pub fn new(dataset: &str, encoding: Encoding, config: &SearchConfig, tree: &DecisionTree, stats: &SearchStats) -> Self {
        RunReport {
            dataset: dataset.to_string(),
            encoding,
            lambda: config.lambda,
            max_depth: config.max_depth,
            objective: stats.objective,
            accuracy: stats.accuracy,
            splits: tree.splits,
            time: stats.elapsed.as_secs_f64(),
            iterations: stats.iterations,
            evaluations: stats.evaluations,
            termination: stats.termination,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report fields serialize")
    }
}

/// Fits `dataset` and wraps the result in a report.
pub fn run(name: &str, dataset: &EncodedDataset, config: SearchConfig) -> Result<(DecisionTree, RunReport)> {
    let (tree, stats) = fit(dataset, config.clone())?;
    let report = RunReport::new(name, dataset.encoding(), &config, &tree, &stats);
    Ok((tree, report))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    pub objective: Option<f64>,
    pub accuracy: Option<f64>,
    pub splits: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteEntry {
    pub name: String,
    pub data: PathBuf,
    pub class_column: Option<String>,
    pub encoding: String,
    pub lambda: f64,
    pub max_depth: Option<usize>,
    /// Seconds.
    pub timeout: Option<f64>,
    #[serde(default)]
    pub drop_constant: bool,
    #[serde(default)]
    pub expected: Expected,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    #[serde(default, rename = "entry")]
    pub entries: Vec<SuiteEntry>,
}

impl Suite {
    /// Parses a suite and resolves data paths against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut suite: Suite = toml::from_str(text).map_err(|e| Error::Suite(e.to_string()))?;
        for entry in &mut suite.entries {
            if entry.data.is_relative() {
                entry.data = base.join(&entry.data);
            }
        }
        Ok(suite)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

/// Result of one suite entry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntryResult {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<RunReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub passed: bool,
    pub failures: Vec<String>,
}

impl EntryResult {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("entry result fields serialize")
    }
}

/// Loads, encodes and fits one dataset described by `entry`.
pub fn run_entry(entry: &SuiteEntry) -> Result<RunReport> {
    let class_column = entry
        .class_column
        .as_deref()
        .map_or_else(ClassColumn::default, |c| c.parse().expect("infallible"));
    let encoding: Encoding = entry.encoding.parse()?;
    let mut raw = load_csv(&entry.data, &class_column, true)?;
    if entry.drop_constant {
        raw = raw.drop_constant_features().0;
    }
    let dataset = encode(&raw, encoding)?;
    let config = SearchConfig::new(entry.lambda)
        .max_depth(entry.max_depth)
        .timeout(entry.timeout.map(Duration::from_secs_f64));
    Ok(run(&entry.name, &dataset, config)?.1)
}

/// Compares a report with expectations.
pub fn check(report: &RunReport, expected: &Expected) -> Vec<String> {
    let mut failures = Vec::new();
    if let Some(want) = expected.objective {
        if (report.objective - want).abs() > REPORT_TOLERANCE {
            failures.push(format!("objective {} != {want}", report.objective));
        }
    }
    if let Some(want) = expected.accuracy {
        if (report.accuracy - want).abs() > REPORT_TOLERANCE {
            failures.push(format!("accuracy {} != {want}", report.accuracy));
        }
    }
    if let Some(want) = expected.splits {
        if report.splits != want {
            failures.push(format!("splits {} != {want}", report.splits));
        }
    }
    if report.termination != Termination::Solved {
        failures.push(format!("terminated by {}", report.termination.as_str()));
    }
    failures
}

fn evaluate_entry(entry: &SuiteEntry) -> EntryResult {
    match run_entry(entry) {
        Ok(report) => {
            let failures = check(&report, &entry.expected);
            EntryResult {
                name: entry.name.clone(),
                passed: failures.is_empty(),
                report: Some(report),
                error: None,
                failures,
            }
        }
        Err(e) => EntryResult {
            name: entry.name.clone(),
            report: None,
            error: Some(e.to_string()),
            passed: false,
            failures: Vec::new(),
        },
    }
}

/// Runs every entry, concurrently when `parallel` is set; results keep
/// suite order. A failing entry does not stop the others.
pub fn run_suite(suite: &Suite, parallel: bool) -> Vec<EntryResult> {
    #[cfg(feature = "parallel")]
    if parallel {
        return suite.entries.par_iter().map(evaluate_entry).collect();
    }
    let _ = parallel;
    suite.entries.iter().map(evaluate_entry).collect()
}

/// Engine against oracle on one random instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCheck {
    pub seed: u64,
    pub q: usize,
    pub n: usize,
    pub k: usize,
    pub lambda: f64,
    pub fit_objective: f64,
    pub oracle_objective: f64,
    pub fit_splits: usize,
    pub oracle_splits: usize,
    pub evaluations: u64,
    /// Bound from class count and penalty, with `C = max C_i`.
    pub gamma_independent: String,
    /// Bound from the optimal tree's splits and accuracy.
    pub gamma_dependent: String,
    pub agree: bool,
    pub within_bounds: bool,
}

/// Fits the random instance for `seed` and compares it with the oracle.
pub fn oracle_check(seed: u64) -> Result<OracleCheck> {
    let Instance { dataset, lambda, .. } = random_instance(seed);
    let (tree, stats) = fit(&dataset, SearchConfig::new(lambda).parallel(false))?;
    let (oracle_objective, oracle_tree) = brute_force_optimal(&dataset, lambda, None)?;
    let c = dataset.categories().iter().copied().max().unwrap_or(2);
    let inputs = BoundInputs::new(dataset.q(), c, dataset.k(), lambda);
    let gamma_independent = analysis::gamma_independent(&inputs)?;
    let h_star = oracle_tree.evaluate(&dataset)?.accuracy;
    let gamma_dependent = analysis::gamma_bound(&inputs.with_solution(oracle_tree.splits, h_star))?;
    let evaluations = BigUint::from(stats.evaluations);
    Ok(OracleCheck {
        seed,
        q: dataset.q(),
        n: dataset.n(),
        k: dataset.k(),
        lambda,
        fit_objective: stats.objective,
        oracle_objective,
        fit_splits: tree.splits,
        oracle_splits: oracle_tree.splits,
        evaluations: stats.evaluations,
        agree: (stats.objective - oracle_objective).abs() <= 1e-9,
        within_bounds: evaluations <= gamma_independent && evaluations <= gamma_dependent,
        gamma_independent: gamma_independent.to_string(),
        gamma_dependent: gamma_dependent.to_string(),
    })
}

/// [`oracle_check`] over many seeds, concurrently when `parallel` is set.
pub fn oracle_batch(seeds: &[u64], parallel: bool) -> Result<Vec<OracleCheck>> {
    #[cfg(feature = "parallel")]
    if parallel {
        return seeds.par_iter().map(|&s| oracle_check(s)).collect();
    }
    let _ = parallel;
    seeds.iter().map(|&s| oracle_check(s)).collect()
}
