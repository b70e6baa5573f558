//! `aotree`: learn, apply and analyse optimal sparse decision trees.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 search stopped by a budget (an anytime tree was written),
//! 4 at least one bench entry failed.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use aotree::analysis::{self, BoundInputs};
use aotree::dataset::{encode, read_records, ClassColumn, Encoding};
use aotree::search::{ChildChoice, Engine, SearchConfig, Termination, TRACE_HEADER};
use aotree::suite::{self, RunReport, Suite};
use aotree::tree::ExportFormat;
use aotree::{load_csv, DecisionTree, Error};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "aotree", version, about = "Optimal sparse decision trees for categorical data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a tree and print a JSON run report.
    Fit(FitArgs),
    /// Predict class labels for a CSV file with a saved model.
    Predict(PredictArgs),
    /// Convert a saved model to JSON or Graphviz DOT.
    Export(ExportArgs),
    /// Evaluation-count bounds of the search.
    Bound(BoundArgs),
    /// Compare the search with exhaustive enumeration.
    Oracle(OracleArgs),
    /// Run a regression suite.
    Bench(BenchArgs),
    /// Branches added by one-hot encoding: closed form and enumeration.
    Unnecessary(UnnecessaryArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingArg {
    Ordinal,
    Onehot,
    OnehotDropFirst,
    OnehotDropLast,
}

impl From<EncodingArg> for Encoding {
    fn from(e: EncodingArg) -> Self {
        match e {
            EncodingArg::Ordinal => Encoding::Ordinal,
            EncodingArg::Onehot => Encoding::OnehotFull,
            EncodingArg::OnehotDropFirst => Encoding::OnehotDropFirst,
            EncodingArg::OnehotDropLast => Encoding::OnehotDropLast,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ChildChoiceArg {
    LowestGreedy,
    LowestUpper,
}

#[derive(Args)]
struct DataArgs {
    /// CSV file with categorical features and a class column.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "ordinal")]
    encoding: EncodingArg,
    /// Class column name or 0-based index; negative indices count from the end.
    #[arg(long, default_value = "-1", allow_hyphen_values = true)]
    class_column: String,
    /// The first line is data, not column names.
    #[arg(long)]
    no_header: bool,
    /// Drop feature columns holding a single value before encoding.
    #[arg(long)]
    drop_constant: bool,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Penalty per split, strictly between 0 and 1.
    #[arg(long, allow_hyphen_values = true)]
    lambda: f64,
    /// Largest number of splits on any root-to-leaf path.
    #[arg(long)]
    max_depth: Option<usize>,
    /// Wall-clock budget in seconds, checked between iterations.
    #[arg(long)]
    timeout: Option<f64>,
    /// Stop after this many iterations.
    #[arg(long)]
    max_iterations: Option<u64>,
    /// Write the model JSON here.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write a per-iteration trace. Tab-separated with a header line:
    /// iteration, branch key "(feature,category)...", upper bound of the
    /// root, greedy value of the root, memo size, branch evaluations.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write every memoized branch (key, depth, rows, bounds, flags) here.
    #[arg(long)]
    dump_memo: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "lowest-greedy")]
    child_choice: ChildChoiceArg,
    /// Accepted for harness compatibility; the search is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Evaluate children on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// CSV file. With a header, columns are matched by name; without one,
    /// by position (the class column may be present or absent).
    #[arg(long)]
    data: PathBuf,
    /// One label per line; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    no_header: bool,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    model: PathBuf,
    /// json or dot.
    #[arg(long, default_value = "json")]
    format: String,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    q: usize,
    #[arg(long)]
    c: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, allow_hyphen_values = true)]
    lambda: f64,
    /// Splits of an optimal tree.
    #[arg(long, requires = "h_star")]
    s_star: Option<usize>,
    /// Accuracy of an optimal tree.
    #[arg(long, requires = "s_star")]
    h_star: Option<f64>,
}

#[derive(Args)]
struct OracleArgs {
    /// Dataset to check; omit to check random instances instead.
    #[arg(long, conflicts_with = "random")]
    data: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ordinal")]
    encoding: EncodingArg,
    #[arg(long, default_value = "-1", allow_hyphen_values = true)]
    class_column: String,
    #[arg(long)]
    no_header: bool,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long)]
    max_depth: Option<usize>,
    /// Number of random instances.
    #[arg(long)]
    random: Option<u64>,
    /// First seed of the random instances.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    suite: PathBuf,
    /// Run entries one after another.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct UnnecessaryArgs {
    #[arg(long)]
    q: usize,
    #[arg(long)]
    c: usize,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::UnknownFormat(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Export(a) => cmd_export(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Unnecessary(a) => cmd_unnecessary(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Data(format!("cannot write {}: {e}", path.display())))
}

fn read_to_string(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Data(format!("cannot read {}: {e}", path.display())))
}

fn dataset_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn load_dataset(
    path: &Path,
    class_column: &str,
    no_header: bool,
    drop_constant: bool,
    encoding: Encoding,
) -> Result<aotree::EncodedDataset, Failure> {
    let selector: ClassColumn = class_column.parse().expect("infallible");
    let mut raw = load_csv(path, &selector, !no_header)?;
    if drop_constant {
        let (kept, dropped) = raw.drop_constant_features();
        if !dropped.is_empty() {
            eprintln!("dropped constant columns: {}", dropped.join(", "));
        }
        raw = kept;
    }
    Ok(encode(&raw, encoding)?)
}

fn check_lambda(lambda: f64) -> Result<(), Failure> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--lambda must lie strictly between 0 and 1, got {lambda}")))
    }
}

fn cmd_fit(a: FitArgs) -> CmdResult {
    check_lambda(a.lambda)?;
    let timeout = match a.timeout {
        Some(t) if !(t >= 0.0 && t.is_finite()) => {
            return Err(Failure::Usage(format!("--timeout must be a non-negative number of seconds, got {t}")))
        }
        t => t.map(Duration::from_secs_f64),
    };
    let d = &a.data;
    let dataset = load_dataset(&d.data, &d.class_column, d.no_header, d.drop_constant, d.encoding.into())?;
    let config = SearchConfig::new(a.lambda)
        .max_depth(a.max_depth)
        .timeout(timeout)
        .max_iterations(a.max_iterations)
        .child_choice(match a.child_choice {
            ChildChoiceArg::LowestGreedy => ChildChoice::LowestGreedy,
            ChildChoiceArg::LowestUpper => ChildChoice::LowestUpper,
        })
        .parallel(!a.sequential);

    let mut engine = Engine::new(&dataset, config.clone())?;
    let termination = match &a.trace {
        Some(path) => {
            let mut out = create(path)?;
            writeln!(out, "{TRACE_HEADER}")?;
            let mut write_error = None;
            let t = engine.run_with(|e, it| {
                if write_error.is_none() {
                    if let Err(err) = writeln!(out, "{}", e.trace_line(it)) {
                        write_error = Some(err);
                    }
                }
            });
            if let Some(err) = write_error {
                return Err(err.into());
            }
            out.flush()?;
            t
        }
        None => engine.run(),
    };
    let (tree, stats) = engine.finish(termination)?;
    if let Some(path) = &a.dump_memo {
        let mut out = create(path)?;
        out.write_all(engine.dump_memo().as_bytes())?;
        out.flush()?;
    }
    if let Some(path) = &a.output {
        let mut out = create(path)?;
        out.write_all(tree.to_json()?.as_bytes())?;
        out.flush()?;
    }
    let report = RunReport::new(&dataset_name(&d.data), dataset.encoding(), &config, &tree, &stats);
    println!("{}", report.to_json_line());
    Ok(if termination == Termination::Solved { 0 } else { 3 })
}

fn load_model(path: &Path) -> Result<DecisionTree, Failure> {
    Ok(DecisionTree::from_json(&read_to_string(path)?)?)
}

fn cmd_predict(a: PredictArgs) -> CmdResult {
    let tree = load_model(&a.model)?;
    let file = File::open(&a.data).map_err(|e| Failure::Data(format!("cannot read {}: {e}", a.data.display())))?;
    let (names, rows) = read_records(file, !a.no_header)?;
    let maps = &tree.maps;
    let positions: Vec<usize> = if a.no_header {
        let width = rows[0].len();
        let n_cols = maps.columns.len();
        if width == n_cols {
            (0..n_cols).collect()
        } else if width == n_cols + 1 {
            (0..width).filter(|&c| c != maps.class_position).collect()
        } else {
            return Err(Failure::Data(format!(
                "rows have {width} fields, the model expects {n_cols} features"
            )));
        }
    } else {
        maps.columns
            .iter()
            .map(|col| {
                names
                    .iter()
                    .position(|n| n == &col.name)
                    .ok_or_else(|| Failure::Data(format!("column '{}' missing from {}", col.name, a.data.display())))
            })
            .collect::<Result<_, _>>()?
    };
    let mut out: Box<dyn Write> = match &a.output {
        Some(path) => Box::new(create(path)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    for (i, row) in rows.iter().enumerate() {
        let values: Vec<&str> = positions.iter().map(|&p| row[p].as_str()).collect();
        writeln!(out, "{}", tree.predict_text(i, &values)?)?;
    }
    out.flush()?;
    Ok(0)
}

fn cmd_export(a: ExportArgs) -> CmdResult {
    let format: ExportFormat = a.format.parse()?;
    let tree = load_model(&a.model)?;
    let doc = tree.export(format)?;
    match &a.output {
        Some(path) => {
            let mut out = create(path)?;
            out.write_all(doc.as_bytes())?;
            out.flush()?;
        }
        None => print!("{doc}"),
    }
    Ok(0)
}

#[derive(Serialize)]
struct BoundReport {
    q: usize,
    c: usize,
    k: usize,
    lambda: f64,
    kappa_independent: i64,
    independent: String,
    independent_exponent: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa_dependent: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dependent: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dependent_exponent: Option<Option<u32>>,
}

fn cmd_bound(a: BoundArgs) -> CmdResult {
    let mut inputs = BoundInputs::new(a.q, a.c, a.k, a.lambda);
    if let (Some(s), Some(h)) = (a.s_star, a.h_star) {
        inputs = inputs.with_solution(s, h);
    }
    let independent = analysis::gamma_independent(&inputs)?;
    let dependent = match inputs.s_star {
        Some(_) => Some(analysis::gamma_bound(&inputs)?),
        None => None,
    };
    let report = BoundReport {
        q: a.q,
        c: a.c,
        k: a.k,
        lambda: a.lambda,
        kappa_independent: inputs.kappa_independent(),
        independent_exponent: analysis::log10_floor(&independent),
        independent: independent.to_string(),
        kappa_dependent: inputs.kappa_dependent(),
        dependent_exponent: dependent.as_ref().map(analysis::log10_floor),
        dependent: dependent.map(|d| d.to_string()),
    };
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    Ok(0)
}

#[derive(Serialize)]
struct OracleReport {
    dataset: String,
    lambda: f64,
    max_depth: Option<usize>,
    fit_objective: f64,
    oracle_objective: f64,
    fit_splits: usize,
    oracle_splits: usize,
    agree: bool,
}

fn cmd_oracle(a: OracleArgs) -> CmdResult {
    if let Some(count) = a.random {
        let seeds: Vec<u64> = (a.seed..a.seed + count).collect();
        let checks = suite::oracle_batch(&seeds, true)?;
        let mut all_ok = true;
        for c in &checks {
            all_ok &= c.agree && c.within_bounds;
            println!("{}", serde_json::to_string(c).expect("check serializes"));
        }
        return Ok(if all_ok { 0 } else { 4 });
    }
    let Some(path) = &a.data else {
        return Err(Failure::Usage("oracle needs --data or --random".into()));
    };
    let Some(lambda) = a.lambda else {
        return Err(Failure::Usage("oracle --data needs --lambda".into()));
    };
    check_lambda(lambda)?;
    let dataset = load_dataset(path, &a.class_column, a.no_header, false, a.encoding.into())?;
    let (oracle_objective, oracle_tree) = analysis::brute_force_optimal(&dataset, lambda, a.max_depth)?;
    let (tree, stats) = aotree::fit(&dataset, SearchConfig::new(lambda).max_depth(a.max_depth))?;
    let agree = (stats.objective - oracle_objective).abs() <= 1e-9;
    let report = OracleReport {
        dataset: dataset_name(path),
        lambda,
        max_depth: a.max_depth,
        fit_objective: stats.objective,
        oracle_objective,
        fit_splits: tree.splits,
        oracle_splits: oracle_tree.splits,
        agree,
    };
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    Ok(if agree { 0 } else { 4 })
}

fn cmd_bench(a: BenchArgs) -> CmdResult {
    let suite = Suite::load(&a.suite)?;
    let results = suite::run_suite(&suite, !a.sequential);
    for r in &results {
        println!("{}", r.to_json_line());
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    if !failed.is_empty() {
        eprintln!("{} of {} entries failed: {}", failed.len(), results.len(), failed.join(", "));
        return Ok(4);
    }
    Ok(0)
}

#[derive(Serialize)]
struct UnnecessaryReport {
    q: usize,
    c: usize,
    closed_form: String,
    enumerated: Option<u64>,
}

fn cmd_unnecessary(a: UnnecessaryArgs) -> CmdResult {
    if a.q < 1 || a.c < 2 {
        return Err(Failure::Usage("need --q >= 1 and --c >= 2".into()));
    }
    let enumerated = match analysis::enumerate_empty_branches(a.q, a.c) {
        Ok(v) => Some(v),
        Err(Error::SizeGuard(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let report = UnnecessaryReport {
        q: a.q,
        c: a.c,
        closed_form: analysis::unnecessary_branch_count(a.q, a.c).to_string(),
        enumerated,
    };
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    Ok(0)
}
