//! The `mqtc` command line: `solve`, `shapes` and `verify`.
//!
//! Exit statuses: 0 success, 1 usage error, 2 bad input, 3 resource ceiling.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use clap::{Parser, Subcommand, ValueEnum};

use mqtc::exact::{solve_exact_with_progress, Progress, DEFAULT_MAX_EXACT_N};
use mqtc::shapes::DEFAULT_MAX_SHAPE_N;
use mqtc::{
    canonical_code, cost_bounds, generate_shapes, normalized_score, parse_distance_matrix,
    parse_newick_with_labels, solve_hill_climbing, to_newick, tree_cost, DistanceMatrix, Error, ExactConfig,
    MatrixFormat, Neighborhood, RunReport, SearchConfig, ShapeConfig, SolverResult,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

/// Overrides the exact-solver ceiling on `n`.
pub const MAX_N_VAR: &str = "MQTC_MAX_N";

#[derive(Parser, Debug)]
#[command(name = "mqtc", version, about = "Minimum quartet tree cost solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Find a minimum-cost tree for a distance matrix.
    Solve(SolveArgs),
    /// Count (and optionally list) the tree shapes with n leaves.
    Shapes {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        list: bool,
    },
    /// Recompute the cost and score of a given tree.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Newick text, or a path to a file holding it.
        #[arg(long)]
        tree: String,
    },
}

#[derive(clap::Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 500)]
    max_steps: usize,
    #[arg(long, value_enum, default_value_t = Nbhd::Both)]
    neighborhood: Nbhd,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Where to write the Newick tree; stdout when omitted.
    #[arg(long)]
    output_tree: Option<PathBuf>,
    /// Where to write the JSON report; stdout when omitted.
    #[arg(long)]
    output_report: Option<PathBuf>,
    /// No progress lines on stderr.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Phylip,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Mode {
    Exact,
    Hill,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Nbhd {
    LeafSwap,
    SubtreeMove,
    Both,
}

impl From<Format> for MatrixFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => MatrixFormat::Csv,
            Format::Phylip => MatrixFormat::Phylip,
        }
    }
}

impl From<Nbhd> for Neighborhood {
    fn from(n: Nbhd) -> Self {
        match n {
            Nbhd::LeafSwap => Neighborhood::LeafSwap,
            Nbhd::SubtreeMove => Neighborhood::SubtreeMove,
            Nbhd::Both => Neighborhood::Both,
        }
    }
}

/// A failure with the exit status it maps to.
#[derive(Debug)]
struct Failure {
    status: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            status: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        Failure {
            status: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Argument(_) => EXIT_USAGE,
            Error::Resource(_) => EXIT_RESOURCE,
            Error::Tree(_) | Error::Format(_) | Error::Size(_) => EXIT_INPUT,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

/// Runs the CLI on `args` (program name first) and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return status;
        }
    };
    let result = match cli.command {
        Command::Solve(args) => solve(&args, out, err),
        Command::Shapes { n, list } => shapes(n, list, out),
        Command::Verify { input, format, tree } => verify(&input, format, &tree, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.status
        }
    }
}

fn read_matrix(path: &Path, format: Format) -> Result<DistanceMatrix, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_distance_matrix(&text, format.into())?)
}

fn exact_ceiling() -> Result<usize, Failure> {
    match std::env::var(MAX_N_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("{MAX_N_VAR} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_MAX_EXACT_N),
    }
}

fn write_file(path: &Path, contents: &str) -> Outcome {
    std::fs::write(path, contents)
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, text: &str) -> Outcome {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::input(format!("cannot write output: {e}")))
}

fn solve(args: &SolveArgs, out: &mut dyn Write, err: &mut (dyn Write + Send)) -> Outcome {
    let dist = read_matrix(&args.input, args.format)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = args.workers {
        if w == 0 {
            return Err(Failure::usage("--workers must be at least 1"));
        }
        pool = pool.num_threads(w);
    }
    let pool = pool
        .build()
        .map_err(|e| Failure::usage(format!("thread pool: {e}")))?;

    let result: SolverResult = match args.mode {
        Mode::Exact => {
            let config = ExactConfig {
                max_n: exact_ceiling()?,
                ..ExactConfig::default()
            };
            let err_lock = Mutex::new(&mut *err);
            let quiet = args.quiet;
            let report = |p: Progress| {
                if quiet {
                    return;
                }
                if let Ok(mut e) = err_lock.lock() {
                    let _ = writeln!(
                        e,
                        "shape {}/{}  {} assignments  {:.0}/s",
                        p.shapes_completed,
                        p.shapes_total,
                        p.assignments_evaluated,
                        p.assignments_per_second()
                    );
                }
            };
            pool.install(|| solve_exact_with_progress(&dist, &config, &report))?
        }
        Mode::Hill => {
            let config = SearchConfig {
                seed: args.seed,
                restarts: args.restarts,
                max_steps_per_restart: args.max_steps,
                neighborhood: args.neighborhood.into(),
            };
            let res = pool.install(|| solve_hill_climbing(&dist, &config))?;
            if !args.quiet {
                let _ = writeln!(
                    err,
                    "{} restarts  {} trees costed",
                    config.restarts, res.assignments_evaluated
                );
            }
            res
        }
    };

    let newick = to_newick(&result.best_tree);
    let report = RunReport {
        n: dist.n(),
        mode: match args.mode {
            Mode::Exact => "exact".into(),
            Mode::Hill => "hill".into(),
        },
        input_digest: dist.digest(),
        best_cost: result.best_cost,
        normalized_score: result.normalized_score,
        newick: newick.clone(),
        shapes_evaluated: result.shapes_evaluated,
        assignments_evaluated: result.assignments_evaluated,
        elapsed_ms: result.elapsed.as_millis() as u64,
        seed: (args.mode == Mode::Hill).then_some(args.seed),
        tool_version: env!("CARGO_PKG_VERSION").into(),
    };
    let json = report.to_json() + "\n";
    match &args.output_tree {
        Some(path) => write_file(path, &format!("{newick}\n"))?,
        None => emit(out, &format!("{newick}\n"))?,
    }
    match &args.output_report {
        Some(path) => write_file(path, &json)?,
        None => emit(out, &json)?,
    }
    Ok(())
}

fn shapes(n: usize, list: bool, out: &mut dyn Write) -> Outcome {
    let all = generate_shapes(
        n,
        &ShapeConfig {
            max_n: DEFAULT_MAX_SHAPE_N,
        },
    )?;
    let mut text = format!("{}\n", all.len());
    if list {
        for s in &all {
            let edges: Vec<String> = s
                .internal_edges()
                .iter()
                .map(|(u, v)| format!("{u}-{v}"))
                .collect();
            let slots: Vec<String> = s.leaf_slots().iter().map(u8::to_string).collect();
            text.push_str(&format!(
                "{} slots={} edges={}\n",
                canonical_code(s),
                slots.join(","),
                edges.join(",")
            ));
        }
    }
    emit(out, &text)
}

fn verify(input: &Path, format: Format, tree: &str, out: &mut dyn Write) -> Outcome {
    let dist = read_matrix(input, format)?;
    let text = if Path::new(tree).is_file() {
        std::fs::read_to_string(tree).map_err(|e| Failure::input(format!("cannot read {tree}: {e}")))?
    } else {
        tree.to_string()
    };
    let parsed = parse_newick_with_labels(text.trim(), dist.labels())?;
    let cost = tree_cost(&parsed, &dist)?;
    let score = normalized_score(cost, cost_bounds(&dist))?;
    emit(
        out,
        &format!(
            "newick {}\ncost {cost:.16e}\nnormalized_score {score:.16e}\n",
            to_newick(&parsed)
        ),
    )
}
