use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use wbtree::keygen::generate;
use wbtree::{BalanceParams, Distribution, DoubleCount, KeyWorkload, SkewWindows};
use wbtree_bench::experiment::{
    run, Experiment, ExperimentError, ExperimentSpec, DEFAULT_UNIVERSE,
};
use wbtree_bench::ops::OpSequence;
use wbtree_bench::output::{emit_results, Format, OutputError};
use wbtree_bench::variant::{expand_variants, TreeKind};

const EXIT_USAGE: u8 = 1;
const EXIT_AUDIT: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "wbtree-bench",
    version,
    about = "Benchmarks for weight-balanced trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time inserting 5% more keys into each base tree
    InsertPct(RunArgs),
    /// Time erasing 5% of the keys of each base tree
    ErasePct(RunArgs),
    /// Average depth after replacing every key once
    DepthChurn(RunArgs),
    /// Violation counts sampled over delete/insert pairs
    Violations(RunArgs),
    /// Rotation counts sampled over delete/insert pairs
    Rotations(RunArgs),
    /// Replay an operation file on every variant
    Replay(RunArgs),
    /// Write a key workload
    GenKeys(GenKeysArgs),
    /// Write a mixed insert/delete operation file
    GenOps(GenOpsArgs),
}

#[derive(Args)]
struct WorkloadArgs {
    #[arg(long, default_value = "uniform")]
    dist: Distribution,
    /// Key universe size U; keys lie in [0, U)
    #[arg(long, default_value_t = DEFAULT_UNIVERSE)]
    universe: u64,
    #[arg(long, default_value_t = 1.0)]
    zipf_s: f64,
    /// First skewed window, as `lo,hi` fractions of U
    #[arg(long, value_parser = parse_window)]
    skew_a: Option<(f64, f64)>,
    #[arg(long, value_parser = parse_window)]
    skew_b: Option<(f64, f64)>,
    /// Falls back to $WBTREE_SEED, then 1
    #[arg(long, env = "WBTREE_SEED", default_value_t = 1)]
    seed: u64,
}

impl WorkloadArgs {
    fn windows(&self) -> SkewWindows {
        let d = SkewWindows::default();
        SkewWindows {
            a: self.skew_a.unwrap_or(d.a),
            b: self.skew_b.unwrap_or(d.b),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Comma-separated: bottom-up, top-down, red-black
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "bottom-up,top-down,red-black"
    )]
    variants: Vec<TreeKind>,
    /// Comma-separated parameter sets: classic, integral, topdown, tight,
    /// overtight or custom:<d>:<g>
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "classic,integral,topdown,tight,overtight"
    )]
    params: Vec<BalanceParams>,
    #[command(flatten)]
    workload: WorkloadArgs,
    #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    base_trees: usize,
    #[arg(long, default_value_t = 1000)]
    time_floor_ms: u64,
    #[arg(long, default_value_t = 10_000)]
    sample_interval: usize,
    /// Op pairs for violations/rotations; defaults to the base size
    #[arg(long)]
    ops: Option<usize>,
    /// Operation file for replay
    #[arg(long)]
    input: Option<PathBuf>,
    /// `-` for stdout
    #[arg(long, default_value = "-")]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Check invariants after every phase; exit 2 on failure
    #[arg(long)]
    audit: bool,
    /// Run cells one after another even when built with `parallel`
    #[arg(long)]
    serial: bool,
    /// Count a double rotation as 1 or 2 rotations
    #[arg(long, default_value = "2")]
    double_counts_as: DoubleCount,
}

#[derive(Args)]
struct GenKeysArgs {
    #[command(flatten)]
    workload: WorkloadArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args)]
struct GenOpsArgs {
    #[command(flatten)]
    workload: WorkloadArgs,
    /// Keys inserted before the mixed phase
    #[arg(long)]
    base: usize,
    /// Mixed steps after the base
    #[arg(long)]
    steps: usize,
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected `lo,hi`")?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad fraction `{lo}`"))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad fraction `{hi}`"))?;
    Ok((lo, hi))
}

enum Failure {
    Usage(String),
    Audit(String),
    Io(String),
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Audit(m) => Failure::Audit(m),
            ExperimentError::Workload(wbtree::keygen::WorkloadError::Io(e)) => {
                Failure::Io(e.to_string())
            }
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<OutputError> for Failure {
    fn from(e: OutputError) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn writer(path: &PathBuf) -> io::Result<Box<dyn Write>> {
    Ok(if path.as_os_str() == "-" {
        Box::new(BufWriter::new(io::stdout().lock()))
    } else {
        Box::new(BufWriter::new(File::create(path)?))
    })
}

fn workload(args: &WorkloadArgs, n: usize) -> Result<KeyWorkload, Failure> {
    Ok(generate(
        args.dist,
        n,
        args.universe,
        args.zipf_s,
        args.windows(),
        args.seed,
    )
    .map_err(ExperimentError::from)?)
}

fn run_experiment(experiment: Experiment, a: RunArgs) -> Result<(), Failure> {
    let mut spec = ExperimentSpec::new(experiment, expand_variants(&a.variants, &a.params));
    spec.distribution = a.workload.dist;
    spec.zipf_s = a.workload.zipf_s;
    spec.windows = a.workload.windows();
    spec.universe = a.workload.universe;
    spec.seed = a.workload.seed;
    spec.sizes = a.sizes;
    spec.base_trees = a.base_trees;
    spec.time_floor = Duration::from_millis(a.time_floor_ms);
    spec.sample_interval = a.sample_interval;
    spec.op_pairs = a.ops;
    spec.double_counts = a.double_counts_as;
    spec.audit = a.audit;
    spec.serial = a.serial;

    let seq = match (&a.input, experiment) {
        (Some(path), Experiment::Replay) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            Some(
                text.parse::<OpSequence>()
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
            )
        }
        (None, Experiment::Replay) => return Err(Failure::Usage("replay needs --input".into())),
        _ => None,
    };
    let rows = run(&spec, seq.as_ref())?;
    emit_results(&rows, a.format, &a.out)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::InsertPct(a) => run_experiment(Experiment::InsertPct, a),
        Command::ErasePct(a) => run_experiment(Experiment::ErasePct, a),
        Command::DepthChurn(a) => run_experiment(Experiment::DepthChurn, a),
        Command::Violations(a) => run_experiment(Experiment::ViolationsOverTime, a),
        Command::Rotations(a) => run_experiment(Experiment::Rotations, a),
        Command::Replay(a) => run_experiment(Experiment::Replay, a),
        Command::GenKeys(a) => workload(&a.workload, a.n).and_then(|w| {
            let mut out = writer(&a.out)?;
            w.write_to(&mut out)?;
            out.flush()?;
            Ok(())
        }),
        Command::GenOps(a) => workload(&a.workload, a.base + a.steps).and_then(|w| {
            let keys: Vec<i64> = w.keys.iter().map(|&k| k as i64).collect();
            let seq = OpSequence::mixed(&keys, a.base, a.workload.seed);
            let mut out = writer(&a.out)?;
            out.write_all(seq.to_string().as_bytes())?;
            out.flush()?;
            Ok(())
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Audit(m)) => {
            eprintln!("audit failure: {m}");
            ExitCode::from(EXIT_AUDIT)
        }
        Err(Failure::Io(m)) => {
            eprintln!("i/o error: {m}");
            ExitCode::from(EXIT_IO)
        }
    }
}
