//! Command-line front end.
//!
//! ```text
//! rept gen      --model er|ba --nodes N --param P --seed S --out FILE
//! rept exact    --input FILE [--eta] [--local FILE] --out FILE
//! rept estimate --method rept|mascot --m M --c C --seed S --input FILE --out FILE [--local FILE]
//! rept eval     --method rept|mascot --m M --c C --runs R --seed S --input FILE --out FILE
//! ```
//!
//! Every command accepts `--threads N` (falling back to `REPT_THREADS`) and
//! `--mem-limit BYTES`. Outputs are written to a temporary file and renamed
//! into place.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::eval::{monte_carlo_eval_with_truth, EvalConfig};
use crate::exact::{exact_stream_counts, exact_triangle_counts};
use crate::mascot::{run_parallel_mascot, MascotConfig};
use crate::report::Method;
use crate::rept::{run_rept, ReptConfig};
use crate::stream::{generate_synthetic, read_edge_list, EdgeStream, GraphModel};

/// Exit status for usage errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for failures after validation.
pub const EXIT_FAILURE: i32 = 1;

/// Rough bytes per sampled edge held by one processor (adjacency in both
/// directions plus hash-table overhead).
const BYTES_PER_EDGE: u64 = 96;
/// Extra bytes per sampled edge when per-edge triangle counters are kept.
const BYTES_PER_EDGE_PAIRS: u64 = 48;

#[derive(Debug, Parser)]
#[command(name = "rept", version, about = "Parallel streaming triangle-count estimation")]
pub struct Cli {
    /// Worker threads (default: available cores).
    #[arg(long, global = true, env = "REPT_THREADS")]
    pub threads: Option<usize>,

    /// Refuse configurations whose estimated footprint exceeds this many
    /// bytes. Accepts K, M and G suffixes.
    #[arg(long, global = true, value_parser = parse_bytes)]
    pub mem_limit: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic edge stream.
    Gen(GenArgs),
    /// Exact triangle (and pair) counts.
    Exact(ExactArgs),
    /// One estimator run.
    Estimate(EstimateArgs),
    /// Monte-Carlo accuracy evaluation.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Er,
    Ba,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Rept,
    Mascot,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Rept => Method::Rept,
            MethodArg::Mascot => Method::Mascot,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long)]
    pub nodes: usize,
    /// Edge probability (er) or attachment degree (ba).
    #[arg(long)]
    pub param: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Also compute the order-dependent pair counts.
    #[arg(long)]
    pub eta: bool,
    /// Write per-node counts as `node,tau_v,eta_v`.
    #[arg(long)]
    pub local: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub c: u32,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Write local estimates as `node,tau_v_hat`.
    #[arg(long)]
    pub local: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub c: u32,
    #[arg(long)]
    pub runs: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_bytes(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let (digits, mult) = match s.char_indices().last() {
        Some((i, 'K' | 'k')) => (&s[..i], 1u64 << 10),
        Some((i, 'M' | 'm')) => (&s[..i], 1 << 20),
        Some((i, 'G' | 'g')) => (&s[..i], 1 << 30),
        _ => (s, 1),
    };
    digits
        .parse::<u64>()
        .ok()
        .and_then(|n| n.checked_mul(mult))
        .ok_or_else(|| format!("`{s}` is not a byte count"))
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit status.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    validate(&cli.command)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Failure::Runtime(Error::config(format!("thread pool: {e}"))))?;
    let threads = pool.current_num_threads() as u64;
    pool.install(|| execute(cli.command, cli.mem_limit, threads))
}

fn validate(cmd: &Command) -> Result<(), Failure> {
    let check_mc = |m: u32, c: u32| {
        if m < 2 {
            Err(Failure::Usage(format!("--m must be at least 2, got {m}")))
        } else if c < 1 {
            Err(Failure::Usage("--c must be at least 1".into()))
        } else {
            Ok(())
        }
    };
    let check_input = |p: &Path| {
        if p.is_file() {
            Ok(())
        } else {
            Err(Failure::Usage(format!("input file {} does not exist", p.display())))
        }
    };
    match cmd {
        Command::Gen(a) => {
            if a.nodes < 3 {
                return Err(Failure::Usage(format!("--nodes must be at least 3, got {}", a.nodes)));
            }
            Ok(())
        }
        Command::Exact(a) => check_input(&a.input),
        Command::Estimate(a) => {
            check_mc(a.m, a.c)?;
            check_input(&a.input)
        }
        Command::Eval(a) => {
            check_mc(a.m, a.c)?;
            if a.runs < 2 {
                return Err(Failure::Usage(format!("--runs must be at least 2, got {}", a.runs)));
            }
            check_input(&a.input)
        }
    }
}

/// Estimated peak bytes for `concurrent` estimator runs of `c` processors.
fn footprint(edges: usize, m: u32, c: u32, pairs: bool, concurrent: u64) -> u64 {
    let per_edge = BYTES_PER_EDGE + if pairs { BYTES_PER_EDGE_PAIRS } else { 0 };
    let per_processor = (edges as u64).div_ceil(u64::from(m)) * per_edge;
    per_processor * u64::from(c) * concurrent
}

fn guard(limit: Option<u64>, need: u64) -> Result<(), Failure> {
    match limit {
        Some(limit) if need > limit => Err(Failure::Usage(format!(
            "estimated footprint of {need} bytes exceeds --mem-limit {limit}"
        ))),
        _ => Ok(()),
    }
}

fn load(path: &Path) -> Result<EdgeStream, Failure> {
    let (stream, stats) = read_edge_list(path)?;
    if stats.duplicates_dropped > 0 || stats.self_loops_skipped > 0 {
        eprintln!(
            "note: dropped {} duplicate edge(s) and {} self-loop(s)",
            stats.duplicates_dropped, stats.self_loops_skipped
        );
    }
    Ok(stream)
}

fn execute(cmd: Command, mem_limit: Option<u64>, threads: u64) -> Result<(), Failure> {
    match cmd {
        Command::Gen(a) => {
            let model = match a.model {
                ModelArg::Er => GraphModel::ErdosRenyi,
                ModelArg::Ba => GraphModel::BarabasiAlbert,
            };
            let stream =
                generate_synthetic(model, a.nodes, a.param, a.seed).map_err(|e| Failure::Usage(e.to_string()))?;
            write_atomic(&a.out, stream.to_edge_list().as_bytes())?;
        }
        Command::Exact(a) => {
            let stream = load(&a.input)?;
            guard(mem_limit, footprint(stream.len(), 2, 2, a.eta, 1))?;
            let (doc, table) = if a.eta {
                let x = exact_stream_counts(&stream);
                (x.summary(&stream), x.local_table(&stream))
            } else {
                let x = exact_triangle_counts(&stream);
                (x.summary(&stream), x.local_table(&stream))
            };
            write_atomic(&a.out, doc.to_json()?.as_bytes())?;
            if let Some(path) = a.local {
                write_atomic(&path, table.as_bytes())?;
            }
        }
        Command::Estimate(a) => {
            let stream = load(&a.input)?;
            let local = a.local.is_some();
            let report = match a.method {
                MethodArg::Rept => {
                    let cfg = ReptConfig::new(a.m, a.c, a.seed)?.with_local(local);
                    guard(mem_limit, footprint(stream.len(), a.m, a.c, cfg.tracks_eta(), 1))?;
                    run_rept(&stream, &cfg)?
                }
                MethodArg::Mascot => {
                    let cfg = MascotConfig::new(a.m, a.c, a.seed)?.with_local(local);
                    guard(mem_limit, footprint(stream.len(), a.m, a.c, false, 1))?;
                    run_parallel_mascot(&stream, &cfg)?
                }
            };
            write_atomic(&a.out, report.to_json()?.as_bytes())?;
            if let Some(path) = a.local {
                write_atomic(&path, report.local_table(&stream).as_bytes())?;
            }
        }
        Command::Eval(a) => {
            let stream = load(&a.input)?;
            let pairs = matches!(a.method, MethodArg::Rept) && a.c > a.m && a.c % a.m != 0;
            guard(mem_limit, footprint(stream.len(), a.m, a.c, pairs, threads))?;
            let truth = exact_stream_counts(&stream);
            let cfg = EvalConfig::new(a.method.into(), a.m, a.c, a.runs, a.seed);
            let result = monte_carlo_eval_with_truth(&stream, &truth, &cfg)?;
            write_atomic(&a.out, result.to_csv().as_bytes())?;
        }
    }
    Ok(())
}

/// Writes `contents` to a temporary sibling of `path`, then renames it.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
