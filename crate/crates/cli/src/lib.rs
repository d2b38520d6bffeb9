//! Command-line driver. Every subcommand writes JSON: a single envelope
//! `{"command", "config", "result"}`, or one envelope per line for the
//! streaming modes. `construct` is the exception and prints graph6.
//!
//! Exit codes: 0 success, 1 a mathematical expectation failed, 2 misuse.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use booktri::blowup::book_range;
use booktri::calculus::adjust_monotonicity_suite;
use booktri::graph6::ReadError;
use booktri::{
    adjust_a2_to_a1, anneal_min_triangles, blowup, bn_inequality, classify_exceptional,
    complete_bipartite, construct_s_bn, decompose_prism, delta_identity_suite,
    evaluate_certificate, exhaustive_scan, invariant_report, parse_checks, parse_rational, prism,
    read_graph6_lines, verify_conjecture_blowups, write_graph6, AnnealConfig, Graph, PartVector,
    ScanConfig, StabilityParams,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

pub const DEFAULT_SEED: u64 = 1;
pub const JOBS_ENV: &str = "BOOKTRI_JOBS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "booktri",
    version,
    about = "Books versus triangles: invariants, constructions and search"
)]
pub struct Cli {
    /// Seed for every randomised subcommand.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads; 0 uses one per core.
    #[arg(long, global = true, env = JOBS_ENV, default_value_t = 0)]
    pub jobs: usize,
    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Print a graph in graph6.
    Construct(ConstructArgs),
    /// Invariant report for every graph6 line of the input.
    Invariants(InputArgs),
    /// Both sides of the BN inequality for every input graph.
    CheckBn(InputArgs),
    /// Scan all prism blow-ups for each (n, b) pair in a range.
    VerifyBlowups(VerifyArgs),
    /// Run the a2-to-a1 adjustment on one part vector.
    AdjustTrace(AdjustArgs),
    /// Closed-form identities and adjustment monotonicity on random inputs.
    IdentitySuite(SuiteArgs),
    /// Prism decomposition of every input graph.
    Decompose(StructureArgs),
    /// Decomposition, exceptional split and certificate for every input graph.
    Classify(ClassifyArgs),
    /// Check inequalities over every labelled graph on n vertices.
    Exhaustive(ExhaustiveArgs),
    /// Simulated annealing for dense graphs with few triangles.
    Anneal(AnnealArgs),
}

#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct ConstructArgs {
    /// The extremal graph S_{b,n}.
    #[arg(long, num_args = 2, value_names = ["N", "B"])]
    pub s_bn: Option<Vec<usize>>,
    /// K_{p,q}.
    #[arg(long, num_args = 2, value_names = ["P", "Q"])]
    pub complete_bipartite: Option<Vec<usize>>,
    /// Prism blow-up with six comma-separated part sizes.
    #[arg(long, value_delimiter = ',')]
    pub prism_blowup: Option<Vec<usize>>,
}

#[derive(Debug, Args, Serialize)]
pub struct InputArgs {
    /// graph6 file; standard input when omitted.
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Order or inclusive range such as 12..24.
    #[arg(long, value_parser = parse_range)]
    pub n: RangeInclusive<u64>,
    /// Only this book bound; every bound in [n/6, n/4) otherwise.
    #[arg(long)]
    pub b: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct AdjustArgs {
    /// Six comma-separated integers with a1 largest, a1 >= a2 >= a3 and a4 >= a5 >= a6.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    pub vector: Vec<i64>,
    /// Book bound, an integer or fraction p/q.
    #[arg(long)]
    pub b: String,
}

#[derive(Debug, Args, Serialize)]
pub struct SuiteArgs {
    /// Trials per closed form.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Random adjustment traces.
    #[arg(long, default_value_t = 1_000)]
    pub traces: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct StructureArgs {
    pub input: Option<PathBuf>,
    /// JSON or TOML file overriding the stability parameters.
    #[arg(long)]
    pub params: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ClassifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub structure: StructureArgs,
    /// Book bound for the certificate; falls back to the params file.
    #[arg(long)]
    pub b: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExhaustiveArgs {
    #[arg(long)]
    pub n: usize,
    /// Comma-separated subset of bn, rademacher, edwards.
    #[arg(long, default_value = "bn,rademacher,edwards")]
    pub check: String,
    #[arg(long, default_value_t = 0)]
    pub edge_min: usize,
    #[arg(long, default_value_t = 64)]
    pub chunks: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct AnnealArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub b: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub iters: u64,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
}

fn parse_range(s: &str) -> Result<RangeInclusive<u64>, String> {
    let num = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("`{t}`: {e}"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.trim_start_matches('='))?),
        None => {
            let x = num(s)?;
            (x, x)
        }
    };
    if lo > hi {
        return Err(format!("empty range {s}"));
    }
    Ok(lo..=hi)
}

/// Failure modes of a run, mapped to exit codes.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Usage(String),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

fn usage(e: impl std::fmt::Display) -> RunError {
    RunError::Usage(e.to_string())
}

struct Out {
    sink: Box<dyn Write + Send>,
    command: &'static str,
    config: Value,
    violation: bool,
}

impl Out {
    fn emit(&mut self, result: impl Serialize) -> Result<(), RunError> {
        self.emit_value(json!({
            "command": self.command,
            "config": self.config,
            "result": result,
        }))
    }

    fn emit_line(&mut self, index: usize, result: impl Serialize) -> Result<(), RunError> {
        self.emit_value(json!({
            "command": self.command,
            "config": self.config,
            "index": index,
            "result": result,
        }))
    }

    fn emit_value(&mut self, v: Value) -> Result<(), RunError> {
        serde_json::to_writer(&mut self.sink, &v).map_err(io::Error::from)?;
        writeln!(self.sink)?;
        Ok(())
    }
}

fn open_input(path: &Option<PathBuf>) -> Result<Box<dyn BufRead>, RunError> {
    Ok(match path {
        Some(p) => {
            Box::new(BufReader::new(File::open(p).map_err(|e| {
                usage(format!("cannot open {}: {e}", p.display()))
            })?))
        }
        None => Box::new(BufReader::new(io::stdin())),
    })
}

fn graphs(path: &Option<PathBuf>) -> Result<Vec<Graph>, RunError> {
    read_graph6_lines(open_input(path)?)
        .collect::<Result<Vec<_>, ReadError>>()
        .map_err(usage)
}

pub fn load_params(path: &Path) -> Result<StabilityParams, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let params: StabilityParams = if path.extension().is_some_and(|x| x == "toml") {
        toml::from_str(&text).map_err(usage)?
    } else {
        serde_json::from_str(&text).map_err(usage)?
    };
    params.validate().map_err(usage)?;
    Ok(params)
}

fn params_or_default(path: &Option<PathBuf>) -> Result<StabilityParams, RunError> {
    path.as_deref()
        .map(load_params)
        .unwrap_or_else(|| Ok(StabilityParams::default()))
}

/// Parses `argv` (program name first) and runs it. Returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VIOLATION,
        Err(RunError::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

/// Runs a parsed command. `Ok(false)` means a finding violated an
/// expectation.
pub fn execute(cli: &Cli) -> Result<bool, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(usage)?;
    let sink: Box<dyn Write + Send> = match &cli.output {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout())),
    };
    let mut out = Out {
        sink,
        command: command_name(&cli.command),
        config: serde_json::to_value(cli).map_err(usage)?,
        violation: false,
    };
    pool.install(|| dispatch(cli, &mut out))?;
    out.sink.flush()?;
    Ok(!out.violation)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Construct(_) => "construct",
        Command::Invariants(_) => "invariants",
        Command::CheckBn(_) => "check-bn",
        Command::VerifyBlowups(_) => "verify-blowups",
        Command::AdjustTrace(_) => "adjust-trace",
        Command::IdentitySuite(_) => "identity-suite",
        Command::Decompose(_) => "decompose",
        Command::Classify(_) => "classify",
        Command::Exhaustive(_) => "exhaustive",
        Command::Anneal(_) => "anneal",
    }
}

fn dispatch(cli: &Cli, out: &mut Out) -> Result<(), RunError> {
    match &cli.command {
        Command::Construct(a) => {
            let g = if let Some(v) = &a.s_bn {
                construct_s_bn(v[0], v[1])
            } else if let Some(v) = &a.complete_bipartite {
                complete_bipartite(v[0], v[1])
            } else {
                let sizes = a.prism_blowup.as_deref().unwrap_or_default();
                if sizes.len() != 6 {
                    return Err(usage("--prism-blowup needs six part sizes"));
                }
                blowup(&prism().graph, sizes)
            }
            .map_err(usage)?;
            writeln!(out.sink, "{}", write_graph6(&g))?;
        }
        Command::Invariants(a) => {
            for (i, g) in graphs(&a.input)?.iter().enumerate() {
                out.emit_line(i, invariant_report(g))?;
            }
        }
        Command::CheckBn(a) => {
            for (i, g) in graphs(&a.input)?.iter().enumerate() {
                let r = bn_inequality(g);
                out.violation |= !r.holds;
                out.emit_line(i, r)?;
            }
        }
        Command::VerifyBlowups(a) => {
            let mut i = 0;
            for n in a.n.clone() {
                let bs = match a.b {
                    Some(b) => b..=b,
                    None => book_range(n),
                };
                for b in bs {
                    let v = verify_conjecture_blowups(n, b).map_err(usage)?;
                    out.violation |= !(v.conjecture_holds_in_class
                        && v.minimizers_are_extremal_orbit
                        && v.zero_t_exceptions.is_empty());
                    out.emit_line(i, v)?;
                    i += 1;
                }
            }
        }
        Command::AdjustTrace(a) => {
            let b = parse_rational(&a.b).ok_or_else(|| usage(format!("bad rational `{}`", a.b)))?;
            let v: [i64; 6] = a
                .vector
                .clone()
                .try_into()
                .map_err(|_| usage("need six entries"))?;
            let pv = PartVector::from_ints(v).map_err(usage)?;
            let t = adjust_a2_to_a1(&pv, b).map_err(usage)?;
            let (f_ok, h2_ok) = (t.f_nonincreasing(), t.h2_nondecreasing());
            out.violation |= !(f_ok && h2_ok);
            out.emit(json!({
                "trace": t,
                "f_nonincreasing": f_ok,
                "h2_nondecreasing": h2_ok,
            }))?;
        }
        Command::IdentitySuite(a) => {
            let ids = delta_identity_suite(cli.seed, a.trials);
            let mono = adjust_monotonicity_suite(cli.seed, a.traces);
            out.violation |= !ids.all_hold
                || mono.f_violations
                    + mono.h2_violations
                    + mono.step_bound_violations
                    + mono.errors
                    > 0;
            out.emit(json!({ "identities": ids, "monotonicity": mono }))?;
        }
        Command::Decompose(a) => {
            let params = params_or_default(&a.params)?;
            for (i, g) in graphs(&a.input)?.iter().enumerate() {
                match decompose_prism(g, &params) {
                    Ok(d) => out.emit_line(i, d)?,
                    Err(e) => {
                        out.violation = true;
                        out.emit_line(i, structure_failure(&e))?;
                    }
                }
            }
        }
        Command::Classify(a) => {
            let params = params_or_default(&a.structure.params)?;
            let b = a.b.or(params.b);
            for (i, g) in graphs(&a.structure.input)?.iter().enumerate() {
                let res = decompose_prism(g, &params)
                    .and_then(|d| classify_exceptional(g, &d, &params).map(|s| (d, s)));
                match res {
                    Ok((d, s)) => {
                        let cert = b.map(|b| evaluate_certificate(&s, b));
                        out.violation |= !s.phi_violations.is_empty();
                        out.emit_line(
                            i,
                            json!({ "decomposition": d, "split": s, "certificate": cert }),
                        )?;
                    }
                    Err(e) => {
                        out.violation = true;
                        out.emit_line(i, structure_failure(&e))?;
                    }
                }
            }
        }
        Command::Exhaustive(a) => {
            let mut cfg = ScanConfig::new(a.n, a.edge_min, parse_checks(&a.check).map_err(usage)?);
            cfg.chunks = a.chunks;
            let r = exhaustive_scan(&cfg).map_err(usage)?;
            out.violation |= !r.all_hold;
            out.emit(r)?;
        }
        Command::Anneal(a) => {
            let mut cfg = AnnealConfig::new(a.n, a.b, cli.seed, a.iters);
            cfg.restarts = a.restarts;
            let r = anneal_min_triangles(&cfg).map_err(usage)?;
            out.violation |= r.counterexample_found || r.audit_mismatches > 0;
            out.emit(json!({ "anneal_config": cfg, "report": r }))?;
        }
    }
    Ok(())
}

fn structure_failure(e: &booktri::StructureError) -> Value {
    json!({ "error": e.to_string(), "step": e.step() })
}
