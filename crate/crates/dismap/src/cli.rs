//! Command-line entry point: load, generate or parse, optimize, verify,
//! report.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use dismap_core::circuit::{generate_benchmark, parse_qasm, BenchmarkKind, Circuit};
use dismap_core::hardware::SystemConfig;
use dismap_core::optimizer::{baseline, OptimizeError, OptimizerOptions, Plan, Selection};
use dismap_core::router::RouterOptions;
use dismap_core::verifier::{check_constraints, equivalence_oracle};

use crate::config::load_config;
use crate::emit::{partition_json, write_artifacts};
use crate::optimize_parallel;
use crate::report::Report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// Largest circuit `--verify` hands to the statevector oracle.
const VERIFY_MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Bench {
    Bv,
    Hwea,
    Qaoa,
    Adder,
}

impl From<Bench> for BenchmarkKind {
    fn from(b: Bench) -> Self {
        match b {
            Bench::Bv => BenchmarkKind::Bv,
            Bench::Hwea => BenchmarkKind::Hwea,
            Bench::Qaoa => BenchmarkKind::Qaoa,
            Bench::Adder => BenchmarkKind::Adder,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Select {
    Swaps,
    Fidelity,
}

/// Map a circuit onto EPR-linked quantum processors with minimal SWAP
/// overhead.
#[derive(Debug, Parser)]
#[command(name = "dismap", version)]
pub struct Args {
    /// System configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// OpenQASM 2.0 circuit file.
    #[arg(long, conflicts_with = "bench", required_unless_present = "bench")]
    pub circuit: Option<PathBuf>,
    /// Generate a benchmark circuit instead of reading one.
    #[arg(long, value_enum, requires = "qubits")]
    pub bench: Option<Bench>,
    /// Width of the generated benchmark.
    #[arg(long)]
    pub qubits: Option<usize>,
    /// EPR success rate for every link (replaces the config's rates).
    #[arg(long)]
    pub sr: Option<f64>,
    /// Largest link set per candidate.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=2))]
    pub max_links: Option<u64>,
    /// Best-quality qubits per worker offered as link endpoints.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, env = "DISMAP_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Routing distance of an EPR edge.
    #[arg(long, default_value_t = 3.0)]
    pub w_epr: f64,
    #[arg(long, value_enum, default_value_t = Select::Swaps)]
    pub select: Select,
    /// Routing seeds tried per partition.
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    /// Run the fixed-candidate, first-fit, identity-layout reference instead.
    #[arg(long)]
    pub baseline: bool,
    /// Write the chosen partition as JSON.
    #[arg(long)]
    pub emit_partition: Option<PathBuf>,
    /// Write the JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Directory for per-worker QASM files and the manifest.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads for candidate evaluation (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Run the statevector equivalence oracle (circuits up to 12 qubits).
    #[arg(long)]
    pub verify: bool,
}

impl Args {
    pub fn optimizer_options(&self) -> OptimizerOptions {
        OptimizerOptions {
            seed: self.seed,
            router: RouterOptions {
                w_epr: self.w_epr,
                ..RouterOptions::default()
            },
            selection: match self.select {
                Select::Swaps => Selection::Swaps,
                Select::Fidelity => Selection::Fidelity,
            },
            restarts: self.restarts.max(1),
            ..OptimizerOptions::default()
        }
    }
}

/// Outcome of a successful pipeline run.
pub struct RunOutput {
    pub plan: Plan,
    pub report: Report,
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn fail(code: i32, message: impl ToString) -> Failure {
    Failure {
        code,
        message: message.to_string(),
    }
}

pub fn load_system(args: &Args) -> Result<SystemConfig, Failure> {
    let mut config = load_config(&args.config).map_err(|e| fail(EXIT_CONFIG, e))?;
    if let Some(sr) = args.sr {
        config = config.with_sr(sr);
    }
    if let Some(m) = args.max_links {
        config.max_links = m as usize;
    }
    if let Some(k) = args.k {
        config.candidates_per_worker = k;
    }
    config.validate().map_err(|e| {
        let lines: Vec<String> = e.violations.iter().map(|v| format!("  - {v}")).collect();
        fail(EXIT_CONFIG, format!("{e}:\n{}", lines.join("\n")))
    })?;
    Ok(config)
}

pub fn load_circuit(args: &Args) -> Result<Circuit, Failure> {
    match (&args.circuit, args.bench) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                fail(
                    EXIT_PARSE,
                    format!("cannot read circuit {}: {e}", path.display()),
                )
            })?;
            parse_qasm(&text).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))
        }
        (None, Some(kind)) => {
            let n = args
                .qubits
                .ok_or_else(|| fail(EXIT_PARSE, "--bench needs --qubits"))?;
            generate_benchmark(kind.into(), n, args.seed).map_err(|e| fail(EXIT_PARSE, e))
        }
        (None, None) => Err(fail(EXIT_PARSE, "either --circuit or --bench is required")),
    }
}

fn optimize_error(e: OptimizeError) -> Failure {
    match e {
        OptimizeError::Config(c) => fail(EXIT_CONFIG, c),
        OptimizeError::EmptyCircuit | OptimizeError::Circuit(_) => fail(EXIT_PARSE, e),
        other => fail(EXIT_INFEASIBLE, other),
    }
}

/// The full pipeline. Verification failures still yield the report.
pub fn execute(args: &Args) -> Result<RunOutput, (Failure, Option<Box<RunOutput>>)> {
    let mut timing = Vec::new();
    let t = Instant::now();
    let config = load_system(args).map_err(|f| (f, None))?;
    timing.push(("load", t.elapsed().as_secs_f64()));

    let t = Instant::now();
    let circuit = load_circuit(args).map_err(|f| (f, None))?;
    timing.push(("circuit", t.elapsed().as_secs_f64()));

    let t = Instant::now();
    let opts = args.optimizer_options();
    let plan = if args.baseline {
        baseline(&circuit, &config, &opts)
    } else {
        optimize_parallel(&circuit, &config, &opts, args.threads)
    }
    .map_err(|e| (optimize_error(e), None))?;
    timing.push(("optimize", t.elapsed().as_secs_f64()));

    let t = Instant::now();
    let violations = check_constraints(&plan);
    let mut report = Report::new(&plan, &circuit, args.seed, &violations);
    if args.verify {
        if circuit.n_qubits() <= VERIFY_MAX_QUBITS {
            report.equivalent = Some(equivalence_oracle(&circuit, &plan).unwrap_or(false));
        } else {
            eprintln!(
                "note: --verify skipped, circuit has {} qubits (oracle limit {VERIFY_MAX_QUBITS})",
                circuit.n_qubits()
            );
        }
    }
    timing.push(("verify", t.elapsed().as_secs_f64()));
    report.timing = timing
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();

    let out = RunOutput { plan, report };
    if !out.report.violations.is_empty() {
        let n = out.report.violations.len();
        return Err((
            fail(EXIT_VERIFY, format!("{n} constraint violation(s)")),
            Some(Box::new(out)),
        ));
    }
    if out.report.equivalent == Some(false) {
        return Err((
            fail(EXIT_VERIFY, "routed circuit is not equivalent to the input"),
            Some(Box::new(out)),
        ));
    }
    Ok(out)
}

fn write_outputs(args: &Args, out: &RunOutput, config_text: &str) -> Result<(), Failure> {
    let io = |what: &str, p: &std::path::Path, e: std::io::Error| {
        fail(
            EXIT_CONFIG,
            format!("cannot write {what} {}: {e}", p.display()),
        )
    };
    if let Some(p) = &args.report {
        std::fs::write(p, out.report.to_json()).map_err(|e| io("report", p, e))?;
    }
    if let Some(p) = &args.emit_partition {
        std::fs::write(p, partition_json(&out.plan)).map_err(|e| io("partition", p, e))?;
    }
    if let Some(d) = &args.out_dir {
        write_artifacts(&out.plan, d).map_err(|e| io("artifacts to", d, e))?;
    }
    print!("{config_text}");
    Ok(())
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
        }
    };
    run_args(&args)
}

pub fn run_args(args: &Args) -> i32 {
    match execute(args) {
        Ok(out) => {
            let text = out
                .report
                .to_text(&load_system(args).expect("loaded before"));
            match write_outputs(args, &out, &text) {
                Ok(()) => EXIT_OK,
                Err(f) => {
                    eprintln!("error: {}", f.message);
                    f.code
                }
            }
        }
        Err((f, out)) => {
            if let Some(out) = out {
                let text = out
                    .report
                    .to_text(&load_system(args).expect("loaded before"));
                let _ = write_outputs(args, &out, &text);
            }
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
