//! `paratower`: exact pairings, slopes, cone thresholds and stability checks on scenario files.

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use paratower_core::rational::parse_rational;
use paratower_core::report::{run, Command, Report, RunOptions};
use paratower_core::ring::MAX_TOWER_RANK;
use paratower_core::selftest::selftest_report;
use paratower_core::{Execution, Rational};

const MAX_RANK_VAR: &str = "PARATOWER_MAX_RANK";
const DEFAULT_MAX_RANK: usize = 8;

#[derive(Parser)]
#[command(name = "paratower", version, about = "Exact intersection theory and parabolic slope asymptotics on blow-up towers")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Pair monomials against the fundamental class, with reduction traces.
    Pair(FileArgs),
    /// Slope polynomial and its leading-term check.
    Slope(FileArgs),
    /// Kähler cone threshold for the polarization family.
    Cone(FileArgs),
    /// Parabolic and equivariant stability verdicts.
    Stability(FileArgs),
    /// Weight strata of the bundle filtrations.
    Weights(FileArgs),
    /// Run the built-in acceptance suite.
    Selftest {
        /// Run every criterion on one thread.
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Standard,
    LastWeightZero,
}

#[derive(Args)]
struct FileArgs {
    /// Scenario files in JSON; `-` reads standard input.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Evaluate at this epsilon, written p/q.
    #[arg(long)]
    epsilon: Option<String>,
    /// Root isolation precision, written p/q.
    #[arg(long)]
    precision: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Include reduction traces and intermediate classes.
    #[arg(long)]
    trace: bool,
    /// Monomial to pair, e.g. "w^2 d1 t2"; repeatable.
    #[arg(long = "monomial")]
    monomials: Vec<String>,
    /// Number of scenario files evaluated at once.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Evaluate each scenario on one thread.
    #[arg(long)]
    sequential: bool,
}

fn parse_q(flag: &str, text: &Option<String>) -> Result<Option<Rational>> {
    text.as_deref()
        .map(|t| parse_rational(t).with_context(|| format!("--{flag} expects a rational p/q")))
        .transpose()
}

fn max_rank() -> Result<usize> {
    let Ok(text) = std::env::var(MAX_RANK_VAR) else {
        return Ok(DEFAULT_MAX_RANK);
    };
    let n: usize = text.trim().parse().with_context(|| format!("{MAX_RANK_VAR} must be a positive integer"))?;
    if n == 0 || n > MAX_TOWER_RANK {
        bail!("{MAX_RANK_VAR} must lie in 1..={MAX_TOWER_RANK}, got {n}");
    }
    Ok(n)
}

fn read_input(path: &PathBuf) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading standard input")?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

/// Evaluates every file, `jobs` at a time, keeping results in input order.
fn run_files(command: Command, args: &FileArgs, opts: &RunOptions) -> Vec<Result<Report>> {
    let inputs: Vec<Result<String>> = args.files.iter().map(read_input).collect();
    let slots: Vec<Mutex<Option<Result<Report>>>> = inputs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let work = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        let Some(input) = inputs.get(i) else { break };
        let out = match input {
            Ok(text) => run(command, text, opts)
                .with_context(|| format!("{}", args.files[i].display())),
            Err(e) => Err(anyhow::anyhow!("{e:#}")),
        };
        *slots[i].lock().expect("result slot") = Some(out);
    };
    std::thread::scope(|scope| {
        for _ in 1..args.jobs.clamp(1, inputs.len().max(1)) {
            scope.spawn(work);
        }
        work();
    });
    slots.into_iter().map(|m| m.into_inner().expect("result slot").expect("every file evaluated")).collect()
}

fn file_command(command: Command, args: &FileArgs) -> Result<ExitCode> {
    let opts = RunOptions {
        epsilon: parse_q("epsilon", &args.epsilon)?,
        precision: parse_q("precision", &args.precision)?,
        last_weight_zero: matches!(args.mode, Some(ModeArg::LastWeightZero)),
        trace: args.trace,
        monomials: args.monomials.clone(),
        exec: if args.sequential { Execution::Sequential } else { Execution::default() },
        max_rank: max_rank()?,
    };
    let mut code = 0u8;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for result in run_files(command, args, &opts) {
        match result {
            Ok(report) => {
                out.write_all(report.to_json_string().as_bytes())?;
                if !report.ok {
                    code = code.max(1);
                }
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                code = 2;
            }
        }
    }
    Ok(ExitCode::from(code))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Cmd::Pair(a) => file_command(Command::Pair, a),
        Cmd::Slope(a) => file_command(Command::Slope, a),
        Cmd::Cone(a) => file_command(Command::Cone, a),
        Cmd::Stability(a) => file_command(Command::Stability, a),
        Cmd::Weights(a) => file_command(Command::Weights, a),
        Cmd::Selftest { sequential } => {
            let exec = if *sequential { Execution::Sequential } else { Execution::default() };
            let report = selftest_report(exec);
            print!("{}", report.to_json_string());
            Ok(ExitCode::from(u8::from(!report.ok)))
        }
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })
}
