//! Command-line front end: parse a problem file, run the requested
//! operation, emit canonical JSON (or a human report with --pretty).
//!
//! Exit codes: 0 success, 1 parse error, 2 hypothesis violation,
//! 3 precision exhaustion, 4 internal error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use localconv::engine::{self, ConvMode, DEFAULT_GUARD};
use localconv::error::Error;
use localconv::fourier::{self, FtPath};
use localconv::problem;
use localconv::rep::invariants;
use localconv::selfcheck;

#[derive(Parser)]
#[command(
    name = "localconv",
    about = "Local monodromy of multiplicative convolutions and local Fourier transforms over the algebraic closure of F_p"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Problem file (JSON).
    problem: PathBuf,
    /// Series precision guard (digits beyond de/c); overrides the file.
    #[arg(long)]
    guard: Option<i64>,
    /// Include H, its reduction, roots, lifts and h-values in the output.
    #[arg(long)]
    trace: bool,
    /// Human-readable report instead of JSON.
    #[arg(long)]
    pretty: bool,
}

#[derive(clap::Args)]
struct FtArgs {
    #[command(flatten)]
    run: RunArgs,
    /// direct | conv | both (both computes twice and checks equality).
    #[arg(long, default_value = "both")]
    path: String,
}

#[derive(Subcommand)]
enum Command {
    /// Convolution at infinity of two representations wild at infinity.
    #[command(name = "conv-inf-inf")]
    ConvInfInf(RunArgs),
    /// Convolution at infinity of a representation at 0 with one at infinity.
    #[command(name = "conv-0-inf")]
    Conv0Inf(RunArgs),
    /// Fourier transform from 0 to infinity of F.
    #[command(name = "ft0inf")]
    Ft0Inf(FtArgs),
    /// Fourier transform from infinity to infinity of F (deg f > a).
    #[command(name = "ftinfinf")]
    FtInfInf(FtArgs),
    /// Rank, Swan conductor and slopes of a representation document.
    #[command(name = "invariants")]
    Invariants {
        rep: PathBuf,
        #[arg(long)]
        pretty: bool,
    },
    /// Run the built-in property suites and report pass/fail counts.
    #[command(name = "selfcheck")]
    Selfcheck,
}

fn read(path: &PathBuf) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {}", path.display(), e)))
}

fn run_conv(args: &RunArgs, mode: ConvMode, command: &str) -> Result<String, Error> {
    let text = read(&args.problem)?;
    let file = problem::parse_problem(&text)?;
    let mut tower = file.build_tower()?;
    let f = file.resolve_f(&mut tower)?;
    let g = file.resolve_g(&mut tower)?;
    let guard = args.guard.or(file.guard).unwrap_or(DEFAULT_GUARD);
    let out = engine::convolve(&mut tower, &f, &g, mode, guard)?;
    let doc = problem::output_doc(&tower, command, guard, &out, args.trace);
    Ok(if args.pretty {
        problem::render_report(&doc)
    } else {
        problem::to_json(&doc, false)
    })
}

fn run_ft(args: &FtArgs, at_zero: bool, command: &str) -> Result<String, Error> {
    let text = read(&args.run.problem)?;
    let file = problem::parse_problem(&text)?;
    let mut tower = file.build_tower()?;
    let f = file.resolve_f(&mut tower)?;
    let guard = args.run.guard.or(file.guard).unwrap_or(DEFAULT_GUARD);
    let path = FtPath::parse(&args.path)?;
    let out = if at_zero {
        fourier::ft_0_inf(&mut tower, &f, guard, path)?
    } else {
        fourier::ft_inf_inf(&mut tower, &f, guard, path)?
    };
    let doc = problem::output_doc(&tower, command, guard, &out, args.run.trace);
    Ok(if args.run.pretty {
        problem::render_report(&doc)
    } else {
        problem::to_json(&doc, false)
    })
}

fn run_invariants(path: &PathBuf, pretty: bool) -> Result<String, Error> {
    let text = read(path)?;
    let (_, rep) = problem::parse_rep_doc(&text)?;
    let inv = invariants(&rep);
    if pretty {
        let slopes: Vec<String> = inv
            .slopes
            .iter()
            .map(|s| format!("{}/{}", s.numer(), s.denom()))
            .collect();
        Ok(format!(
            "rank {}   swan {}   slopes [{}]\n",
            inv.rank,
            inv.swan,
            slopes.join(", ")
        ))
    } else {
        #[derive(serde::Serialize)]
        struct InvDoc {
            rank: u64,
            swan: i64,
            slopes: Vec<String>,
        }
        let doc = InvDoc {
            rank: inv.rank,
            swan: inv.swan,
            slopes: inv
                .slopes
                .iter()
                .map(|s| format!("{}/{}", s.numer(), s.denom()))
                .collect(),
        };
        Ok(serde_json::to_string(&doc).expect("invariants serialize"))
    }
}

fn run_selfcheck() -> Result<String, Error> {
    let reports = selfcheck::run()?;
    let mut s = String::new();
    let mut all_ok = true;
    for r in &reports {
        let status = if r.failed == 0 { "ok" } else { "FAILED" };
        all_ok &= r.failed == 0;
        s.push_str(&format!(
            "{:<22} {:>3} passed {:>3} failed   {}\n",
            r.name, r.passed, r.failed, status
        ));
    }
    if !all_ok {
        s.push_str("selfcheck FAILED\n");
        return Err(Error::Internal(s));
    }
    s.push_str("selfcheck ok\n");
    Ok(s)
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse(_) => 1,
        Error::HypothesisViolation(_) => 2,
        Error::PrecisionExhausted(_) => 3,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::ConvInfInf(args) => run_conv(args, ConvMode::InfInf, "conv-inf-inf"),
        Command::Conv0Inf(args) => run_conv(args, ConvMode::ZeroInf, "conv-0-inf"),
        Command::Ft0Inf(args) => run_ft(args, true, "ft0inf"),
        Command::FtInfInf(args) => run_ft(args, false, "ftinfinf"),
        Command::Invariants { rep, pretty } => run_invariants(rep, *pretty),
        Command::Selfcheck => run_selfcheck(),
    };
    match result {
        Ok(text) => {
            println!("{}", text.trim_end());
            ExitCode::SUCCESS
        }
        Err(err) => {
            let kind = match &err {
                Error::Parse(_) => "parse",
                Error::HypothesisViolation(_) => "hypothesis-violation",
                Error::PrecisionExhausted(_) => "precision-exhausted",
                Error::DivisionByZero => "division-by-zero",
                Error::SingularRoot => "singular-root",
                Error::NotARoot => "not-a-root",
                Error::Unsupported(_) => "unsupported",
                Error::Internal(_) => "internal",
            };
            println!(
                "{}",
                serde_json::json!({"error": {"kind": kind, "message": err.to_string()}})
            );
            eprintln!("error: {}", err);
            ExitCode::from(exit_code_for(&err))
        }
    }
}
