//! `convex-energy`: command-line front end for the convex-energy library.
//!
//! Exit codes: 0 when every checked bound holds, 2 when a mathematical bound
//! is violated beyond its tolerance, 1 on usage or input errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "convex-energy", version, about = "Sharp J/d1 inequalities on polytopes and toric rays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check one polytope + function instance against both constants.
    Verify {
        /// JSON file with `function` and optionally `polytope`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = positive)]
        tol: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Table of the simplex extremizers and the steep family.
    Extremal {
        #[arg(long, default_value_t = 3)]
        n_max: usize,
        #[arg(long, default_value_t = 64)]
        m_max: u32,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Seeded scan over random polytopes and max-affine functions.
    Scan {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, value_parser = positive)]
        tol: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Identity checks on the toric fixtures.
    Toric {
        /// Fixture name (P1, P1xP1, simplex-FS); all fixtures when omitted.
        #[arg(long)]
        fixture: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Radial inequality along toric rays.
    Ray {
        /// Ray JSON `{fixture, scale?, direction}`; the built-in suite when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Restrict the built-in suite to one fixture.
        #[arg(long)]
        fixture: Option<String>,
        #[arg(long, default_value_t = 64)]
        m_max: u32,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

/// Result of a subcommand that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Holds,
    Violated,
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("CONVEX_ENERGY_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("CONVEX_ENERGY_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<Outcome, String> {
    configure_threads()?;
    match cli.command {
        Command::Verify { input, tol, out } => commands::verify(&input, tol, &out.into()),
        Command::Extremal { n_max, m_max, out } => commands::extremal(n_max, m_max, &out.into()),
        Command::Scan { seed, count, dim, tol, out } => commands::scan(seed, count, dim, tol, &out.into()),
        Command::Toric { fixture, seed, out } => commands::toric(fixture.as_deref(), seed, &out.into()),
        Command::Ray { input, fixture, m_max, out } => {
            commands::ray(input.as_deref(), fixture.as_deref(), m_max, &out.into())
        }
    }
}

impl From<OutputArgs> for output::Sink {
    fn from(a: OutputArgs) -> Self {
        output::Sink { path: a.output, format: a.format }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Outcome::Holds) => ExitCode::SUCCESS,
        Ok(Outcome::Violated) => ExitCode::from(2),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
