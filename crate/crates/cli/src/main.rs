//! `lightning`: run the approximation experiments from the command line.
//!
//! Every subcommand writes `<cmd>.csv` and `summary.json` under `--out`
//! (or the CSV to stdout without it) and always prints the JSON summary as
//! the last line of stdout.

mod commands;
mod error;
mod params;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Report;
use crate::error::CliError;
use crate::params::Params;

#[derive(Parser, Debug)]
#[command(name = "lightning", version, about = "Lightning and Laplace approximation experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// `key = value` file; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for the CSV, artifacts and `summary.json`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Record wall-clock times instead of zeros.
    #[arg(long, global = true)]
    timing: bool,
    /// Accepted for interface stability; every grid is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

/// Declares a flag struct whose fields are optional strings, plus the
/// `(key, value)` pairs used to overlay them on the config file.
macro_rules! flags {
    ($name:ident { $($field:ident : $key:literal => $help:literal),* $(,)? }) => {
        #[derive(Args, Debug)]
        struct $name {
            $( #[arg(long = $key, help = $help)] $field: Option<String>, )*
        }

        impl $name {
            fn pairs(&self) -> Vec<(&'static str, Option<String>)> {
                vec![$(($key, self.$field.clone())),*]
            }
        }
    };
}

flags!(ApproxFlags {
    alpha: "alpha" => "Singularity exponent",
    beta: "beta" => "Sector opening, as a multiple of pi",
    sigma: "sigma" => "Pole spacing: a number, opt, <f>opt or opt/<d>",
    n1: "N1" => "Number of poles",
    n2: "N2" => "Tail degree",
    c: "C" => "Truncation constant",
    target: "target" => "power or log",
    tol: "tol" => "Fail when the sup error exceeds this",
});

flags!(SweepFlags {
    alpha: "alpha" => "Singularity exponent",
    beta: "beta" => "Sector opening, as a multiple of pi",
    sigma: "sigma" => "Comma-separated pole spacings",
    n1: "N1" => "Comma-separated pole counts",
    n2_rule: "N2-rule" => "sqrt:<f>, prop:<f> or fixed:<n>",
    c: "C" => "Truncation constant",
    target: "target" => "power or log",
    rate_tol: "rate-tol" => "Relative tolerance on the fitted rate",
});

flags!(QuadFlags {
    alpha: "alpha" => "Singularity exponent",
    beta: "beta" => "Sector opening, as a multiple of pi",
    sigma: "sigma" => "Comma-separated pole spacings",
    nt: "Nt" => "Node counts: list or start:end:step",
    c: "C" => "Truncation constant",
    target: "target" => "power or log",
    n_arc: "n-arc" => "Points on the evaluation arc",
    slope_tol: "slope-tol" => "Relative tolerance on the fitted slope",
});

flags!(NearFlags {
    alpha: "alpha" => "Singularity exponent",
    beta: "beta" => "Sector opening, as a multiple of pi",
    h: "h" => "Quadrature step",
    t: "T" => "Comma-separated truncation points",
});

flags!(LaplaceFlags {
    polygon: "polygon" => "Polygon file",
    data: "data" => "re2, rez, const1 or a samples file",
    sigma: "sigma" => "opt, percorner, or a spacing",
    n: "N" => "Comma-separated pole counts",
    weighting: "weighting" => "uniform or sqrt-spacing",
    tol: "tol" => "Required final boundary error",
});

flags!(DecompFlags {
    k: "k" => "Monomial power",
    alpha: "alpha" => "Exponent",
    w: "W" => "Slit length",
    tol: "tol" => "Allowed jump discrepancy",
});

#[derive(Subcommand, Debug)]
enum Command {
    /// Build one approximant and measure its sup error.
    Approx(ApproxFlags),
    /// Sweep pole counts and fit the root-exponential rate.
    Sweep(SweepFlags),
    /// Quadrature error against the number of nodes.
    Quaderr(QuadFlags),
    /// Check the bounded-ratio behaviour near the origin.
    Nearorigin(NearFlags),
    /// Solve the Laplace problem on a polygon.
    Laplace(LaplaceFlags),
    /// Verify the singular decomposition of a slit integral.
    Decomp(DecompFlags),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Approx(_) => "approx",
            Command::Sweep(_) => "sweep",
            Command::Quaderr(_) => "quaderr",
            Command::Nearorigin(_) => "nearorigin",
            Command::Laplace(_) => "laplace",
            Command::Decomp(_) => "decomp",
        }
    }

    fn pairs(&self) -> Vec<(&'static str, Option<String>)> {
        match self {
            Command::Approx(f) => f.pairs(),
            Command::Sweep(f) => f.pairs(),
            Command::Quaderr(f) => f.pairs(),
            Command::Nearorigin(f) => f.pairs(),
            Command::Laplace(f) => f.pairs(),
            Command::Decomp(f) => f.pairs(),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("LIGHTNING_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("LIGHTNING_THREADS must be a positive integer, got {raw:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn emit(name: &str, out: Option<&PathBuf>, report: &Report) -> Result<(), CliError> {
    let summary = serde_json::to_string(&report.summary).expect("summary serializes");
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("{name}.csv")), &report.csv)?;
            for (file, body) in &report.artifacts {
                std::fs::write(dir.join(file), body)?;
            }
            std::fs::write(dir.join("summary.json"), format!("{summary}\n"))?;
        }
        None => print!("{}", report.csv),
    }
    println!("{summary}");
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let mut params = Params::load(cli.common.config.as_deref())?.overlay(cli.command.pairs());
    if let Some(seed) = cli.common.seed {
        params = params.overlay([("seed", Some(seed.to_string()))]);
    }
    if cli.common.timing {
        params = params.overlay([("timing", Some("true".to_string()))]);
    }
    let report = match &cli.command {
        Command::Approx(_) => commands::approx(&params)?,
        Command::Sweep(_) => commands::sweep(&params)?,
        Command::Quaderr(_) => commands::quaderr(&params)?,
        Command::Nearorigin(_) => commands::nearorigin(&params)?,
        Command::Laplace(_) => commands::laplace(&params)?,
        Command::Decomp(_) => commands::decomp(&params)?,
    };
    emit(cli.command.name(), cli.common.out.as_ref(), &report)?;
    match report.failure {
        Some(msg) => Err(CliError::Assertion(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lightning: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
