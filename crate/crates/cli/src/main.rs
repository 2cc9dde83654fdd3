//! `dilationkit`: build and verify frame, framing and measure dilations
//! from JSON inputs.

mod commands;
mod io;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::ovm::Method;
use report::{write_atomic, Failure, Report};

#[derive(Debug, Parser)]
#[command(name = "dilationkit", version, about = "Dilations of frames, framings and operator-valued measures")]
struct Cli {
    /// Also write the report to this file.
    #[arg(long, global = true, value_name = "PATH")]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Frame bounds, canonical dual and Riesz or orthonormal dilation.
    FrameAnalyze(FrameAnalyzeArgs),
    /// Dilate a measure to a projection-valued one.
    OvmDilate(OvmDilateArgs),
    /// Rescale a framing to a dual frame pair.
    FramingRescale(FramingRescaleArgs),
    /// Sweep the Rademacher framing of l_p blocks.
    Chl5(Chl5Args),
}

#[derive(Debug, Args)]
struct FrameAnalyzeArgs {
    path: PathBuf,
    /// Compute the canonical dual frame.
    #[arg(long)]
    dual: bool,
    /// Dilate to a Riesz basis, orthonormal for Parseval frames.
    #[arg(long)]
    dilate: bool,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("method").required(true).args(["naimark", "block"]))]
struct OvmDilateArgs {
    path: PathBuf,
    /// Naimark dilation of a positive measure.
    #[arg(long)]
    naimark: bool,
    /// Block dilation of an arbitrary measure.
    #[arg(long)]
    block: bool,
    /// Residual threshold for every check.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Write the dilation triple here.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Largest atom count checked over every subset.
    #[arg(long, default_value_t = 16)]
    max_atoms: usize,
}

#[derive(Debug, Args)]
struct FramingRescaleArgs {
    path: PathBuf,
}

fn parse_exponent(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !p.is_finite() || p <= 1.0 {
        return Err("p must be a finite number greater than 1".into());
    }
    if p == 2.0 {
        return Err("p = 2 is excluded".into());
    }
    Ok(p)
}

#[derive(Debug, Args)]
struct Chl5Args {
    /// Exponent of the l_p blocks, p > 1 and p != 2.
    #[arg(long, value_parser = parse_exponent)]
    p: f64,
    /// Largest block order.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=11))]
    nmax: u64,
    /// Random samples per block and statistic.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(100..=1_000_000))]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("DILATIONKIT_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("DILATIONKIT_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn dispatch(command: &Command) -> Result<Report, Failure> {
    match command {
        Command::FrameAnalyze(a) => commands::frame::run(&a.path, a.dual, a.dilate),
        Command::OvmDilate(a) => commands::ovm::run(
            &a.path,
            &commands::ovm::Options {
                method: if a.naimark { Method::Naimark } else { Method::Block },
                tol: a.tol,
                out: a.out.as_deref(),
                max_atoms: a.max_atoms,
            },
        ),
        Command::FramingRescale(a) => commands::framing::run(&a.path),
        Command::Chl5(a) => commands::chl5::run(&commands::chl5::Options {
            p: a.p,
            nmax: a.nmax as usize,
            trials: a.trials as usize,
            seed: a.seed,
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match dispatch(&cli.command) {
        Ok(report) => {
            let text = report.to_json();
            print!("{text}");
            if let Some(path) = &cli.report {
                if let Err(e) = write_atomic(path, &text) {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(2);
                }
            }
            if report.pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
