//! `localdisc`: bounds, family sweeps, optimizer runs and self-checks for
//! locally discriminating a bipartite pure state from `I/D`.
//!
//! Exit codes: 0 success, 1 a verification check failed (or an I/O error),
//! 2 malformed input, 3 the ordering `β_g ≤ β_sep ≤ β̃_↔ ≤ β_→` failed.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde_json::json;

use localdisc::report::{sweep, verify, write_csv, ORDERING_TOL};
use localdisc::{
    beta_two_way_upper, grid_oracle, BoundsReport, Error, FamilySpec, OptimizerConfig,
    SchmidtSpectrum,
};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_BAD_INPUT: u8 = 2;
const EXIT_ORDERING: u8 = 3;

#[derive(Parser)]
#[command(
    name = "localdisc",
    version,
    about = "Local discrimination bounds against the completely mixed state"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print all four bounds for a pure state as flat JSON.
    Bounds {
        /// Schmidt coefficients, comma separated (e.g. 0.875,0.125).
        #[arg(long)]
        schmidt: String,
        /// Local dimensions dA,dB (default d,d with d the number of coefficients).
        #[arg(long, value_parser = parse_dims)]
        dims: Option<(usize, usize)>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate a one-parameter family on an even grid and write CSV.
    Sweep {
        /// fig1..fig6 or an expression like "1-2t,t,t@0:1/3".
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the two-way optimizer and print its witness as flat JSON.
    Optimize {
        #[arg(long)]
        schmidt: String,
        #[arg(long, default_value_t = 16)]
        starts: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        /// Also run the exhaustive grid at this spacing and report both.
        #[arg(long)]
        grid_step: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build every operator for the state, check it and print one line per check.
    Verify {
        #[arg(long)]
        schmidt: String,
        #[arg(long, default_value_t = 100_000)]
        mc_samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_dims(text: &str) -> Result<(usize, usize), String> {
    let (a, b) = text.split_once(',').ok_or("expected dA,dB")?;
    let a: usize = a
        .trim()
        .parse()
        .map_err(|_| format!("bad dimension '{a}'"))?;
    let b: usize = b
        .trim()
        .parse()
        .map_err(|_| format!("bad dimension '{b}'"))?;
    if a == 0 || b == 0 {
        return Err("dimensions must be positive".into());
    }
    Ok((a, b))
}

fn print_json(value: &serde_json::Value) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Bounds {
            schmidt,
            dims,
            seed,
        } => {
            let s = SchmidtSpectrum::parse(&schmidt)?;
            let dims = dims.unwrap_or((s.len(), s.len()));
            let config = OptimizerConfig {
                seed,
                ..Default::default()
            };
            let report = BoundsReport::pure(&s, dims, &config)?;
            print_json(&serde_json::to_value(&report)?)?;
            if let Some(violation) = report.ordering_violation() {
                eprintln!("ordering violated: {violation}");
                return Ok(EXIT_ORDERING);
            }
            Ok(0)
        }
        Command::Sweep {
            family,
            points,
            out,
            seed,
        } => {
            let family = FamilySpec::parse(&family)?;
            let config = OptimizerConfig {
                seed,
                ..Default::default()
            };
            let rows = sweep(&family, points, &config)?;
            let file =
                File::create(&out).with_context(|| format!("cannot create {}", out.display()))?;
            let mut writer = BufWriter::new(file);
            write_csv(&rows, &mut writer)?;
            writer.flush()?;
            eprintln!(
                "wrote {} rows for {} to {}",
                rows.len(),
                family.name,
                out.display()
            );
            let broken = rows.iter().find(|r| {
                let chain = [r.beta_g, r.beta_sep, r.beta_two_way_upper, r.beta_one_way];
                chain.windows(2).any(|w| w[0] > w[1] + ORDERING_TOL)
            });
            if let Some(r) = broken {
                eprintln!("ordering violated at t = {}", r.t);
                return Ok(EXIT_ORDERING);
            }
            Ok(0)
        }
        Command::Optimize {
            schmidt,
            starts,
            tol,
            max_iters,
            grid_step,
            seed,
        } => {
            let s = SchmidtSpectrum::parse(&schmidt)?;
            let dim = s.len() * s.len();
            let config = OptimizerConfig {
                starts,
                tol,
                max_iters,
                seed,
                grid_step: None,
            };
            let result = beta_two_way_upper(&s, dim, &config)?;
            let grid = grid_step.map(|h| grid_oracle(&s, dim, h)).transpose()?;
            print_json(&json!({
                "spectrum": s.lambdas(),
                "D": dim,
                "beta_two_way_upper": result.beta_value,
                "delta_star": result.best_delta.flat(),
                "method": result.method,
                "iterations": result.iterations,
                "converged": result.converged,
                "grid_beta": grid.as_ref().map(|g| g.beta_value),
                "grid_delta": grid.as_ref().map(|g| g.best_delta.flat()),
                "diagnostics": result.diagnostics,
            }))?;
            Ok(0)
        }
        Command::Verify {
            schmidt,
            mc_samples,
            seed,
        } => {
            let s = SchmidtSpectrum::parse(&schmidt)?;
            let checks = verify(&s, mc_samples, seed)?;
            let mut out = io::stdout().lock();
            for check in &checks {
                writeln!(out, "{check}")?;
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            writeln!(out, "{} checks, {failed} failed", checks.len())?;
            Ok(if failed == 0 { 0 } else { EXIT_CHECK_FAILED })
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::InvalidSpectrum(_)
            | Error::Parse(_)
            | Error::InvalidFamily(_)
            | Error::InvalidDelta(_)
            | Error::InvalidArgument(_)
            | Error::RankMismatch { .. }
            | Error::Empty(_),
        ) => EXIT_BAD_INPUT,
        _ => EXIT_CHECK_FAILED,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
