use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use c1pk::assembly::SolverKind;
use c1pk::element::Family;
use c1pk::error::FemError;
use c1pk::solver::PrecondKind;
use c1pk::study::{default_max_level, run_study, StudyConfig, DEFAULT_TOL};
use c1pk::verify::verify;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "c1pk", version, about = "C1 rectangular elements for the clamped biharmonic problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence study on uniform meshes with the manufactured solution.
    Study {
        #[arg(long)]
        family: Family,
        #[arg(long, value_parser = clap::value_parser!(u8).range(4..=8))]
        k: u8,
        /// Finest level (defaults to 6 for k <= 5, 4 otherwise).
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long, default_value = "cg")]
        solver: SolverKind,
        #[arg(long, default_value = "schwarz")]
        precond: PrecondKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Invariant checks for one element family, degree and level.
    Verify {
        #[arg(long)]
        family: Family,
        #[arg(long, value_parser = clap::value_parser!(u8).range(4..=8))]
        k: u8,
        #[arg(long)]
        level: usize,
        #[arg(long, value_enum, default_value_t = VerifyFormat::Text)]
        format: VerifyFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyFormat {
    Text,
    Json,
}

fn is_solver_error(e: &FemError) -> bool {
    match e {
        FemError::NotConverged { .. } | FemError::NotSpd => true,
        FemError::AtLevel { source, .. } => is_solver_error(source),
        _ => false,
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Study {
            family,
            k,
            levels,
            tol,
            format,
            solver,
            precond,
            out,
        } => {
            let k = k as usize;
            let config = StudyConfig {
                family,
                k,
                levels: levels.unwrap_or_else(|| default_max_level(k)),
                tol,
                solver,
                precond,
            };
            let report = match run_study(&config) {
                Ok(r) => r,
                Err(e) if is_solver_error(&e) => {
                    eprintln!("error: {e}");
                    return Ok(ExitCode::from(2));
                }
                Err(e) => return Err(e.into()),
            };
            let text = match format {
                Format::Table => report.to_table(),
                Format::Csv => report.to_csv(),
                Format::Json => report.to_json() + "\n",
            };
            emit(&text, out.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { family, k, level, format } => {
            let report = verify(family, k as usize, level)?;
            match format {
                VerifyFormat::Text => print!("{}", report.to_text()),
                VerifyFormat::Json => println!("{}", report.to_json()),
            }
            Ok(if report.solver_failed() {
                ExitCode::from(2)
            } else if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
