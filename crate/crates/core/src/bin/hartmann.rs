use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hartmann_gup::report::{self, Report};
use hartmann_gup::{Error, Execution, OutputFormat, RunConfig};

/// Hartmann ring-shaped potential: spectrum, matrix elements, recurrences
/// and minimal-length corrections, each closed form checked by quadrature.
#[derive(Parser, Debug)]
#[command(name = "hartmann", version)]
struct Cli {
    /// TOML config; every key may also be set as HARTMANN_<KEY>.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Round floats to 6 significant digits.
    #[arg(long, global = true)]
    display: bool,
    /// Run sweeps on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bound-state energies within the scan caps, grouped by degeneracy.
    Spectrum,
    /// Radial and angular matrix elements with closed-form verdicts.
    Matel,
    /// First-order corrections inside every degenerate block.
    Splitting,
    /// Radial and angular recurrence tables for the configured state.
    RecurrenceTable,
    /// Every printed formula against its quadrature.
    Verify,
}

fn emit<R: Report>(report: &R, config: &RunConfig) -> Result<(), Error> {
    let mut buf = Vec::new();
    match config.format {
        OutputFormat::Csv => report.write_csv(&mut buf, config.display)?,
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut buf, report).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            buf.push(b'\n');
        }
    }
    let written = match &config.out {
        Some(path) => std::fs::write(path, &buf),
        None => std::io::stdout().lock().write_all(&buf),
    };
    written.map_err(|e| Error::InvalidParameter(format!("cannot write output: {e}")))
}

fn load(cli: &Cli) -> Result<RunConfig, Error> {
    let mut config = RunConfig::load(cli.config.as_deref())?;
    if let Some(f) = cli.format {
        config.format = f;
    }
    if let Some(out) = &cli.out {
        config.out = Some(out.clone());
    }
    if let Some(tol) = cli.tol {
        config.rel_tol = tol;
    }
    config.display |= cli.display;
    config.validate()?;
    Ok(config)
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    let config = load(cli)?;
    for w in config.warnings() {
        eprintln!("warning: {w}");
    }
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match cli.command {
        Command::Spectrum => emit(&report::spectrum(&config)?, &config)?,
        Command::Matel => emit(&report::matel(&config, exec)?, &config)?,
        Command::Splitting => {
            let r = report::splitting(&config, exec)?;
            emit(&r, &config)?;
            for line in r.summary_lines() {
                eprintln!("{line}");
            }
        }
        Command::RecurrenceTable => emit(&report::recurrence(&config)?, &config)?,
        Command::Verify => {
            let r = report::verify(&config, exec)?;
            emit(&r, &config)?;
            for s in &r.summary {
                eprintln!(
                    "{:<28} cases {:>4}  match {:>4}  mismatch {:>4}  unavailable {:>4}  not converged {:>2}",
                    s.section, s.cases, s.matched, s.mismatched, s.unavailable, s.not_converged
                );
            }
            if r.not_converged() > 0 {
                eprintln!("error: {} oracle integrals did not converge", r.not_converged());
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config { .. } => ExitCode::from(2),
                Error::NonConvergence(_) => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
