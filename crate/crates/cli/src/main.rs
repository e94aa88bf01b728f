//! `aklt`: batch reports for the AKLT chain.
//!
//! Exit codes: 0 success, 1 verification failure, 2 parse error,
//! 3 validation error.

mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use aklt_core::aklt::Axis;
use clap::{Parser, Subcommand, ValueEnum};

use commands::{CliError, Outcome};

#[derive(Parser, Debug)]
#[command(name = "aklt", version, about = "AKLT chain expectations, correlators and HQMM checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON input (observable, channel or model depending on the command).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Finite-chain, infinite-volume and exact-oracle values of an observable.
    Expect,
    /// Two-point function S^a_1 S^a_{1+r} for r = 1..max-distance.
    Correlate {
        #[arg(long, default_value_t = 10)]
        max_distance: usize,
        #[arg(long, value_enum, default_value_t = AxisArg::Z)]
        axis: AxisArg,
    },
    /// Ring-embedded expectation against the infinite-volume value.
    Converge {
        #[arg(long, default_value_t = 25)]
        m_max: usize,
        /// Defaults to --m-max.
        #[arg(long)]
        p_max: Option<usize>,
    },
    /// Compare the causal HQMM observation process with the AKLT state.
    HqmmVerify {
        #[arg(long, default_value_t = 3)]
        n_sites: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Structural checks on a channel, observable or model file.
    Validate,
    /// Superoperator spectrum and power-limit rate of a channel (AKLT by default).
    Spectrum,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AxisArg {
    X,
    Y,
    Z,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::X => Axis::X,
            AxisArg::Y => Axis::Y,
            AxisArg::Z => Axis::Z,
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let input = commands::read_input(cli.input.as_deref())?;
    match &cli.command {
        Command::Expect => commands::expect(input),
        Command::Correlate { max_distance, axis } => commands::correlate(*max_distance, (*axis).into()),
        Command::Converge { m_max, p_max } => {
            commands::converge(input, cli.seed, *m_max, p_max.unwrap_or(*m_max))
        }
        Command::HqmmVerify { n_sites, trials } => {
            let tol = commands::tolerance(cli.tol, 1e-9)?;
            commands::hqmm_verify(input, cli.seed, tol, *n_sites, *trials)
        }
        Command::Validate => commands::validate(input, commands::tolerance(cli.tol, 1e-10)?),
        Command::Spectrum => commands::spectrum(input, commands::tolerance(cli.tol, 1e-12)?),
    }
}

fn render(outcome: &Outcome, format: Format) -> Vec<u8> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => outcome.report.write_csv(&mut buf).expect("writing to memory"),
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &outcome.report.to_json()).expect("writing to memory");
            buf.push(b'\n');
        }
    }
    buf
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("aklt: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let bytes = render(&outcome, cli.format);
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &bytes),
        None => std::io::stdout().lock().write_all(&bytes),
    };
    if let Err(e) = written {
        eprintln!("aklt: cannot write report: {e}");
        return ExitCode::from(2);
    }
    match outcome.failure {
        Some(f) => {
            eprintln!("aklt: verification failed: {}", f.message);
            eprintln!("{}", serde_json::to_string_pretty(&f.dump).expect("dump serializes"));
            ExitCode::from(1)
        }
        None => ExitCode::SUCCESS,
    }
}
