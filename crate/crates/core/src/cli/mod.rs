//! Command-line front end: configuration, experiment execution, CSV output
//! and the verification report.
//!
//! Exit codes: 0 success, 1 configuration error, 2 verification failure,
//! 3 I/O error or empty output.

pub mod config;
pub mod csv;
pub mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

pub use config::{parse_config, render, Invocation};

use crate::harness::{run_experiment, MetricsRecord, SteadyState};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(crate::Error),
    #[error("simulation failed: {0}")]
    Simulation(crate::Error),
    #[error("verification failed")]
    Verification,
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("no records to write")]
    EmptyOutput,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Simulation(_) => 1,
            CliError::Verification => 2,
            CliError::Io(_) | CliError::EmptyOutput => 3,
        }
    }
}

/// Writes records as CSV to `path`, or stdout when `path` is `None`.
///
/// An empty record set still produces the header but is reported as an error.
pub fn emit_csv(records: &[MetricsRecord], path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => csv::write_csv(BufWriter::new(File::create(p)?), records)?,
        None => csv::write_csv(io::stdout().lock(), records)?,
    }
    if records.is_empty() {
        return Err(CliError::EmptyOutput);
    }
    Ok(())
}

fn print_summary(summaries: &[SteadyState], err: &mut impl Write) -> io::Result<()> {
    writeln!(err, "# steady state (second half of each chain)")?;
    writeln!(
        err,
        "# snr_db  chains  ber  ber_est  l_cl  avg_nodes  upper_clamp"
    )?;
    for s in summaries {
        writeln!(
            err,
            "# {:6.2}  {:6}  {:.3e}  {:.3e}  {:.4}  {:.1}  {:.2}",
            s.snr_db,
            s.chains,
            s.ber(),
            s.mean_ber_estimated,
            s.mean_l_cl,
            s.avg_visited_nodes,
            s.upper_clamp_fraction
        )?;
    }
    Ok(())
}

/// Entry point shared by the binary and the tests.
pub fn run<I, S>(args: I, env_seed: Option<&str>) -> Result<(), CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let inv = parse_config(args, env_seed).map_err(CliError::Config)?;
    if inv.verify {
        let opts = verify::VerifyOptions {
            seed: inv.config.seed,
            ..Default::default()
        };
        let report = verify::run_verification(&opts);
        print!("{report}");
        return if report.passed() {
            Ok(())
        } else {
            Err(CliError::Verification)
        };
    }
    let report = run_experiment(&inv.config).map_err(CliError::Simulation)?;
    emit_csv(&report.rows, inv.out.as_deref())?;
    print_summary(&report.steady_state, &mut io::stderr().lock())?;
    Ok(())
}
