//! `sawqd`: synthesis, fitting and reporting for SAW-cavity quantum-dot
//! modulation experiments.
//!
//! Exit codes: 0 success, 1 input error, 2 non-converged fit or degenerate
//! data, 3 numerical failure.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod device;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "sawqd", version, about = "SAW-cavity quantum-dot modulation toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Built-in device (dev1, dev1-750nm, dev2, dev3, dev4) or the stem of a
    /// JSON file found on SAWQD_DEVICE_PATH.
    #[arg(long, global = true, default_value = "dev1")]
    pub device: String,
    /// Device JSON file; takes precedence over --device.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for synthetic noise and random ensembles.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Loss between instrument and device applied to every input power, dB.
    #[arg(long, global = true, default_value_t = 0.0)]
    pub cable_loss_db: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Phase-modulated fluorescence spectra.
    #[command(subcommand)]
    Spectrum(commands::spectrum::SpectrumCmd),
    /// Microwave cavity rates and reflection fits.
    #[command(subcommand)]
    Cavity(commands::cavity::CavityCmd),
    /// Single-phonon coupling rates.
    #[command(subcommand)]
    G0(commands::g0::G0Cmd),
    /// Half-wave voltage and the drive-to-modulation chain.
    #[command(subcommand)]
    Transduce(commands::transduce::TransduceCmd),
    /// Beam mapping through photoluminescence smearing.
    #[command(subcommand)]
    Profile(commands::profile::ProfileCmd),
}

fn main() -> ExitCode {
    // Usage errors are input errors; clap's own code 2 means non-convergence here.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Spectrum(c) => commands::spectrum::run(c, &cli.global),
        Command::Cavity(c) => commands::cavity::run(c, &cli.global),
        Command::G0(c) => commands::g0::run(c, &cli.global),
        Command::Transduce(c) => commands::transduce::run(c, &cli.global),
        Command::Profile(c) => commands::profile::run(c, &cli.global),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("sawqd: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
