//! Command-line front end: configuration, sweeps, audio transduction and
//! selftest.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod axis;
pub mod commands;
pub mod config;
pub mod error;
pub mod selftest;

use std::path::PathBuf;

use atomradio::{ModulationMode, TransductionPath};
use clap::{Args, Parser, Subcommand};

pub use axis::{AxisName, AxisSpec};
pub use commands::Outputs;
pub use config::RunConfig;
pub use error::{exit, CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "atomradio", version, about = "Atomic microwave-to-optical transduction model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady-state probe transmission along a sweep axis.
    SteadySweep {
        #[command(flatten)]
        common: Common,
        /// name:start:stop:n (detuning and rabi in kHz, power in dBm).
        #[arg(long)]
        axis: Option<String>,
    },
    /// Encode an audio input onto the carrier and write the detected signal.
    Transduce {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Lock-in amplitude along a sweep axis.
    LockinSweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        chain: ChainArgs,
        /// name:start:stop:n (detuning in kHz, power in dBm, mod_frequency in Hz).
        #[arg(long)]
        axis: Option<String>,
    },
    /// Run the invariant checks on the configured model.
    Selftest {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Random seed, overriding `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    #[arg(long, value_parser = ["am", "fm"])]
    pub mode: Option<String>,
    #[arg(long, value_parser = ["quasi", "dynamic"])]
    pub path: Option<String>,
}

/// Loads the config and applies the command-line overrides.
pub fn prepare(common: &Common, chain: Option<&ChainArgs>) -> CliResult<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output.dir = out.clone();
    }
    if let Some(c) = chain {
        if let Some(mode) = &c.mode {
            cfg.modulation.mode = mode.parse::<ModulationMode>().map_err(|e| CliError::Config(e.to_string()))?;
        }
        if let Some(path) = &c.path {
            cfg.transduction.path = path.parse::<TransductionPath>().map_err(|e| CliError::Config(e.to_string()))?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn axis_of(cfg: &RunConfig, flag: Option<&String>) -> CliResult<AxisSpec> {
    match flag {
        Some(s) => AxisSpec::parse(s),
        None => AxisSpec::from_section(&cfg.sweep),
    }
}

fn finish(cfg: &RunConfig, out: Outputs) -> CliResult<String> {
    let written = out.write_to(&cfg.output.dir)?;
    let mut text = out.summary;
    for p in written {
        text.push_str(&format!("\nwrote {}", p.display()));
    }
    Ok(text)
}

/// Runs one command and returns the text for standard output.
pub fn run(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::SteadySweep { common, axis } => {
            let cfg = prepare(common, None)?;
            let axis = axis_of(&cfg, axis.as_ref())?;
            finish(&cfg, commands::steady_sweep(&cfg, &axis)?)
        }
        Command::Transduce { common, chain } => {
            let cfg = prepare(common, Some(chain))?;
            finish(&cfg, commands::transduce(&cfg)?)
        }
        Command::LockinSweep { common, chain, axis } => {
            let cfg = prepare(common, Some(chain))?;
            let axis = axis_of(&cfg, axis.as_ref())?;
            finish(&cfg, commands::lockin_sweep(&cfg, &axis)?)
        }
        Command::Selftest { common } => {
            let cfg = prepare(common, None)?;
            let report = selftest::run(&cfg);
            print!("{}", commands::selftest_text(&cfg));
            match report.failures() {
                0 => Ok(String::new()),
                n => Err(CliError::ChecksFailed(n)),
            }
        }
    }
}
