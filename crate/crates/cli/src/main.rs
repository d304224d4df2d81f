//! `mycologic`: config-driven runs of the substrate generator, the
//! excitable simulator and the three mining pipelines.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::output::Output;

#[derive(Parser)]
#[command(name = "mycologic", version, about)]
struct Cli {
    /// TOML config, or the manifest.json of an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the config (default `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Grow synthetic colonies and write their masks and graph.
    SynthColony,
    /// Integrate the excitable medium and record electrode potentials.
    SimulateFhn,
    /// Mine two-input gates from spike coincidences.
    MineSpikes,
    /// Mine gates from randomised RC networks over a threshold sweep.
    MineRc,
    /// Mine four-input functions from multi-channel recordings.
    MineFunctions,
    /// Write SPICE netlists of one ensemble member.
    ExportNetlist,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::SynthColony => "synth-colony",
            Self::SimulateFhn => "simulate-fhn",
            Self::MineSpikes => "mine-spikes",
            Self::MineRc => "mine-rc",
            Self::MineFunctions => "mine-functions",
            Self::ExportNetlist => "export-netlist",
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => config::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.out = out;
    }
    if cfg.out.as_os_str().is_empty() {
        cfg.out = PathBuf::from("out");
    }
    cfg.validate()?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot configure the thread pool")?;
    }
    let mut out = Output::create(&cfg.out)?;
    match cli.command {
        Command::SynthColony => commands::synth_colony(&cfg, &mut out)?,
        Command::SimulateFhn => commands::simulate_fhn(&cfg, &mut out)?,
        Command::MineSpikes => commands::mine_spikes(&cfg, &mut out)?,
        Command::MineRc => commands::mine_rc(&cfg, &mut out)?,
        Command::MineFunctions => commands::mine_functions(&cfg, &mut out)?,
        Command::ExportNetlist => commands::export_netlist(&cfg, &mut out)?,
    }
    out.finish(cli.command.name(), &cfg)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
