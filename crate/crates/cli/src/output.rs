//! Output directory with write-then-rename file creation and the run
//! manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::RunConfig;

pub struct Output {
    dir: PathBuf,
    written: Vec<String>,
    seeds: BTreeMap<String, Vec<u64>>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            seeds: BTreeMap::new(),
        })
    }

    /// Writes `bytes` to `name` (relative, `/`-separated) through a
    /// temporary sibling that is renamed into place.
    pub fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let file_name = path.file_name().expect("file name").to_string_lossy();
        let tmp = path.with_file_name(format!(".{file_name}.partial"));
        fs::write(&tmp, bytes).with_context(|| format!("cannot write {}", tmp.display()))?;
        fs::rename(&tmp, &path).with_context(|| format!("cannot move {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text)
    }

    /// Derives and records the seed for `(label, index)`.
    pub fn seed(&mut self, master: u64, label: &str, index: u64) -> u64 {
        let s = mycologic::seed::derive(master, label, index);
        let list = self.seeds.entry(label.to_string()).or_default();
        if list.len() as u64 == index {
            list.push(s);
        }
        s
    }

    /// Writes `manifest.json` last, so its presence marks a complete run.
    pub fn finish(mut self, command: &str, config: &RunConfig) -> Result<()> {
        let mut files = self.written.clone();
        files.sort();
        let manifest = Manifest {
            tool: "mycologic",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: config.seed,
            split_rule: mycologic::seed::SPLIT_RULE,
            derived_seeds: std::mem::take(&mut self.seeds),
            constants: Constants::default(),
            config,
            files,
        };
        self.write_json("manifest.json", &manifest)
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    split_rule: &'static str,
    /// Seeds derived from the master seed, by label in index order.
    derived_seeds: BTreeMap<String, Vec<u64>>,
    constants: Constants,
    config: &'a RunConfig,
    files: Vec<String>,
}

/// Fixed choices that are not configurable but shape the results.
#[derive(Serialize)]
struct Constants {
    true_pulse_amplitude: f64,
    true_pulse_duration: u64,
    quiescence_check_every: u64,
    dc_bleed_ohms: f64,
    state_bit_order: &'static str,
    spike_matcher: &'static str,
    rc_response: &'static str,
    rc_input_zero: &'static str,
    band_rule: &'static str,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            true_pulse_amplitude: mycologic::excitable::TRUE_PULSE_AMPLITUDE,
            true_pulse_duration: mycologic::excitable::TRUE_PULSE_DURATION,
            quiescence_check_every: mycologic::spikegates::QUIESCENCE_CHECK_EVERY,
            dc_bleed_ohms: mycologic::rcnet::BLEED_OHMS,
            state_bit_order: "A is the most significant bit of the state index",
            spike_matcher: "greedy earliest-first within the coincidence window",
            rc_response: "peak |V| per probe over the transient",
            rc_input_zero: "source held at 0 V",
            band_rule: "bit set when a sample lies outside the closed band [-θ, θ]",
        }
    }
}
