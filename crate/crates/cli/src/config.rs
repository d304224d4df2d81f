//! Run configuration. Every block has complete defaults, so an empty file
//! is a valid config; the resolved form is echoed into each manifest.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mycologic::excitable::{FhnParams, ELECTRODE_RADIUS};
use mycologic::funcmine::{BandBuilder, StateSchedule};
use mycologic::rcnet::{PulseSpec, RcMode, RcParams, TransientOptions};
use mycologic::spikegates::{SpikeWindows, QUIESCENT_U};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; `--seed` overrides it.
    pub seed: u64,
    /// Output directory; `--out` overrides it. Not echoed in manifests so
    /// that runs into different directories compare equal.
    #[serde(skip_serializing)]
    pub out: PathBuf,
    pub substrate: SubstrateConfig,
    pub graph: GraphConfig,
    pub fhn: FhnParams,
    pub electrodes: ElectrodeConfig,
    pub simulate: SimulateConfig,
    pub spikes: SpikeConfig,
    pub rc: RcConfig,
    pub functions: FunctionConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubstrateSource {
    /// Grown by the colony generator.
    Synthetic,
    /// Thresholded grayscale raster.
    Image,
    /// Graph file; only usable where no grid is needed.
    Graph,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubstrateConfig {
    pub source: SubstrateSource,
    pub width: usize,
    pub height: usize,
    pub branch_rate: f64,
    pub steps: usize,
    /// Number of synthetic colonies; colony `i` is grown from the seed
    /// derived for index `i`.
    pub colonies: usize,
    pub image: Option<PathBuf>,
    pub threshold: f64,
    pub graph_file: Option<PathBuf>,
}

impl Default for SubstrateConfig {
    fn default() -> Self {
        Self {
            source: SubstrateSource::Synthetic,
            width: 200,
            height: 192,
            branch_rate: 0.05,
            steps: 5000,
            colonies: 1,
            image: None,
            threshold: 0.5,
            graph_file: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub z_jitter: f64,
    pub pixel_size: f64,
    pub contract_chains: bool,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            z_jitter: 5.0,
            pixel_size: 1.0,
            contract_chains: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElectrodeConfig {
    /// Electrodes spread over the template when `sites` is empty.
    pub count: usize,
    pub radius: f64,
    /// Explicit `[x, y]` centres.
    pub sites: Vec<[usize; 2]>,
}

impl Default for ElectrodeConfig {
    fn default() -> Self {
        Self {
            count: 16,
            radius: ELECTRODE_RADIUS,
            sites: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StimulusConfig {
    pub electrode: usize,
    pub start: u64,
    pub duration: u64,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub iterations: u64,
    pub sample_every: u64,
    /// Write a PGM of `u` every this many iterations; 0 disables.
    pub snapshot_every: u64,
    /// Defaults to one TRUE impulse on electrode 0 at iteration 0.
    pub stimuli: Vec<StimulusConfig>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            iterations: 20_000,
            sample_every: 10,
            snapshot_every: 0,
            stimuli: vec![StimulusConfig {
                electrode: 0,
                start: 0,
                duration: mycologic::excitable::TRUE_PULSE_DURATION,
                amplitude: mycologic::excitable::TRUE_PULSE_AMPLITUDE,
            }],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpikeConfig {
    pub windows: SpikeWindows,
    pub iterations: u64,
    pub sample_every: u64,
    pub stimulus_start: u64,
    /// Stop a run once every `u` is below `quiescent_u` after the impulses.
    pub early_stop: bool,
    pub quiescent_u: f64,
    /// Explicit `[x, y]` electrode indices; when empty, `pair_count`
    /// random pairs are drawn per colony.
    pub pairs: Vec<[usize; 2]>,
    pub pair_count: usize,
    /// Ratio reports of other substrates drawn alongside ours.
    pub overlays: Vec<PathBuf>,
}

impl Default for SpikeConfig {
    fn default() -> Self {
        Self {
            windows: SpikeWindows::default(),
            iterations: 200_000,
            sample_every: 10,
            stimulus_start: 0,
            early_stop: true,
            quiescent_u: QUIESCENT_U,
            pairs: Vec::new(),
            pair_count: 3,
            overlays: Vec::new(),
        }
    }
}

/// θᵢ = i·step for i = 1..=count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThetaGrid {
    pub step: f64,
    pub count: usize,
}

impl Default for ThetaGrid {
    fn default() -> Self {
        Self {
            step: 1e-4,
            count: 500,
        }
    }
}

impl ThetaGrid {
    pub fn values(&self) -> Vec<f64> {
        (1..=self.count).map(|i| i as f64 * self.step).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RcConfig {
    pub modes: Vec<RcMode>,
    pub ensemble: usize,
    pub theta: ThetaGrid,
    pub build: RcParams,
    pub pulse: PulseSpec,
    pub transient: TransientOptions,
    /// Netlists written for the first this many members of each mode.
    pub export_netlists: usize,
    /// Member exported by `export-netlist`.
    pub member: u64,
}

impl Default for RcConfig {
    fn default() -> Self {
        Self {
            modes: vec![RcMode::Serial, RcMode::Parallel],
            ensemble: 100,
            theta: ThetaGrid::default(),
            build: RcParams::default(),
            pulse: PulseSpec::default(),
            transient: TransientOptions::default(),
            export_netlists: 0,
            member: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionSource {
    /// Four-input RC networks on the colony graph, one per repeat.
    Rc,
    /// The excitable medium on the colony template.
    Fhn,
    /// Recorded traces listed in `traces`.
    Traces,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFiles {
    pub csv: PathBuf,
    pub sidecar: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FunctionConfig {
    pub source: FunctionSource,
    pub repeats: usize,
    pub channels: usize,
    pub thresholds: usize,
    pub bands: BandBuilder,
    pub schedule: StateSchedule,
    /// RC time step, seconds.
    pub dt: f64,
    pub mode: RcMode,
    /// Iterations per excitable sample.
    pub sample_every: u64,
    pub top_n: usize,
    pub write_traces: bool,
    pub traces: Vec<TraceFiles>,
}

impl Default for FunctionConfig {
    fn default() -> Self {
        Self {
            source: FunctionSource::Rc,
            repeats: 14,
            channels: 7,
            thresholds: 32,
            bands: BandBuilder::default(),
            schedule: StateSchedule::default(),
            dt: 1e-4,
            mode: RcMode::Serial,
            sample_every: 10,
            top_n: 20,
            write_traces: true,
            traces: Vec::new(),
        }
    }
}

/// Reads a TOML config, or the JSON manifest of an earlier run.
pub fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let is_json = path.extension().is_some_and(|e| e == "json");
    if is_json {
        let value: serde_json::Value = serde_json::from_str(&text)
            .with_context(|| format!("invalid JSON in {}", path.display()))?;
        let config = value.get("config").cloned().unwrap_or(value);
        return serde_json::from_value(config)
            .with_context(|| format!("invalid config in {}", path.display()));
    }
    toml::from_str(&text).with_context(|| format!("invalid config in {}", path.display()))
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let s = &self.substrate;
        if s.colonies == 0 {
            bail!("substrate.colonies must be at least 1");
        }
        if self.rc.ensemble == 0 || self.rc.theta.count == 0 || !(self.rc.theta.step > 0.0) {
            bail!("rc.ensemble, rc.theta.count and rc.theta.step must be positive");
        }
        let f = &self.functions;
        if f.repeats == 0 || f.channels == 0 || f.thresholds == 0 {
            bail!("functions.repeats, channels and thresholds must be positive");
        }
        if !(f.dt > 0.0) {
            bail!("functions.dt must be positive");
        }
        self.fhn.validate()?;
        self.spikes.windows.validate()?;
        self.rc.build.validate()?;
        self.rc.pulse.validate()?;
        self.rc.transient.validate()?;
        f.schedule.validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c: RunConfig = toml::from_str("").unwrap();
        assert_eq!(c, RunConfig::default());
        c.validate().unwrap();
    }

    #[test]
    fn defaults_survive_a_json_round_trip() {
        let c = RunConfig::default();
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&json).unwrap(), c);
    }

    #[test]
    fn typos_are_rejected() {
        assert!(toml::from_str::<RunConfig>("[spikes]\nwindow = 3\n").is_err());
    }

    #[test]
    fn theta_grid_matches_the_sweep_grid() {
        let t = ThetaGrid::default().values();
        assert_eq!(t.len(), 500);
        assert_eq!(t, mycologic::fit::theta_grid());
    }
}
