//! Spike-coincidence gate mining.
//!
//! Each input pair (x, y) is driven three times, with inputs (0,1), (1,0)
//! and (1,1); logical TRUE on an input is an impulse injected through that
//! electrode. Every recording electrode yields one spike train per input
//! condition. Spikes from the three trains that coincide within `W_coin`
//! form one event, and the set of conditions contributing a spike is the
//! event's truth table.

use std::io::Write;
use std::ops::ControlFlow;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::excitable::{self, FhnParams, PotentialTrace, Stimulus, StimulusPlan};
use crate::gates::TwoInputGate;
use crate::substrate::{Electrode, GridTemplate};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpikeTrain {
    pub electrode: usize,
    /// Onset iterations, strictly increasing.
    pub times: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpikeWindows {
    /// Amplitude an excursion of `p` must exceed to count as a spike.
    pub amplitude: f64,
    /// Spikes closer than this many iterations are simultaneous.
    pub coincidence: u64,
    /// Excursions within this many iterations belong to the same spike.
    pub separation: u64,
}

impl Default for SpikeWindows {
    fn default() -> Self {
        Self {
            amplitude: 0.1,
            coincidence: 200,
            separation: 1000,
        }
    }
}

impl SpikeWindows {
    pub fn validate(&self) -> Result<()> {
        if self.separation == 0 {
            return Err(Error::Config("separation window must be positive".into()));
        }
        if self.coincidence >= self.separation {
            return Err(Error::Config(format!(
                "coincidence window ({}) must be shorter than separation window ({})",
                self.coincidence, self.separation
            )));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::Config(
                "spike amplitude threshold must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Finds spike onsets: the first sample of each excursion of `p` above
/// `threshold`. An excursion starting within `separation` iterations of the
/// previous excursion's onset is merged into the current spike.
pub fn detect_spikes(trace: &PotentialTrace, threshold: f64, separation: u64) -> SpikeTrain {
    let mut times = Vec::new();
    let mut above = false;
    let mut last_onset: Option<u64> = None;
    for &(t, p) in &trace.samples {
        let now = p > threshold;
        if now && !above {
            if last_onset.is_none_or(|prev| t - prev > separation) {
                times.push(t);
            }
            last_onset = Some(t);
        }
        above = now;
    }
    SpikeTrain {
        electrode: trace.electrode,
        times,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateEvent {
    pub electrode: usize,
    pub time: u64,
    pub o01: bool,
    pub o10: bool,
    pub o11: bool,
    pub gate: TwoInputGate,
}

/// Groups coincident spikes of the three input conditions into gate events.
///
/// Matching is greedy and earliest-first: the earliest unmatched spike opens
/// an event, and each other train contributes its earliest unmatched spike
/// lying within `coincidence` of every spike already in the event.
pub fn classify_events(
    t01: &SpikeTrain,
    t10: &SpikeTrain,
    t11: &SpikeTrain,
    windows: &SpikeWindows,
) -> Result<Vec<GateEvent>> {
    windows.validate()?;
    let trains = [&t01.times, &t10.times, &t11.times];
    let mut next = [0usize; 3];
    let mut events = Vec::new();
    loop {
        // Earliest unmatched spike; ties go to the lower condition index.
        let opener = (0..3)
            .filter_map(|i| trains[i].get(next[i]).map(|&t| (t, i)))
            .min();
        let Some((t0, i0)) = opener else { break };
        let mut members = [None; 3];
        members[i0] = Some(t0);
        next[i0] += 1;
        let mut others: Vec<(u64, usize)> = (0..3)
            .filter(|&i| i != i0)
            .filter_map(|i| trains[i].get(next[i]).map(|&t| (t, i)))
            .collect();
        others.sort_unstable();
        for (t, i) in others {
            let fits = members
                .iter()
                .flatten()
                .all(|&m: &u64| t.abs_diff(m) < windows.coincidence);
            if fits {
                members[i] = Some(t);
                next[i] += 1;
            }
        }
        let [o01, o10, o11] = members.map(|m| m.is_some());
        let gate = TwoInputGate::from_outputs(o01, o10, o11).expect("event has a spike");
        events.push(GateEvent {
            electrode: t01.electrode,
            time: t0,
            o01,
            o10,
            o11,
            gate,
        });
    }
    Ok(events)
}

/// Per-electrode gate counts in [`TwoInputGate::CENSUS_ORDER`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCensus {
    pub rows: Vec<[u64; 7]>,
}

impl GateCensus {
    pub fn new(electrodes: usize) -> Self {
        Self {
            rows: vec![[0; 7]; electrodes],
        }
    }

    pub fn add(&mut self, event: &GateEvent) {
        if self.rows.len() <= event.electrode {
            self.rows.resize(event.electrode + 1, [0; 7]);
        }
        self.rows[event.electrode][event.gate.index()] += 1;
    }

    pub fn merge(&mut self, other: &GateCensus) {
        if self.rows.len() < other.rows.len() {
            self.rows.resize(other.rows.len(), [0; 7]);
        }
        for (a, b) in self.rows.iter_mut().zip(&other.rows) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn row_total(&self, electrode: usize) -> u64 {
        self.rows[electrode].iter().sum()
    }

    pub fn totals(&self) -> [u64; 7] {
        let mut t = [0; 7];
        for row in &self.rows {
            for (a, b) in t.iter_mut().zip(row) {
                *a += b;
            }
        }
        t
    }

    pub fn total(&self) -> u64 {
        self.totals().iter().sum()
    }

    pub fn count(&self, gate: TwoInputGate) -> u64 {
        self.totals()[gate.index()]
    }

    /// Gate frequencies over the total, in [`TwoInputGate::RATIO_ORDER`];
    /// `None` when no events were recorded.
    pub fn ratios(&self) -> Option<[f64; 7]> {
        let total = self.total();
        (total > 0).then(|| TwoInputGate::RATIO_ORDER.map(|g| self.count(g) as f64 / total as f64))
    }

    /// CSV in census column order, one row per electrode plus a totals row.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        let header: Vec<&str> = TwoInputGate::CENSUS_ORDER.iter().map(|g| g.key()).collect();
        writeln!(out, "E,{},Total", header.join(","))?;
        for (e, row) in self.rows.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            writeln!(out, "{e},{},{}", cells.join(","), self.row_total(e))?;
        }
        let cells: Vec<String> = self.totals().iter().map(u64::to_string).collect();
        writeln!(out, "Total,{},{}", cells.join(","), self.total())
    }

    pub fn ratio_report(&self, substrate: &str) -> RatioReport {
        RatioReport {
            substrate: substrate.to_string(),
            gates: TwoInputGate::RATIO_ORDER
                .iter()
                .map(|g| g.symbol().to_string())
                .collect(),
            counts: TwoInputGate::RATIO_ORDER.map(|g| self.count(g)).to_vec(),
            total: self.total(),
            ratios: self.ratios().map(|r| r.to_vec()),
        }
    }
}

/// Gate frequencies of one substrate. Also the overlay format accepted by
/// the ratio plot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub substrate: String,
    pub gates: Vec<String>,
    #[serde(default)]
    pub counts: Vec<u64>,
    #[serde(default)]
    pub total: u64,
    pub ratios: Option<Vec<f64>>,
}

/// Aggregates events into a census with `electrodes` rows.
pub fn census<'a>(
    events: impl IntoIterator<Item = &'a GateEvent>,
    electrodes: usize,
) -> GateCensus {
    let mut c = GateCensus::new(electrodes);
    for e in events {
        c.add(e);
    }
    c
}

/// Input pair given as indices into the electrode list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputPair {
    pub x: usize,
    pub y: usize,
}

/// `count` ordered pairs of distinct electrodes drawn independently under
/// `seed`.
pub fn random_pairs(electrodes: usize, count: usize, seed: u64) -> Result<Vec<InputPair>> {
    if electrodes < 2 {
        return Err(Error::InvalidParameter(format!(
            "{electrodes} electrodes cannot form an input pair"
        )));
    }
    let mut rng = crate::seed::rng(seed);
    Ok((0..count)
        .map(|_| {
            let v = sample(&mut rng, electrodes, 2);
            InputPair {
                x: v.index(0),
                y: v.index(1),
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpikeMiningParams {
    pub fhn: FhnParams,
    pub windows: SpikeWindows,
    pub iterations: u64,
    pub sample_every: u64,
    /// Iteration at which input impulses start.
    pub stimulus_start: u64,
    /// Once the impulses are over, a run stops early when every node has
    /// `u` below this level; the medium can no longer re-excite itself.
    pub quiescence: Option<f64>,
}

impl Default for SpikeMiningParams {
    fn default() -> Self {
        Self {
            fhn: FhnParams::default(),
            windows: SpikeWindows::default(),
            iterations: 200_000,
            sample_every: 10,
            stimulus_start: 0,
            quiescence: Some(QUIESCENT_U),
        }
    }
}

/// Far below the excitation threshold `a`.
pub const QUIESCENT_U: f64 = 0.01;

pub const QUIESCENCE_CHECK_EVERY: u64 = 1000;

/// The three driven conditions `(x, y)` in classification order.
pub const CONDITIONS: [(bool, bool); 3] = [(false, true), (true, false), (true, true)];

/// Runs one input condition and returns the spike train of every electrode.
pub fn condition_trains(
    template: &GridTemplate,
    electrodes: &[Electrode],
    pair: InputPair,
    (x_on, y_on): (bool, bool),
    params: &SpikeMiningParams,
) -> Result<Vec<SpikeTrain>> {
    let mut stimuli = Vec::new();
    for (on, idx) in [(x_on, pair.x), (y_on, pair.y)] {
        if on {
            let e = electrodes.get(idx).ok_or_else(|| {
                Error::InvalidParameter(format!("input electrode {idx} does not exist"))
            })?;
            stimuli.push(Stimulus::logical_true(*e, params.stimulus_start));
        }
    }
    let quiet_after = params.stimulus_start + excitable::TRUE_PULSE_DURATION;
    let traces = excitable::run_with(
        template,
        &params.fhn,
        &StimulusPlan::new(stimuli),
        electrodes,
        params.iterations,
        params.sample_every,
        |sim| {
            let t = sim.state().t;
            let quiet = match params.quiescence {
                Some(level) if t > quiet_after && t % QUIESCENCE_CHECK_EVERY == 0 => {
                    sim.state().u.iter().all(|&u| u < level)
                }
                _ => false,
            };
            Ok(if quiet {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            })
        },
    )?;
    Ok(traces
        .iter()
        .map(|t| detect_spikes(t, params.windows.amplitude, params.windows.separation))
        .collect())
}

/// Full pipeline for a set of input pairs: simulate, detect, classify.
/// Events are ordered by pair, then electrode, then time; the result does
/// not depend on the thread count.
pub fn mine_spike_gates(
    template: &GridTemplate,
    electrodes: &[Electrode],
    pairs: &[InputPair],
    params: &SpikeMiningParams,
) -> Result<Vec<(InputPair, Vec<GateEvent>)>> {
    params.windows.validate()?;
    for p in pairs {
        if p.x == p.y || p.x >= electrodes.len() || p.y >= electrodes.len() {
            return Err(Error::InvalidParameter(format!(
                "invalid input pair ({}, {}) for {} electrodes",
                p.x,
                p.y,
                electrodes.len()
            )));
        }
    }
    let jobs: Vec<(usize, usize)> = (0..pairs.len())
        .flat_map(|p| (0..CONDITIONS.len()).map(move |c| (p, c)))
        .collect();
    let trains: Vec<Vec<SpikeTrain>> = jobs
        .par_iter()
        .map(|&(p, c)| condition_trains(template, electrodes, pairs[p], CONDITIONS[c], params))
        .collect::<Result<_>>()?;
    pairs
        .iter()
        .enumerate()
        .map(|(p, &pair)| {
            let [t01, t10, t11] = [&trains[3 * p], &trains[3 * p + 1], &trains[3 * p + 2]];
            let mut events = Vec::new();
            for e in 0..electrodes.len() {
                events.extend(classify_events(&t01[e], &t10[e], &t11[e], &params.windows)?);
            }
            Ok((pair, events))
        })
        .collect()
}
