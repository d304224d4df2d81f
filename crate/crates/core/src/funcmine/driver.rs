//! Synthetic stand-ins for the laboratory substrate: the sixteen-state
//! schedule is played into a simulated medium and selected nodes are
//! recorded as channels.

use super::{state_at, ChannelRecording, StateSchedule, STATES};
use crate::excitable::{self, FhnParams, Stimulus, StimulusPlan};
use crate::rcnet::{RcNetwork, Solver};
use crate::substrate::{Electrode, GridTemplate};
use crate::{Error, Result};

pub enum DriveSubstrate<'a> {
    /// A four-input RC network; inputs sit at the schedule's levels and
    /// channels are node positions. Times are seconds.
    Rc { net: &'a RcNetwork, dt: f64 },
    /// An excitable medium; a logical 1 fires a TRUE impulse on the input
    /// electrode at the start of the state and a 0 leaves it quiet.
    /// The schedule's dwell is in iterations, as are the recorded times.
    Fhn {
        template: &'a GridTemplate,
        params: FhnParams,
        inputs: [Electrode; 4],
        sample_every: u64,
    },
}

/// Channel ids are 1-based in the order of `channels`.
pub enum Channels<'a> {
    Nodes(&'a [usize]),
    Electrodes(&'a [Electrode]),
}

pub fn synth_driver(
    substrate: &DriveSubstrate<'_>,
    schedule: &StateSchedule,
    channels: Channels<'_>,
) -> Result<Vec<ChannelRecording>> {
    schedule.validate()?;
    let boundaries = schedule.boundaries(0.0);
    let traces: Vec<Vec<(f64, f64)>> = match (substrate, channels) {
        (DriveSubstrate::Rc { net, dt }, Channels::Nodes(nodes)) => {
            drive_rc(net, *dt, schedule, &boundaries, nodes)?
        }
        (
            DriveSubstrate::Fhn {
                template,
                params,
                inputs,
                sample_every,
            },
            Channels::Electrodes(electrodes),
        ) => drive_fhn(
            template,
            params,
            inputs,
            *sample_every,
            schedule,
            electrodes,
        )?,
        _ => {
            return Err(Error::InvalidParameter(
                "RC substrates record nodes, excitable substrates record electrodes".into(),
            ))
        }
    };
    traces
        .into_iter()
        .enumerate()
        .map(|(k, s)| ChannelRecording::new(k + 1, s, boundaries.clone()))
        .collect()
}

fn drive_rc(
    net: &RcNetwork,
    dt: f64,
    schedule: &StateSchedule,
    boundaries: &[f64],
    nodes: &[usize],
) -> Result<Vec<Vec<(f64, f64)>>> {
    if net.sources.len() != 4 {
        return Err(Error::InvalidParameter(format!(
            "network has {} inputs, the schedule drives 4",
            net.sources.len()
        )));
    }
    if let Some(&bad) = nodes.iter().find(|&&n| n >= net.len()) {
        return Err(Error::InvalidParameter(format!(
            "no node at position {bad}"
        )));
    }
    let solver = Solver::new(net, dt)?;
    let steps = (STATES as f64 * schedule.dwell / dt).round() as usize;
    let mut out = vec![Vec::with_capacity(steps + 1); nodes.len()];
    solver.run_levels(
        steps,
        |t, levels| {
            let s = state_at(boundaries, t).unwrap_or(STATES - 1);
            for (k, l) in levels.iter_mut().enumerate() {
                *l = schedule.level(s, k);
            }
        },
        |t, v| {
            if t <= boundaries[STATES] {
                for (trace, &n) in out.iter_mut().zip(nodes) {
                    trace.push((t, v[n] - v[net.ground]));
                }
            }
        },
    )?;
    Ok(out)
}

fn drive_fhn(
    template: &GridTemplate,
    params: &FhnParams,
    inputs: &[Electrode; 4],
    sample_every: u64,
    schedule: &StateSchedule,
    electrodes: &[Electrode],
) -> Result<Vec<Vec<(f64, f64)>>> {
    let dwell = schedule.dwell.round();
    if dwell < 1.0 || dwell != schedule.dwell {
        return Err(Error::InvalidParameter(format!(
            "excitable dwell must be a whole number of iterations, got {}",
            schedule.dwell
        )));
    }
    let dwell = dwell as u64;
    let mut stimuli = Vec::new();
    for s in 0..STATES {
        for (k, e) in inputs.iter().enumerate() {
            if super::input_bit(s, k) {
                stimuli.push(Stimulus::logical_true(*e, s as u64 * dwell));
            }
        }
    }
    let iterations = STATES as u64 * dwell;
    let traces = excitable::run(
        template,
        params,
        &StimulusPlan::new(stimuli),
        electrodes,
        iterations,
        sample_every,
    )?;
    Ok(traces
        .into_iter()
        .map(|tr| tr.samples.into_iter().map(|(i, p)| (i as f64, p)).collect())
        .collect())
}
