//! Multi-channel trace CSV (`time_s,ch1,...,chN`) with a JSON sidecar of
//! state-change times.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{ChannelRecording, STATES};
use crate::{Error, Result};

/// Sidecar contents: the 17 state-change times in seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateBoundaries {
    pub boundaries_s: Vec<f64>,
}

/// Writes channels that share one time base.
pub fn write_trace_csv(mut w: impl Write, channels: &[ChannelRecording]) -> Result<()> {
    let Some(first) = channels.first() else {
        return Err(Error::InvalidParameter("no channels to write".into()));
    };
    for c in channels {
        if c.samples.len() != first.samples.len()
            || c.samples
                .iter()
                .zip(&first.samples)
                .any(|(a, b)| a.0 != b.0)
        {
            return Err(Error::InvalidParameter(format!(
                "channel {} does not share the time base of channel {}",
                c.channel, first.channel
            )));
        }
    }
    let header: Vec<String> = channels
        .iter()
        .map(|c| format!("ch{}", c.channel))
        .collect();
    writeln!(w, "time_s,{}", header.join(","))?;
    for (i, &(t, _)) in first.samples.iter().enumerate() {
        write!(w, "{t}")?;
        for c in channels {
            write!(w, ",{}", c.samples[i].1)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_trace_csv(csv: &str, sidecar: &StateBoundaries) -> Result<Vec<ChannelRecording>> {
    if sidecar.boundaries_s.len() != STATES + 1 {
        return Err(Error::Format(format!(
            "sidecar lists {} boundaries, expected {}",
            sidecar.boundaries_s.len(),
            STATES + 1
        )));
    }
    let mut lines = csv
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Format("empty trace file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.first() != Some(&"time_s") || cols.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            message: "header must be time_s,ch1,...".into(),
        });
    }
    let ids = cols[1..]
        .iter()
        .map(|c| {
            c.strip_prefix("ch")
                .and_then(|n| n.parse::<usize>().ok())
                .ok_or_else(|| Error::Parse {
                    line: 1,
                    message: format!("bad channel column {c:?}"),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut samples: Vec<Vec<(f64, f64)>> = vec![Vec::new(); ids.len()];
    for (i, line) in lines {
        let parse = |s: &str| {
            s.trim().parse::<f64>().map_err(|e| Error::Parse {
                line: i + 1,
                message: format!("{s:?}: {e}"),
            })
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("{} fields, expected {}", fields.len(), cols.len()),
            });
        }
        let t = parse(fields[0])?;
        for (k, f) in fields[1..].iter().enumerate() {
            samples[k].push((t, parse(f)?));
        }
    }
    ids.into_iter()
        .zip(samples)
        .map(|(id, s)| ChannelRecording::new(id, s, sidecar.boundaries_s.clone()))
        .collect()
}
