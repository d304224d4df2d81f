//! Boolean-function mining from multi-channel voltage recordings.
//!
//! Four inputs A, B, C, D count up through the sixteen states `0000` to
//! `1111`, A being the most significant bit. Each channel yields one
//! 16-row truth table per threshold band: row `s` is 1 when some sample
//! recorded during state `s` lies outside the band.

mod census;
mod driver;
mod io;
mod sop;

pub use census::{census_functions, CensusEntry, FunctionCensus};
pub use driver::{synth_driver, Channels, DriveSubstrate};
pub use io::{read_trace_csv, write_trace_csv, StateBoundaries};
pub use sop::{prime_implicants, sop, SopExpression, Term, VARIABLES};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const STATES: usize = 16;

/// Input state of the sixteen-step count.
pub fn input_bit(state: usize, input: usize) -> bool {
    state >> (3 - input) & 1 == 1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StateSchedule {
    /// Time spent in each state.
    pub dwell: f64,
    /// Level of a logical 0 input.
    pub low: f64,
    /// Level of a logical 1 input.
    pub high: f64,
}

impl Default for StateSchedule {
    fn default() -> Self {
        Self {
            dwell: 1e-2,
            low: -5.0,
            high: 5.0,
        }
    }
}

impl StateSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.dwell > 0.0 && self.dwell.is_finite()) {
            return Err(Error::InvalidParameter(format!("dwell {}", self.dwell)));
        }
        if !(self.low.is_finite() && self.high.is_finite()) {
            return Err(Error::InvalidParameter(
                "input levels must be finite".into(),
            ));
        }
        Ok(())
    }

    /// The 17 state-change times starting at `start`.
    pub fn boundaries(&self, start: f64) -> Vec<f64> {
        (0..=STATES)
            .map(|k| start + k as f64 * self.dwell)
            .collect()
    }

    pub fn level(&self, state: usize, input: usize) -> f64 {
        if input_bit(state, input) {
            self.high
        } else {
            self.low
        }
    }
}

/// One channel's samples with the state-change times they are read against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelRecording {
    pub channel: usize,
    pub samples: Vec<(f64, f64)>,
    /// 17 increasing times; state `s` covers `[b[s], b[s+1])`, the last
    /// state also includes its end.
    pub boundaries: Vec<f64>,
}

impl ChannelRecording {
    pub fn new(channel: usize, samples: Vec<(f64, f64)>, boundaries: Vec<f64>) -> Result<Self> {
        if boundaries.len() != STATES + 1 {
            return Err(Error::InvalidParameter(format!(
                "{} state boundaries, expected {}",
                boundaries.len(),
                STATES + 1
            )));
        }
        if boundaries.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "state boundaries must increase".into(),
            ));
        }
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidParameter(format!(
                "channel {channel}: sample times must increase"
            )));
        }
        let rec = Self {
            channel,
            samples,
            boundaries,
        };
        if let Some(&(t, _)) = rec.samples.iter().find(|(t, _)| rec.state_at(*t).is_none()) {
            return Err(Error::InvalidParameter(format!(
                "channel {channel}: sample at {t} lies outside the schedule"
            )));
        }
        Ok(rec)
    }

    pub fn state_at(&self, t: f64) -> Option<usize> {
        state_at(&self.boundaries, t)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, (_, v)| m.max(v.abs()))
    }
}

pub(crate) fn state_at(boundaries: &[f64], t: f64) -> Option<usize> {
    let last = *boundaries.last()?;
    if t < boundaries[0] || t > last || !t.is_finite() {
        return None;
    }
    let k = boundaries.partition_point(|&b| b <= t);
    Some((k - 1).min(STATES - 1))
}

/// A mined table with where it came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TruthTable16 {
    /// Bit `s` is the output in state `s`.
    pub bits: u16,
    pub repeat: usize,
    pub channel: usize,
    pub threshold: usize,
}

/// Bit `s` is set iff some sample of state `s` is outside `[low, high]`.
pub fn extract_table(rec: &ChannelRecording, (low, high): (f64, f64)) -> Result<u16> {
    if !(low < high) {
        return Err(Error::InvalidParameter(format!(
            "band ({low}, {high}) is empty"
        )));
    }
    extract(rec, low, high)
}

fn extract(rec: &ChannelRecording, low: f64, high: f64) -> Result<u16> {
    let mut seen = [false; STATES];
    let mut bits = 0u16;
    for &(t, v) in &rec.samples {
        let s = rec.state_at(t).expect("validated recording");
        seen[s] = true;
        if v < low || v > high {
            bits |= 1 << s;
        }
    }
    match seen.iter().position(|s| !s) {
        Some(state) => Err(Error::IncompleteRecording { state }),
        None => Ok(bits),
    }
}

/// How band half-widths are spread over a channel's amplitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum BandBuilder {
    /// Evenly spaced fractions of the channel's max |V|, `from` to `to`.
    Linear { from: f64, to: f64 },
}

impl Default for BandBuilder {
    fn default() -> Self {
        Self::Linear {
            from: 0.05,
            to: 1.0,
        }
    }
}

impl BandBuilder {
    pub fn half_widths(&self, amplitude: f64, n: usize) -> Vec<f64> {
        match *self {
            Self::Linear { from, to } => (0..n)
                .map(|i| {
                    let f = if n == 1 {
                        from
                    } else {
                        from + (to - from) * i as f64 / (n - 1) as f64
                    };
                    f * amplitude
                })
                .collect(),
        }
    }
}

/// One table per symmetric band `(−θᵢ, θᵢ)`.
pub fn threshold_sweep(
    rec: &ChannelRecording,
    n: usize,
    builder: &BandBuilder,
    repeat: usize,
) -> Result<Vec<TruthTable16>> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "need at least one threshold".into(),
        ));
    }
    builder
        .half_widths(rec.max_abs(), n)
        .into_iter()
        .enumerate()
        .map(|(threshold, theta)| {
            Ok(TruthTable16 {
                bits: extract(rec, -theta, theta)?,
                repeat,
                channel: rec.channel,
                threshold,
            })
        })
        .collect()
}

/// Sweeps every channel of every repeat; tables are ordered by repeat,
/// channel, then threshold.
pub fn mine_functions(
    repeats: &[Vec<ChannelRecording>],
    n: usize,
    builder: &BandBuilder,
) -> Result<Vec<TruthTable16>> {
    let jobs: Vec<(usize, &ChannelRecording)> = repeats
        .iter()
        .enumerate()
        .flat_map(|(r, recs)| recs.iter().map(move |c| (r, c)))
        .collect();
    let tables: Vec<Vec<TruthTable16>> = jobs
        .par_iter()
        .map(|&(r, rec)| threshold_sweep(rec, n, builder, r))
        .collect::<Result<_>>()?;
    Ok(tables.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn recording(f: impl Fn(usize, usize) -> f64) -> ChannelRecording {
        // Four samples per state at unit dwell.
        let samples = (0..STATES)
            .flat_map(|s| (0..4).map(move |k| (s, k)))
            .map(|(s, k)| (s as f64 + k as f64 * 0.25, f(s, k)))
            .collect();
        ChannelRecording::new(
            1,
            samples,
            StateSchedule {
                dwell: 1.0,
                ..Default::default()
            }
            .boundaries(0.0),
        )
        .unwrap()
    }

    #[test]
    fn state_bits_count_up_from_a() {
        assert!(!input_bit(7, 0));
        assert!(input_bit(8, 0));
        assert!(input_bit(1, 3));
        let sch = StateSchedule::default();
        assert_eq!(sch.level(0b1010, 0), 5.0);
        assert_eq!(sch.level(0b1010, 1), -5.0);
    }

    #[test]
    fn constant_tables() {
        assert_eq!(
            extract_table(&recording(|_, _| 0.0), (-1.0, 1.0)).unwrap(),
            0
        );
        let spiky = recording(|_, k| if k == 2 { 10.0 } else { 0.0 });
        assert_eq!(extract_table(&spiky, (-1.0, 1.0)).unwrap(), 0xFFFF);
        let negative = recording(|_, k| if k == 1 { -10.0 } else { 0.0 });
        assert_eq!(extract_table(&negative, (-1.0, 1.0)).unwrap(), 0xFFFF);
    }

    #[test]
    fn excursions_when_a_is_high() {
        let rec = recording(|s, k| if input_bit(s, 0) && k == 3 { 2.0 } else { 0.5 });
        let t = extract_table(&rec, (-1.0, 1.0)).unwrap();
        assert_eq!(t, 0xFF00);
        assert_eq!(sop(t).to_string(), "A");
    }

    #[test]
    fn band_edges_are_inside() {
        let rec = recording(|_, _| 1.0);
        assert_eq!(extract_table(&rec, (-1.0, 1.0)).unwrap(), 0);
        assert!(extract_table(&rec, (1.0, 1.0)).is_err());
    }

    #[test]
    fn empty_state_is_reported() {
        let b = StateSchedule {
            dwell: 1.0,
            ..Default::default()
        }
        .boundaries(0.0);
        let samples = (0..STATES)
            .filter(|&s| s != 5)
            .map(|s| (s as f64, 0.0))
            .collect();
        let rec = ChannelRecording::new(2, samples, b).unwrap();
        assert!(matches!(
            extract_table(&rec, (-1.0, 1.0)),
            Err(Error::IncompleteRecording { state: 5 })
        ));
    }

    #[test]
    fn samples_must_fit_the_schedule() {
        let b = StateSchedule {
            dwell: 1.0,
            ..Default::default()
        }
        .boundaries(0.0);
        assert!(ChannelRecording::new(1, vec![(16.5, 0.0)], b.clone()).is_err());
        assert!(ChannelRecording::new(1, vec![(1.0, 0.0), (1.0, 0.0)], b.clone()).is_err());
        let rec = ChannelRecording::new(1, vec![(16.0, 0.0)], b).unwrap();
        assert_eq!(rec.state_at(16.0), Some(15));
        assert_eq!(rec.state_at(3.0), Some(3));
        assert_eq!(rec.state_at(2.999), Some(2));
    }

    #[test]
    fn sweep_sizes() {
        let rec = recording(|s, k| (s * 4 + k) as f64 / 10.0 - 3.0);
        let one = threshold_sweep(&rec, 1, &BandBuilder::default(), 0).unwrap();
        assert_eq!(one.len(), 1);
        let many = threshold_sweep(&rec, 32, &BandBuilder::default(), 3).unwrap();
        assert_eq!(many.len(), 32);
        assert!(many
            .iter()
            .enumerate()
            .all(|(i, t)| t.threshold == i && t.repeat == 3));
        // The widest band covers the whole range.
        assert_eq!(many[31].bits, 0);
        let repeats = vec![vec![rec.clone(); 7]; 14];
        assert_eq!(
            mine_functions(&repeats, 32, &BandBuilder::default())
                .unwrap()
                .len(),
            3136
        );
    }

    #[test]
    fn silent_channel_reads_false() {
        let rec = recording(|_, _| 0.0);
        let tables = threshold_sweep(&rec, 4, &BandBuilder::default(), 0).unwrap();
        assert!(tables.iter().all(|t| t.bits == 0));
    }

    proptest! {
        #[test]
        fn wider_bands_clear_bits(values in prop::collection::vec(-5.0f64..5.0, 64), a in 0.0f64..5.0, b in 0.0f64..5.0) {
            let rec = recording(|s, k| values[s * 4 + k]);
            let (narrow, wide) = if a <= b { (a, b) } else { (b, a) };
            let tn = extract(&rec, -narrow, narrow).unwrap();
            let tw = extract(&rec, -wide, wide).unwrap();
            prop_assert_eq!(tw & !tn, 0);
        }

        #[test]
        fn sweep_popcount_decreases(values in prop::collection::vec(-5.0f64..5.0, 64)) {
            let rec = recording(|s, k| values[s * 4 + k]);
            let tables = threshold_sweep(&rec, 32, &BandBuilder::default(), 0).unwrap();
            for w in tables.windows(2) {
                prop_assert_eq!(w[1].bits & !w[0].bits, 0);
            }
        }
    }
}
