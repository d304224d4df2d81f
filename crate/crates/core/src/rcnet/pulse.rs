use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Trapezoidal pulse train with SPICE `PULSE` semantics: after `delay`,
/// each period ramps up for `rise`, holds for `width`, ramps down for
/// `fall`, and rests at 0 V; `count` pulses in total.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PulseSpec {
    pub amplitude: f64,
    pub delay: f64,
    pub rise: f64,
    pub fall: f64,
    pub width: f64,
    pub period: f64,
    pub count: u32,
}

impl Default for PulseSpec {
    fn default() -> Self {
        Self {
            amplitude: 0.06,
            delay: 0.0,
            rise: 1e-5,
            fall: 1e-5,
            width: 1e-3,
            period: 2e-3,
            count: 2,
        }
    }
}

impl PulseSpec {
    pub fn validate(&self) -> Result<()> {
        let times = [self.delay, self.rise, self.fall, self.width, self.period];
        if !self.amplitude.is_finite() || times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidParameter(
                "pulse amplitude must be finite and its times non-negative".into(),
            ));
        }
        if self.width <= 0.0 || self.count == 0 {
            return Err(Error::InvalidParameter(
                "pulse width and count must be positive".into(),
            ));
        }
        if self.count > 1 && self.period < self.rise + self.width + self.fall {
            return Err(Error::InvalidParameter(
                "pulse period is shorter than one pulse".into(),
            ));
        }
        Ok(())
    }

    pub fn value(&self, t: f64) -> f64 {
        let local = t - self.delay;
        if local < 0.0 {
            return 0.0;
        }
        let k = if self.count > 1 && self.period > 0.0 {
            (local / self.period).floor()
        } else {
            0.0
        };
        if k >= f64::from(self.count) {
            return 0.0;
        }
        let s = local - k * self.period;
        let (up, top) = (self.rise, self.rise + self.width);
        if s < up {
            self.amplitude * s / self.rise
        } else if s < top {
            self.amplitude
        } else if s < top + self.fall {
            self.amplitude * (1.0 - (s - top) / self.fall)
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_train_shape() {
        let p = PulseSpec::default();
        p.validate().unwrap();
        assert_eq!(p.value(0.0), 0.0);
        assert!((p.value(5e-6) - 0.03).abs() < 1e-12);
        assert_eq!(p.value(0.5e-3), 0.06);
        assert!((p.value(1.015e-3) - 0.03).abs() < 1e-12);
        assert_eq!(p.value(1.5e-3), 0.0);
        assert_eq!(p.value(2.5e-3), 0.06);
        assert_eq!(p.value(4.5e-3), 0.0);
        assert_eq!(p.value(9e-3), 0.0);
    }

    #[test]
    fn delay_and_step_edges() {
        let p = PulseSpec {
            delay: 1.0,
            rise: 0.0,
            fall: 0.0,
            width: 2.0,
            count: 1,
            ..PulseSpec::default()
        };
        assert_eq!(p.value(0.999), 0.0);
        assert_eq!(p.value(1.0), 0.06);
        assert_eq!(p.value(2.999), 0.06);
        assert_eq!(p.value(3.0), 0.0);
    }

    #[test]
    fn rejects_bad_specs() {
        let bad = [
            PulseSpec {
                width: 0.0,
                ..PulseSpec::default()
            },
            PulseSpec {
                amplitude: f64::NAN,
                ..PulseSpec::default()
            },
            PulseSpec {
                period: 1e-4,
                ..PulseSpec::default()
            },
            PulseSpec {
                count: 0,
                ..PulseSpec::default()
            },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }
}
