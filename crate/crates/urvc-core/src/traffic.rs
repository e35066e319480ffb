//! Message request generation.
//!
//! Two source kinds cover the traffic mix of interest: periodic status
//! updates (cooperative-awareness style, bounded rate) and Poisson event
//! streams (hazard warnings and other asynchronous triggers).

use crate::time::SimTime;
use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

/// Default upper bound on the periodic request rate. Status streams above
/// this are almost always a misconfigured unit (kHz vs Hz), so validation
/// rejects them unless the caller raises the cap explicitly.
pub const DEFAULT_PERIODIC_RATE_CAP_HZ: f64 = 10.0;

/// What the application hands the stack for every request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MessageSpec {
    pub payload_bytes: u64,
    #[serde(with = "crate::time::serde_secs")]
    pub deadline: SimTime,
    /// Required probability of delivery within the deadline, in (0, 1).
    pub reliability_target: f64,
}

impl MessageSpec {
    pub fn validate(&self) -> Result<()> {
        if self.payload_bytes == 0 {
            return Err(Error::InvalidConfig("payload_bytes must be positive".into()));
        }
        if self.deadline.is_zero() {
            return Err(Error::InvalidConfig("deadline must be positive".into()));
        }
        if !(self.reliability_target > 0.0 && self.reliability_target < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "reliability_target must lie strictly between 0 and 1, got {}",
                self.reliability_target
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrafficKind {
    /// Deterministic request times `phase + k/rate`.
    Periodic,
    /// Poisson process of intensity `rate`.
    Event,
}

/// A stream of request instants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficSource {
    pub kind: TrafficKind,
    pub rate_hz: f64,
    /// Offset of the first periodic request; ignored for event sources.
    #[serde(default, with = "crate::time::serde_secs")]
    pub phase: SimTime,
}

impl TrafficSource {
    /// Validates the source. `periodic_cap_hz` defaults to
    /// [`DEFAULT_PERIODIC_RATE_CAP_HZ`]; pass `None` to lift the cap.
    pub fn validate(&self, periodic_cap_hz: Option<f64>) -> Result<()> {
        if !(self.rate_hz.is_finite() && self.rate_hz > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "traffic rate must be positive and finite, got {}",
                self.rate_hz
            )));
        }
        if self.kind == TrafficKind::Periodic {
            if let Some(cap) = periodic_cap_hz {
                if self.rate_hz > cap {
                    return Err(Error::InvalidConfig(format!(
                        "periodic rate {} Hz exceeds the {} Hz cap",
                        self.rate_hz, cap
                    )));
                }
            }
        }
        Ok(())
    }

    /// Nanosecond period of a periodic source (1/rate, rounded).
    #[must_use]
    pub fn period(&self) -> SimTime {
        SimTime::from_secs_f64(1.0 / self.rate_hz)
    }
}

/// Request instants in `[0, horizon)`, strictly before the horizon,
/// non-decreasing.
///
/// Periodic sources are exact: consecutive requests are separated by exactly
/// `period()` nanoseconds. Event sources draw exponential inter-arrivals of
/// mean `1/rate` starting from time zero.
pub fn generate<R: Rng + ?Sized>(
    source: &TrafficSource,
    horizon: SimTime,
    rng: &mut R,
) -> Vec<SimTime> {
    let mut out = Vec::new();
    match source.kind {
        TrafficKind::Periodic => {
            let period = source.period();
            if period.is_zero() {
                return out;
            }
            let mut t = source.phase;
            while t < horizon {
                out.push(t);
                t += period;
            }
        }
        TrafficKind::Event => {
            let exp = Exp::new(source.rate_hz).expect("rate validated positive");
            let mut t = SimTime::ZERO;
            loop {
                let gap: f64 = exp.sample(rng);
                t += SimTime::from_secs_f64(gap);
                if t >= horizon {
                    break;
                }
                out.push(t);
            }
        }
    }
    out
}
