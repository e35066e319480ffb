//! Integer simulation time.
//!
//! Latency accounting in this crate must be *exact*: a message released by
//! the jitter buffer at `request + deadline` has to show a latency of exactly
//! `deadline`, ties at the deadline must compare equal, and identical
//! configurations must produce bit-identical reports. Floating-point seconds
//! cannot offer that (`(r + d) - r != d` in general), so simulation time is a
//! count of nanoseconds in a `u64`. The only conversions to `f64` seconds
//! happen at the configuration and reporting boundaries.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Sub};

const NANOS_PER_SEC: f64 = 1e9;

/// A point in simulation time, or a duration, in integer nanoseconds.
///
/// One type serves both roles; the arithmetic that makes sense for durations
/// (`+`, `-`, scalar `*`) is exactly the arithmetic provided.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    #[must_use]
    pub const fn from_nanos(ns: u64) -> Self {
        SimTime(ns)
    }

    /// Converts from seconds, rounding to the nearest nanosecond.
    ///
    /// Panics on negative or non-finite input: a negative point in simulation
    /// time is always a configuration bug, never a runtime condition.
    #[must_use]
    pub fn from_secs_f64(secs: f64) -> Self {
        assert!(
            secs.is_finite() && secs >= 0.0,
            "SimTime must be finite and non-negative, got {secs}"
        );
        SimTime((secs * NANOS_PER_SEC).round() as u64)
    }

    #[must_use]
    pub const fn as_nanos(self) -> u64 {
        self.0
    }

    #[must_use]
    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / NANOS_PER_SEC
    }

    #[must_use]
    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// `self - other`, saturating at zero instead of panicking.
    #[must_use]
    pub const fn saturating_sub(self, other: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(other.0))
    }

    /// Smallest `k` such that `k * step >= self`; the index of the first
    /// frame boundary at or after this instant.
    #[must_use]
    pub fn div_ceil(self, step: SimTime) -> u64 {
        assert!(step.0 > 0, "division by zero duration");
        self.0.div_ceil(step.0)
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.checked_add(rhs.0).expect("SimTime overflow"))
    }
}

impl AddAssign for SimTime {
    fn add_assign(&mut self, rhs: SimTime) {
        *self = *self + rhs;
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(
            self.0
                .checked_sub(rhs.0)
                .expect("SimTime underflow: subtracting a later time from an earlier one"),
        )
    }
}

impl Mul<u64> for SimTime {
    type Output = SimTime;
    fn mul(self, rhs: u64) -> SimTime {
        SimTime(self.0.checked_mul(rhs).expect("SimTime overflow"))
    }
}

impl fmt::Debug for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ns", self.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}s", self.as_secs_f64())
    }
}

/// Serde adapter: (de)serializes a [`SimTime`] as `f64` seconds.
///
/// Configuration files and JSON reports speak seconds; the simulator core
/// speaks nanoseconds. Annotate fields with
/// `#[serde(with = "crate::time::serde_secs")]` to convert at the boundary.
pub mod serde_secs {
    use super::SimTime;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &SimTime, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(t.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<SimTime, D::Error> {
        let secs = f64::deserialize(d)?;
        if !secs.is_finite() || secs < 0.0 {
            return Err(serde::de::Error::custom(format!(
                "time in seconds must be finite and non-negative, got {secs}"
            )));
        }
        Ok(SimTime::from_secs_f64(secs))
    }
}

/// Serde adapter for `Option<SimTime>` as optional `f64` seconds.
pub mod serde_secs_opt {
    use super::SimTime;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &Option<SimTime>, s: S) -> Result<S::Ok, S::Error> {
        match t {
            Some(t) => s.serialize_some(&t.as_secs_f64()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<SimTime>, D::Error> {
        let secs = Option::<f64>::deserialize(d)?;
        match secs {
            None => Ok(None),
            Some(secs) if secs.is_finite() && secs >= 0.0 => {
                Ok(Some(SimTime::from_secs_f64(secs)))
            }
            Some(secs) => Err(serde::de::Error::custom(format!(
                "time in seconds must be finite and non-negative, got {secs}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_exact_nanoseconds() {
        let t = SimTime::from_nanos(2_000_000);
        assert_eq!(t.as_secs_f64(), 0.002);
        assert_eq!(SimTime::from_secs_f64(0.002), t);
    }

    #[test]
    fn latency_arithmetic_is_exact() {
        // The motivating case: (request + deadline) - request must equal the
        // deadline bit-for-bit, for any request time.
        let deadline = SimTime::from_secs_f64(0.005);
        for req_s in [0.1, 0.3, 17.77, 1234.000001] {
            let request = SimTime::from_secs_f64(req_s);
            assert_eq!((request + deadline) - request, deadline);
        }
    }

    #[test]
    fn div_ceil_finds_first_frame_at_or_after() {
        let frame = SimTime::from_nanos(2_000_000);
        assert_eq!(SimTime::ZERO.div_ceil(frame), 0);
        assert_eq!(SimTime::from_nanos(1).div_ceil(frame), 1);
        assert_eq!(SimTime::from_nanos(2_000_000).div_ceil(frame), 1);
        assert_eq!(SimTime::from_nanos(2_000_001).div_ceil(frame), 2);
    }

    #[test]
    fn ordering_is_total_and_exact() {
        let a = SimTime::from_nanos(5_000_000);
        let b = SimTime::from_nanos(5_000_000);
        let c = SimTime::from_nanos(5_000_001);
        assert!(a == b && a < c);
    }
}
