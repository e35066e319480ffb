//! Latency-CDF based service metrics.
//!
//! The quantities reported by the simulator are all derived from the
//! distribution of *overall latency* — the time from the instant a message is
//! requested at the transmitting application to the instant it is delivered
//! to the receiving application:
//!
//! - **reliability** at deadline `d`: `P(latency <= d)`, i.e. the latency CDF
//!   evaluated at the deadline (ties count as delivered);
//! - **message error probability**: `1 - lim_{d->inf} CDF(d)`, the mass of
//!   messages that never arrive;
//! - **availability**: the probability that the service is *declared*
//!   available over an episode;
//! - **failure**: the probability that the reliability requirement is missed
//!   *given* the service was declared available.
//!
//! Undelivered messages are carried as an explicit sentinel
//! (`delivery_time == None`), never as a large finite latency: they weigh on
//! the CDF's asymptote but are not placed at any finite point.

use crate::time::SimTime;
use crate::{Error, Result};
use serde::Serialize;
use std::io::{self, Write};

/// The fate of one message at one receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatencyRecord {
    pub message_id: u64,
    pub request_time: SimTime,
    /// Delivery instant, or `None` for the infinite-latency sentinel.
    pub delivery_time: Option<SimTime>,
}

impl LatencyRecord {
    /// A delivered message. Panics if `delivery_time < request_time`.
    #[must_use]
    pub fn delivered(message_id: u64, request_time: SimTime, delivery_time: SimTime) -> Self {
        assert!(
            delivery_time >= request_time,
            "delivery cannot precede the request"
        );
        LatencyRecord {
            message_id,
            request_time,
            delivery_time: Some(delivery_time),
        }
    }

    /// A message that never arrived.
    #[must_use]
    pub fn undelivered(message_id: u64, request_time: SimTime) -> Self {
        LatencyRecord {
            message_id,
            request_time,
            delivery_time: None,
        }
    }

    /// Overall latency, or `None` if undelivered.
    #[must_use]
    pub fn latency(&self) -> Option<SimTime> {
        self.delivery_time.map(|d| d - self.request_time)
    }
}

/// Empirical distribution of overall latency.
///
/// Undelivered records contribute to `total_count` but hold no finite
/// position, so `evaluate` saturates at `asymptote() <= 1` rather than at 1.
#[derive(Debug, Clone, Default)]
pub struct LatencyCdf {
    sorted_latencies: Vec<SimTime>,
    total_count: usize,
}

impl LatencyCdf {
    /// `P(latency <= deadline)`. Ties at the deadline count as delivered.
    #[must_use]
    pub fn evaluate(&self, deadline: SimTime) -> f64 {
        let below = self.sorted_latencies.partition_point(|&l| l <= deadline);
        below as f64 / self.total_count as f64
    }

    /// The limit of the CDF: fraction of messages delivered at all.
    #[must_use]
    pub fn asymptote(&self) -> f64 {
        self.sorted_latencies.len() as f64 / self.total_count as f64
    }

    #[must_use]
    pub fn total_count(&self) -> usize {
        self.total_count
    }

    #[must_use]
    pub fn delivered_count(&self) -> usize {
        self.sorted_latencies.len()
    }

    /// Largest finite latency observed, if any message was delivered.
    #[must_use]
    pub fn max_finite(&self) -> Option<SimTime> {
        self.sorted_latencies.last().copied()
    }

    /// Step points of the CDF: one `(latency, cumulative probability)` pair
    /// per distinct finite latency, ascending.
    #[must_use]
    pub fn points(&self) -> Vec<(SimTime, f64)> {
        let mut out = Vec::new();
        let n = self.total_count as f64;
        let mut i = 0;
        while i < self.sorted_latencies.len() {
            let l = self.sorted_latencies[i];
            let mut j = i + 1;
            while j < self.sorted_latencies.len() && self.sorted_latencies[j] == l {
                j += 1;
            }
            out.push((l, j as f64 / n));
            i = j;
        }
        out
    }
}

/// Builds the empirical latency CDF over a set of records.
///
/// Errors with [`Error::NoSamples`] on an empty slice: an empirical
/// distribution over nothing is undefined, and silently returning zeros has
/// historically hidden dead scenario configurations.
pub fn empirical_cdf(records: &[LatencyRecord]) -> Result<LatencyCdf> {
    if records.is_empty() {
        return Err(Error::NoSamples);
    }
    let mut sorted: Vec<SimTime> = records.iter().filter_map(LatencyRecord::latency).collect();
    sorted.sort_unstable();
    Ok(LatencyCdf {
        sorted_latencies: sorted,
        total_count: records.len(),
    })
}

/// Reliability at a hard deadline: the CDF evaluated at `deadline`.
///
/// Errors on a non-positive deadline — a zero deadline is always a
/// configuration mistake (nothing can be delivered in zero time).
pub fn reliability(cdf: &LatencyCdf, deadline: SimTime) -> Result<f64> {
    if deadline.is_zero() {
        return Err(Error::NonPositiveDeadline);
    }
    Ok(cdf.evaluate(deadline))
}

/// The probability that a message never arrives, no matter how long the
/// receiver waits. Computed as the censored count over the total count so
/// the result is the exact ratio of the two integers, not `1 - asymptote()`
/// (which can differ in the last bit).
#[must_use]
pub fn message_error_probability(cdf: &LatencyCdf) -> f64 {
    (cdf.total_count() - cdf.delivered_count()) as f64 / cdf.total_count() as f64
}

// ===== Episode-level metrics =====

/// Minimum per-episode message count for the measured reliability to be
/// considered meaningful; episodes below it are flagged (not dropped).
pub const DEFAULT_MIN_EPISODE_MESSAGES: u64 = 100;

/// One availability episode: a window over which the service either was or
/// was not declared available, together with the reliability actually
/// measured across it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeOutcome {
    pub declared_available: bool,
    /// Present if and only if the episode was declared available.
    pub measured_reliability: Option<f64>,
    pub reliability_target: f64,
    /// Number of message records the measurement is based on.
    pub message_count: u64,
}

impl EpisodeOutcome {
    /// An episode declared available, with the reliability measured over it.
    #[must_use]
    pub fn available(measured_reliability: f64, reliability_target: f64, message_count: u64) -> Self {
        EpisodeOutcome {
            declared_available: true,
            measured_reliability: Some(measured_reliability),
            reliability_target,
            message_count,
        }
    }

    /// An episode declared unavailable. No reliability is attributed to it.
    #[must_use]
    pub fn unavailable(reliability_target: f64, message_count: u64) -> Self {
        EpisodeOutcome {
            declared_available: false,
            measured_reliability: None,
            reliability_target,
            message_count,
        }
    }

    /// Whether the measurement rests on fewer messages than `min_messages`.
    #[must_use]
    pub fn is_low_sample(&self, min_messages: u64) -> bool {
        self.message_count < min_messages
    }
}

/// Availability and conditional failure over a set of episodes.
///
/// Availability is the fraction of episodes declared available. Failure is
/// the fraction of *available* episodes whose measured reliability fell short
/// of the target; it is `None` when no episode was available, because a
/// conditional probability with an empty condition is undefined — reporting
/// 0 there would claim a guarantee that was never tested.
pub fn availability_and_failure(episodes: &[EpisodeOutcome]) -> Result<(f64, Option<f64>)> {
    if episodes.is_empty() {
        return Err(Error::NoEpisodes);
    }
    let n = episodes.len() as f64;
    let mut available = 0u64;
    let mut failed = 0u64;
    for ep in episodes {
        debug_assert_eq!(
            ep.declared_available,
            ep.measured_reliability.is_some(),
            "measured reliability must be present iff the episode was available"
        );
        if ep.declared_available {
            available += 1;
            if ep.measured_reliability.unwrap_or(0.0) < ep.reliability_target {
                failed += 1;
            }
        }
    }
    let availability = available as f64 / n;
    let failure = if available == 0 {
        None
    } else {
        Some(failed as f64 / available as f64)
    };
    Ok((availability, failure))
}

// ===== Report summary =====

/// The headline metrics block of a report, with a stable JSON shape.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsSummary {
    pub reliability: f64,
    pub message_error_probability: f64,
    pub availability: f64,
    /// `None` serialises to `null`: failure is undefined when no episode was
    /// ever declared available.
    pub failure: Option<f64>,
    pub deadline_s: f64,
    pub n_messages: u64,
    pub n_episodes: u64,
}

/// Writes the CDF as two-column CSV: `latency_s,cdf`.
pub fn write_cdf_csv<W: Write>(cdf: &LatencyCdf, mut w: W) -> io::Result<()> {
    writeln!(w, "latency_s,cdf")?;
    for (latency, p) in cdf.points() {
        writeln!(w, "{},{}", latency.as_secs_f64(), p)?;
    }
    Ok(())
}
