//! Report types produced by a scenario run.
//!
//! Everything here serializes with a stable field order (struct order), so a
//! report rendered from the same config and seed is byte-identical across
//! runs and across worker counts.

use serde::Serialize;

use crate::csa_mac::NodeId;
use crate::jitter_buffer::{JitterStats, ReleaseRecord};
use crate::metrics::{LatencyCdf, MetricsSummary};
use crate::rrm::AvailabilityPoint;
use crate::rsc::NegotiationRecord;

use super::config::ScenarioConfig;

/// Delivery statistics measured at one receiver (`None` = the external
/// observer, which hears every slot and transmits in none).
#[derive(Debug, Clone, Serialize)]
pub struct ReceiverReport {
    pub receiver: Option<NodeId>,
    /// Messages addressed to this receiver (for participants: every message
    /// generated by the other nodes).
    pub generated: u64,
    pub delivered: u64,
    pub undelivered: u64,
    /// CDF of delivery latency at the deadline; `None` when no message was
    /// addressed to this receiver.
    pub reliability: Option<f64>,
    /// Fraction never delivered at all (the latency CDF's missing mass).
    pub message_error_probability: Option<f64>,
}

/// Frame-level MAC bookkeeping, aggregated over the whole run.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct MacDiagnostics {
    /// Reception opportunities: one per (frame, transmitter, receiver).
    pub trials: u64,
    /// Opportunities that did not decode in their transmit frame.
    pub losses: u64,
    /// `losses / trials`, 0 when there were no trials.
    pub plr: f64,
    /// Mean successive-cancellation passes per decode call (0 for TDMA and
    /// for runs whose every frame was in outage).
    pub mean_sic_iterations: f64,
    /// Frames in which at least one node transmitted.
    pub transmit_frames: u64,
}

/// How the run's episodes were classified.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EpisodeCounts {
    /// Episodes the horizon covers.
    pub configured: u64,
    /// Episodes that carried at least one message and therefore entered the
    /// availability/failure statistics.
    pub measured: u64,
    /// Episodes with no message attributed to them.
    pub skipped_empty: u64,
    /// Measured episodes declared available.
    pub available: u64,
    /// Measured episodes resting on fewer records than
    /// `min_episode_messages` (flagged, still counted).
    pub low_sample: u64,
    pub min_episode_messages: u64,
}

/// Top-level report of one scenario run.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    /// Seed the run actually used (a CLI override replaces the config's).
    pub seed: u64,
    pub summary: MetricsSummary,
    pub per_receiver: Vec<ReceiverReport>,
    pub mac: MacDiagnostics,
    pub episodes: EpisodeCounts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jitter: Option<JitterStats>,
    /// Per-episode power-control feasibility, measured whenever an `[rrm]`
    /// section is configured (not only when it gates availability).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rrm_availability: Option<AvailabilityPoint>,
    pub warnings: Vec<String>,
    /// Echo of the configuration the run executed.
    pub config: ScenarioConfig,
}

impl MetricsReport {
    /// Renders the report as pretty-printed JSON with a trailing newline.
    /// Field order is fixed, so equal reports render byte-identically.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Everything a scenario run produces: the report plus the raw streams the
/// CLI writes to sidecar files.
#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub report: MetricsReport,
    /// Latency CDF pooled over all receivers.
    pub cdf: LatencyCdf,
    /// Playout-buffer release log (empty when no jitter buffer is
    /// configured).
    pub release_log: Vec<ReleaseRecord>,
    /// One negotiation per episode when an RSC request is configured.
    pub negotiation_trace: Vec<NegotiationRecord>,
}
