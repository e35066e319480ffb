//! Frame-synchronous Monte Carlo simulator for ultra-reliable vehicular
//! broadcast communication.
//!
//! The crate is organised around a handful of independently testable
//! subsystems:
//!
//! - [`metrics`] — latency CDFs and the reliability / availability / failure
//!   triplet evaluated against a hard deadline.
//! - [`traffic`] — periodic (status) and Poisson (event) request generators.
//! - [`jitter_buffer`] — receive-side buffering that trades latency slack for
//!   zero delivery jitter.
//! - [`channel`] — Rayleigh/fixed SNR draws, an outage packet abstraction and
//!   the SNR-threshold availability gate.
//! - [`csa_mac`] — coded slotted ALOHA frames with iterative successive
//!   interference cancellation at the receiver.
//! - [`baseline_mac`] — slotted ALOHA and reservation TDMA comparators.
//! - [`rrm`] — power-control feasibility of SINR targets, treated as an
//!   availability indicator, plus rate maximisation for a broadband user
//!   sharing the band.
//! - [`rsc`] — tiered service compositions and the associated negotiation
//!   protocol.
//! - [`engine`] — the scenario driver that wires all of the above into a
//!   deterministic, seedable simulation producing a metrics report.
//! - [`reference`] — deliberately naive reference implementations (exhaustive
//!   decoders, fixed-point solvers, grid searches) used by the test suites to
//!   cross-check the optimised code paths. Not intended for production use.
//!
//! All simulation time is carried as integer nanoseconds ([`SimTime`]) so
//! that latency arithmetic — deadline comparisons, jitter-buffer release
//! times, frame boundaries — is exact and reproducible across platforms.

pub mod baseline_mac;
pub mod channel;
pub mod csa_mac;
pub mod engine;
pub mod jitter_buffer;
pub mod metrics;
pub mod reference;
pub mod rrm;
pub mod rsc;
pub mod seed;
pub mod time;
pub mod traffic;

pub use time::SimTime;

/// Unified error type for fallible operations across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An empirical distribution was requested over an empty sample set.
    #[error("no samples: cannot build an empirical distribution from zero records")]
    NoSamples,

    /// A deadline (or other duration that must be positive) was zero.
    #[error("deadline must be positive")]
    NonPositiveDeadline,

    /// Availability/failure statistics were requested over zero episodes.
    #[error("no episodes: availability is undefined over an empty episode set")]
    NoEpisodes,

    /// A degree distribution failed validation.
    #[error("invalid degree distribution: {0}")]
    InvalidDistribution(String),

    /// A sampled (or declared) replica degree does not fit in the frame.
    #[error("degree {degree} exceeds frame of {n_slots} slots")]
    DegreeExceedsFrame { degree: u32, n_slots: usize },

    /// Packet headers and the frame schedule disagree.
    #[error("header/schedule inconsistency: {0}")]
    InconsistentFrame(String),

    /// A threshold sweep was not sorted ascending.
    #[error("thresholds must be sorted in ascending order")]
    UnsortedThresholds,

    /// An availability indicator referenced a tier outside the composition.
    #[error("tier index {index} outside composition of {len} tiers")]
    TierIndexOutOfRange { index: usize, len: usize },

    /// A service request failed validation.
    #[error("invalid service request: {0}")]
    InvalidRequest(String),

    /// A scenario or module configuration failed validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A sweep referenced a config axis the engine does not know about.
    #[error("unknown sweep axis `{0}`")]
    UnknownAxis(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
