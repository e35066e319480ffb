//! Scenario configuration: the single declarative description of a
//! simulation run.
//!
//! A [`ScenarioConfig`] is designed to round-trip through serde (TOML on
//! disk, JSON in reports) and to be *validated before use*: every runner
//! entry point calls [`ScenarioConfig::validate`] first, so a config that
//! deserializes is not necessarily runnable. Validation separates hard
//! errors (the run would be meaningless) from warnings (the run is legal but
//! probably not what the author wanted, e.g. a deadline shorter than one
//! frame), which are carried into the report.

use serde::{Deserialize, Serialize};

use crate::channel::{FadingModel, LinkAbstraction};
use crate::csa_mac::{DegreeDistribution, Perspective};
use crate::jitter_buffer::ReleasePolicy;
use crate::metrics::DEFAULT_MIN_EPISODE_MESSAGES;
use crate::rrm::RrmScenario;
use crate::rsc::{self, GrantPolicy, ServiceRequest, ServiceTier};
use crate::time::{serde_secs, SimTime};
use crate::traffic::{MessageSpec, TrafficSource, DEFAULT_PERIODIC_RATE_CAP_HZ};
use crate::{Error, Result};

/// Version of the configuration schema this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

/// Medium-access scheme run by the scenario.
///
/// `Csa` and `SlottedAloha` share one code path (slotted ALOHA is the
/// degree-1 special case); `ReservationTdma` runs the reservation baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MacConfig {
    Csa {
        #[serde(default = "DegreeDistribution::default_mix")]
        degree_distribution: DegreeDistribution,
    },
    SlottedAloha,
    ReservationTdma,
}

impl MacConfig {
    /// The replica-degree distribution the frame builder uses, if the scheme
    /// is frame-random (CSA family). TDMA has none.
    #[must_use]
    pub fn degree_distribution(&self) -> Option<DegreeDistribution> {
        match self {
            MacConfig::Csa { degree_distribution } => Some(degree_distribution.clone()),
            MacConfig::SlottedAloha => Some(DegreeDistribution::degree_one()),
            MacConfig::ReservationTdma => None,
        }
    }
}

/// What declares an episode available.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AvailabilitySource {
    /// Every episode is available (pure MAC study).
    #[default]
    None,
    /// Episode SNR above the channel gate threshold.
    SnrGate,
    /// The per-episode power-control problem is feasible.
    RrmFeasibility,
    /// The service-composition indicator reports some tier deliverable.
    RscIndicator,
}

/// Couples the MAC to a block-fading channel: one SNR draw per episode
/// decides packet outcome (all-or-nothing for the episode's frames) and,
/// under [`AvailabilitySource::SnrGate`], the availability declaration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelCoupling {
    pub fading: FadingModel,
    pub link: LinkAbstraction,
    /// SNR threshold for the availability gate (linear). Only consulted when
    /// the availability source is `snr_gate`.
    #[serde(default)]
    pub gate_threshold: f64,
}

/// Service-composition section: the tier ladder, the SNR thresholds that
/// drive the availability indicator (one per tier, ascending), and an
/// optional standing request negotiated once per episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RscConfig {
    pub tiers: Vec<ServiceTier>,
    /// `thresholds[k]` is the minimum episode SNR (exclusive) at which tier
    /// `k` counts as deliverable; the indicator reports the highest such `k`.
    pub tier_snr_thresholds: Vec<f64>,
    #[serde(default)]
    pub grant_policy: GrantPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request: Option<ServiceRequest>,
}

/// What a node does when a new message becomes ready while an older one is
/// still being served.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeliveryPolicy {
    /// The newest message wins; older pending messages stop transmitting.
    /// This is the natural policy for status updates, where stale state has
    /// no value.
    #[default]
    Supersede,
    /// Messages are served strictly in arrival order.
    Queue,
}

/// Playout-buffer section of the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JitterConfig {
    pub policy: ReleasePolicy,
    #[serde(default)]
    pub deliver_late: bool,
}

fn default_perspective() -> Perspective {
    Perspective::Participants
}

fn default_min_episode_messages() -> u64 {
    DEFAULT_MIN_EPISODE_MESSAGES
}

/// Complete description of one simulation scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Must equal [`SCHEMA_VERSION`]; guards against stale config files.
    pub schema_version: u32,
    /// Master seed. Every random stream in the run is derived from it.
    pub seed: u64,
    pub n_nodes: u32,
    #[serde(with = "serde_secs")]
    pub frame_duration: SimTime,
    /// Slots per MAC frame.
    pub n_slots: usize,
    pub mac: MacConfig,
    /// Whether participant receivers lose the slots they transmit in.
    #[serde(default)]
    pub half_duplex: bool,
    /// Whose decoders the delivery statistics are measured at.
    #[serde(default = "default_perspective")]
    pub perspective: Perspective,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelCoupling>,
    #[serde(default)]
    pub availability: AvailabilitySource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rrm: Option<RrmScenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rsc: Option<RscConfig>,
    /// Per-node message arrival process. Node `i` uses the configured phase
    /// plus `i * phase_stagger_s`.
    pub traffic: TrafficSource,
    #[serde(default)]
    pub phase_stagger_s: f64,
    pub message: MessageSpec,
    /// Frames per availability episode.
    pub episode_length: u64,
    /// Traffic generation horizon; rounded down to whole episodes.
    #[serde(with = "serde_secs")]
    pub horizon: SimTime,
    #[serde(default)]
    pub delivery: DeliveryPolicy,
    /// Retransmit in every frame until the deadline passes (`true`) or send
    /// each message exactly once (`false`). Retries are blind: an all-to-all
    /// broadcaster gets no per-receiver acknowledgements.
    #[serde(default)]
    pub blind_retry: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jitter: Option<JitterConfig>,
    /// Episodes measured over fewer records than this are flagged (not
    /// dropped) in the report.
    #[serde(default = "default_min_episode_messages")]
    pub min_episode_messages: u64,
}

impl ScenarioConfig {
    /// Frames fully or partially covering the horizon.
    #[must_use]
    pub fn horizon_frames(&self) -> u64 {
        self.horizon.div_ceil(self.frame_duration)
    }

    /// Number of whole episodes the horizon covers. Traffic past the last
    /// whole episode is not generated.
    #[must_use]
    pub fn n_episodes(&self) -> u64 {
        if self.episode_length == 0 {
            return 0;
        }
        self.horizon_frames() / self.episode_length
    }

    /// Checks the configuration, returning warnings for legal-but-suspect
    /// settings and an error for anything that would make the run
    /// meaningless.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();

        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "schema_version is {}, this build reads {}",
                self.schema_version, SCHEMA_VERSION
            )));
        }
        if self.n_nodes == 0 {
            return Err(Error::InvalidConfig("n_nodes must be at least 1".into()));
        }
        if self.perspective == Perspective::Participants && self.n_nodes < 2 {
            return Err(Error::InvalidConfig(
                "the participant perspective needs at least two nodes \
                 (a lone node has no one to deliver to)"
                    .into(),
            ));
        }
        if self.frame_duration.is_zero() {
            return Err(Error::InvalidConfig("frame_duration must be positive".into()));
        }
        if self.n_slots == 0 {
            return Err(Error::InvalidConfig("n_slots must be at least 1".into()));
        }
        if let Some(dist) = self.mac.degree_distribution() {
            let max_degree = dist.max_degree();
            if max_degree as usize > self.n_slots {
                return Err(Error::DegreeExceedsFrame { degree: max_degree, n_slots: self.n_slots });
            }
        }
        if self.episode_length == 0 {
            return Err(Error::InvalidConfig("episode_length must be at least 1".into()));
        }
        if self.n_episodes() == 0 {
            return Err(Error::InvalidConfig(format!(
                "horizon covers {} frames, shorter than one episode ({} frames)",
                self.horizon_frames(),
                self.episode_length
            )));
        }
        if !self.phase_stagger_s.is_finite() || self.phase_stagger_s < 0.0 {
            return Err(Error::InvalidConfig(
                "phase_stagger_s must be finite and non-negative".into(),
            ));
        }

        self.message.validate()?;
        self.traffic.validate(Some(DEFAULT_PERIODIC_RATE_CAP_HZ))?;

        if let Some(channel) = &self.channel {
            channel.fading.validate()?;
            channel.link.validate()?;
            if !channel.gate_threshold.is_finite() || channel.gate_threshold < 0.0 {
                return Err(Error::InvalidConfig(
                    "channel.gate_threshold must be finite and non-negative".into(),
                ));
            }
        }
        if let Some(rrm) = &self.rrm {
            rrm.validate()?;
        }
        if let Some(rsc) = &self.rsc {
            validate_rsc(rsc)?;
        }

        match self.availability {
            AvailabilitySource::None => {}
            AvailabilitySource::SnrGate => {
                if self.channel.is_none() {
                    return Err(Error::InvalidConfig(
                        "availability = \"snr_gate\" needs a [channel] section".into(),
                    ));
                }
            }
            AvailabilitySource::RrmFeasibility => {
                if self.rrm.is_none() {
                    return Err(Error::InvalidConfig(
                        "availability = \"rrm_feasibility\" needs an [rrm] section".into(),
                    ));
                }
            }
            AvailabilitySource::RscIndicator => {
                if self.rsc.is_none() {
                    return Err(Error::InvalidConfig(
                        "availability = \"rsc_indicator\" needs an [rsc] section".into(),
                    ));
                }
                if self.channel.is_none() {
                    return Err(Error::InvalidConfig(
                        "availability = \"rsc_indicator\" needs a [channel] section \
                         (the indicator is driven by the episode SNR)"
                            .into(),
                    ));
                }
            }
        }

        if self.message.deadline < self.frame_duration {
            warnings.push(format!(
                "deadline ({:.6} s) is shorter than one frame ({:.6} s); \
                 no delivery can meet it and reliability will be 0",
                self.message.deadline.as_secs_f64(),
                self.frame_duration.as_secs_f64()
            ));
        }
        if self.horizon_frames() % self.episode_length != 0 {
            warnings.push(format!(
                "horizon is not a whole number of episodes; simulating {} episodes \
                 ({} frames) and ignoring the remainder",
                self.n_episodes(),
                self.n_episodes() * self.episode_length
            ));
        }

        Ok(warnings)
    }

    /// Returns a copy with `axis` set to `value` — the sweep primitive.
    ///
    /// Integer axes take the rounded value; the copy is *not* revalidated
    /// here (the runner validates each point before executing it).
    pub fn with_axis(&self, axis: &str, value: f64) -> Result<ScenarioConfig> {
        let mut c = self.clone();
        match axis {
            "n_nodes" => c.n_nodes = int_axis(axis, value, u64::from(u32::MAX))? as u32,
            "n_slots" => c.n_slots = int_axis(axis, value, u64::MAX)? as usize,
            "seed" => c.seed = int_axis(axis, value, u64::MAX)?,
            "episode_length" => c.episode_length = int_axis(axis, value, u64::MAX)?,
            "rate_hz" => c.traffic.rate_hz = value,
            "gate_threshold" => match &mut c.channel {
                Some(channel) => channel.gate_threshold = value,
                None => {
                    return Err(Error::InvalidConfig(
                        "axis \"gate_threshold\" needs a [channel] section".into(),
                    ))
                }
            },
            "sinr_target_db" => match &mut c.rrm {
                Some(rrm) => rrm.sinr_target_db = value,
                None => {
                    return Err(Error::InvalidConfig(
                        "axis \"sinr_target_db\" needs an [rrm] section".into(),
                    ))
                }
            },
            other => return Err(Error::UnknownAxis(other.to_string())),
        }
        Ok(c)
    }

    /// Axis names accepted by [`ScenarioConfig::with_axis`].
    pub const AXES: &'static [&'static str] = &[
        "n_nodes",
        "n_slots",
        "seed",
        "episode_length",
        "rate_hz",
        "gate_threshold",
        "sinr_target_db",
    ];
}

fn int_axis(axis: &str, value: f64, max: u64) -> Result<u64> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "axis \"{axis}\" needs a finite non-negative value, got {value}"
        )));
    }
    let rounded = value.round();
    if rounded > max as f64 {
        return Err(Error::InvalidConfig(format!(
            "axis \"{axis}\" value {value} is out of range"
        )));
    }
    Ok(rounded as u64)
}

fn validate_rsc(rsc: &RscConfig) -> Result<()> {
    let violations = rsc::validate_composition(&rsc.tiers);
    if !violations.is_empty() {
        let joined = violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::InvalidConfig(format!("rsc.tiers is not a valid composition: {joined}")));
    }
    if rsc.tier_snr_thresholds.len() != rsc.tiers.len() {
        return Err(Error::InvalidConfig(format!(
            "rsc.tier_snr_thresholds has {} entries for {} tiers",
            rsc.tier_snr_thresholds.len(),
            rsc.tiers.len()
        )));
    }
    if rsc.tier_snr_thresholds.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidConfig(
            "rsc.tier_snr_thresholds must be finite and non-negative".into(),
        ));
    }
    if rsc.tier_snr_thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidConfig(
            "rsc.tier_snr_thresholds must be ascending (richer tiers need more SNR)".into(),
        ));
    }
    if let Some(request) = &rsc.request {
        request.validate()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::TrafficKind;

    fn base_config() -> ScenarioConfig {
        ScenarioConfig {
            schema_version: SCHEMA_VERSION,
            seed: 7,
            n_nodes: 4,
            frame_duration: SimTime::from_secs_f64(2e-3),
            n_slots: 50,
            mac: MacConfig::Csa { degree_distribution: DegreeDistribution::default_mix() },
            half_duplex: true,
            perspective: Perspective::Participants,
            channel: None,
            availability: AvailabilitySource::None,
            rrm: None,
            rsc: None,
            traffic: TrafficSource {
                kind: TrafficKind::Periodic,
                rate_hz: 10.0,
                phase: SimTime::ZERO,
            },
            phase_stagger_s: 0.0,
            message: MessageSpec {
                payload_bytes: 1600,
                deadline: SimTime::from_secs_f64(5e-3),
                reliability_target: 0.99999,
            },
            episode_length: 50,
            horizon: SimTime::from_secs_f64(1.0),
            delivery: DeliveryPolicy::Supersede,
            blind_retry: false,
            jitter: None,
            min_episode_messages: 10,
        }
    }

    #[test]
    fn base_config_is_valid_without_warnings() {
        let warnings = base_config().validate().unwrap();
        assert!(warnings.is_empty(), "unexpected warnings: {warnings:?}");
    }

    #[test]
    fn rejects_wrong_schema_version() {
        let mut c = base_config();
        c.schema_version = 99;
        assert!(c.validate().is_err());
    }

    #[test]
    fn rejects_lone_participant() {
        let mut c = base_config();
        c.n_nodes = 1;
        assert!(c.validate().is_err());
        c.perspective = Perspective::ExternalObserver;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn rejects_degree_wider_than_frame() {
        let mut c = base_config();
        c.n_slots = 4; // default mix includes degree 8
        assert!(matches!(c.validate(), Err(Error::DegreeExceedsFrame { degree: 8, n_slots: 4 })));
    }

    #[test]
    fn rejects_horizon_shorter_than_one_episode() {
        let mut c = base_config();
        c.horizon = SimTime::from_secs_f64(0.05); // 25 frames < 50
        assert!(c.validate().is_err());
    }

    #[test]
    fn availability_sources_demand_their_sections() {
        let mut c = base_config();
        c.availability = AvailabilitySource::SnrGate;
        assert!(c.validate().is_err());
        c.channel = Some(ChannelCoupling {
            fading: FadingModel { kind: crate::channel::FadingKind::Rayleigh, mean_snr: 10.0 },
            link: LinkAbstraction { spectral_rate: 2.0 },
            gate_threshold: 1.0,
        });
        assert!(c.validate().is_ok());

        let mut c = base_config();
        c.availability = AvailabilitySource::RrmFeasibility;
        assert!(c.validate().is_err());
    }

    #[test]
    fn short_deadline_warns_but_passes() {
        let mut c = base_config();
        c.message.deadline = SimTime::from_secs_f64(1e-3);
        let warnings = c.validate().unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("deadline"));
    }

    #[test]
    fn ragged_horizon_warns_and_truncates() {
        let mut c = base_config();
        c.horizon = SimTime::from_secs_f64(0.21); // 105 frames, 2 episodes + 5
        let warnings = c.validate().unwrap();
        assert_eq!(c.n_episodes(), 2);
        assert!(warnings.iter().any(|w| w.contains("whole number of episodes")));
    }

    #[test]
    fn axis_application_round_trips() {
        let c = base_config();
        assert_eq!(c.with_axis("n_nodes", 12.0).unwrap().n_nodes, 12);
        assert_eq!(c.with_axis("n_slots", 199.6).unwrap().n_slots, 200);
        assert_eq!(c.with_axis("seed", 3.0).unwrap().seed, 3);
        assert_eq!(c.with_axis("rate_hz", 2.5).unwrap().traffic.rate_hz, 2.5);
        assert!(matches!(c.with_axis("bogus", 1.0), Err(Error::UnknownAxis(_))));
        // gate_threshold without a channel section is a config error.
        assert!(c.with_axis("gate_threshold", 1.0).is_err());
    }

    #[test]
    fn toml_round_trip_preserves_config() {
        let c = base_config();
        let json = serde_json::to_string(&c).unwrap();
        let back: ScenarioConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn minimal_json_uses_defaults() {
        let json = r#"{
            "schema_version": 1,
            "seed": 1,
            "n_nodes": 2,
            "frame_duration": 0.002,
            "n_slots": 10,
            "mac": {"kind": "slotted_aloha"},
            "traffic": {"kind": "periodic", "rate_hz": 10.0},
            "message": {"payload_bytes": 300, "deadline": 0.01, "reliability_target": 0.999},
            "episode_length": 10,
            "horizon": 0.1
        }"#;
        let c: ScenarioConfig = serde_json::from_str(json).unwrap();
        assert_eq!(c.perspective, Perspective::Participants);
        assert_eq!(c.delivery, DeliveryPolicy::Supersede);
        assert_eq!(c.availability, AvailabilitySource::None);
        assert!(!c.half_duplex);
        assert!(!c.blind_retry);
        assert_eq!(c.min_episode_messages, DEFAULT_MIN_EPISODE_MESSAGES);
        assert!(c.validate().is_ok());
    }
}
