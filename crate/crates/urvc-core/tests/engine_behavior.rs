//! End-to-end behavior of the scenario engine: agreement with the
//! standalone frame estimator, structural monotonicities, and full-feature
//! determinism.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use urvc_core::channel::{FadingKind, FadingModel, LinkAbstraction};
use urvc_core::csa_mac::{plr_monte_carlo, DegreeDistribution, Perspective};
use urvc_core::engine::{
    run_scenario, sweep, AvailabilitySource, ChannelCoupling, DeliveryPolicy, JitterConfig,
    MacConfig, RscConfig, ScenarioConfig, SCHEMA_VERSION,
};
use urvc_core::jitter_buffer::ReleasePolicy;
use urvc_core::rrm::{RrmScenario, TopologyModel};
use urvc_core::rsc::{self, GrantPolicy, ServiceRequest};
use urvc_core::time::SimTime;
use urvc_core::traffic::{MessageSpec, TrafficKind, TrafficSource};

fn base(n_nodes: u32, n_slots: usize) -> ScenarioConfig {
    ScenarioConfig {
        schema_version: SCHEMA_VERSION,
        seed: 0xBEEF,
        n_nodes,
        frame_duration: SimTime::from_secs_f64(2e-3),
        n_slots,
        mac: MacConfig::Csa { degree_distribution: DegreeDistribution::two_three_mix() },
        half_duplex: false,
        perspective: Perspective::Participants,
        channel: None,
        availability: AvailabilitySource::None,
        rrm: None,
        rsc: None,
        traffic: TrafficSource { kind: TrafficKind::Periodic, rate_hz: 10.0, phase: SimTime::ZERO },
        phase_stagger_s: 0.0,
        message: MessageSpec {
            payload_bytes: 300,
            deadline: SimTime::from_secs_f64(2e-3),
            reliability_target: 0.999,
        },
        episode_length: 50,
        horizon: SimTime::from_secs_f64(1.0),
        delivery: DeliveryPolicy::Supersede,
        blind_retry: false,
        jitter: None,
        min_episode_messages: 1,
    }
}

/// The engine's frame loop and the standalone estimator draw from different
/// streams but follow the same per-frame law, so their loss rates must agree
/// statistically. With single-shot delivery and a one-frame deadline, the
/// engine's (1 - reliability) *is* its packet loss ratio.
#[test]
fn engine_loss_rate_matches_standalone_estimator() {
    let n_nodes = 6u32;
    let n_slots = 10usize;
    let mut config = base(n_nodes, n_slots);
    config.horizon = SimTime::from_secs_f64(200.0); // 2000 all-node frames
    let out = run_scenario(&config).unwrap();
    let engine_plr = out.report.mac.plr;
    // Single-shot, one-frame deadline: a record is undelivered exactly when
    // its one transmission was lost, so the counters coincide.
    let undelivered: u64 = out.report.per_receiver.iter().map(|r| r.undelivered).sum();
    assert_eq!(undelivered, out.report.mac.losses);
    assert_eq!(out.report.summary.n_messages, out.report.mac.trials);

    let mut rng = ChaCha8Rng::seed_from_u64(0x0DDBA11);
    let est = plr_monte_carlo(
        n_nodes as usize,
        &DegreeDistribution::two_three_mix(),
        n_slots,
        2000,
        false,
        Perspective::Participants,
        &mut rng,
    )
    .unwrap();

    // Two independent binomial estimates of the same p.
    let trials = out.report.mac.trials as f64;
    let p = (engine_plr + est.plr) / 2.0;
    let sigma = (p * (1.0 - p) * (1.0 / trials + 1.0 / est.trials as f64)).sqrt();
    let diff = (engine_plr - est.plr).abs();
    println!("engine plr {engine_plr:.5}, estimator plr {:.5}, diff {diff:.5} ({sigma:.5} sd)", est.plr);
    assert!(diff <= 4.0 * sigma, "plr mismatch: {diff} > 4 sigma ({sigma})");
    assert_eq!(out.report.mac.trials, 2000 * u64::from(n_nodes) * (u64::from(n_nodes) - 1));
}

/// Erasing the receiver's transmit slots can only remove information:
/// run-for-run, full-duplex reliability dominates half-duplex.
#[test]
fn half_duplex_never_beats_full_duplex() {
    for seed in [1u64, 2, 3] {
        let mut full = base(8, 12);
        full.seed = seed;
        let mut half = full.clone();
        half.half_duplex = true;
        let r_full = run_scenario(&full).unwrap().report.summary.reliability;
        let r_half = run_scenario(&half).unwrap().report.summary.reliability;
        assert!(
            r_full >= r_half,
            "seed {seed}: full-duplex {r_full} < half-duplex {r_half}"
        );
    }
}

/// Raising the availability gate can only flip episodes from available to
/// unavailable: with common random numbers the availability curve is exactly
/// non-increasing, while the channel outages (and thus reliability) stay
/// untouched.
#[test]
fn availability_gate_sweep_is_exactly_monotone() {
    let mut config = base(4, 8);
    config.channel = Some(ChannelCoupling {
        fading: FadingModel { kind: FadingKind::Rayleigh, mean_snr: 10.0 },
        link: LinkAbstraction { spectral_rate: 1.0 },
        gate_threshold: 0.0,
    });
    config.availability = AvailabilitySource::SnrGate;
    config.horizon = SimTime::from_secs_f64(4.0);
    let thresholds = [0.0, 2.0, 5.0, 10.0, 20.0, 40.0];
    let values: Vec<f64> = thresholds.to_vec();
    let outs = sweep(&config, "gate_threshold", &values).unwrap();
    let availabilities: Vec<f64> =
        outs.iter().map(|o| o.report.summary.availability).collect();
    println!("availability over thresholds: {availabilities:?}");
    for w in availabilities.windows(2) {
        assert!(w[0] >= w[1], "availability rose with a stricter gate: {availabilities:?}");
    }
    assert_eq!(availabilities[0], 1.0, "every draw beats a zero threshold");
    // Reliability is gate-independent (the gate declares, never blocks).
    let reliabilities: Vec<f64> =
        outs.iter().map(|o| o.report.summary.reliability).collect();
    for w in reliabilities.windows(2) {
        assert_eq!(w[0], w[1], "the gate must not touch delivery: {reliabilities:?}");
    }
}

/// A scenario exercising every optional subsystem at once (channel coupling,
/// RSC-driven availability with negotiation, power-control reporting, jitter
/// buffer, retries, queueing, staggered phases) must still be a pure
/// function of (config, seed).
#[test]
fn full_feature_run_is_deterministic_and_consistent() {
    let mut config = base(5, 10);
    config.half_duplex = true;
    config.blind_retry = true;
    config.delivery = DeliveryPolicy::Queue;
    config.phase_stagger_s = 1e-3;
    config.message.deadline = SimTime::from_secs_f64(8e-3);
    config.channel = Some(ChannelCoupling {
        fading: FadingModel { kind: FadingKind::Rayleigh, mean_snr: 12.0 },
        link: LinkAbstraction { spectral_rate: 1.5 },
        gate_threshold: 0.5,
    });
    config.availability = AvailabilitySource::RscIndicator;
    config.rsc = Some(RscConfig {
        tiers: rsc::three_tier_composition(),
        tier_snr_thresholds: vec![0.5, 3.0, 9.0],
        grant_policy: GrantPolicy::LowestSufficient,
        request: Some(ServiceRequest {
            payload_bytes: 280,
            deadline: SimTime::from_secs_f64(0.09),
            reliability: 0.99,
        }),
    });
    config.rrm = Some(RrmScenario {
        topology: TopologyModel::Random {
            area: urvc_core::rrm::Area { width: 400.0, height: 400.0 },
            n_pairs: 3,
            pair_distance_m: (10.0, 40.0),
            xmbb: false,
        },
        pathloss: Default::default(),
        sinr_target_db: 6.0,
        noise: 1e-13,
        p_max: 0.2,
        xmbb_p_max: 0.0,
    });
    config.jitter =
        Some(JitterConfig { policy: ReleasePolicy::ConstantLatency, deliver_late: true });

    let a = run_scenario(&config).unwrap();
    let b = run_scenario(&config).unwrap();
    assert_eq!(a.report.to_json(), b.report.to_json());
    assert_eq!(a.release_log, b.release_log);
    assert_eq!(a.negotiation_trace, b.negotiation_trace);

    // Sections present and internally consistent.
    let report = &a.report;
    assert!(report.jitter.is_some());
    let rrm_point = report.rrm_availability.as_ref().expect("rrm section reported");
    assert_eq!(rrm_point.n_drops, report.episodes.configured);
    assert_eq!(a.negotiation_trace.len() as u64, report.episodes.configured);
    // Negotiation times sit on episode boundaries.
    let episode_duration = config.frame_duration * config.episode_length;
    for (e, rec) in a.negotiation_trace.iter().enumerate() {
        assert_eq!(rec.time, episode_duration * e as u64);
    }
    // Constant-latency playout: zero variance, mean pinned to the deadline.
    let jitter = report.jitter.as_ref().unwrap();
    assert_eq!(jitter.latency_variance_s2, 0.0);
    if jitter.released > 0 {
        assert!((jitter.mean_latency_s - config.message.deadline.as_secs_f64()).abs() < 1e-12);
    }
}

/// Every delivered message costs at least one full frame: nothing can be
/// decoded before the frame that carries it ends.
#[test]
fn no_delivery_is_faster_than_one_frame() {
    let mut config = base(6, 9);
    config.blind_retry = true;
    config.message.deadline = SimTime::from_secs_f64(12e-3);
    let out = run_scenario(&config).unwrap();
    let points = out.cdf.points();
    assert!(!points.is_empty());
    let (min_latency, _) = points[0];
    assert!(
        min_latency >= config.frame_duration,
        "latency {} s under one frame",
        min_latency.as_secs_f64()
    );
}
