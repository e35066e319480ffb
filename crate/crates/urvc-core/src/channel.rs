//! Link-level channel abstraction.
//!
//! A packet transmitted at spectral rate `r` (bits/s/Hz) over a link with
//! instantaneous SNR `g` succeeds iff the channel supports the rate:
//! `log2(1 + g) >= r`, i.e. `g >= 2^r - 1`. Under Rayleigh fading the SNR is
//! exponentially distributed with mean `mean_snr`, which gives closed forms
//! for everything of interest:
//!
//! - packet error probability: `1 - exp(-(2^r - 1)/mean_snr)`;
//! - availability under an SNR gate at threshold `theta`:
//!   `P(g > theta) = exp(-theta/mean_snr)`;
//! - reliability conditioned on the gate passing:
//!   `P(ok | g > theta) = exp(-(s* - theta)/mean_snr)` for `theta < s*`
//!   and exactly 1 for `theta >= s*`, where `s* = 2^r - 1`.
//!
//! Raising the gate threshold therefore *buys reliability with availability*:
//! the service refuses to promise delivery when the channel is weak, and in
//! exchange the promise, when made, is kept more often. The Monte Carlo
//! sweep in [`tradeoff_curve`] traces that exchange and carries the closed
//! forms alongside as a built-in oracle.

use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingKind {
    /// Exponential SNR (Rayleigh amplitude), mean `mean_snr`.
    Rayleigh,
    /// Deterministic SNR equal to `mean_snr`.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingModel {
    pub kind: FadingKind,
    /// Mean SNR in linear units (not dB).
    pub mean_snr: f64,
}

impl FadingModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.mean_snr.is_finite() && self.mean_snr > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "mean_snr must be positive and finite, got {}",
                self.mean_snr
            )));
        }
        Ok(())
    }

    /// One SNR draw.
    pub fn sample_snr<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            FadingKind::Rayleigh => {
                let exp = Exp::new(1.0 / self.mean_snr).expect("mean_snr validated positive");
                exp.sample(rng)
            }
            FadingKind::Fixed => self.mean_snr,
        }
    }
}

/// Everything the outage abstraction needs to know about the PHY.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkAbstraction {
    /// Spectral efficiency the packet is coded at, bits/s/Hz.
    pub spectral_rate: f64,
}

impl LinkAbstraction {
    pub fn validate(&self) -> Result<()> {
        if !(self.spectral_rate.is_finite() && self.spectral_rate > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "spectral_rate must be positive and finite, got {}",
                self.spectral_rate
            )));
        }
        Ok(())
    }

    /// Minimum SNR that supports the rate: `2^r - 1`.
    #[must_use]
    pub fn outage_threshold(&self) -> f64 {
        self.spectral_rate.exp2() - 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketOutcome {
    Ok,
    Error,
}

/// Outage model: the packet survives iff the instantaneous capacity covers
/// the coded rate. The boundary counts as success.
#[must_use]
pub fn packet_outcome(snr: f64, link: &LinkAbstraction) -> PacketOutcome {
    if (1.0 + snr).log2() >= link.spectral_rate {
        PacketOutcome::Ok
    } else {
        PacketOutcome::Error
    }
}

/// The availability gate: the service declares itself available iff the SNR
/// *strictly* exceeds the threshold. `threshold = 0` admits every positive
/// draw.
#[must_use]
pub fn availability_gate(snr: f64, threshold: f64) -> bool {
    snr > threshold
}

/// One episode draw for the simulation engine: a single fading state applied
/// to both the gate decision and the packet outcome, reflecting that the
/// transmitter's channel knowledge within an episode is the channel the
/// packets actually see.
#[derive(Debug, Clone, Copy)]
pub struct EpisodeDraw {
    pub snr: f64,
    pub available: bool,
    pub outcome: PacketOutcome,
}

pub fn draw_episode<R: Rng + ?Sized>(
    model: &FadingModel,
    link: &LinkAbstraction,
    threshold: f64,
    rng: &mut R,
) -> EpisodeDraw {
    let snr = model.sample_snr(rng);
    EpisodeDraw {
        snr,
        available: availability_gate(snr, threshold),
        outcome: packet_outcome(snr, link),
    }
}

/// One point of the availability/reliability tradeoff sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TradeoffPoint {
    pub threshold: f64,
    pub availability: f64,
    pub availability_stderr: f64,
    /// `None` when no draw passed the gate (conditioning on an empty event).
    pub conditional_reliability: Option<f64>,
    pub conditional_reliability_stderr: Option<f64>,
    /// Closed-form availability for the configured model.
    pub availability_closed: f64,
    /// Closed-form conditional reliability; `None` when the gate admits
    /// nothing (`Fixed` fading below the threshold).
    pub conditional_reliability_closed: Option<f64>,
}

/// Closed-form availability of the gate for a fading model.
#[must_use]
pub fn closed_form_availability(model: &FadingModel, threshold: f64) -> f64 {
    match model.kind {
        FadingKind::Rayleigh => (-threshold / model.mean_snr).exp(),
        FadingKind::Fixed => {
            if model.mean_snr > threshold {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Closed-form reliability conditioned on the gate passing.
#[must_use]
pub fn closed_form_conditional_reliability(
    model: &FadingModel,
    link: &LinkAbstraction,
    threshold: f64,
) -> Option<f64> {
    let s_star = link.outage_threshold();
    match model.kind {
        FadingKind::Rayleigh => {
            if threshold >= s_star {
                Some(1.0)
            } else {
                Some((-(s_star - threshold) / model.mean_snr).exp())
            }
        }
        FadingKind::Fixed => {
            if model.mean_snr > threshold {
                Some(match packet_outcome(model.mean_snr, link) {
                    PacketOutcome::Ok => 1.0,
                    PacketOutcome::Error => 0.0,
                })
            } else {
                None
            }
        }
    }
}

/// Monte Carlo sweep of the gate threshold.
///
/// All thresholds are evaluated on the *same* `n_draws` SNR draws, so the
/// joint identity `P(ok and available) = availability * cond_reliability`
/// holds by construction at every point. Thresholds must be sorted
/// ascending; standard errors are binomial.
pub fn tradeoff_curve<R: Rng + ?Sized>(
    model: &FadingModel,
    link: &LinkAbstraction,
    thresholds: &[f64],
    n_draws: u64,
    rng: &mut R,
) -> Result<Vec<TradeoffPoint>> {
    model.validate()?;
    link.validate()?;
    if n_draws == 0 {
        return Err(Error::NoSamples);
    }
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::UnsortedThresholds);
    }

    let mut admitted = vec![0u64; thresholds.len()];
    let mut admitted_ok = vec![0u64; thresholds.len()];
    for _ in 0..n_draws {
        let snr = model.sample_snr(rng);
        let ok = packet_outcome(snr, link) == PacketOutcome::Ok;
        // Thresholds ascend, so the gate passes a prefix of the sweep.
        for (i, &theta) in thresholds.iter().enumerate() {
            if !availability_gate(snr, theta) {
                break;
            }
            admitted[i] += 1;
            if ok {
                admitted_ok[i] += 1;
            }
        }
    }

    let n = n_draws as f64;
    Ok(thresholds
        .iter()
        .enumerate()
        .map(|(i, &theta)| {
            let a = admitted[i] as f64 / n;
            let a_se = (a * (1.0 - a) / n).sqrt();
            let (cr, cr_se) = if admitted[i] == 0 {
                (None, None)
            } else {
                let m = admitted[i] as f64;
                let c = admitted_ok[i] as f64 / m;
                (Some(c), Some((c * (1.0 - c) / m).sqrt()))
            };
            TradeoffPoint {
                threshold: theta,
                availability: a,
                availability_stderr: a_se,
                conditional_reliability: cr,
                conditional_reliability_stderr: cr_se,
                availability_closed: closed_form_availability(model, theta),
                conditional_reliability_closed: closed_form_conditional_reliability(
                    model, link, theta,
                ),
            }
        })
        .collect())
}
