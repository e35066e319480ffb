//! Receive-side jitter elimination.
//!
//! Under a hard deadline the receiving application gains nothing from early
//! delivery, so the stack may hold each message and release it at exactly
//! `request_time + deadline`. Every released message then shows the same
//! overall latency — the deadline — and delivery jitter is zero by
//! construction. Messages that arrive after their deadline are discarded
//! (hard-deadline semantics); an optional flag releases them tagged as late
//! for diagnostic runs instead.

use crate::time::SimTime;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};

/// A message as it lands in the receive buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BufferedMessage {
    pub message_id: u64,
    pub request_time: SimTime,
    pub arrival_time: SimTime,
    pub deadline: SimTime,
}

impl BufferedMessage {
    /// Network latency up to buffer entry.
    #[must_use]
    pub fn arrival_latency(&self) -> SimTime {
        self.arrival_time - self.request_time
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReleasePolicy {
    /// Hold until `request_time + deadline`; zero jitter.
    ConstantLatency,
    /// Hand over on arrival; latency varies with the network.
    Immediate,
}

/// The buffer's verdict on one message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReleaseDecision {
    Released {
        release_time: SimTime,
        /// Application-visible latency. Under `ConstantLatency` this is the
        /// deadline by definition of the release rule, stored directly so
        /// the zero-jitter guarantee is exact.
        overall_latency: SimTime,
    },
    /// Past-deadline arrival released anyway (only with `deliver_late`).
    Late { release_time: SimTime, overall_latency: SimTime },
    /// Past-deadline arrival dropped.
    Discarded,
}

/// One row of the release log.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReleaseRecord {
    pub message_id: u64,
    pub request_time: SimTime,
    pub arrival_time: SimTime,
    /// `None` means the message was discarded.
    pub release_time: Option<SimTime>,
    pub late: bool,
}

/// Aggregate statistics over everything the buffer processed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JitterStats {
    pub released: u64,
    pub discarded: u64,
    pub late_released: u64,
    /// Sample variance (over released messages) of overall latency, s^2.
    pub latency_variance_s2: f64,
    pub mean_latency_s: f64,
}

/// Stateful wrapper that applies the policy and keeps the release log.
#[derive(Debug, Clone)]
pub struct JitterBuffer {
    policy: ReleasePolicy,
    deliver_late: bool,
    log: Vec<ReleaseRecord>,
    released_latencies: Vec<SimTime>,
}

impl JitterBuffer {
    #[must_use]
    pub fn new(policy: ReleasePolicy, deliver_late: bool) -> Self {
        JitterBuffer {
            policy,
            deliver_late,
            log: Vec::new(),
            released_latencies: Vec::new(),
        }
    }

    /// Decides the release instant for one message and records it.
    ///
    /// A message is on time iff `arrival - request <= deadline` — the same
    /// predicate the reliability metric applies, so the released fraction of
    /// a delivered stream matches the latency CDF at the deadline exactly.
    pub fn schedule_release(&mut self, msg: &BufferedMessage) -> ReleaseDecision {
        let on_time = msg.arrival_latency() <= msg.deadline;
        let decision = if on_time {
            match self.policy {
                ReleasePolicy::ConstantLatency => ReleaseDecision::Released {
                    release_time: msg.request_time + msg.deadline,
                    overall_latency: msg.deadline,
                },
                ReleasePolicy::Immediate => ReleaseDecision::Released {
                    release_time: msg.arrival_time,
                    overall_latency: msg.arrival_latency(),
                },
            }
        } else if self.deliver_late {
            ReleaseDecision::Late {
                release_time: msg.arrival_time,
                overall_latency: msg.arrival_latency(),
            }
        } else {
            ReleaseDecision::Discarded
        };

        match decision {
            ReleaseDecision::Released { release_time, overall_latency } => {
                self.released_latencies.push(overall_latency);
                self.log.push(ReleaseRecord {
                    message_id: msg.message_id,
                    request_time: msg.request_time,
                    arrival_time: msg.arrival_time,
                    release_time: Some(release_time),
                    late: false,
                });
            }
            ReleaseDecision::Late { release_time, .. } => {
                self.log.push(ReleaseRecord {
                    message_id: msg.message_id,
                    request_time: msg.request_time,
                    arrival_time: msg.arrival_time,
                    release_time: Some(release_time),
                    late: true,
                });
            }
            ReleaseDecision::Discarded => {
                self.log.push(ReleaseRecord {
                    message_id: msg.message_id,
                    request_time: msg.request_time,
                    arrival_time: msg.arrival_time,
                    release_time: None,
                    late: false,
                });
            }
        }
        decision
    }

    #[must_use]
    pub fn log(&self) -> &[ReleaseRecord] {
        &self.log
    }

    pub fn into_log(self) -> Vec<ReleaseRecord> {
        self.log
    }

    /// Statistics over the processed stream. Variance is computed on the
    /// integer-nanosecond latencies, so a constant stream reports exactly 0.
    #[must_use]
    pub fn stats(&self) -> JitterStats {
        let released = self.released_latencies.len() as u64;
        let discarded = self.log.iter().filter(|r| r.release_time.is_none()).count() as u64;
        let late_released = self.log.iter().filter(|r| r.late).count() as u64;
        let (mean_s, var_s2) = if released == 0 {
            (0.0, 0.0)
        } else {
            let n = released as f64;
            let mean_ns = self
                .released_latencies
                .iter()
                .map(|l| l.as_nanos() as f64)
                .sum::<f64>()
                / n;
            let var_ns2 = if released < 2 {
                0.0
            } else {
                self.released_latencies
                    .iter()
                    .map(|l| {
                        let d = l.as_nanos() as f64 - mean_ns;
                        d * d
                    })
                    .sum::<f64>()
                    / (n - 1.0)
            };
            (mean_ns / 1e9, var_ns2 / 1e18)
        };
        JitterStats {
            released,
            discarded,
            late_released,
            latency_variance_s2: var_s2,
            mean_latency_s: mean_s,
        }
    }
}

/// Writes the release log as CSV:
/// `message_id,request_time_s,arrival_time_s,release_time_s,late`
/// with an empty `release_time_s` for discarded messages.
pub fn write_release_log_csv<W: Write>(log: &[ReleaseRecord], mut w: W) -> io::Result<()> {
    writeln!(w, "message_id,request_time_s,arrival_time_s,release_time_s,late")?;
    for r in log {
        let release = r
            .release_time
            .map(|t| t.as_secs_f64().to_string())
            .unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{}",
            r.message_id,
            r.request_time.as_secs_f64(),
            r.arrival_time.as_secs_f64(),
            release,
            r.late
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn msg(id: u64, request_s: f64, latency_s: f64, deadline_s: f64) -> BufferedMessage {
        let request_time = SimTime::from_secs_f64(request_s);
        BufferedMessage {
            message_id: id,
            request_time,
            arrival_time: request_time + SimTime::from_secs_f64(latency_s),
            deadline: SimTime::from_secs_f64(deadline_s),
        }
    }

    #[test]
    fn constant_latency_release_is_exactly_request_plus_deadline() {
        let mut buf = JitterBuffer::new(ReleasePolicy::ConstantLatency, false);
        let m = msg(1, 0.1234, 0.0021, 0.005);
        match buf.schedule_release(&m) {
            ReleaseDecision::Released { release_time, overall_latency } => {
                assert_eq!(release_time, m.request_time + m.deadline);
                assert_eq!(overall_latency, m.deadline);
            }
            other => panic!("expected release, got {other:?}"),
        }
    }

    #[test]
    fn tie_at_deadline_is_released() {
        let mut buf = JitterBuffer::new(ReleasePolicy::ConstantLatency, false);
        let m = msg(1, 0.0, 0.005, 0.005);
        assert!(matches!(
            buf.schedule_release(&m),
            ReleaseDecision::Released { .. }
        ));
    }

    #[test]
    fn late_arrival_is_discarded_by_default_and_tagged_when_asked() {
        let m = msg(1, 0.0, 0.0051, 0.005);
        let mut strict = JitterBuffer::new(ReleasePolicy::ConstantLatency, false);
        assert_eq!(strict.schedule_release(&m), ReleaseDecision::Discarded);

        let mut tolerant = JitterBuffer::new(ReleasePolicy::ConstantLatency, true);
        match tolerant.schedule_release(&m) {
            ReleaseDecision::Late { release_time, .. } => {
                assert_eq!(release_time, m.arrival_time);
            }
            other => panic!("expected late release, got {other:?}"),
        }
        assert_eq!(tolerant.stats().late_released, 1);
        // Late releases never enter the released-latency population.
        assert_eq!(tolerant.stats().released, 0);
    }

    #[test]
    fn constant_latency_has_exactly_zero_variance() {
        // Arrival latencies all over the place; released latency pinned.
        let mut buf = JitterBuffer::new(ReleasePolicy::ConstantLatency, false);
        let mut rng = ChaCha8Rng::seed_from_u64(0x11);
        let mut released = 0u64;
        for id in 0..10_000 {
            let latency = rng.gen_range(0.0..0.006);
            let m = msg(id, id as f64 * 0.1, latency, 0.005);
            if matches!(buf.schedule_release(&m), ReleaseDecision::Released { .. }) {
                released += 1;
            }
        }
        let stats = buf.stats();
        assert_eq!(stats.released, released);
        assert!(released > 8000, "most messages should be on time");
        assert_eq!(stats.latency_variance_s2, 0.0);
        assert_eq!(stats.mean_latency_s, 0.005);
    }

    #[test]
    fn immediate_policy_preserves_network_jitter() {
        let mut buf = JitterBuffer::new(ReleasePolicy::Immediate, false);
        for (id, latency) in [(0u64, 0.001), (1, 0.002), (2, 0.004)] {
            buf.schedule_release(&msg(id, id as f64, latency, 0.005));
        }
        let stats = buf.stats();
        assert_eq!(stats.released, 3);
        assert!(stats.latency_variance_s2 > 0.0);
    }

    #[test]
    fn release_order_is_fifo_for_equal_deadlines() {
        // Constant-latency release times are request + deadline, so a stream
        // sorted by request time releases in the same order even when
        // arrivals are reordered by the network.
        let mut buf = JitterBuffer::new(ReleasePolicy::ConstantLatency, false);
        let arrivals = [(0u64, 0.0, 0.0049), (1, 0.01, 0.0002), (2, 0.02, 0.003)];
        let mut release_times = Vec::new();
        for (id, req, lat) in arrivals {
            if let ReleaseDecision::Released { release_time, .. } =
                buf.schedule_release(&msg(id, req, lat, 0.005))
            {
                release_times.push((id, release_time));
            }
        }
        let mut sorted = release_times.clone();
        sorted.sort_by_key(|&(_, t)| t);
        assert_eq!(release_times, sorted);
    }

    #[test]
    fn release_log_csv_shape() {
        let mut buf = JitterBuffer::new(ReleasePolicy::ConstantLatency, false);
        buf.schedule_release(&msg(7, 0.0, 0.001, 0.005));
        buf.schedule_release(&msg(8, 0.0, 0.009, 0.005));
        let mut out = Vec::new();
        write_release_log_csv(buf.log(), &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "message_id,request_time_s,arrival_time_s,release_time_s,late"
        );
        assert!(lines[1].starts_with("7,"));
        assert!(lines[2].ends_with(",,false")); // discarded: empty release time
    }
}
