//! Coded slotted ALOHA with successive interference cancellation.
//!
//! Each node transmits `d` replicas of its packet in `d` distinct,
//! uniformly chosen slots of a shared frame, where `d` is drawn from a
//! degree distribution. Every replica's header lists the slot positions of
//! its siblings. A receiver first decodes every *singleton* slot (exactly
//! one replica present), then uses the decoded headers to cancel the sibling
//! replicas from the other slots, which may uncover new singletons; the
//! process repeats until a pass uncovers nothing new. Decoding stalls only
//! on *stopping sets* — groups of packets whose replicas completely cover
//! each other, e.g. two nodes that picked identical slot pairs.
//!
//! Interference cancellation turns collisions from waste into structure:
//! compared to classical slotted ALOHA (a degree-1 special case of this
//! module), the same frame supports several times more users at a given
//! packet loss rate.
//!
//! A half-duplex receiver that itself transmits cannot listen during its own
//! slots; those slots are *erased* for it, never decodable, which is why its
//! decoded set is always a subset of what an external observer decodes.

use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Node identifier within a scenario.
pub type NodeId = u32;

// ===== Degree distribution =====

/// A probability distribution over replica counts.
///
/// Validated on construction: degrees >= 1, probabilities > 0, total mass 1
/// within 1e-12. Kept sorted by degree so sampling and serialization are
/// deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(u32, f64)>", into = "Vec<(u32, f64)>")]
pub struct DegreeDistribution {
    entries: Vec<(u32, f64)>,
    cumulative: Vec<f64>,
}

impl DegreeDistribution {
    pub fn new(mut pairs: Vec<(u32, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidDistribution("no entries".into()));
        }
        pairs.sort_by_key(|&(d, _)| d);
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidDistribution(format!(
                    "duplicate degree {}",
                    w[0].0
                )));
            }
        }
        let mut total = 0.0f64;
        for &(degree, prob) in &pairs {
            if degree == 0 {
                return Err(Error::InvalidDistribution("degree 0 is not transmittable".into()));
            }
            if !(prob.is_finite() && prob > 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "probability for degree {degree} must be positive, got {prob}"
                )));
            }
            total += prob;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let mut cumulative = Vec::with_capacity(pairs.len());
        let mut acc = 0.0;
        for &(_, p) in &pairs {
            acc += p;
            cumulative.push(acc);
        }
        Ok(DegreeDistribution { entries: pairs, cumulative })
    }

    /// Degree-1 point mass: classical slotted ALOHA.
    #[must_use]
    pub fn degree_one() -> Self {
        DegreeDistribution::new(vec![(1, 1.0)]).expect("static distribution is valid")
    }

    /// The default irregular mix `{2: 0.50, 3: 0.28, 8: 0.22}` — a
    /// low-average-degree distribution with a strong cancellation threshold.
    #[must_use]
    pub fn default_mix() -> Self {
        DegreeDistribution::new(vec![(2, 0.50), (3, 0.28), (8, 0.22)])
            .expect("static distribution is valid")
    }

    /// Even split between two and three replicas.
    #[must_use]
    pub fn two_three_mix() -> Self {
        DegreeDistribution::new(vec![(2, 0.5), (3, 0.5)]).expect("static distribution is valid")
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.gen();
        for (i, &c) in self.cumulative.iter().enumerate() {
            if u < c {
                return self.entries[i].0;
            }
        }
        // Mass summed to 1 within tolerance; a draw in the residual sliver
        // belongs to the last entry.
        self.entries.last().expect("validated non-empty").0
    }

    #[must_use]
    pub fn max_degree(&self) -> u32 {
        self.entries.last().expect("validated non-empty").0
    }

    #[must_use]
    pub fn mean_degree(&self) -> f64 {
        self.entries.iter().map(|&(d, p)| d as f64 * p).sum()
    }

    #[must_use]
    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }
}

impl TryFrom<Vec<(u32, f64)>> for DegreeDistribution {
    type Error = Error;
    fn try_from(pairs: Vec<(u32, f64)>) -> Result<Self> {
        DegreeDistribution::new(pairs)
    }
}

impl From<DegreeDistribution> for Vec<(u32, f64)> {
    fn from(d: DegreeDistribution) -> Self {
        d.entries
    }
}

// ===== Frame structures =====

/// Pointer header carried by every replica: who sent it and where its
/// sibling replicas sit. Slots are sorted and distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketHeader {
    pub node_id: NodeId,
    pub replica_slots: Vec<usize>,
}

/// Who transmitted in which slot of one frame. Only occupied slots are
/// stored; the map is ordered so iteration is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSchedule {
    pub n_slots: usize,
    pub transmissions: BTreeMap<usize, Vec<NodeId>>,
}

impl FrameSchedule {
    /// Builds the schedule implied by a set of headers. Used by tests and
    /// hand-crafted examples; `build_frame` is the random path.
    pub fn from_headers(n_slots: usize, headers: &[PacketHeader]) -> Result<Self> {
        let mut transmissions: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
        for h in headers {
            if h.replica_slots.is_empty() {
                return Err(Error::InconsistentFrame(format!(
                    "node {} has an empty replica set",
                    h.node_id
                )));
            }
            for w in h.replica_slots.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InconsistentFrame(format!(
                        "node {} replica slots must be sorted and distinct",
                        h.node_id
                    )));
                }
            }
            for &s in &h.replica_slots {
                if s >= n_slots {
                    return Err(Error::InconsistentFrame(format!(
                        "node {} lists slot {s} outside a {n_slots}-slot frame",
                        h.node_id
                    )));
                }
                transmissions.entry(s).or_default().push(h.node_id);
            }
        }
        Ok(FrameSchedule { n_slots, transmissions })
    }
}

/// What one receiver can observe of a frame.
#[derive(Debug, Clone)]
pub struct FrameView {
    pub n_slots: usize,
    /// Slot contents with the receiver's own replicas removed (a radio knows
    /// its own signal and cancels it unconditionally).
    pub transmissions: BTreeMap<usize, Vec<NodeId>>,
    /// Slots the receiver transmitted in while half-duplex: nothing in them
    /// can ever be received, including other nodes' replicas.
    pub erased: BTreeSet<usize>,
    /// `None` for an external observer.
    pub receiver: Option<NodeId>,
}

/// Restricts a schedule to what `receiver` can see.
///
/// With `half_duplex` set, every slot the receiver transmits in is erased.
/// An external observer (`receiver = None`) sees the schedule unchanged.
#[must_use]
pub fn receiver_view(
    schedule: &FrameSchedule,
    receiver: Option<NodeId>,
    half_duplex: bool,
) -> FrameView {
    let mut transmissions = BTreeMap::new();
    let mut erased = BTreeSet::new();
    for (&slot, nodes) in &schedule.transmissions {
        let holds_receiver = receiver.is_some_and(|r| nodes.contains(&r));
        if holds_receiver && half_duplex {
            erased.insert(slot);
        }
        let kept: Vec<NodeId> = match receiver {
            Some(r) => nodes.iter().copied().filter(|&n| n != r).collect(),
            None => nodes.clone(),
        };
        if !kept.is_empty() {
            transmissions.insert(slot, kept);
        }
    }
    FrameView {
        n_slots: schedule.n_slots,
        transmissions,
        erased,
        receiver,
    }
}

/// Result of running cancellation to a fixed point on one view.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub decoded: BTreeSet<NodeId>,
    /// Number of cancellation passes that processed at least one singleton.
    pub iterations: u32,
    /// Observable slots still holding two or more uncancelled replicas —
    /// the stopping set's footprint.
    pub residual_slots: BTreeSet<usize>,
}

// ===== Frame construction =====

/// Draws one frame: every node samples a degree and places that many
/// replicas in distinct, uniformly chosen slots.
///
/// Errors if the distribution's maximum degree exceeds the frame, since any
/// node could draw it.
pub fn build_frame<R: Rng + ?Sized>(
    node_ids: &[NodeId],
    dist: &DegreeDistribution,
    n_slots: usize,
    rng: &mut R,
) -> Result<(FrameSchedule, Vec<PacketHeader>)> {
    if dist.max_degree() as usize > n_slots {
        return Err(Error::DegreeExceedsFrame {
            degree: dist.max_degree(),
            n_slots,
        });
    }
    let mut transmissions: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
    let mut headers = Vec::with_capacity(node_ids.len());
    for &node in node_ids {
        let degree = dist.sample(rng) as usize;
        let mut slots: Vec<usize> = rand::seq::index::sample(rng, n_slots, degree).into_vec();
        slots.sort_unstable();
        for &s in &slots {
            transmissions.entry(s).or_default().push(node);
        }
        headers.push(PacketHeader { node_id: node, replica_slots: slots });
    }
    Ok((FrameSchedule { n_slots, transmissions }, headers))
}

// ===== Decoding =====

/// Iterative SIC with error-free singleton decoding.
pub fn sic_decode(view: &FrameView, headers: &[PacketHeader]) -> Result<DecodeResult> {
    sic_decode_with_errors(view, headers, 0.0, &mut NoRng)
}

/// Iterative SIC where each singleton decode attempt independently fails
/// with probability `singleton_error_prob`. A failed slot is permanently
/// unusable, but the packet in it may still be recovered from a sibling
/// replica elsewhere.
pub fn sic_decode_with_errors<R: Rng + ?Sized>(
    view: &FrameView,
    headers: &[PacketHeader],
    singleton_error_prob: f64,
    rng: &mut R,
) -> Result<DecodeResult> {
    let header_index = validate_frame(view, headers)?;

    let mut count = vec![0u32; view.n_slots];
    let mut acc = vec![0u32; view.n_slots]; // xor of node ids; the survivor when count == 1
    for (&slot, nodes) in &view.transmissions {
        for &n in nodes {
            count[slot] += 1;
            acc[slot] ^= n;
        }
    }
    let mut dead = vec![false; view.n_slots];

    // First frontier: observable singletons as transmitted.
    let mut frontier: Vec<usize> = view
        .transmissions
        .keys()
        .copied()
        .filter(|&s| count[s] == 1 && !view.erased.contains(&s))
        .collect();

    let mut decoded: BTreeSet<NodeId> = BTreeSet::new();
    let mut iterations = 0u32;

    while !frontier.is_empty() {
        let mut processed_any = false;
        let mut next = Vec::new();
        for slot in frontier.drain(..) {
            // The occupant may have been decoded from a sibling slot within
            // this same pass, emptying this one.
            if count[slot] != 1 || dead[slot] {
                continue;
            }
            processed_any = true;
            if singleton_error_prob > 0.0 && rng.gen::<f64>() < singleton_error_prob {
                dead[slot] = true;
                continue;
            }
            let node = acc[slot];
            if decoded.contains(&node) {
                continue;
            }
            decoded.insert(node);
            // Cancel all replicas via the header pointers.
            let h = &headers[header_index[&node]];
            for &s in &h.replica_slots {
                debug_assert!(count[s] > 0, "cancelling in an empty slot");
                count[s] -= 1;
                acc[s] ^= node;
                if count[s] == 1 && !view.erased.contains(&s) && !dead[s] {
                    next.push(s);
                }
            }
        }
        // A pass only counts if it actually worked a singleton; queued slots
        // can all turn out stale when sibling cancellations emptied them.
        if processed_any {
            iterations += 1;
        }
        frontier = next;
    }

    let residual_slots: BTreeSet<usize> = (0..view.n_slots)
        .filter(|&s| count[s] >= 2 && !view.erased.contains(&s))
        .collect();

    Ok(DecodeResult { decoded, iterations, residual_slots })
}

/// Checks header/schedule consistency for a view and returns a node -> header
/// index map. The view may exclude the receiver's own packets, so the
/// receiver's header is exempt from occupancy checks.
fn validate_frame(
    view: &FrameView,
    headers: &[PacketHeader],
) -> Result<BTreeMap<NodeId, usize>> {
    let mut index = BTreeMap::new();
    let mut expected_entries = 0usize;
    for (i, h) in headers.iter().enumerate() {
        if index.insert(h.node_id, i).is_some() {
            return Err(Error::InconsistentFrame(format!(
                "duplicate header for node {}",
                h.node_id
            )));
        }
        if h.replica_slots.is_empty() {
            return Err(Error::InconsistentFrame(format!(
                "node {} has an empty replica set",
                h.node_id
            )));
        }
        for w in h.replica_slots.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InconsistentFrame(format!(
                    "node {} replica slots must be sorted and distinct",
                    h.node_id
                )));
            }
        }
        if view.receiver == Some(h.node_id) {
            continue; // own packets are cancelled out of the view
        }
        expected_entries += h.replica_slots.len();
        for &s in &h.replica_slots {
            if s >= view.n_slots {
                return Err(Error::InconsistentFrame(format!(
                    "node {} lists slot {s} outside a {}-slot frame",
                    h.node_id, view.n_slots
                )));
            }
            let present = view
                .transmissions
                .get(&s)
                .is_some_and(|nodes| nodes.contains(&h.node_id));
            if !present {
                return Err(Error::InconsistentFrame(format!(
                    "header of node {} lists slot {s} but the schedule disagrees",
                    h.node_id
                )));
            }
        }
    }
    let actual_entries: usize = view.transmissions.values().map(Vec::len).sum();
    if actual_entries != expected_entries {
        return Err(Error::InconsistentFrame(format!(
            "schedule holds {actual_entries} replicas but headers account for {expected_entries}"
        )));
    }
    Ok(index)
}

/// Rng stand-in for the error-free path; never actually sampled.
struct NoRng;
impl rand::RngCore for NoRng {
    fn next_u32(&mut self) -> u32 {
        unreachable!("error-free decode must not draw randomness")
    }
    fn next_u64(&mut self) -> u64 {
        unreachable!("error-free decode must not draw randomness")
    }
    fn fill_bytes(&mut self, _dest: &mut [u8]) {
        unreachable!("error-free decode must not draw randomness")
    }
    fn try_fill_bytes(&mut self, _dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        unreachable!("error-free decode must not draw randomness")
    }
}

// ===== Monte Carlo PLR =====

/// Whose decoded set defines a packet loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perspective {
    /// A silent observer that hears every slot: one decode per frame, losses
    /// counted per transmitted packet.
    ExternalObserver,
    /// Every node decodes every other node's packet: losses counted per
    /// (receiver, sender) pair, with half-duplex erasures if enabled.
    Participants,
}

/// A packet-loss-rate estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlrEstimate {
    pub plr: f64,
    pub stderr: f64,
    pub trials: u64,
    pub losses: u64,
    /// Mean cancellation passes per decode call.
    pub mean_iterations: f64,
}

/// Estimates per-user packet loss rate over `n_frames` independent frames of
/// `n_users` transmitters each.
///
/// One user-frame trial is one packet that should have been received; the
/// estimate is `losses / trials` with `trials = n_frames * n_users` for the
/// external observer and `n_frames * n_users * (n_users - 1)` for the
/// participant perspective.
pub fn plr_monte_carlo<R: Rng + ?Sized>(
    n_users: usize,
    dist: &DegreeDistribution,
    n_slots: usize,
    n_frames: u64,
    half_duplex: bool,
    perspective: Perspective,
    rng: &mut R,
) -> Result<PlrEstimate> {
    if n_users == 0 || n_frames == 0 {
        return Err(Error::InvalidConfig(
            "plr_monte_carlo needs at least one user and one frame".into(),
        ));
    }
    let node_ids: Vec<NodeId> = (0..n_users as NodeId).collect();
    let mut losses = 0u64;
    let mut trials = 0u64;
    let mut iteration_sum = 0u64;
    let mut decode_calls = 0u64;

    for _ in 0..n_frames {
        let (schedule, headers) = build_frame(&node_ids, dist, n_slots, rng)?;
        match perspective {
            Perspective::ExternalObserver => {
                let view = receiver_view(&schedule, None, false);
                let result = sic_decode(&view, &headers)?;
                trials += n_users as u64;
                losses += (n_users - result.decoded.len()) as u64;
                iteration_sum += u64::from(result.iterations);
                decode_calls += 1;
            }
            Perspective::Participants => {
                for &receiver in &node_ids {
                    let view = receiver_view(&schedule, Some(receiver), half_duplex);
                    let result = sic_decode(&view, &headers)?;
                    let targets = n_users as u64 - 1;
                    trials += targets;
                    losses += targets - result.decoded.len() as u64;
                    iteration_sum += u64::from(result.iterations);
                    decode_calls += 1;
                }
            }
        }
    }

    let plr = if trials == 0 { 0.0 } else { losses as f64 / trials as f64 };
    let stderr = if trials == 0 {
        0.0
    } else {
        (plr * (1.0 - plr) / trials as f64).sqrt()
    };
    Ok(PlrEstimate {
        plr,
        stderr,
        trials,
        losses,
        mean_iterations: if decode_calls == 0 {
            0.0
        } else {
            iteration_sum as f64 / decode_calls as f64
        },
    })
}
