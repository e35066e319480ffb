//! Comparison MACs: classical slotted ALOHA and a minimal self-organizing
//! reservation TDMA.
//!
//! Slotted ALOHA is the degree-1 special case of the coded-ALOHA module —
//! one transmission per user per frame, a packet lost whenever any other
//! user picked the same slot — and is evaluated through the very same code
//! path so comparisons are apples to apples.
//!
//! The reservation TDMA captures the defining behavior of self-organized
//! TDMA schemes: nodes contend for free slots, a successful (collision-free)
//! contention acquires a persistent reservation, and once membership is
//! stable and every node holds a slot, the frame is collision-free forever.
//! Slot-reuse distances and candidate-set timers of full STDMA are
//! deliberately out of scope.

use crate::csa_mac::{plr_monte_carlo, DegreeDistribution, NodeId, Perspective, PlrEstimate};
use crate::{Error, Result};
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};

// ===== Reservation TDMA =====

/// Slot-ownership state carried between frames.
///
/// `owner_of_slot` and `node_slot` are mutually consistent: slot `s` is owned
/// by node `n` exactly when `node_slot[n] == s`, and each node owns at most
/// one slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReservationState {
    owner_of_slot: Vec<Option<NodeId>>,
    node_slot: BTreeMap<NodeId, usize>,
}

impl ReservationState {
    pub fn new(n_slots: usize) -> Result<Self> {
        if n_slots == 0 {
            return Err(Error::InvalidConfig("reservation TDMA needs at least one slot".into()));
        }
        Ok(ReservationState {
            owner_of_slot: vec![None; n_slots],
            node_slot: BTreeMap::new(),
        })
    }

    #[must_use]
    pub fn n_slots(&self) -> usize {
        self.owner_of_slot.len()
    }

    #[must_use]
    pub fn slot_of(&self, node: NodeId) -> Option<usize> {
        self.node_slot.get(&node).copied()
    }

    #[must_use]
    pub fn owner_of(&self, slot: usize) -> Option<NodeId> {
        self.owner_of_slot.get(slot).copied().flatten()
    }

    /// True when every active node holds a reservation.
    #[must_use]
    pub fn fully_reserved(&self, active_nodes: &BTreeSet<NodeId>) -> bool {
        active_nodes.iter().all(|n| self.node_slot.contains_key(n))
    }

    /// Checks the ownership bijection; used by tests and debug assertions.
    #[must_use]
    pub fn invariant_holds(&self) -> bool {
        let forward_consistent = self
            .node_slot
            .iter()
            .all(|(&n, &s)| self.owner_of_slot.get(s).copied().flatten() == Some(n));
        let backward_consistent = self.owner_of_slot.iter().enumerate().all(|(s, owner)| {
            owner.map_or(true, |n| self.node_slot.get(&n) == Some(&s))
        });
        forward_consistent && backward_consistent
    }

    fn release(&mut self, node: NodeId) {
        if let Some(slot) = self.node_slot.remove(&node) {
            self.owner_of_slot[slot] = None;
        }
    }
}

/// What happened to one node's transmission in one TDMA frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TdmaOutcome {
    /// Transmitted alone in the node's reserved slot.
    ReservedTransmit { slot: usize },
    /// Contended for a free slot, was alone, and now owns it.
    Acquired { slot: usize },
    /// Contended for a free slot together with someone else; packet lost,
    /// no reservation gained.
    ContentionCollision { slot: usize },
    /// No free slot was observable; the node stayed silent, packet lost.
    NoFreeSlot,
}

impl TdmaOutcome {
    /// True when the packet went out collision-free.
    #[must_use]
    pub fn delivered(self) -> bool {
        matches!(self, TdmaOutcome::ReservedTransmit { .. } | TdmaOutcome::Acquired { .. })
    }
}

/// Advances the reservation protocol by one frame.
///
/// Departed nodes release their slots first. Reservation holders transmit in
/// their own slots — the bijection guarantees those never collide.
/// Unreserved nodes each pick one uniformly random slot among the currently
/// free ones and acquire it if they were alone; a contention collision loses
/// the packet and the slot stays free.
pub fn reservation_tdma_step<R: Rng + ?Sized>(
    state: &mut ReservationState,
    active_nodes: &BTreeSet<NodeId>,
    rng: &mut R,
) -> BTreeMap<NodeId, TdmaOutcome> {
    let departed: Vec<NodeId> = state
        .node_slot
        .keys()
        .copied()
        .filter(|n| !active_nodes.contains(n))
        .collect();
    for n in departed {
        state.release(n);
    }

    let free_slots: Vec<usize> = (0..state.n_slots())
        .filter(|&s| state.owner_of_slot[s].is_none())
        .collect();

    let mut outcomes = BTreeMap::new();
    let mut contention: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
    for &node in active_nodes {
        match state.slot_of(node) {
            Some(slot) => {
                outcomes.insert(node, TdmaOutcome::ReservedTransmit { slot });
            }
            None if free_slots.is_empty() => {
                outcomes.insert(node, TdmaOutcome::NoFreeSlot);
            }
            None => {
                let slot = free_slots[rng.gen_range(0..free_slots.len())];
                contention.entry(slot).or_default().push(node);
            }
        }
    }

    for (slot, contenders) in contention {
        if let [lone] = contenders[..] {
            state.owner_of_slot[slot] = Some(lone);
            state.node_slot.insert(lone, slot);
            outcomes.insert(lone, TdmaOutcome::Acquired { slot });
        } else {
            for node in contenders {
                outcomes.insert(node, TdmaOutcome::ContentionCollision { slot });
            }
        }
    }

    debug_assert!(state.invariant_holds());
    outcomes
}

// ===== Slotted ALOHA =====

/// Per-user packet loss rate of classical slotted ALOHA: `n_users`
/// transmitters, one packet each per frame in a uniformly random slot,
/// external-observer reception. Shares the coded-ALOHA code path with a
/// degree-1 point mass, so no separate collision logic can drift.
///
/// Closed form for sanity: PLR = 1 − (1 − 1/n_slots)^(n_users − 1).
pub fn slotted_aloha<R: Rng + ?Sized>(
    n_users: usize,
    n_slots: usize,
    n_frames: u64,
    rng: &mut R,
) -> Result<PlrEstimate> {
    plr_monte_carlo(
        n_users,
        &DegreeDistribution::degree_one(),
        n_slots,
        n_frames,
        false,
        Perspective::ExternalObserver,
        rng,
    )
}
