//! Msg-1 contention at one gNB and Msg-2 (RAR) capacity.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;

use crate::rng::StreamRng;
use crate::time::Ticks;

use super::policy::PoolPartition;

/// Transmissions received by one gNB in one RA subframe.
#[derive(Debug, Clone, PartialEq)]
pub struct RaOpportunity {
    pub time: Ticks,
    pub gnb: usize,
    pub partition: PoolPartition,
    /// Preamble index to transmitting devices, in insertion order.
    pub transmissions: BTreeMap<u32, Vec<usize>>,
}

impl RaOpportunity {
    pub fn new(time: Ticks, gnb: usize, partition: PoolPartition) -> Self {
        RaOpportunity { time, gnb, partition, transmissions: BTreeMap::new() }
    }

    pub fn add(&mut self, preamble: u32, device: usize) {
        debug_assert!(preamble < self.partition.n_preambles);
        self.transmissions.entry(preamble).or_default().push(device);
    }

    pub fn n_transmitters(&self) -> usize {
        self.transmissions.values().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Msg1Outcome {
    /// Shared its preamble with another device; nothing is decoded.
    Collided,
    /// Sole user of its preamble but missed by the detector.
    Undetected,
    Detected,
}

/// Probability that a sole preamble is detected on the device's `i`-th
/// transmission: `1 - e^(-i)`.
pub fn detection_probability(transmission: u32) -> f64 {
    1.0 - (-(transmission as f64)).exp()
}

pub fn draw_detection(transmission: u32, rng: &mut StreamRng) -> bool {
    rng.random::<f64>() < detection_probability(transmission)
}

/// Preambles with two or more transmitters collide; each sole transmitter
/// is passed to `detect`, which decides whether the gNB decodes it.
/// Results are in preamble order, then insertion order.
pub fn resolve_opportunity(opp: &RaOpportunity, mut detect: impl FnMut(usize) -> bool) -> Vec<(usize, Msg1Outcome)> {
    let mut out = Vec::with_capacity(opp.n_transmitters());
    for devices in opp.transmissions.values() {
        if devices.len() >= 2 {
            out.extend(devices.iter().map(|&d| (d, Msg1Outcome::Collided)));
        } else {
            let d = devices[0];
            out.push((d, if detect(d) { Msg1Outcome::Detected } else { Msg1Outcome::Undetected }));
        }
    }
    out
}

/// Per-subframe RAR slots shared by every opportunity of a gNB.
#[derive(Debug, Clone, Default)]
pub struct RarScheduler {
    capacity: u32,
    subframe: Ticks,
    used: HashMap<(usize, i64), u32>,
}

impl RarScheduler {
    /// `capacity` grants fit in each downlink subframe of length `subframe`.
    pub fn new(capacity: u32, subframe: Ticks) -> Self {
        RarScheduler { capacity, subframe, used: HashMap::new() }
    }

    /// Books the earliest subframe with a free grant among the
    /// `window_subframes` starting at `first_response`. Returns the
    /// delivery time, or `None` when the whole window is full.
    pub fn grant(&mut self, gnb: usize, first_response: Ticks, window_subframes: u32) -> Option<Ticks> {
        (0..window_subframes.max(1)).find_map(|j| {
            let at = first_response + self.subframe * j as i64;
            let slot = self.used.entry((gnb, at.0.div_euclid(self.subframe.0))).or_insert(0);
            (*slot < self.capacity).then(|| {
                *slot += 1;
                at
            })
        })
    }

    /// Drops bookings for subframes before `before`.
    pub fn forget_before(&mut self, before: Ticks) {
        let idx = before.0.div_euclid(self.subframe.0);
        self.used.retain(|&(_, s), _| s >= idx);
    }
}

/// Number of response subframes in a RAR window; a zero window still
/// leaves the single earliest subframe.
pub fn window_subframes(rar_window: Ticks, subframe: Ticks) -> u32 {
    (rar_window.0 / subframe.0).max(1) as u32
}

/// Assigns `n_detected` devices, in order, to response subframes of a fresh
/// window: `Some(j)` is the subframe offset, `None` an unserved device.
pub fn grant_rar(n_detected: usize, capacity: u32, window_subframes: u32) -> Vec<Option<u32>> {
    let mut sched = RarScheduler::new(capacity, Ticks(1));
    (0..n_detected).map(|_| sched.grant(0, Ticks::ZERO, window_subframes).map(|t| t.0 as u32)).collect()
}
