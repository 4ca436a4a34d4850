//! Back-off timing, preamble pool partitioning and the dynamic
//! reserved-preamble controller.

use std::collections::VecDeque;

use rand::Rng;

use crate::device::{Device, DeviceClass};
use crate::rng::StreamRng;
use crate::scenario::{ReservedPreambles, Scenario};
use crate::time::{Numerology, Ticks, TimingParams};

/// Back-off indicator for failed non-uRLLC devices under enhanced back-off,
/// at LTE numerology.
pub const EBF_BI_NON_URLLC: Ticks = Ticks::from_whole_ms(10);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BackoffPolicy {
    pub rar_window: Ticks,
    pub bi_urllc_max: Ticks,
    pub bi_non_urllc_max: Ticks,
    pub bi_default_max: Ticks,
}

impl BackoffPolicy {
    /// `timing` is already scaled; the enhanced-back-off constants are
    /// scaled here with the same numerology.
    pub fn new(ebf: bool, timing: &TimingParams, numerology: Numerology) -> Self {
        if ebf {
            BackoffPolicy {
                rar_window: Ticks::ZERO,
                bi_urllc_max: Ticks::ZERO,
                bi_non_urllc_max: numerology.scale(EBF_BI_NON_URLLC),
                bi_default_max: timing.bi_max,
            }
        } else {
            BackoffPolicy {
                rar_window: timing.rar_window,
                bi_urllc_max: timing.bi_max,
                bi_non_urllc_max: timing.bi_max,
                bi_default_max: timing.bi_max,
            }
        }
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        BackoffPolicy::new(s.enhancements.ebf, &s.timing(), s.numerology)
    }

    pub fn bi_max(&self, class: DeviceClass) -> Ticks {
        match class {
            DeviceClass::Urllc => self.bi_urllc_max,
            DeviceClass::NonUrllc => self.bi_non_urllc_max,
        }
    }
}

/// Earliest time a failed device may transmit again:
/// `failed_at + t_msg2 + rar_window + U(0, BI)`, BI uniform over whole ticks.
pub fn schedule_backoff(failed_at: Ticks, class: DeviceClass, policy: &BackoffPolicy, t_msg2: Ticks, rng: &mut StreamRng) -> Ticks {
    let bi = policy.bi_max(class);
    let draw = if bi > Ticks::ZERO { Ticks(rng.random_range(0..=bi.0)) } else { Ticks::ZERO };
    failed_at + t_msg2 + policy.rar_window + draw
}

/// How the preamble space is split between priority and ordinary devices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReservationMode {
    /// All devices share every preamble.
    Shared,
    /// uRLLC devices use `[0, r)`, the rest `[r, N)`.
    Fixed,
    /// uRLLC and previously failed devices use `[0, r)`; `r` tracks demand.
    Dynamic,
}

impl ReservationMode {
    pub fn from_scenario(s: &Scenario) -> Self {
        if s.enhancements.drp {
            ReservationMode::Dynamic
        } else if s.enhancements.rp {
            ReservationMode::Fixed
        } else {
            ReservationMode::Shared
        }
    }

    pub fn is_priority(self, device: &Device) -> bool {
        match self {
            ReservationMode::Shared => false,
            ReservationMode::Fixed => device.class == DeviceClass::Urllc,
            ReservationMode::Dynamic => device.class == DeviceClass::Urllc || device.failed_before,
        }
    }
}

/// Preamble index ranges `[0, reserved)` and `[reserved, n_preambles)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolPartition {
    pub n_preambles: u32,
    pub reserved: u32,
}

impl PoolPartition {
    pub fn shared(n_preambles: u32) -> Self {
        PoolPartition { n_preambles, reserved: 0 }
    }

    pub fn is_reserved(&self, preamble: u32) -> bool {
        preamble < self.reserved
    }

    /// Range a device draws from. With no reservation everyone uses the
    /// full range.
    pub fn range_for(&self, priority: bool) -> std::ops::Range<u32> {
        if self.reserved == 0 {
            0..self.n_preambles
        } else if priority {
            0..self.reserved
        } else {
            self.reserved..self.n_preambles
        }
    }

    /// Size of the pool a class draws from when it has no failure history.
    pub fn class_pool_size(&self, class: DeviceClass, mode: ReservationMode) -> u32 {
        let priority = match mode {
            ReservationMode::Shared => false,
            ReservationMode::Fixed | ReservationMode::Dynamic => class == DeviceClass::Urllc,
        };
        let r = self.range_for(priority);
        r.end - r.start
    }
}

/// Uniform draw from the device's pool; `None` if the pool is empty (the
/// device then waits for the next RA subframe).
pub fn select_preamble(device: &Device, mode: ReservationMode, partition: PoolPartition, rng: &mut StreamRng) -> Option<u32> {
    let range = partition.range_for(mode.is_priority(device));
    if range.is_empty() {
        None
    } else {
        Some(rng.random_range(range))
    }
}

/// Reserved-preamble count broadcast by one gNB.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservedPoolState {
    pub r: u32,
    dynamic: bool,
    max_r: u32,
    window: Ticks,
    /// `(RA subframe time, priority-device count)`, oldest first.
    samples: VecDeque<(Ticks, u32)>,
}

impl ReservedPoolState {
    pub fn fixed(r: u32) -> Self {
        ReservedPoolState { r, dynamic: false, max_r: r, window: Ticks::ZERO, samples: VecDeque::new() }
    }

    /// Starts empty (`r = 0`) and follows the moving average of priority
    /// demand over `sib2_period`.
    pub fn dynamic(n_preambles: u32, sib2_period: Ticks) -> Self {
        ReservedPoolState { r: 0, dynamic: true, max_r: n_preambles.saturating_sub(1), window: sib2_period, samples: VecDeque::new() }
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        match (ReservationMode::from_scenario(s), s.reserved_r) {
            (ReservationMode::Dynamic, _) => ReservedPoolState::dynamic(s.n_preambles, s.timing().sib2_period),
            (ReservationMode::Fixed, ReservedPreambles::Fixed(r)) => ReservedPoolState::fixed(r),
            _ => ReservedPoolState::fixed(0),
        }
    }

    pub fn is_dynamic(&self) -> bool {
        self.dynamic
    }

    pub fn samples(&self) -> impl Iterator<Item = &(Ticks, u32)> {
        self.samples.iter()
    }
}

/// Records the priority-list size seen at the RA subframe `now` and
/// recomputes `r` for the following subframes: the half-up rounded mean of
/// the samples taken within the last `sib2_period`, clamped to
/// `[0, n_preambles - 1]`. Fixed pools are left untouched.
pub fn update_reserved_pool(state: &mut ReservedPoolState, now: Ticks, priority_count: u32) -> u32 {
    if !state.dynamic {
        return state.r;
    }
    state.samples.push_back((now, priority_count));
    while let Some(&(t, _)) = state.samples.front() {
        if t.0 > now.0 - state.window.0 {
            break;
        }
        state.samples.pop_front();
    }
    let n = state.samples.len() as u64;
    let sum: u64 = state.samples.iter().map(|&(_, k)| k as u64).sum();
    let mean = (2 * sum + n) / (2 * n);
    state.r = mean.min(state.max_r as u64) as u32;
    state.r
}
