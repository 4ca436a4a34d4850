//! Run outputs: the per-opportunity contention log used by the KPIs and
//! the optional per-event trace.

use std::fmt;

use crate::device::DeviceClass;
use crate::time::Ticks;

use super::policy::{PoolPartition, ReservationMode};

/// Occupancy of one preamble in one opportunity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellUse {
    pub preamble: u32,
    pub urllc: u32,
    pub non_urllc: u32,
}

impl CellUse {
    pub fn total(&self) -> u32 {
        self.urllc + self.non_urllc
    }

    pub fn count(&self, class: DeviceClass) -> u32 {
        match class {
            DeviceClass::Urllc => self.urllc,
            DeviceClass::NonUrllc => self.non_urllc,
        }
    }
}

/// One `(RA subframe, gNB)` pair. Unused preambles are not listed.
#[derive(Debug, Clone, PartialEq)]
pub struct OpportunityRecord {
    pub time: Ticks,
    pub gnb: usize,
    pub partition: PoolPartition,
    pub cells: Vec<CellUse>,
}

/// Every RA opportunity of the observation period: each RA subframe from
/// the one at or before the first arrival up to the last resolution, at
/// every gNB that accepts preambles.
#[derive(Debug, Clone, PartialEq)]
pub struct OpportunityLog {
    pub n_preambles: u32,
    pub mode: ReservationMode,
    pub n_gnbs: usize,
    pub n_subframes: usize,
    pub records: Vec<OpportunityRecord>,
}

impl OpportunityLog {
    pub fn empty(n_preambles: u32, mode: ReservationMode, n_gnbs: usize) -> Self {
        OpportunityLog { n_preambles, mode, n_gnbs, n_subframes: 0, records: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Arrival,
    /// Msg 1 sent; carries preamble and gNB.
    Msg1,
    /// Pool empty at this subframe; retried at the next one.
    Defer,
    Collided,
    Undetected,
    /// Detected but no RAR slot left in the window.
    RarOverflow,
    Rar,
    Msg3Fail,
    Msg4Fail,
    ContentionTimeout,
    Backoff,
    Connected,
    Failed,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Arrival => "arrival",
            EventKind::Msg1 => "msg1",
            EventKind::Defer => "defer",
            EventKind::Collided => "collided",
            EventKind::Undetected => "undetected",
            EventKind::RarOverflow => "rar_overflow",
            EventKind::Rar => "rar",
            EventKind::Msg3Fail => "msg3_fail",
            EventKind::Msg4Fail => "msg4_fail",
            EventKind::ContentionTimeout => "contention_timeout",
            EventKind::Backoff => "backoff",
            EventKind::Connected => "connected",
            EventKind::Failed => "failed",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub time: Ticks,
    pub device: usize,
    pub kind: EventKind,
    pub preamble: Option<u32>,
    pub gnb: Option<usize>,
    pub attempt: u32,
    /// Uplink SINR at the serving macro gNB, for Msg-1 events.
    pub sinr_db: Option<f64>,
}
