use std::fmt;

use crate::time::Ticks;
use crate::topology::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DeviceClass {
    Urllc,
    NonUrllc,
}

impl DeviceClass {
    pub fn as_str(self) -> &'static str {
        match self {
            DeviceClass::Urllc => "urllc",
            DeviceClass::NonUrllc => "non_urllc",
        }
    }
}

impl fmt::Display for DeviceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviceState {
    Idle,
    AwaitingOpportunity,
    Msg1Sent,
    AwaitingRar,
    Msg3Harq,
    Msg4Harq,
    Connected,
    Failed,
}

impl DeviceState {
    pub fn is_terminal(self) -> bool {
        matches!(self, DeviceState::Connected | DeviceState::Failed)
    }
}

/// A machine-type device and its random-access progress.
#[derive(Debug, Clone, PartialEq)]
pub struct Device {
    pub id: usize,
    /// Keys the device's private random streams. Defaults to the id but
    /// travels with the device if ids are relabelled.
    pub draw_key: u64,
    pub class: DeviceClass,
    pub position: Point,
    pub serving_cell: usize,
    pub femto_cell: Option<usize>,
    pub arrival_time: Ticks,
    /// Msg-1 attempts made so far (`C` in the ramping rule).
    pub attempt_count: u32,
    pub backoff_until: Ticks,
    pub state: DeviceState,
    /// Set when the device has had a Msg-1 attempt fail; used by the
    /// dynamic reserved-preamble priority list.
    pub failed_before: bool,
    pub first_attempt_time: Option<Ticks>,
    pub success_time: Option<Ticks>,
}

impl Device {
    pub fn new(id: usize, class: DeviceClass, position: Point, serving_cell: usize, femto_cell: Option<usize>, arrival_time: Ticks) -> Self {
        Device {
            id,
            draw_key: id as u64,
            class,
            position,
            serving_cell,
            femto_cell,
            arrival_time,
            attempt_count: 0,
            backoff_until: arrival_time,
            state: DeviceState::Idle,
            failed_before: false,
            first_attempt_time: None,
            success_time: None,
        }
    }
}
