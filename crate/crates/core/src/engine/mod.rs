//! Discrete-event MAC simulation of the random-access procedure.
//!
//! Devices only act at RA subframes, so the engine steps from one RA
//! subframe to the next. At each subframe it collects every device whose
//! back-off has expired, lets each pick a preamble (at its serving macro
//! gNB, and at its femto gNB too with parallel preambles), resolves
//! collisions and detection per gNB, books RAR slots, and then plays out the
//! rest of the attempt: EDT completion, the Msg-3/Msg-4 exchange, or a
//! back-off until a later subframe. All randomness after population comes
//! from per-device streams, so outcomes do not depend on device ids.

pub mod contention;
pub mod handshake;
pub mod log;
pub mod policy;

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;

use crate::device::{Device, DeviceClass, DeviceState};
use crate::error::Result;
use crate::rng::{RandomSource, Stream, StreamRng};
use crate::scenario::Scenario;
use crate::time::Ticks;
use crate::topology::{self, build_layout, place_devices, CellLayout, Transmitter};
use crate::traffic::generate_arrivals;

use contention::{detection_probability, resolve_opportunity, window_subframes, Msg1Outcome, RaOpportunity, RarScheduler};
use handshake::{apply_edt, msg34_exchange, DelayBreakdown, Msg34Failure, Msg34Outcome};
use log::{CellUse, EventKind, OpportunityLog, OpportunityRecord, TraceEvent};
use policy::{schedule_backoff, select_preamble, update_reserved_pool, BackoffPolicy, PoolPartition, ReservationMode, ReservedPoolState};

/// Outcome of one device's access.
#[derive(Debug, Clone, PartialEq)]
pub struct AccessRecord {
    pub device: usize,
    pub class: DeviceClass,
    pub success: bool,
    pub msg1_count: u32,
    /// Arrival to connection (or to giving up, for failures).
    pub t_total: Ticks,
    pub arrival: Ticks,
    pub first_attempt: Option<Ticks>,
    pub resolved_at: Ticks,
    /// Present for successful devices; sums exactly to `t_total`.
    pub breakdown: Option<DelayBreakdown>,
    pub via_edt: bool,
    pub msg3_tx: u32,
    pub msg4_tx: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// One record per device, ordered by device id.
    pub records: Vec<AccessRecord>,
    pub log: OpportunityLog,
    /// Empty unless tracing was requested; ordered by time, then device.
    pub trace: Vec<TraceEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionModel {
    /// Sole preambles are detected with probability `1 - e^(-i)`.
    Exponential,
    /// Every sole preamble is detected.
    Always,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub trace: bool,
    pub detection: DetectionModel,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { trace: false, detection: DetectionModel::Exponential }
    }
}

/// Builds the layout and the device population (positions, classes,
/// arrival times) for a scenario.
pub fn populate(scenario: &Scenario) -> Result<(CellLayout, Vec<Device>)> {
    scenario.validate()?;
    let src = RandomSource::new(scenario.seed);
    let layout = build_layout(&scenario.topology, &mut src.stream(Stream::Layout));
    let n = scenario.total_devices();
    let mut placement_rng = src.stream(Stream::Placement);
    let placements = place_devices(n, &layout, &mut placement_rng);
    let mut classes = vec![DeviceClass::NonUrllc; n];
    for i in rand::seq::index::sample(&mut placement_rng, n, scenario.n_urllc().min(n)) {
        classes[i] = DeviceClass::Urllc;
    }
    let arrivals = generate_arrivals(&classes, &scenario.traffic, &mut src.stream(Stream::Arrivals))?;
    let devices = placements
        .iter()
        .zip(classes)
        .zip(arrivals)
        .enumerate()
        .map(|(id, ((p, class), arrival))| Device::new(id, class, p.position, p.serving_cell, p.femto_cell, arrival))
        .collect();
    Ok((layout, devices))
}

/// Populates and simulates a scenario.
pub fn run(scenario: &Scenario) -> Result<RunOutput> {
    run_with(scenario, RunOptions::default())
}

pub fn run_with(scenario: &Scenario, opts: RunOptions) -> Result<RunOutput> {
    let (layout, devices) = populate(scenario)?;
    simulate(scenario, &layout, devices, opts)
}

struct DeviceRngs {
    preamble: StreamRng,
    detection: StreamRng,
    harq: StreamRng,
    backoff: StreamRng,
}

/// What one device sent in the current subframe.
struct Attempt {
    device: usize,
    targets: Vec<(usize, u32)>,
    /// Per target: detection uniform and RAR ordering key. Drawn for every
    /// transmission, so a device's streams advance with its attempt count
    /// alone.
    draws: Vec<(f64, u64)>,
    rar: Option<(Ticks, usize)>,
}

impl Attempt {
    fn draw_at(&self, gnb: usize) -> (f64, u64) {
        let k = self.targets.iter().position(|&(g, _)| g == gnb).expect("device sent to this gNB");
        self.draws[k]
    }
}

/// Gives the device the earliest RAR; on a tie the lower gNB index (the
/// macro gNB) wins.
pub fn first_rar(current: Option<(Ticks, usize)>, offer: (Ticks, usize)) -> Option<(Ticks, usize)> {
    match current {
        Some(best) if best <= offer => Some(best),
        _ => Some(offer),
    }
}

/// gNBs a device sends Msg 1 to: its serving macro gNB, plus its femto gNB
/// when parallel preambles are on and it has femto coverage.
pub fn parallel_targets(device: &Device, layout: &CellLayout, pp: bool) -> Vec<usize> {
    let mut g = vec![device.serving_cell];
    if pp {
        if let Some(f) = device.femto_cell {
            g.push(layout.femto_gnb(f));
        }
    }
    g
}

/// Runs the random-access procedure for a fixed population until every
/// device is connected or has failed.
pub fn simulate(scenario: &Scenario, layout: &CellLayout, mut devices: Vec<Device>, opts: RunOptions) -> Result<RunOutput> {
    scenario.validate()?;
    let timing = scenario.timing();
    let policy = BackoffPolicy::from_scenario(scenario);
    let mode = ReservationMode::from_scenario(scenario);
    let pp = scenario.enhancements.pp;
    let edt = scenario.enhancements.edt;
    let n_macro = layout.n_macro();
    let n_gnbs = if pp { layout.n_gnbs() } else { n_macro };
    let period = timing.ra_period;
    let subframe = timing.t_msg1;
    let window = window_subframes(policy.rar_window, subframe);
    let n_pre = scenario.n_preambles;
    let need_sinr = opts.trace || scenario.topology.sinr_threshold_db.is_some();

    let mut log = OpportunityLog::empty(n_pre, mode, n_gnbs);
    let mut trace = Vec::new();
    let mut records: Vec<Option<AccessRecord>> = vec![None; devices.len()];
    if devices.is_empty() {
        return Ok(RunOutput { records: Vec::new(), log, trace });
    }

    let src = RandomSource::new(scenario.seed);
    let mut rngs: Vec<DeviceRngs> = devices
        .iter()
        .map(|d| DeviceRngs {
            preamble: src.device_stream(Stream::PreambleChoice, d.draw_key),
            detection: src.device_stream(Stream::Detection, d.draw_key),
            harq: src.device_stream(Stream::Harq, d.draw_key),
            backoff: src.device_stream(Stream::Backoff, d.draw_key),
        })
        .collect();
    let path_loss: Vec<f64> = devices
        .iter()
        .map(|d| topology::path_loss_db(d.position.distance(&layout.macro_centers[d.serving_cell]).max(1e-9), &scenario.topology))
        .collect::<Result<_>>()?;

    let mut pools: Vec<ReservedPoolState> = (0..n_macro).map(|_| ReservedPoolState::from_scenario(scenario)).collect();
    let mut rar = RarScheduler::new(scenario.rar_capacity_per_subframe(), subframe);
    let mut pending: BinaryHeap<Reverse<(Ticks, u64, usize)>> = BinaryHeap::new();
    for (i, d) in devices.iter_mut().enumerate() {
        d.state = DeviceState::AwaitingOpportunity;
        d.backoff_until = d.arrival_time;
        pending.push(Reverse((d.arrival_time, d.draw_key, i)));
        if opts.trace {
            trace.push(TraceEvent { time: d.arrival_time, device: d.id, kind: EventKind::Arrival, preamble: None, gnb: None, attempt: 0, sinr_db: None });
        }
    }
    let first_arrival = devices.iter().map(|d| d.arrival_time).min().expect("non-empty");
    let mut now = first_arrival.floor_to(period);
    let mut last_resolution = first_arrival;

    let ev = |trace: &mut Vec<TraceEvent>, time: Ticks, d: &Device, kind: EventKind, preamble: Option<u32>, gnb: Option<usize>, sinr_db: Option<f64>| {
        if opts.trace {
            trace.push(TraceEvent { time, device: d.id, kind, preamble, gnb, attempt: d.attempt_count, sinr_db });
        }
    };

    while !pending.is_empty() || now <= last_resolution {
        let mut due = Vec::new();
        while let Some(&Reverse((eligible, _, i))) = pending.peek() {
            if eligible > now {
                break;
            }
            pending.pop();
            due.push(i);
        }
        due.sort_by_key(|&i| devices[i].draw_key);

        let partitions: Vec<PoolPartition> = (0..n_gnbs)
            .map(|g| if g < n_macro { PoolPartition { n_preambles: n_pre, reserved: pools[g].r } } else { PoolPartition::shared(n_pre) })
            .collect();
        let mut opps: Vec<RaOpportunity> = (0..n_gnbs).map(|g| RaOpportunity::new(now, g, partitions[g])).collect();
        let mut priority = vec![0u32; n_macro];
        let mut attempts: Vec<Attempt> = Vec::with_capacity(due.len());
        let mut attempt_of = std::collections::HashMap::with_capacity(due.len());

        for i in due {
            let d = &mut devices[i];
            if mode.is_priority(d) {
                priority[d.serving_cell] += 1;
            }
            let Some(preamble) = select_preamble(d, mode, partitions[d.serving_cell], &mut rngs[i].preamble) else {
                ev(&mut trace, now, d, EventKind::Defer, None, Some(d.serving_cell), None);
                pending.push(Reverse((now + period, d.draw_key, i)));
                continue;
            };
            d.first_attempt_time.get_or_insert(now);
            d.attempt_count += 1;
            d.state = DeviceState::Msg1Sent;
            let mut targets = vec![(d.serving_cell, preamble)];
            for g in parallel_targets(d, layout, pp).into_iter().skip(1) {
                targets.push((g, rngs[i].preamble.random_range(0..n_pre)));
            }
            for &(g, p) in &targets {
                opps[g].add(p, i);
            }
            let draws = targets.iter().map(|_| (rngs[i].detection.random::<f64>(), rngs[i].detection.random::<u64>())).collect();
            attempt_of.insert(i, attempts.len());
            attempts.push(Attempt { device: i, targets, draws, rar: None });
        }
        for (g, pool) in pools.iter_mut().enumerate() {
            update_reserved_pool(pool, now, priority[g]);
        }

        let sinr: std::collections::HashMap<usize, f64> = if need_sinr && !attempts.is_empty() {
            let tx: Vec<Transmitter> = attempts
                .iter()
                .map(|a| {
                    let d = &devices[a.device];
                    let power = topology::ramped_tx_power_dbm(path_loss[a.device], d.attempt_count, &scenario.topology)?;
                    Ok(Transmitter { position: d.position, serving_cell: d.serving_cell, tx_power_dbm: power })
                })
                .collect::<Result<_>>()?;
            attempts
                .iter()
                .zip(&tx)
                .map(|(a, t)| Ok((a.device, topology::uplink_sinr_db(t, &tx, layout, &scenario.topology)?)))
                .collect::<Result<_>>()?
        } else {
            Default::default()
        };
        for a in &attempts {
            let d = &devices[a.device];
            for &(g, p) in &a.targets {
                let s = if g == d.serving_cell { sinr.get(&a.device).copied() } else { None };
                ev(&mut trace, now, d, EventKind::Msg1, Some(p), Some(g), s);
            }
        }

        let first_response = now + timing.t_msg1 + timing.t_msg2;
        for opp in &opps {
            let outcomes = resolve_opportunity(opp, |i| {
                let detected = match opts.detection {
                    DetectionModel::Exponential => attempts[attempt_of[&i]].draw_at(opp.gnb).0 < detection_probability(devices[i].attempt_count),
                    DetectionModel::Always => true,
                };
                let above_gate = match (scenario.topology.sinr_threshold_db, opp.gnb < n_macro) {
                    (Some(th), true) => sinr.get(&i).is_none_or(|&s| s >= th),
                    _ => true,
                };
                detected && above_gate
            });
            let mut detected: Vec<(u64, u64, usize)> = Vec::new();
            for (i, outcome) in outcomes {
                match outcome {
                    Msg1Outcome::Detected => detected.push((attempts[attempt_of[&i]].draw_at(opp.gnb).1, devices[i].draw_key, i)),
                    Msg1Outcome::Collided => ev(&mut trace, now, &devices[i], EventKind::Collided, None, Some(opp.gnb), None),
                    Msg1Outcome::Undetected => ev(&mut trace, now, &devices[i], EventKind::Undetected, None, Some(opp.gnb), None),
                }
            }
            detected.sort_unstable();
            for (_, _, i) in detected {
                match rar.grant(opp.gnb, first_response, window) {
                    Some(at) => {
                        let a = &mut attempts[attempt_of[&i]];
                        a.rar = first_rar(a.rar, (at, opp.gnb));
                    }
                    None => ev(&mut trace, now, &devices[i], EventKind::RarOverflow, None, Some(opp.gnb), None),
                }
            }
            log.records.push(opportunity_record(opp, &devices));
        }

        for a in &attempts {
            let i = a.device;
            let msg1_end = now + timing.t_msg1;
            let d = &mut devices[i];
            // Failure reference time and whether it was a Msg-1 failure.
            let failure = match a.rar {
                Some((at, g)) => {
                    d.state = DeviceState::AwaitingRar;
                    ev(&mut trace, at, d, EventKind::Rar, None, Some(g), None);
                    if edt {
                        let b = apply_edt(d.arrival_time, now, msg1_end, at);
                        connect(d, &mut records[i], at, b, true, 0, 0);
                        ev(&mut trace, at, d, EventKind::Connected, None, Some(g), None);
                        last_resolution = last_resolution.max(at);
                        None
                    } else {
                        d.state = DeviceState::Msg3Harq;
                        match msg34_exchange(at, &timing, scenario.harq_fail_prob, scenario.max_harq, &mut rngs[i].harq) {
                            Msg34Outcome::Connected { msg3_tx, msg4_tx, msg3_end, msg4_end } => {
                                let b = DelayBreakdown {
                                    wait: now - d.arrival_time,
                                    msg1: timing.t_msg1,
                                    msg2: at - msg1_end,
                                    msg3: msg3_end - at,
                                    msg4: msg4_end - msg3_end,
                                };
                                connect(d, &mut records[i], msg4_end, b, false, msg3_tx, msg4_tx);
                                ev(&mut trace, msg4_end, d, EventKind::Connected, None, Some(g), None);
                                last_resolution = last_resolution.max(msg4_end);
                                None
                            }
                            Msg34Outcome::AttemptFailed { at, reason, .. } => {
                                let kind = match reason {
                                    Msg34Failure::Msg3Harq => EventKind::Msg3Fail,
                                    Msg34Failure::Msg4Harq => EventKind::Msg4Fail,
                                    Msg34Failure::ContentionResolutionTimer => EventKind::ContentionTimeout,
                                };
                                d.state = DeviceState::Msg4Harq;
                                ev(&mut trace, at, d, kind, None, Some(g), None);
                                Some((at, false))
                            }
                        }
                    }
                }
                None => Some((msg1_end, true)),
            };
            let Some((failed_at, msg1_failure)) = failure else { continue };
            if msg1_failure {
                d.failed_before = true;
            }
            if d.attempt_count >= scenario.max_preamble_tx {
                let resolved = if msg1_failure { failed_at + timing.t_msg2 + policy.rar_window } else { failed_at };
                d.state = DeviceState::Failed;
                records[i] = Some(AccessRecord {
                    device: d.id,
                    class: d.class,
                    success: false,
                    msg1_count: d.attempt_count,
                    t_total: resolved - d.arrival_time,
                    arrival: d.arrival_time,
                    first_attempt: d.first_attempt_time,
                    resolved_at: resolved,
                    breakdown: None,
                    via_edt: false,
                    msg3_tx: 0,
                    msg4_tx: 0,
                });
                ev(&mut trace, resolved, d, EventKind::Failed, None, None, None);
                last_resolution = last_resolution.max(resolved);
            } else {
                let next = schedule_backoff(failed_at, d.class, &policy, timing.t_msg2, &mut rngs[i].backoff);
                d.backoff_until = next;
                d.state = DeviceState::AwaitingOpportunity;
                ev(&mut trace, next, d, EventKind::Backoff, None, None, None);
                pending.push(Reverse((next, d.draw_key, i)));
            }
        }

        log.n_subframes += 1;
        rar.forget_before(now);
        now += period;
    }

    let mut records: Vec<AccessRecord> = records.into_iter().map(|r| r.expect("every device resolves")).collect();
    records.sort_by_key(|r| r.device);
    if opts.trace {
        trace.sort_by_key(|e| (e.time, e.device));
    }
    Ok(RunOutput { records, log, trace })
}

fn connect(d: &mut Device, slot: &mut Option<AccessRecord>, at: Ticks, breakdown: DelayBreakdown, via_edt: bool, msg3_tx: u32, msg4_tx: u32) {
    d.state = DeviceState::Connected;
    d.success_time = Some(at);
    debug_assert_eq!(breakdown.total(), at - d.arrival_time);
    *slot = Some(AccessRecord {
        device: d.id,
        class: d.class,
        success: true,
        msg1_count: d.attempt_count,
        t_total: at - d.arrival_time,
        arrival: d.arrival_time,
        first_attempt: d.first_attempt_time,
        resolved_at: at,
        breakdown: Some(breakdown),
        via_edt,
        msg3_tx,
        msg4_tx,
    });
}

fn opportunity_record(opp: &RaOpportunity, devices: &[Device]) -> OpportunityRecord {
    let cells = opp
        .transmissions
        .iter()
        .map(|(&preamble, ds)| {
            let urllc = ds.iter().filter(|&&i| devices[i].class == DeviceClass::Urllc).count() as u32;
            CellUse { preamble, urllc, non_urllc: ds.len() as u32 - urllc }
        })
        .collect();
    OpportunityRecord { time: opp.time, gnb: opp.gnb, partition: opp.partition, cells }
}
