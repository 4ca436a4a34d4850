//! Key performance indicators: collision probability, preamble
//! utilization and the access-delay distribution, with exact multi-seed
//! pooling.
//!
//! Opportunity KPIs count `(RA subframe, gNB, preamble)` cells. A cell is
//! *used* when at least one device sent that preamble and *collided* when
//! two or more did. Per-class ratios count the cells a class touched over
//! the cells of the pool that class draws from.

use crate::device::DeviceClass;
use crate::engine::log::OpportunityLog;
use crate::engine::{AccessRecord, RunOutput};
use crate::error::{Error, Result};
use crate::time::Ticks;

const CLASSES: [DeviceClass; 2] = [DeviceClass::Urllc, DeviceClass::NonUrllc];

fn class_idx(c: DeviceClass) -> usize {
    match c {
        DeviceClass::Urllc => 0,
        DeviceClass::NonUrllc => 1,
    }
}

/// Used/collided counts over a denominator of cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CellCounts {
    pub cells: u64,
    pub used: u64,
    pub collided: u64,
}

impl CellCounts {
    fn add(&mut self, o: &CellCounts) {
        self.cells += o.cells;
        self.used += o.used;
        self.collided += o.collided;
    }

    pub fn utilization(&self) -> Option<f64> {
        (self.cells > 0).then(|| self.used as f64 / self.cells as f64)
    }

    pub fn collision(&self) -> Option<f64> {
        (self.cells > 0).then(|| self.collided as f64 / self.cells as f64)
    }
}

/// Cell counts of an opportunity log, split by pool and by class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpportunityCounts {
    /// `(RA subframe, gNB)` pairs.
    pub n_opportunities: u64,
    pub overall: CellCounts,
    pub reserved: CellCounts,
    pub contention: CellCounts,
    pub class: [CellCounts; 2],
}

impl OpportunityCounts {
    pub fn from_log(log: &OpportunityLog) -> Self {
        let mut c = OpportunityCounts { n_opportunities: (log.n_subframes * log.n_gnbs) as u64, ..Default::default() };
        c.overall.cells = log.n_preambles as u64 * c.n_opportunities;
        // Opportunities without transmissions are still listed in the log,
        // so the pool split is read from every record.
        let mut listed = 0u64;
        for rec in &log.records {
            listed += 1;
            let r = rec.partition.reserved as u64;
            c.reserved.cells += r;
            c.contention.cells += log.n_preambles as u64 - r;
            for class in CLASSES {
                c.class[class_idx(class)].cells += rec.partition.class_pool_size(class, log.mode) as u64;
            }
            for cell in &rec.cells {
                let used = cell.total() >= 1;
                let collided = cell.total() >= 2;
                let pool = if rec.partition.is_reserved(cell.preamble) { &mut c.reserved } else { &mut c.contention };
                pool.used += used as u64;
                pool.collided += collided as u64;
                c.overall.used += used as u64;
                c.overall.collided += collided as u64;
                for class in CLASSES {
                    if cell.count(class) > 0 {
                        let k = &mut c.class[class_idx(class)];
                        k.used += 1;
                        k.collided += collided as u64;
                    }
                }
            }
        }
        debug_assert_eq!(listed, c.n_opportunities);
        c
    }

    fn add(&mut self, o: &OpportunityCounts) {
        self.n_opportunities += o.n_opportunities;
        self.overall.add(&o.overall);
        self.reserved.add(&o.reserved);
        self.contention.add(&o.contention);
        for k in 0..2 {
            self.class[k].add(&o.class[k]);
        }
    }
}

/// Collided cells over all cells of the observation period.
pub fn collision_probability(log: &OpportunityLog) -> Result<f64> {
    OpportunityCounts::from_log(log).overall.collision().ok_or_else(|| Error::Undefined("collision probability over an empty period".into()))
}

/// Utilization ratios; `None` where the pool is empty.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Utilization {
    pub overall: Option<f64>,
    pub reserved: Option<f64>,
    pub contention: Option<f64>,
    pub urllc: Option<f64>,
    pub non_urllc: Option<f64>,
}

pub fn preamble_utilization(log: &OpportunityLog) -> Utilization {
    let c = OpportunityCounts::from_log(log);
    Utilization {
        overall: c.overall.utilization(),
        reserved: c.reserved.utilization(),
        contention: c.contention.utilization(),
        urllc: c.class[0].utilization(),
        non_urllc: c.class[1].utilization(),
    }
}

/// Percentile ranks reported by [`KpiReport`], in hundredths of a percent.
pub const REPORTED_PERCENTILES: [u32; 4] = [5000, 9500, 9900, 9999];

/// Pooled samples needed before the 99.99th percentile is reported.
pub const DEEP_PERCENTILE_MIN_SAMPLES: usize = 100_000;

/// Empirical distribution of access delays of successful devices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelayCdf {
    sorted: Vec<Ticks>,
}

impl DelayCdf {
    pub fn from_samples(mut samples: Vec<Ticks>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Undefined("delay CDF without successful records".into()));
        }
        samples.sort_unstable();
        Ok(DelayCdf { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[Ticks] {
        &self.sorted
    }

    /// Smallest delay `d` with `CDF(d) >= rank / 10000`.
    pub fn percentile_bp(&self, rank_bp: u32) -> Ticks {
        let n = self.sorted.len() as u64;
        let k = (rank_bp as u64 * n).div_ceil(10_000).max(1);
        self.sorted[(k - 1) as usize]
    }

    pub fn percentile(&self, p: f64) -> Ticks {
        self.percentile_bp((p * 100.0).round() as u32)
    }

    /// Like [`percentile_bp`](Self::percentile_bp) but `None` when the rank
    /// needs more samples than are available (only 99.99 is gated).
    pub fn reported_percentile(&self, rank_bp: u32) -> Option<Ticks> {
        (rank_bp < 9999 || self.len() >= DEEP_PERCENTILE_MIN_SAMPLES).then(|| self.percentile_bp(rank_bp))
    }

    /// `(delay, cumulative probability)` at every distinct delay.
    pub fn points(&self) -> Vec<(Ticks, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(Ticks, f64)> = Vec::new();
        for (i, &d) in self.sorted.iter().enumerate() {
            let p = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == d => last.1 = p,
                _ => out.push((d, p)),
            }
        }
        out
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().map(|t| t.0 as f64).sum::<f64>() / self.sorted.len() as f64 / crate::time::TICKS_PER_MS as f64
    }
}

/// CDF of `t_total` over the successful records.
pub fn delay_cdf<'a>(records: impl IntoIterator<Item = &'a AccessRecord>) -> Result<DelayCdf> {
    DelayCdf::from_samples(records.into_iter().filter(|r| r.success).map(|r| r.t_total).collect())
}

/// Device-level tallies of one class.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassTally {
    pub n_devices: u64,
    pub n_success: u64,
    pub msg1_total: u64,
    pub msg1_success_total: u64,
    /// Sorted delays of successful devices.
    pub delays: Vec<Ticks>,
}

impl ClassTally {
    fn add(&mut self, o: &ClassTally) {
        self.n_devices += o.n_devices;
        self.n_success += o.n_success;
        self.msg1_total += o.msg1_total;
        self.msg1_success_total += o.msg1_success_total;
        self.delays = merge_sorted(&self.delays, &o.delays);
    }
}

fn merge_sorted(a: &[Ticks], b: &[Ticks]) -> Vec<Ticks> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Mergeable accumulator behind a [`KpiReport`]. Merging adds counts and
/// pools samples, so it is exact, commutative and associative.
#[derive(Debug, Clone, PartialEq)]
pub struct KpiSummary {
    /// Scenario text without the seed.
    pub fingerprint: String,
    pub seeds: Vec<u64>,
    pub opportunities: OpportunityCounts,
    pub class: [ClassTally; 2],
}

impl KpiSummary {
    pub fn from_run(fingerprint: impl Into<String>, seed: u64, out: &RunOutput) -> Self {
        let mut class: [ClassTally; 2] = Default::default();
        for r in &out.records {
            let t = &mut class[class_idx(r.class)];
            t.n_devices += 1;
            t.msg1_total += r.msg1_count as u64;
            if r.success {
                t.n_success += 1;
                t.msg1_success_total += r.msg1_count as u64;
                t.delays.push(r.t_total);
            }
        }
        for t in &mut class {
            t.delays.sort_unstable();
        }
        KpiSummary { fingerprint: fingerprint.into(), seeds: vec![seed], opportunities: OpportunityCounts::from_log(&out.log), class }
    }

    pub fn merge(&self, other: &KpiSummary) -> Result<KpiSummary> {
        if self.fingerprint != other.fingerprint {
            return Err(Error::ScenarioMismatch("cannot pool results of different scenarios".into()));
        }
        let mut m = self.clone();
        m.seeds = merge_sorted_u64(&self.seeds, &other.seeds);
        m.opportunities.add(&other.opportunities);
        for k in 0..2 {
            m.class[k].add(&other.class[k]);
        }
        Ok(m)
    }

    pub fn merge_all<'a>(parts: impl IntoIterator<Item = &'a KpiSummary>) -> Result<KpiSummary> {
        let mut it = parts.into_iter();
        let first = it.next().ok_or_else(|| Error::Undefined("nothing to merge".into()))?.clone();
        it.try_fold(first, |acc, s| acc.merge(s))
    }

    fn combined(&self) -> ClassTally {
        let mut all = self.class[0].clone();
        all.add(&self.class[1]);
        all
    }

    pub fn report(&self) -> KpiReport {
        let o = &self.opportunities;
        let class = |k: usize, cells: &CellCounts| ClassKpi::new(&self.class[k], cells);
        KpiReport {
            n_seeds: self.seeds.len(),
            n_opportunities: o.n_opportunities,
            overall: ClassKpi::new(&self.combined(), &o.overall),
            urllc: class(0, &o.class[0]),
            non_urllc: class(1, &o.class[1]),
            reserved_utilization: o.reserved.utilization(),
            contention_utilization: o.contention.utilization(),
            reserved_collision: o.reserved.collision(),
        }
    }
}

fn merge_sorted_u64(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut v: Vec<u64> = a.iter().chain(b).copied().collect();
    v.sort_unstable();
    v
}

/// KPIs of one device class (or of all devices).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassKpi {
    pub n_devices: u64,
    pub n_success: u64,
    pub collision_probability: Option<f64>,
    pub preamble_utilization: Option<f64>,
    pub success_rate: Option<f64>,
    /// Over every device that transmitted.
    pub mean_msg1_count: Option<f64>,
    /// Over successful devices.
    pub mean_access_delay_ms: Option<f64>,
    /// `(rank in hundredths of a percent, delay in ms)`; `None` when the
    /// pool is too small for that rank.
    pub delay_percentiles_ms: Vec<(u32, Option<f64>)>,
}

impl ClassKpi {
    fn new(t: &ClassTally, cells: &CellCounts) -> Self {
        let cdf = DelayCdf::from_samples(t.delays.clone()).ok();
        ClassKpi {
            n_devices: t.n_devices,
            n_success: t.n_success,
            collision_probability: cells.collision(),
            preamble_utilization: cells.utilization(),
            success_rate: (t.n_devices > 0).then(|| t.n_success as f64 / t.n_devices as f64),
            mean_msg1_count: (t.n_devices > 0).then(|| t.msg1_total as f64 / t.n_devices as f64),
            mean_access_delay_ms: cdf.as_ref().map(DelayCdf::mean),
            delay_percentiles_ms: REPORTED_PERCENTILES
                .iter()
                .map(|&p| (p, cdf.as_ref().and_then(|c| c.reported_percentile(p)).map(Ticks::as_ms)))
                .collect(),
        }
    }

    pub fn percentile_ms(&self, rank_bp: u32) -> Option<f64> {
        self.delay_percentiles_ms.iter().find(|(p, _)| *p == rank_bp).and_then(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KpiReport {
    pub n_seeds: usize,
    pub n_opportunities: u64,
    pub overall: ClassKpi,
    pub urllc: ClassKpi,
    pub non_urllc: ClassKpi,
    pub reserved_utilization: Option<f64>,
    pub contention_utilization: Option<f64>,
    pub reserved_collision: Option<f64>,
}
