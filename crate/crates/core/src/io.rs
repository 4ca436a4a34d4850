//! Text output formats. Column orders are stable; absent values are
//! written as empty fields.

use std::fmt::Write as _;

use crate::device::Device;
use crate::engine::log::TraceEvent;
use crate::error::Result;
use crate::kpi::{DelayCdf, KpiReport};
use crate::scenario::Scenario;
use crate::topology::{path_loss_db, CellLayout};

pub const KPI_COLUMNS: [&str; 24] = [
    "seed",
    "n_seeds",
    "n_devices",
    "n_success",
    "success_rate",
    "collision_probability",
    "urllc_collision_probability",
    "non_urllc_collision_probability",
    "preamble_utilization",
    "reserved_utilization",
    "contention_utilization",
    "urllc_utilization",
    "non_urllc_utilization",
    "mean_msg1_count",
    "mean_access_delay_ms",
    "p50_ms",
    "p95_ms",
    "p99_ms",
    "p99_99_ms",
    "urllc_mean_access_delay_ms",
    "urllc_p99_99_ms",
    "non_urllc_mean_access_delay_ms",
    "n_opportunities",
    "urllc_success_rate",
];

fn ratio(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn ms(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

/// Header line; `leading` columns (e.g. a sweep parameter) come first.
pub fn kpi_csv_header(leading: &[&str]) -> String {
    leading.iter().copied().chain(KPI_COLUMNS).collect::<Vec<_>>().join(",")
}

/// One row; `seed` is a seed number or `pooled`.
pub fn kpi_csv_row(leading: &[String], seed: &str, r: &KpiReport) -> String {
    let o = &r.overall;
    let pct = |bp| ms(o.percentile_ms(bp));
    let fields = [
        seed.to_string(),
        r.n_seeds.to_string(),
        o.n_devices.to_string(),
        o.n_success.to_string(),
        ratio(o.success_rate),
        ratio(o.collision_probability),
        ratio(r.urllc.collision_probability),
        ratio(r.non_urllc.collision_probability),
        ratio(o.preamble_utilization),
        ratio(r.reserved_utilization),
        ratio(r.contention_utilization),
        ratio(r.urllc.preamble_utilization),
        ratio(r.non_urllc.preamble_utilization),
        ratio(o.mean_msg1_count),
        ms(o.mean_access_delay_ms),
        pct(5000),
        pct(9500),
        pct(9900),
        pct(9999),
        ms(r.urllc.mean_access_delay_ms),
        ms(r.urllc.percentile_ms(9999)),
        ms(r.non_urllc.mean_access_delay_ms),
        r.n_opportunities.to_string(),
        ratio(r.urllc.success_rate),
    ];
    leading.iter().cloned().chain(fields).collect::<Vec<_>>().join(",")
}

/// Aligned `name value` lines with the same fields as the CSV row.
pub fn kpi_table(r: &KpiReport) -> String {
    let row = kpi_csv_row(&[], "-", r);
    let width = KPI_COLUMNS.iter().map(|c| c.len()).max().unwrap_or(0);
    let mut s = String::new();
    for (name, value) in KPI_COLUMNS.iter().zip(row.split(',')).skip(1) {
        let _ = writeln!(s, "{name:<width$}  {}", if value.is_empty() { "n/a" } else { value });
    }
    s
}

/// Header-only CDF file, for runs without a successful device.
pub const CDF_HEADER: &str = "delay_ms,cum_prob";

/// Two columns `delay_ms,cum_prob`, one row per distinct delay.
pub fn cdf_csv(cdf: &DelayCdf) -> String {
    let mut s = format!("{CDF_HEADER}\n");
    for (d, p) in cdf.points() {
        let _ = writeln!(s, "{d},{p:.8}");
    }
    s
}

pub const TRACE_HEADER: &str = "time_ms,device,event,preamble,gnb,attempt,sinr_db";

pub fn trace_csv(events: &[TraceEvent]) -> String {
    let mut s = format!("{TRACE_HEADER}\n");
    for e in events {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            e.time,
            e.device,
            e.kind,
            e.preamble.map(|p| p.to_string()).unwrap_or_default(),
            e.gnb.map(|g| g.to_string()).unwrap_or_default(),
            e.attempt,
            e.sinr_db.map(|v| format!("{v:.3}")).unwrap_or_default()
        );
    }
    s
}

pub const LAYOUT_HEADER: &str = "device,x_m,y_m,class,serving_cell,femto_cell,path_loss_db";

/// Device positions with serving cells and path loss to the serving site.
pub fn layout_csv(devices: &[Device], layout: &CellLayout, scenario: &Scenario) -> Result<String> {
    let mut s = format!("{LAYOUT_HEADER}\n");
    for d in devices {
        let dist = d.position.distance(&layout.macro_centers[d.serving_cell]).max(1e-9);
        let pl = path_loss_db(dist, &scenario.topology)?;
        let _ = writeln!(
            s,
            "{},{:.3},{:.3},{},{},{},{:.3}",
            d.id,
            d.position.x,
            d.position.y,
            d.class,
            d.serving_cell,
            d.femto_cell.map(|f| f.to_string()).unwrap_or_default(),
            pl
        );
    }
    Ok(s)
}
