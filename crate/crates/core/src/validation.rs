//! Reference scenarios and the published KPI values they are checked
//! against.
//!
//! Each [`ReferenceEntry`] names a reference scenario, a KPI, the published
//! value with its source and a tolerance. [`validate`] runs every scenario
//! an entry needs, once, over its seed pool.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kpi::KpiReport;
use crate::replicate::{pooled, seed_range};
use crate::scenario::{build_scenario, Scenario};

/// Acceptance band around an expected value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// `|observed - expected| <= d`, in the KPI's own unit.
    Abs(f64),
    /// `|observed - expected| <= f * |expected|`.
    Rel(f64),
    /// `observed <= bound`.
    AtMost(f64),
    /// `observed >= bound`.
    AtLeast(f64),
}

impl Tolerance {
    pub fn accepts(&self, expected: f64, observed: f64) -> bool {
        // Float noise in the bound itself should not flip a verdict.
        const EPS: f64 = 1e-9;
        match *self {
            Tolerance::Abs(d) => (observed - expected).abs() <= d + EPS,
            Tolerance::Rel(f) => (observed - expected).abs() <= f * expected.abs() + EPS,
            Tolerance::AtMost(b) => observed <= b + EPS,
            Tolerance::AtLeast(b) => observed >= b - EPS,
        }
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Tolerance::Abs(d) => write!(f, "±{d}"),
            Tolerance::Rel(r) => write!(f, "±{}%", r * 100.0),
            Tolerance::AtMost(b) => write!(f, "<= {b}"),
            Tolerance::AtLeast(b) => write!(f, ">= {b}"),
        }
    }
}

/// KPIs in the units the published tables use (percent and ms).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kpi {
    CollisionPct,
    UrllcCollisionPct,
    NonUrllcCollisionPct,
    MeanMsg1,
    MeanDelayMs,
    MedianDelayMs,
    P9999DelayMs,
    UrllcP9999DelayMs,
    /// Used share of the reserved pool.
    ReservedUtilizationPct,
    NonUrllcUtilizationPct,
}

impl Kpi {
    pub fn name(&self) -> &'static str {
        match self {
            Kpi::CollisionPct => "collision_pct",
            Kpi::UrllcCollisionPct => "urllc_collision_pct",
            Kpi::NonUrllcCollisionPct => "non_urllc_collision_pct",
            Kpi::MeanMsg1 => "mean_msg1_count",
            Kpi::MeanDelayMs => "mean_access_delay_ms",
            Kpi::MedianDelayMs => "p50_ms",
            Kpi::P9999DelayMs => "p99_99_ms",
            Kpi::UrllcP9999DelayMs => "urllc_p99_99_ms",
            Kpi::ReservedUtilizationPct => "reserved_utilization_pct",
            Kpi::NonUrllcUtilizationPct => "non_urllc_utilization_pct",
        }
    }

    /// `None` when the report has no value, e.g. a 99.99th percentile over
    /// too few samples.
    pub fn value(&self, r: &KpiReport) -> Option<f64> {
        let pct = |v: Option<f64>| v.map(|x| x * 100.0);
        match self {
            Kpi::CollisionPct => pct(r.overall.collision_probability),
            Kpi::UrllcCollisionPct => pct(r.urllc.collision_probability),
            Kpi::NonUrllcCollisionPct => pct(r.non_urllc.collision_probability),
            Kpi::MeanMsg1 => r.overall.mean_msg1_count,
            Kpi::MeanDelayMs => r.overall.mean_access_delay_ms,
            Kpi::MedianDelayMs => r.overall.percentile_ms(5000),
            Kpi::P9999DelayMs => r.overall.percentile_ms(9999),
            Kpi::UrllcP9999DelayMs => r.urllc.percentile_ms(9999),
            Kpi::ReservedUtilizationPct => pct(r.reserved_utilization),
            Kpi::NonUrllcUtilizationPct => pct(r.non_urllc.preamble_utilization),
        }
    }
}

/// A named scenario with the seed pool it is evaluated over.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceScenario {
    pub id: String,
    pub config: String,
    pub n_seeds: u64,
}

impl ReferenceScenario {
    pub fn scenario(&self) -> Result<Scenario> {
        build_scenario(&self.config)
    }

    pub fn seeds(&self) -> Vec<u64> {
        seed_range(1, self.n_seeds)
    }

    /// Pooled report over the seed pool.
    pub fn evaluate(&self) -> Result<KpiReport> {
        Ok(pooled(&self.scenario()?, &self.seeds())?.report())
    }
}

const URLLC_ONLY: &str = "urllc_fraction = 1\n";
const MIXED: &str = "urllc_fraction = 0.05\n";
/// Femto cells in the uRLLC-only enhancement scenarios.
pub const PP_FEMTO_CELLS: usize = 10;
pub const FEMTO_SWEEP: [usize; 5] = [0, 5, 8, 10, 12];
pub const SPACINGS_KHZ: [u32; 4] = [15, 30, 60, 120];
pub const SLOT_SYMBOLS: [u32; 3] = [7, 4, 2];

pub fn pp_sweep_id(n_femto: usize) -> String {
    format!("pp-femto-{n_femto}")
}

pub fn numerology_id(scs_khz: u32, symbols: u32) -> String {
    format!("nr-{scs_khz}khz-{symbols}sym")
}

pub fn rp_id(r: u32) -> String {
    format!("mixed-rp-r{r}")
}

/// Every reference scenario, in a fixed order.
pub fn reference_scenarios() -> Vec<ReferenceScenario> {
    let s = |id: String, config: String, n_seeds: u64| ReferenceScenario { id, config, n_seeds };
    let mut v = vec![
        s("lte-5k".into(), URLLC_ONLY.into(), 10),
        s("lte-10k".into(), format!("{URLLC_ONLY}n_devices = 10000\n"), 10),
        s("edt".into(), format!("{URLLC_ONLY}enhancements = edt\n"), 10),
        s("edt-pp".into(), format!("{URLLC_ONLY}enhancements = edt,pp\nn_femto_cells = {PP_FEMTO_CELLS}\n"), 20),
        s("edt-pp-ebf".into(), format!("{URLLC_ONLY}enhancements = edt,pp,ebf\nn_femto_cells = {PP_FEMTO_CELLS}\n"), 20),
    ];
    for f in FEMTO_SWEEP {
        v.push(s(pp_sweep_id(f), format!("{URLLC_ONLY}enhancements = pp\nn_femto_cells = {f}\n"), 20));
    }
    for scs in SPACINGS_KHZ {
        for sym in SLOT_SYMBOLS {
            v.push(s(numerology_id(scs, sym), format!("{URLLC_ONLY}subcarrier_spacing_khz = {scs}\nsymbols_per_slot = {sym}\n"), 10));
        }
    }
    v.push(s("mixed-lte".into(), MIXED.into(), 10));
    for r in 1..=4 {
        v.push(s(rp_id(r), format!("{MIXED}enhancements = rp\nreserved_r = {r}\n"), 10));
    }
    // 750 uRLLC devices per seed; 150 seeds pool more than 10^5 of them.
    v.push(s("mixed-edt-drp-ebf".into(), format!("{MIXED}enhancements = edt,drp,ebf\n"), 150));
    v
}

pub fn reference_scenario(id: &str) -> Result<ReferenceScenario> {
    reference_scenarios().into_iter().find(|s| s.id == id).ok_or_else(|| Error::Undefined(format!("no reference scenario `{id}`")))
}

/// One published value.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceEntry {
    /// Table or figure: `II`..`VII`, `FIG6`..`FIG9`.
    pub table: &'static str,
    pub scenario: String,
    pub kpi: Kpi,
    pub expected: f64,
    pub tolerance: Tolerance,
    /// Where the value is printed.
    pub source: &'static str,
}

/// Absolute band for collision probabilities below 1 %.
pub const COLLISION_ABS_PP: f64 = 0.15;
/// Relative band for delays and utilizations.
pub const DEFAULT_REL: f64 = 0.15;

pub fn reference_table() -> Vec<ReferenceEntry> {
    use Kpi::*;
    use Tolerance::*;
    let mut t = Vec::new();
    let mut e = |table, scenario: &str, kpi, expected, tolerance, source| {
        t.push(ReferenceEntry { table, scenario: scenario.to_string(), kpi, expected, tolerance, source });
    };

    let ii = "Table II, proposed simulator column";
    e("II", "lte-5k", CollisionPct, 0.48, Abs(COLLISION_ABS_PP), ii);
    e("II", "lte-5k", MeanMsg1, 1.4, Abs(0.15), ii);
    e("II", "lte-5k", MeanDelayMs, 28.98, Rel(DEFAULT_REL), ii);
    e("II", "lte-10k", CollisionPct, 1.95, Abs(0.3), ii);
    e("II", "lte-10k", MeanMsg1, 1.42, Abs(0.15), ii);
    e("II", "lte-10k", MeanDelayMs, 33.62, Rel(DEFAULT_REL), ii);

    let f6 = "Fig. 6 text, 29 ms to 6 ms at 50% CDF";
    e("FIG6", "lte-5k", MedianDelayMs, 29.0, Abs(1.5), f6);
    e("FIG6", "edt", MedianDelayMs, 6.0, Abs(1.5), f6);

    let iii = "Table III";
    for (f, v) in FEMTO_SWEEP.into_iter().zip([0.48, 0.42, 0.34, 0.26, 0.22]) {
        e("III", &pp_sweep_id(f), CollisionPct, v, Abs(COLLISION_ABS_PP), iii);
    }

    let iv = "Table IV";
    e("IV", "lte-5k", MeanMsg1, 1.43, Abs(0.15), iv);
    e("IV", "lte-5k", MeanDelayMs, 29.06, Rel(DEFAULT_REL), iv);
    e("IV", "edt-pp", CollisionPct, 0.04, Abs(0.05), iv);
    e("IV", "edt-pp", MeanMsg1, 1.2, Abs(0.15), iv);
    e("IV", "edt-pp", MeanDelayMs, 5.8, Rel(0.2), iv);
    e("IV", "edt-pp-ebf", CollisionPct, 0.01, Abs(0.05), iv);
    e("IV", "edt-pp-ebf", MeanMsg1, 1.09, Abs(0.15), iv);
    e("IV", "edt-pp-ebf", MeanDelayMs, 4.47, Rel(0.2), iv);

    let f7 = "Fig. 7 text, 99.99% delay of 34 ms (EDT+PP) and 9 ms (EDT+PP+EBF)";
    e("FIG7", "edt-pp", P9999DelayMs, 34.0, AtLeast(25.0), f7);
    e("FIG7", "edt-pp-ebf", P9999DelayMs, 9.0, AtMost(10.0), f7);

    let v = "Table V";
    let delays = [[29.0, 14.7, 6.9], [12.5, 6.8, 3.3], [6.0, 3.14, 1.68], [2.9, 1.66, 0.83]];
    let colls = [[0.48, 0.45, 0.45], [0.46, 0.5, 0.44], [0.47, 0.43, 0.46], [0.43, 0.49, 0.5]];
    for (i, scs) in SPACINGS_KHZ.into_iter().enumerate() {
        for (j, sym) in SLOT_SYMBOLS.into_iter().enumerate() {
            let id = numerology_id(scs, sym);
            e("V", &id, MeanDelayMs, delays[i][j], Rel(0.2), v);
            e("V", &id, CollisionPct, colls[i][j], Abs(COLLISION_ABS_PP), v);
        }
    }

    let vi = "Table VI";
    let u_coll = [33.0, 0.97, 0.0, 0.0];
    let u_util = [83.0, 57.0, 38.0, 29.0];
    let n_coll = [0.1, 0.07, 0.03, 0.06];
    let n_util = [3.4, 3.1, 3.1, 3.1];
    for r in 1..=4u32 {
        let k = (r - 1) as usize;
        let id = rp_id(r);
        e("VI", &id, UrllcCollisionPct, u_coll[k], Abs(5.0), vi);
        e("VI", &id, ReservedUtilizationPct, u_util[k], Abs(5.0), vi);
        e("VI", &id, NonUrllcCollisionPct, n_coll[k], Abs(COLLISION_ABS_PP), vi);
        e("VI", &id, NonUrllcUtilizationPct, n_util[k], Rel(DEFAULT_REL), vi);
    }

    let vii = "Table VII";
    let rp = rp_id(3);
    e("VII", "mixed-lte", MeanDelayMs, 26.07, Rel(0.2), vii);
    e("VII", "mixed-lte", UrllcCollisionPct, 0.05, Abs(COLLISION_ABS_PP), vii);
    e("VII", "mixed-lte", NonUrllcCollisionPct, 0.11, Abs(COLLISION_ABS_PP), vii);
    e("VII", "mixed-lte", NonUrllcUtilizationPct, 2.10, Rel(DEFAULT_REL), vii);
    e("VII", &rp, MeanDelayMs, 25.0, Rel(DEFAULT_REL), vii);
    e("VII", &rp, UrllcCollisionPct, 0.0, Abs(COLLISION_ABS_PP), vii);
    e("VII", &rp, NonUrllcCollisionPct, 1.06, Abs(COLLISION_ABS_PP), vii);
    e("VII", &rp, ReservedUtilizationPct, 23.0, Abs(8.0), vii);
    e("VII", &rp, NonUrllcUtilizationPct, 3.0, Rel(DEFAULT_REL), vii);
    e("VII", "mixed-edt-drp-ebf", MeanDelayMs, 4.5, Rel(0.2), vii);
    e("VII", "mixed-edt-drp-ebf", UrllcCollisionPct, 0.0, Abs(0.02), vii);
    e("VII", "mixed-edt-drp-ebf", NonUrllcCollisionPct, 0.0, Abs(0.02), vii);
    e("VII", "mixed-edt-drp-ebf", ReservedUtilizationPct, 57.0, Abs(8.0), vii);
    e("VII", "mixed-edt-drp-ebf", NonUrllcUtilizationPct, 7.6, Rel(DEFAULT_REL), vii);

    e("FIG8", "mixed-edt-drp-ebf", UrllcP9999DelayMs, 9.0, AtMost(10.0), "Fig. 8 text, uRLLC 99.99% delay of 9 ms");
    let f9 = "Fig. 9 text, overall 99.99% delay of 13 ms vs 175 ms";
    e("FIG9", "mixed-edt-drp-ebf", P9999DelayMs, 13.0, AtMost(16.0), f9);
    e("FIG9", "mixed-lte", P9999DelayMs, 175.0, Rel(DEFAULT_REL), f9);
    t
}

/// Entries of one table (`II`, `vii`, `fig6`, ...), matched case-insensitively.
pub fn entries_for(table: Option<&str>) -> Result<Vec<ReferenceEntry>> {
    let all = reference_table();
    let Some(want) = table else { return Ok(all) };
    let want = want.trim().to_ascii_uppercase();
    let want = want.strip_prefix("TABLE").map(str::trim).unwrap_or(&want).replace(['.', ' '], "");
    let picked: Vec<_> = all.into_iter().filter(|e| e.table == want).collect();
    if picked.is_empty() {
        return Err(Error::Undefined(format!("no reference table `{want}`")));
    }
    Ok(picked)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub entry: ReferenceEntry,
    pub observed: Option<f64>,
    pub pass: bool,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = &self.entry;
        let obs = self.observed.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
        write!(
            f,
            "[{}] {:<5} {:<18} {:<26} observed {:>10} expected {} ({})  {}",
            if self.pass { "PASS" } else { "FAIL" },
            e.table,
            e.scenario,
            e.kpi.name(),
            obs,
            e.expected,
            e.tolerance,
            e.source
        )
    }
}

/// Pooled reports of the scenarios named by `entries`, keyed by id.
pub fn evaluate_scenarios(entries: &[ReferenceEntry]) -> Result<BTreeMap<String, KpiReport>> {
    let ids: Vec<&str> = entries.iter().map(|e| e.scenario.as_str()).collect();
    evaluate_ids(&ids)
}

/// Pooled reports of the named reference scenarios, keyed by id.
pub fn evaluate_ids(ids: &[&str]) -> Result<BTreeMap<String, KpiReport>> {
    let mut ids = ids.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let scenarios: Vec<ReferenceScenario> = ids.into_iter().map(reference_scenario).collect::<Result<_>>()?;
    scenarios.par_iter().map(|s| Ok((s.id.clone(), s.evaluate()?))).collect()
}

pub fn judge(entry: &ReferenceEntry, report: &KpiReport) -> Verdict {
    let observed = entry.kpi.value(report);
    let pass = observed.is_some_and(|v| entry.tolerance.accepts(entry.expected, v));
    Verdict { entry: entry.clone(), observed, pass }
}

/// Runs the reference scenarios behind `table` (all when `None`) and
/// judges each entry, in table order.
pub fn validate(table: Option<&str>) -> Result<Vec<Verdict>> {
    let entries = entries_for(table)?;
    let reports = evaluate_scenarios(&entries)?;
    Ok(entries.iter().map(|e| judge(e, &reports[&e.scenario])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_table_and_figure_is_covered() {
        let t = reference_table();
        for table in ["II", "III", "IV", "V", "VI", "VII", "FIG6", "FIG7", "FIG8", "FIG9"] {
            assert!(t.iter().any(|e| e.table == table), "{table}");
        }
        assert!(t.iter().all(|e| !e.source.is_empty()));
    }

    #[test]
    fn every_entry_names_a_valid_scenario() {
        for e in reference_table() {
            let s = reference_scenario(&e.scenario).unwrap();
            s.scenario().unwrap();
        }
    }

    #[test]
    fn scenario_ids_unique() {
        let s = reference_scenarios();
        let mut ids: Vec<_> = s.iter().map(|s| s.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), s.len());
    }

    #[test]
    fn seed_pools_are_large_enough() {
        for s in reference_scenarios() {
            assert!(s.n_seeds >= 10, "{}", s.id);
            let sc = s.scenario().unwrap();
            if sc.enhancements.pp {
                assert!(s.n_seeds >= 20, "{}", s.id);
            }
        }
        let drp = reference_scenario("mixed-edt-drp-ebf").unwrap();
        assert!(drp.scenario().unwrap().n_urllc() as u64 * drp.n_seeds >= 100_000);
    }

    #[test]
    fn tolerance_bands() {
        assert!(Tolerance::Abs(0.15).accepts(0.48, 0.33));
        assert!(!Tolerance::Abs(0.15).accepts(0.48, 0.32));
        assert!(Tolerance::Rel(0.15).accepts(28.98, 33.3));
        assert!(!Tolerance::Rel(0.15).accepts(28.98, 33.4));
        assert!(Tolerance::AtMost(10.0).accepts(9.0, 10.0));
        assert!(!Tolerance::AtLeast(25.0).accepts(34.0, 24.9));
    }

    #[test]
    fn table_filter() {
        assert_eq!(entries_for(Some("ii")).unwrap().len(), 6);
        assert_eq!(entries_for(Some("Table II")).unwrap().len(), 6);
        assert_eq!(entries_for(Some("fig. 8")).unwrap().len(), 1);
        assert_eq!(entries_for(Some("V")).unwrap().len(), 24);
        assert!(entries_for(Some("XI")).is_err());
    }

    #[test]
    fn missing_value_fails() {
        let e = ReferenceEntry {
            table: "II",
            scenario: "lte-5k".into(),
            kpi: Kpi::MeanDelayMs,
            expected: 1.0,
            tolerance: Tolerance::Rel(1.0),
            source: "x",
        };
        let s = reference_scenario("lte-5k").unwrap().scenario().unwrap().with_seed(1);
        let mut empty = s.clone();
        empty.n_devices = 0;
        let out = crate::engine::run(&empty).unwrap();
        let r = crate::kpi::KpiSummary::from_run(empty.fingerprint(), 1, &out).report();
        assert!(!judge(&e, &r).pass);
    }
}
