//! Scenario configuration and its flat key-value file format.
//!
//! ```text
//! # comments start with '#'
//! n_devices = 5000
//! enhancements = edt,pp,ebf
//! subcarrier_spacing_khz = 60
//! ```
//!
//! Keys mirror [`Scenario`] fields, durations are baseline (15 kHz, 7 symbol)
//! milliseconds and every key is optional. See `docs/scenario-format.md` for
//! the full key list.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::time::{scale_timing, Numerology, SlotSymbols, SubcarrierSpacing, Ticks, TimingParams};
use crate::topology::TopologyConfig;
use crate::traffic::TrafficConfig;

/// Enhancement flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Enhancements {
    /// Two-step early data transmission.
    pub edt: bool,
    /// Fixed reserved preambles for uRLLC devices.
    pub rp: bool,
    /// Dynamic reserved preambles.
    pub drp: bool,
    /// Enhanced back-off.
    pub ebf: bool,
    /// Parallel preambles over dual connectivity.
    pub pp: bool,
}

impl Enhancements {
    pub const NONE: Enhancements = Enhancements { edt: false, rp: false, drp: false, ebf: false, pp: false };

    fn flags(&self) -> [(&'static str, bool); 5] {
        [("edt", self.edt), ("rp", self.rp), ("drp", self.drp), ("ebf", self.ebf), ("pp", self.pp)]
    }
}

impl fmt::Display for Enhancements {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let on: Vec<&str> = self.flags().iter().filter(|(_, v)| *v).map(|(k, _)| *k).collect();
        if on.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&on.join(","))
        }
    }
}

impl FromStr for Enhancements {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut e = Enhancements::NONE;
        for flag in s.split(',').map(str::trim).filter(|f| !f.is_empty()) {
            match flag.to_ascii_lowercase().as_str() {
                "edt" => e.edt = true,
                "rp" => e.rp = true,
                "drp" => e.drp = true,
                "ebf" => e.ebf = true,
                "pp" => e.pp = true,
                "none" => {}
                other => return Err(format!("unknown enhancement `{other}`")),
            }
        }
        Ok(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReservedPreambles {
    Fixed(u32),
    Dynamic,
}

impl fmt::Display for ReservedPreambles {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReservedPreambles::Fixed(r) => write!(f, "{r}"),
            ReservedPreambles::Dynamic => f.write_str("dynamic"),
        }
    }
}

/// Complete configuration of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Devices dropped in each macro cell.
    pub n_devices: usize,
    pub urllc_fraction: f64,
    pub n_preambles: u32,
    pub max_preamble_tx: u32,
    pub reserved_r: ReservedPreambles,
    pub enhancements: Enhancements,
    pub numerology: Numerology,
    /// Durations at LTE numerology; see [`Scenario::timing`].
    pub base_timing: TimingParams,
    pub topology: TopologyConfig,
    pub traffic: TrafficConfig,
    pub harq_fail_prob: f64,
    pub max_harq: u32,
    pub rar_grants_per_msg: u32,
    pub cce_total: u32,
    pub cce_per_pdcch: u32,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            n_devices: 5000,
            urllc_fraction: 1.0,
            n_preambles: 54,
            max_preamble_tx: 10,
            reserved_r: ReservedPreambles::Fixed(3),
            enhancements: Enhancements::NONE,
            numerology: Numerology::default(),
            base_timing: TimingParams::default(),
            topology: TopologyConfig::default(),
            traffic: TrafficConfig::default(),
            harq_fail_prob: 0.10,
            max_harq: 5,
            rar_grants_per_msg: 3,
            cce_total: 16,
            cce_per_pdcch: 4,
            seed: 1,
        }
    }
}

impl Scenario {
    /// Durations after numerology scaling.
    pub fn timing(&self) -> TimingParams {
        scale_timing(&self.base_timing, self.numerology)
    }

    pub fn total_devices(&self) -> usize {
        self.n_devices * self.topology.n_macro_cells
    }

    /// RAR grants deliverable per downlink subframe.
    pub fn rar_capacity_per_subframe(&self) -> u32 {
        (self.cce_total / self.cce_per_pdcch) * self.rar_grants_per_msg
    }

    pub fn n_urllc(&self) -> usize {
        (self.total_devices() as f64 * self.urllc_fraction).round() as usize
    }

    pub fn with_seed(&self, seed: u64) -> Scenario {
        Scenario { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let c = |m: String| Err(Error::Constraint(m));
        if self.enhancements.rp && self.enhancements.drp {
            return c("enhancements rp and drp are mutually exclusive".into());
        }
        match (self.enhancements.drp, self.reserved_r) {
            (true, ReservedPreambles::Fixed(_)) => return c("drp requires reserved_r = dynamic".into()),
            (false, ReservedPreambles::Dynamic) => return c("reserved_r = dynamic requires enhancement drp".into()),
            _ => {}
        }
        if self.n_preambles == 0 {
            return c("n_preambles must be > 0".into());
        }
        if let ReservedPreambles::Fixed(r) = self.reserved_r {
            if r >= self.n_preambles {
                return c(format!("reserved_r ({r}) must be < n_preambles ({})", self.n_preambles));
            }
        }
        if !(0.0..=1.0).contains(&self.urllc_fraction) {
            return c(format!("urllc_fraction must be in [0, 1], got {}", self.urllc_fraction));
        }
        if self.max_preamble_tx == 0 {
            return c("max_preamble_tx must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.harq_fail_prob) {
            return c("harq_fail_prob must be in [0, 1]".into());
        }
        if self.max_harq == 0 {
            return c("max_harq must be >= 1".into());
        }
        if self.cce_per_pdcch == 0 || self.rar_capacity_per_subframe() == 0 {
            return c("RAR capacity (cce_total / cce_per_pdcch * rar_grants_per_msg) must be >= 1".into());
        }
        let t = &self.base_timing;
        if t.t_msg1 <= Ticks::ZERO || t.ra_period <= Ticks::ZERO || t.sib2_period <= Ticks::ZERO {
            return c("t_msg1_ms, ra_period_ms and sib2_period_ms must be > 0".into());
        }
        let all = [t.t_msg2, t.t_msg3, t.t_msg4, t.rar_window, t.bi_max, t.contention_resolution_timer];
        if all.iter().any(|d| *d < Ticks::ZERO) {
            return c("durations must be >= 0".into());
        }
        self.topology.validate()?;
        self.traffic.validate()
    }

    /// Every key with its current value, in canonical order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let t = &self.base_timing;
        let topo = &self.topology;
        let tr = &self.traffic;
        let ms = |d: Ticks| fmt_f64(d.as_ms());
        vec![
            ("n_devices", self.n_devices.to_string()),
            ("urllc_fraction", fmt_f64(self.urllc_fraction)),
            ("n_preambles", self.n_preambles.to_string()),
            ("max_preamble_tx", self.max_preamble_tx.to_string()),
            ("reserved_r", self.reserved_r.to_string()),
            ("enhancements", self.enhancements.to_string()),
            ("subcarrier_spacing_khz", self.numerology.subcarrier_spacing.khz().to_string()),
            ("symbols_per_slot", self.numerology.symbols_per_slot.count().to_string()),
            ("t_msg1_ms", ms(t.t_msg1)),
            ("t_msg2_ms", ms(t.t_msg2)),
            ("t_msg3_ms", ms(t.t_msg3)),
            ("t_msg4_ms", ms(t.t_msg4)),
            ("ra_period_ms", ms(t.ra_period)),
            ("rar_window_ms", ms(t.rar_window)),
            ("bi_max_ms", ms(t.bi_max)),
            ("contention_resolution_timer_ms", ms(t.contention_resolution_timer)),
            ("sib2_period_ms", ms(t.sib2_period)),
            ("n_macro_cells", topo.n_macro_cells.to_string()),
            ("cell_radius_m", fmt_f64(topo.cell_radius_m)),
            ("n_femto_cells", topo.n_femto_cells.to_string()),
            ("femto_radius_m", fmt_f64(topo.femto_radius_m)),
            ("pl_ref_db", fmt_f64(topo.pl_ref_db)),
            ("pl_ref_dist_m", fmt_f64(topo.pl_ref_dist_m)),
            ("pl_exponent", fmt_f64(topo.pl_exponent)),
            ("p_max_dbm", fmt_f64(topo.p_max_dbm)),
            ("p_init_target_dbm", fmt_f64(topo.p_init_target_dbm)),
            ("ramp_step_db", fmt_f64(topo.ramp_step_db)),
            ("noise_power_dbm", fmt_f64(topo.noise_power_dbm)),
            ("freq_ghz", fmt_f64(topo.freq_ghz)),
            ("bw_mhz", fmt_f64(topo.bw_mhz)),
            ("sinr_threshold_db", topo.sinr_threshold_db.map_or_else(|| "off".to_string(), fmt_f64)),
            ("beta_alpha", fmt_f64(tr.beta_alpha)),
            ("beta_beta", fmt_f64(tr.beta_beta)),
            ("urllc_horizon_s", fmt_f64(tr.urllc_horizon_s)),
            ("non_urllc_horizon_s", fmt_f64(tr.non_urllc_horizon_s)),
            ("harq_fail_prob", fmt_f64(self.harq_fail_prob)),
            ("max_harq", self.max_harq.to_string()),
            ("rar_grants_per_msg", self.rar_grants_per_msg.to_string()),
            ("cce_total", self.cce_total.to_string()),
            ("cce_per_pdcch", self.cce_per_pdcch.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }

    /// Canonical document; parsing it yields an equal scenario.
    pub fn to_config_text(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Canonical text without the seed; equal for replications of one scenario.
    pub fn fingerprint(&self) -> String {
        self.entries().into_iter().filter(|(k, _)| *k != "seed").map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Applies one `key = value` assignment. `line` is used for error reporting.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let invalid = |reason: String| Error::InvalidValue { line, key: key.to_string(), value: value.to_string(), reason };
        let t = &mut self.base_timing;
        let topo = &mut self.topology;
        let tr = &mut self.traffic;
        match key {
            "n_devices" => self.n_devices = parse(value).map_err(invalid)?,
            "urllc_fraction" => self.urllc_fraction = parse(value).map_err(invalid)?,
            "n_preambles" => self.n_preambles = parse(value).map_err(invalid)?,
            "max_preamble_tx" => self.max_preamble_tx = parse(value).map_err(invalid)?,
            "reserved_r" => {
                self.reserved_r = if value.eq_ignore_ascii_case("dynamic") {
                    ReservedPreambles::Dynamic
                } else {
                    ReservedPreambles::Fixed(parse(value).map_err(invalid)?)
                }
            }
            "enhancements" => {
                self.enhancements = value.parse().map_err(invalid)?;
                if self.enhancements.drp {
                    self.reserved_r = ReservedPreambles::Dynamic;
                }
            }
            "subcarrier_spacing_khz" => {
                self.numerology.subcarrier_spacing =
                    SubcarrierSpacing::from_khz(parse(value).map_err(invalid)?).map_err(|e| invalid(e.to_string()))?
            }
            "symbols_per_slot" => {
                self.numerology.symbols_per_slot =
                    SlotSymbols::from_count(parse(value).map_err(invalid)?).map_err(|e| invalid(e.to_string()))?
            }
            "t_msg1_ms" => t.t_msg1 = parse_ms(value).map_err(invalid)?,
            "t_msg2_ms" => t.t_msg2 = parse_ms(value).map_err(invalid)?,
            "t_msg3_ms" => t.t_msg3 = parse_ms(value).map_err(invalid)?,
            "t_msg4_ms" => t.t_msg4 = parse_ms(value).map_err(invalid)?,
            "ra_period_ms" => t.ra_period = parse_ms(value).map_err(invalid)?,
            "rar_window_ms" => t.rar_window = parse_ms(value).map_err(invalid)?,
            "bi_max_ms" => t.bi_max = parse_ms(value).map_err(invalid)?,
            "contention_resolution_timer_ms" => t.contention_resolution_timer = parse_ms(value).map_err(invalid)?,
            "sib2_period_ms" => t.sib2_period = parse_ms(value).map_err(invalid)?,
            "n_macro_cells" => topo.n_macro_cells = parse(value).map_err(invalid)?,
            "cell_radius_m" => topo.cell_radius_m = parse(value).map_err(invalid)?,
            "n_femto_cells" | "n_femto" => topo.n_femto_cells = parse(value).map_err(invalid)?,
            "femto_radius_m" => topo.femto_radius_m = parse(value).map_err(invalid)?,
            "pl_ref_db" => topo.pl_ref_db = parse(value).map_err(invalid)?,
            "pl_ref_dist_m" => topo.pl_ref_dist_m = parse(value).map_err(invalid)?,
            "pl_exponent" => topo.pl_exponent = parse(value).map_err(invalid)?,
            "p_max_dbm" => topo.p_max_dbm = parse(value).map_err(invalid)?,
            "p_init_target_dbm" => topo.p_init_target_dbm = parse(value).map_err(invalid)?,
            "ramp_step_db" => topo.ramp_step_db = parse(value).map_err(invalid)?,
            "noise_power_dbm" => topo.noise_power_dbm = parse(value).map_err(invalid)?,
            "freq_ghz" => topo.freq_ghz = parse(value).map_err(invalid)?,
            "bw_mhz" => topo.bw_mhz = parse(value).map_err(invalid)?,
            "sinr_threshold_db" => {
                topo.sinr_threshold_db =
                    if value.eq_ignore_ascii_case("off") { None } else { Some(parse(value).map_err(invalid)?) }
            }
            "beta_alpha" => tr.beta_alpha = parse(value).map_err(invalid)?,
            "beta_beta" => tr.beta_beta = parse(value).map_err(invalid)?,
            "urllc_horizon_s" => tr.urllc_horizon_s = parse(value).map_err(invalid)?,
            "non_urllc_horizon_s" => tr.non_urllc_horizon_s = parse(value).map_err(invalid)?,
            "harq_fail_prob" => self.harq_fail_prob = parse(value).map_err(invalid)?,
            "max_harq" => self.max_harq = parse(value).map_err(invalid)?,
            "rar_grants_per_msg" => self.rar_grants_per_msg = parse(value).map_err(invalid)?,
            "cce_total" => self.cce_total = parse(value).map_err(invalid)?,
            "cce_per_pdcch" => self.cce_per_pdcch = parse(value).map_err(invalid)?,
            "seed" => self.seed = parse(value).map_err(invalid)?,
            _ => return Err(Error::UnknownKey { line, key: key.to_string() }),
        }
        Ok(())
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn parse<T: FromStr>(value: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| e.to_string())
}

fn parse_ms(value: &str) -> std::result::Result<Ticks, String> {
    let ms: f64 = parse(value)?;
    if !ms.is_finite() {
        return Err("duration must be finite".into());
    }
    Ok(Ticks::from_ms(ms))
}

/// Splits a document into `(line number, key, value)` triples.
pub fn parse_assignments(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out: Vec<(usize, String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Parse { line, message: format!("expected `key = value`, got `{content}`") });
        };
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(Error::Parse { line, message: format!("malformed key `{key}`") });
        }
        if let Some((prev, _, _)) = out.iter().find(|(_, k, _)| k == key) {
            return Err(Error::Parse { line, message: format!("duplicate key `{key}` (first set on line {prev})") });
        }
        out.push((line, key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Builds a validated scenario from a key-value document; absent keys keep
/// their defaults.
pub fn build_scenario(config_text: &str) -> Result<Scenario> {
    let mut scenario = Scenario::default();
    apply_overrides(&mut scenario, config_text)?;
    Ok(scenario)
}

/// Applies a document on top of an existing scenario and revalidates.
pub fn apply_overrides(scenario: &mut Scenario, config_text: &str) -> Result<()> {
    let assignments = parse_assignments(config_text)?;
    // `enhancements` first so an explicit `reserved_r` is not overwritten by it.
    let explicit_r = assignments.iter().any(|(_, k, _)| k == "reserved_r");
    let (enh, rest): (Vec<_>, Vec<_>) = assignments.into_iter().partition(|(_, k, _)| k == "enhancements");
    for (line, key, value) in enh.into_iter().chain(rest) {
        scenario.set(&key, &value, line)?;
    }
    if !scenario.enhancements.drp && scenario.reserved_r == ReservedPreambles::Dynamic && !explicit_r {
        scenario.reserved_r = ReservedPreambles::Fixed(3);
    }
    scenario.validate()
}
