//! Cell layout, device placement and the PHY abstraction: log-distance
//! path loss, open-loop power ramping and uplink SINR.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Rotates about `center` by `angle` radians.
    pub fn rotate_about(&self, center: &Point, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        let dx = self.x - center.x;
        let dy = self.y - center.y;
        Point::new(center.x + c * dx - s * dy, center.y + s * dx + c * dy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyConfig {
    pub n_macro_cells: usize,
    pub cell_radius_m: f64,
    pub n_femto_cells: usize,
    pub femto_radius_m: f64,
    pub pl_ref_db: f64,
    pub pl_ref_dist_m: f64,
    pub pl_exponent: f64,
    pub p_max_dbm: f64,
    pub p_init_target_dbm: f64,
    pub ramp_step_db: f64,
    pub noise_power_dbm: f64,
    pub freq_ghz: f64,
    pub bw_mhz: f64,
    /// When set, a sole preamble whose SINR falls below this is not detected.
    pub sinr_threshold_db: Option<f64>,
}

/// Thermal noise over `bw_mhz` with a 0 dB noise figure.
pub fn thermal_noise_dbm(bw_mhz: f64) -> f64 {
    -174.0 + 10.0 * (bw_mhz * 1e6).log10()
}

impl Default for TopologyConfig {
    fn default() -> Self {
        TopologyConfig {
            n_macro_cells: 3,
            cell_radius_m: 50.0,
            n_femto_cells: 0,
            femto_radius_m: 10.0,
            pl_ref_db: 63.57,
            pl_ref_dist_m: 15.0,
            pl_exponent: 3.44,
            p_max_dbm: 14.0,
            p_init_target_dbm: -104.0,
            ramp_step_db: 2.0,
            noise_power_dbm: thermal_noise_dbm(5.0),
            freq_ghz: 2.6,
            bw_mhz: 5.0,
            sinr_threshold_db: None,
        }
    }
}

impl TopologyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.n_macro_cells) {
            return Err(Error::Constraint(format!("n_macro_cells must be 1..=3, got {}", self.n_macro_cells)));
        }
        if !(self.cell_radius_m > 0.0) {
            return Err(Error::Constraint("cell_radius_m must be > 0".into()));
        }
        if !(self.femto_radius_m > 0.0 && self.femto_radius_m < self.cell_radius_m) {
            return Err(Error::Constraint("femto_radius_m must be in (0, cell_radius_m)".into()));
        }
        if !(self.pl_exponent > 0.0) {
            return Err(Error::Constraint("pl_exponent must be > 0".into()));
        }
        if !(self.pl_ref_dist_m > 0.0) {
            return Err(Error::Constraint("pl_ref_dist_m must be > 0".into()));
        }
        if !(self.ramp_step_db >= 0.0) {
            return Err(Error::Constraint("ramp_step_db must be >= 0".into()));
        }
        Ok(())
    }

    /// Distance between adjacent macro sites.
    pub fn inter_site_distance(&self) -> f64 {
        2.0 * self.cell_radius_m * (PI / 6.0).cos()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellLayout {
    pub macro_centers: Vec<Point>,
    pub femto_centers: Vec<Point>,
    pub cell_radius_m: f64,
    pub femto_radius_m: f64,
}

impl CellLayout {
    pub fn n_macro(&self) -> usize {
        self.macro_centers.len()
    }

    /// Total receivers: macro gNBs first, then femto gNBs.
    pub fn n_gnbs(&self) -> usize {
        self.macro_centers.len() + self.femto_centers.len()
    }

    /// gNB index of femto cell `f`.
    pub fn femto_gnb(&self, f: usize) -> usize {
        self.macro_centers.len() + f
    }

    pub fn gnb_position(&self, gnb: usize) -> Point {
        if gnb < self.macro_centers.len() {
            self.macro_centers[gnb]
        } else {
            self.femto_centers[gnb - self.macro_centers.len()]
        }
    }

    pub fn nearest_macro(&self, p: &Point) -> usize {
        nearest(&self.macro_centers, p).expect("layout has at least one macro cell")
    }

    pub fn covering_femto(&self, p: &Point) -> Option<usize> {
        nearest(&self.femto_centers, p).filter(|&f| self.femto_centers[f].distance(p) <= self.femto_radius_m)
    }

    fn in_macro_coverage(&self, p: &Point) -> bool {
        self.macro_centers.iter().any(|c| c.distance(p) <= self.cell_radius_m)
    }
}

/// Index of the closest point; ties go to the lower index.
fn nearest(points: &[Point], p: &Point) -> Option<usize> {
    points
        .iter()
        .enumerate()
        .map(|(i, c)| (i, c.distance(p)))
        .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
            Some((_, bd)) if bd <= d => best,
            _ => Some((i, d)),
        })
        .map(|(i, _)| i)
}

/// Hexagonal macro sites (up to three mutually adjacent cells) plus
/// femto sites uniform over the union of the macro discs.
pub fn build_layout(cfg: &TopologyConfig, rng: &mut StreamRng) -> CellLayout {
    let d = cfg.inter_site_distance();
    let macro_centers: Vec<Point> = [Point::new(0.0, 0.0), Point::new(d, 0.0), Point::new(d / 2.0, d * (PI / 3.0).sin())]
        .into_iter()
        .take(cfg.n_macro_cells)
        .collect();
    let mut layout =
        CellLayout { macro_centers, femto_centers: Vec::new(), cell_radius_m: cfg.cell_radius_m, femto_radius_m: cfg.femto_radius_m };

    let r = cfg.cell_radius_m;
    let (min_x, max_x) = bounds(layout.macro_centers.iter().map(|c| c.x), r);
    let (min_y, max_y) = bounds(layout.macro_centers.iter().map(|c| c.y), r);
    while layout.femto_centers.len() < cfg.n_femto_cells {
        let p = Point::new(rng.random_range(min_x..max_x), rng.random_range(min_y..max_y));
        if layout.in_macro_coverage(&p) {
            layout.femto_centers.push(p);
        }
    }
    layout
}

fn bounds(values: impl Iterator<Item = f64>, pad: f64) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    (lo - pad, hi + pad)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub position: Point,
    pub serving_cell: usize,
    pub femto_cell: Option<usize>,
}

/// Device `k` is dropped uniformly in the disc of macro cell `k mod n_macro`;
/// it is then served by the nearest macro site and by the nearest femto site
/// whose disc contains it.
pub fn place_devices(n: usize, layout: &CellLayout, rng: &mut StreamRng) -> Vec<Placement> {
    (0..n)
        .map(|k| {
            let center = layout.macro_centers[k % layout.n_macro()];
            let radius = layout.cell_radius_m * rng.random::<f64>().sqrt();
            let angle = 2.0 * PI * rng.random::<f64>();
            let position = Point::new(center.x + radius * angle.cos(), center.y + radius * angle.sin());
            Placement { position, serving_cell: layout.nearest_macro(&position), femto_cell: layout.covering_femto(&position) }
        })
        .collect()
}

/// Log-distance path loss; distances below the reference are clamped to it.
pub fn path_loss_db(d: f64, cfg: &TopologyConfig) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("path loss distance must be > 0, got {d}")));
    }
    let d = d.max(cfg.pl_ref_dist_m);
    Ok(cfg.pl_ref_db + 10.0 * cfg.pl_exponent * (d / cfg.pl_ref_dist_m).log10())
}

/// `min(P_max, PL + P_init + (C - 1) * step)` for attempt `C >= 1`.
pub fn ramped_tx_power_dbm(pl_db: f64, attempt: u32, cfg: &TopologyConfig) -> Result<f64> {
    if attempt < 1 {
        return Err(Error::Domain("attempt count must be >= 1".into()));
    }
    Ok(cfg.p_max_dbm.min(pl_db + cfg.p_init_target_dbm + (attempt - 1) as f64 * cfg.ramp_step_db))
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// SINR in dB from received powers in dBm. Interferers are summed in
/// ascending order so the result does not depend on their order.
pub fn sinr_db(received_dbm: f64, interferers_dbm: &[f64], noise_dbm: f64) -> f64 {
    let mut linear: Vec<f64> = interferers_dbm.iter().map(|&p| dbm_to_mw(p)).collect();
    linear.sort_by(f64::total_cmp);
    let interference: f64 = linear.iter().sum();
    10.0 * (dbm_to_mw(received_dbm) / (dbm_to_mw(noise_dbm) + interference)).log10()
}

/// One Msg-1 transmitter in an RA subframe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmitter {
    pub position: Point,
    pub serving_cell: usize,
    pub tx_power_dbm: f64,
}

/// Uplink SINR of `target` at its serving macro gNB. Transmitters served by
/// other cells interfere; same-cell preambles are orthogonal and do not.
pub fn uplink_sinr_db(target: &Transmitter, concurrent: &[Transmitter], layout: &CellLayout, cfg: &TopologyConfig) -> Result<f64> {
    let gnb = layout.macro_centers[target.serving_cell];
    let rx = target.tx_power_dbm - path_loss_db(target.position.distance(&gnb).max(f64::MIN_POSITIVE), cfg)?;
    let interferers = concurrent
        .iter()
        .filter(|t| t.serving_cell != target.serving_cell)
        .map(|t| Ok(t.tx_power_dbm - path_loss_db(t.position.distance(&gnb).max(f64::MIN_POSITIVE), cfg)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(sinr_db(rx, &interferers, cfg.noise_power_dbm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{RandomSource, Stream};

    fn rng(seed: u64) -> StreamRng {
        RandomSource::new(seed).stream(Stream::Layout)
    }

    #[test]
    fn path_loss_reference_points() {
        let cfg = TopologyConfig::default();
        assert_eq!(path_loss_db(15.0, &cfg).unwrap(), 63.57);
        assert!((path_loss_db(150.0, &cfg).unwrap() - 97.97).abs() < 1e-9);
        assert_eq!(path_loss_db(10.0, &cfg).unwrap(), 63.57);
        assert!(path_loss_db(0.0, &cfg).is_err());
        assert!(path_loss_db(-3.0, &cfg).is_err());
    }

    #[test]
    fn ramping_examples() {
        let cfg = TopologyConfig::default();
        assert_eq!(ramped_tx_power_dbm(90.0, 1, &cfg).unwrap(), -14.0);
        assert_eq!(ramped_tx_power_dbm(90.0, 10, &cfg).unwrap(), 4.0);
        for c in 1..=10 {
            assert_eq!(ramped_tx_power_dbm(130.0, c, &cfg).unwrap(), 14.0);
        }
        assert!(ramped_tx_power_dbm(90.0, 0, &cfg).is_err());
    }

    #[test]
    fn noise_default_is_thermal_over_5mhz() {
        assert!((TopologyConfig::default().noise_power_dbm - (-107.0103)).abs() < 1e-3);
    }

    #[test]
    fn sinr_examples() {
        assert!((sinr_db(-90.0, &[], -110.0) - 20.0).abs() < 0.05);
        let clean = sinr_db(-90.0, &[], -110.0);
        let one = sinr_db(-90.0, &[-110.0], -110.0);
        assert!((clean - one - 10.0 * 2f64.log10()).abs() < 1e-9);
        let a = sinr_db(-80.0, &[-101.0, -95.5, -120.0, -99.0], -107.0);
        let b = sinr_db(-80.0, &[-99.0, -120.0, -101.0, -95.5], -107.0);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn uplink_sinr_ignores_same_cell() {
        let cfg = TopologyConfig::default();
        let layout = build_layout(&cfg, &mut rng(1));
        let target = Transmitter { position: Point::new(15.0, 0.0), serving_cell: 0, tx_power_dbm: 0.0 };
        let same = Transmitter { position: Point::new(-15.0, 0.0), serving_cell: 0, tx_power_dbm: 14.0 };
        let other = Transmitter { position: Point::new(70.0, 0.0), serving_cell: 1, tx_power_dbm: 14.0 };
        let alone = uplink_sinr_db(&target, &[], &layout, &cfg).unwrap();
        assert!((alone - (0.0 - 63.57 - cfg.noise_power_dbm)).abs() < 1e-9);
        assert_eq!(uplink_sinr_db(&target, &[same], &layout, &cfg).unwrap(), alone);
        assert!(uplink_sinr_db(&target, &[same, other], &layout, &cfg).unwrap() < alone);
    }

    #[test]
    fn layout_is_hexagonal() {
        let cfg = TopologyConfig::default();
        let layout = build_layout(&cfg, &mut rng(3));
        assert_eq!(layout.macro_centers.len(), 3);
        assert!(layout.femto_centers.is_empty());
        let d = cfg.inter_site_distance();
        for i in 0..3 {
            for j in i + 1..3 {
                assert!((layout.macro_centers[i].distance(&layout.macro_centers[j]) - d).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn femto_sites_inside_macro_coverage() {
        let cfg = TopologyConfig { n_femto_cells: 10, ..TopologyConfig::default() };
        let layout = build_layout(&cfg, &mut rng(5));
        assert_eq!(layout.femto_centers.len(), 10);
        for f in &layout.femto_centers {
            assert!(layout.macro_centers.iter().any(|c| c.distance(f) <= 50.0));
        }
        assert_eq!(layout, build_layout(&cfg, &mut rng(5)));
    }

    #[test]
    fn placement_within_cell_radius() {
        let cfg = TopologyConfig::default();
        let layout = build_layout(&cfg, &mut rng(1));
        assert!(place_devices(0, &layout, &mut rng(2)).is_empty());
        let placed = place_devices(5000, &layout, &mut rng(2));
        assert_eq!(placed.len(), 5000);
        for p in &placed {
            assert!(p.position.distance(&layout.macro_centers[p.serving_cell]) <= 50.0 + 1e-9);
            assert!(p.femto_cell.is_none());
        }
    }

    #[test]
    fn femto_coverage_matches_area_ratio() {
        let cfg = TopologyConfig { n_femto_cells: 12, ..TopologyConfig::default() };
        let expected = 12.0 * cfg.femto_radius_m.powi(2) / (3.0 * cfg.cell_radius_m.powi(2));
        // Average over several layouts; a single draw of 12 sites is noisy.
        let mut covered = 0usize;
        let mut total = 0usize;
        for seed in 0..20 {
            let layout = build_layout(&cfg, &mut rng(seed));
            let placed = place_devices(5000, &layout, &mut RandomSource::new(seed).stream(Stream::Placement));
            covered += placed.iter().filter(|p| p.femto_cell.is_some()).count();
            total += placed.len();
        }
        let frac = covered as f64 / total as f64;
        assert!((frac - expected).abs() < 0.03, "covered {frac}, area ratio {expected}");
    }

    #[test]
    fn cell_membership_survives_rotation() {
        let cfg = TopologyConfig::default();
        let layout = build_layout(&cfg, &mut rng(11));
        let placed = place_devices(2000, &layout, &mut rng(12));
        let pivot = layout.macro_centers[0];
        let angle = PI / 3.0;
        let rotated = CellLayout {
            macro_centers: layout.macro_centers.iter().map(|c| c.rotate_about(&pivot, angle)).collect(),
            ..layout.clone()
        };
        for p in &placed {
            let q = p.position.rotate_about(&pivot, angle);
            assert_eq!(rotated.nearest_macro(&q), p.serving_cell);
        }
    }
}
