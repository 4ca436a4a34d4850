//! Arrival-time generation: a Beta-shaped burst for uRLLC devices and a
//! uniform spread for background devices.

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::device::DeviceClass;
use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::time::Ticks;

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficConfig {
    pub beta_alpha: f64,
    pub beta_beta: f64,
    pub urllc_horizon_s: f64,
    pub non_urllc_horizon_s: f64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig { beta_alpha: 3.0, beta_beta: 4.0, urllc_horizon_s: 10.0, non_urllc_horizon_s: 30.0 }
    }
}

impl TrafficConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta_alpha > 0.0 && self.beta_beta > 0.0) {
            return Err(Error::Constraint("beta shape parameters must be > 0".into()));
        }
        if !(self.urllc_horizon_s > 0.0 && self.non_urllc_horizon_s > 0.0) {
            return Err(Error::Constraint("arrival horizons must be > 0".into()));
        }
        Ok(())
    }
}

pub fn beta_sample(alpha: f64, beta: f64, rng: &mut StreamRng) -> Result<f64> {
    let dist = Beta::new(alpha, beta).map_err(|e| Error::Domain(format!("beta({alpha}, {beta}): {e}")))?;
    Ok(dist.sample(rng))
}

/// One arrival per device, in device order.
pub fn generate_arrivals(classes: &[DeviceClass], cfg: &TrafficConfig, rng: &mut StreamRng) -> Result<Vec<Ticks>> {
    let beta = Beta::new(cfg.beta_alpha, cfg.beta_beta).map_err(|e| Error::Domain(format!("arrival beta: {e}")))?;
    let urllc_ms = cfg.urllc_horizon_s * 1000.0;
    let non_urllc_ms = cfg.non_urllc_horizon_s * 1000.0;
    Ok(classes
        .iter()
        .map(|class| match class {
            DeviceClass::Urllc => Ticks::from_ms(beta.sample(rng) * urllc_ms),
            DeviceClass::NonUrllc => Ticks::from_ms(rng.random::<f64>() * non_urllc_ms),
        })
        .collect())
}
