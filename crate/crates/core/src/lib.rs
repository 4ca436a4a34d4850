//! `rachsim`: a deterministic system-level simulator of the cellular
//! random-access (RACH) procedure with the uRLLC enhancements early data
//! transmission, reserved and dynamically reserved preambles, enhanced
//! back-off, parallel preambles over dual connectivity and 5G NR flexible
//! numerology.
//!
//! ```no_run
//! use rachsim::{kpi::KpiSummary, scenario::build_scenario};
//!
//! let scenario = build_scenario("enhancements = edt,ebf\nseed = 7").unwrap();
//! let out = rachsim::engine::run(&scenario).unwrap();
//! let report = KpiSummary::from_run(scenario.fingerprint(), scenario.seed, &out).report();
//! println!("{:?}", report.overall.mean_access_delay_ms);
//! ```

pub mod device;
pub mod engine;
pub mod error;
pub mod io;
pub mod kpi;
pub mod replicate;
pub mod rng;
pub mod scenario;
pub mod time;
pub mod topology;
pub mod traffic;
pub mod validation;

pub use error::{Error, Result};
