//! Seed replications. Runs are independent and execute in parallel; results
//! always come back in seed order.

use rayon::prelude::*;

use crate::engine::{run_with, RunOptions, RunOutput};
use crate::error::Result;
use crate::kpi::KpiSummary;
use crate::scenario::Scenario;

/// Runs `scenario` once per seed.
pub fn run_seeds(scenario: &Scenario, seeds: &[u64], opts: RunOptions) -> Result<Vec<(u64, RunOutput)>> {
    seeds.par_iter().map(|&seed| Ok((seed, run_with(&scenario.with_seed(seed), opts)?))).collect()
}

/// Per-seed KPI summaries, in seed order, without keeping the runs.
pub fn summarize_seeds(scenario: &Scenario, seeds: &[u64]) -> Result<Vec<KpiSummary>> {
    let fingerprint = scenario.fingerprint();
    seeds
        .par_iter()
        .map(|&seed| {
            let out = run_with(&scenario.with_seed(seed), RunOptions::default())?;
            Ok(KpiSummary::from_run(fingerprint.clone(), seed, &out))
        })
        .collect()
}

/// Pooled summary over `seeds`.
pub fn pooled(scenario: &Scenario, seeds: &[u64]) -> Result<KpiSummary> {
    KpiSummary::merge_all(&summarize_seeds(scenario, seeds)?)
}

/// `first..first+n`.
pub fn seed_range(first: u64, n: u64) -> Vec<u64> {
    (first..first + n).collect()
}
