//! Parallel execution of Monte Carlo trials and sweeps.

use rayon::prelude::*;
use wks_core::spectral_sim::McPlan;
use wks_core::TailEstimate;

use crate::error::Result;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "WKS_THREADS";

/// Sizes the global pool from `WKS_THREADS` when set to a positive integer.
pub fn init_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0) {
        // a second initialization (tests) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Runs `trials` trials in parallel; metrics come back in trial order so
/// the result does not depend on scheduling.
pub fn run_trials(plan: &McPlan, eps: f64, trials: u64, seed: u64) -> Result<(TailEstimate, Vec<f64>)> {
    let metrics: Vec<f64> = (0..trials).into_par_iter().map(|i| plan.trial_metric(seed, i)).collect();
    Ok((TailEstimate::from_metrics(&metrics, eps, seed)?, metrics))
}

/// Maps `f` over `items` in parallel, preserving order.
pub fn map<T: Sync, R: Send, F: Fn(&T) -> R + Sync + Send>(items: &[T], f: F) -> Vec<R> {
    items.par_iter().map(f).collect()
}
