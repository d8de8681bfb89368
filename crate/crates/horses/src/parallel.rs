//! Replicate-level parallelism for the simulation study. Results are
//! collected in `(model, rep_index)` order, so output does not depend on the
//! thread count or scheduling.

use horses_core::simulation::{model_spec, run_replicate, summarize, ReplicateResult, StudySummary};
use horses_core::tuning::{GridRule, Method};
use horses_core::{Result, SolverConfig};
use rayon::prelude::*;

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "HORSES_THREADS";

/// Worker count from `HORSES_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

pub fn run_study_parallel(
    models: &[u32],
    methods: &[Method],
    reps: usize,
    base_seed: u64,
    rule: &GridRule,
    config: &SolverConfig,
) -> Result<(StudySummary, Vec<ReplicateResult>)> {
    let specs = models
        .iter()
        .map(|&m| model_spec(m))
        .collect::<Result<Vec<_>>>()?;
    let tasks: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|s| (0..reps).map(move |r| (s, r)))
        .collect();
    let work = || {
        tasks
            .par_iter()
            .map(|&(s, r)| run_replicate(&specs[s], r, base_seed, methods, rule, config))
            .collect::<Vec<_>>()
    };
    let results = match threads_from_env() {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(work),
            Err(_) => work(),
        },
        None => work(),
    };
    Ok((summarize(&results), results))
}
