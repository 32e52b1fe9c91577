//! Host-side companion to `dismap-core`: JSON configuration files, reports,
//! per-worker QASM output, the command-line driver and a thread-parallel
//! optimizer front end.

pub mod cli;
pub mod config;
pub mod emit;
pub mod report;

use dismap_core::circuit::Circuit;
use dismap_core::hardware::SystemConfig;
use dismap_core::optimizer::{OptimizeError, Optimizer, OptimizerOptions, Plan};
use rayon::prelude::*;

/// Same result as [`dismap_core::optimizer::optimize`], with candidates
/// evaluated on a rayon pool. `threads = None` uses every core.
pub fn optimize_parallel(
    circuit: &Circuit,
    config: &SystemConfig,
    opts: &OptimizerOptions,
    threads: Option<usize>,
) -> Result<Plan, OptimizeError> {
    let opt = Optimizer::new(circuit, config, *opts)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        pool = pool.num_threads(t.max(1));
    }
    let pool = pool.build().expect("thread pool builds");
    let evals = pool.install(|| {
        (0..opt.candidates().len())
            .into_par_iter()
            .map(|i| opt.evaluate(i))
            .collect::<Result<Vec<_>, _>>()
    })?;
    opt.finish(evals)
}
