//! Replications fanned out over a rayon pool. Streams are addressed by
//! replication index and outcomes are reduced in index order, so the result
//! equals [`mixfbm_core::harness::run_experiment`] bit for bit.

use mixfbm_core::harness::{CellRunner, CellSummary, ExperimentConfig};
use mixfbm_core::Result;
use rayon::prelude::*;

pub fn run_cell(runner: &CellRunner<'_>, replications: usize) -> Result<CellSummary> {
    let outcomes = (0..replications)
        .into_par_iter()
        .map(|r| runner.replicate(r))
        .collect::<Result<Vec<_>>>()?;
    Ok(runner.summarize(&outcomes))
}

/// `progress` is called after each finished cell.
pub fn run_experiment<F: FnMut(&CellSummary)>(cfg: &ExperimentConfig, mut progress: F) -> Result<Vec<CellSummary>> {
    cfg.validate()?;
    cfg.cells()
        .into_iter()
        .map(|spec| {
            let runner = CellRunner::new(cfg, spec)?;
            let summary = run_cell(&runner, cfg.replications)?;
            progress(&summary);
            Ok(summary)
        })
        .collect()
}
