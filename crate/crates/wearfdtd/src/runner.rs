//! Running the solver with an optional record cache and a fixed thread count.

use wearfdtd_core::dielectrics::TissueDatabase;
use wearfdtd_core::scene::VoxelGrid;
use wearfdtd_core::solver::{run, RunRecord, SimConfig};
use wearfdtd_core::study::{run_study, ScenarioSet, Study};

use crate::cache::RecordCache;
use crate::error::{Error, Result};

/// Run `f` on a pool of `threads` workers (`0` picks the machine default) and report the
/// pool size it used.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<(T, usize)> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {threads} threads: {e}")))?;
    Ok(pool.install(|| (f(), rayon::current_num_threads())))
}

/// One solver run, served from `cache` when present.
pub fn run_record(grid: &VoxelGrid, config: &SimConfig, cache: Option<&RecordCache>) -> Result<RunRecord> {
    match cache {
        Some(c) => c.get_or_run(grid, config, || run(grid, config)),
        None => Ok(run(grid, config)?),
    }
}

/// Every placement of `set`, one after another, each reusing cached records.
///
/// `progress` receives each placement name and grid size before it runs.
pub fn run_set(
    set: &ScenarioSet,
    db: &TissueDatabase,
    cache: Option<&RecordCache>,
    mut progress: impl FnMut(&str, [usize; 3]),
) -> Result<Study> {
    let mut cache_error = None;
    let study = run_study(set, db, |p, grid, config| {
        progress(&p.name, grid.dims);
        match run_record(grid, config, cache) {
            Ok(r) => Ok(r),
            Err(Error::Core(e)) => Err(e),
            Err(e) => {
                let msg = e.to_string();
                cache_error = Some(e);
                Err(wearfdtd_core::Error::Data(msg))
            }
        }
    })?;
    if let Some(e) = cache_error {
        return Err(e);
    }
    Ok(study)
}
