//! File formats, study orchestration and the command-line tool around [`wearfdtd_core`].
//!
//! * [`config`]: TOML scene, solver and study files with unit-suffixed quantities.
//! * [`voxel`]: binary voxel phantoms and field snapshots.
//! * [`measurements`]: measured-resonance CSV.
//! * [`cache`]: run records on disk, keyed by a content hash.
//! * [`report`]: CSV/JSON report bundles with a manifest.
//! * [`cli`]: the `wearfdtd` command.

pub use wearfdtd_core as core;

pub mod cache;
pub mod cli;
pub mod config;
mod error;
pub mod measurements;
pub mod presets;
pub mod report;
pub mod runner;
pub mod units;
pub mod voxel;

pub use error::{Error, ExitClass, Result};
