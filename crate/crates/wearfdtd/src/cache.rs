//! On-disk cache of run records, keyed by a hash of the grid and solver configuration.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use wearfdtd_core::scene::VoxelGrid;
use wearfdtd_core::solver::{RunRecord, SimConfig};

use crate::error::{Error, Result};

/// Content hash of everything that determines a run.
pub fn key(grid: &VoxelGrid, config: &SimConfig) -> String {
    let mut h = Sha256::new();
    h.update(concat!("wearfdtd-record ", env!("CARGO_PKG_VERSION"), "\n"));
    // `{:?}` prints floats in shortest round-trip form, so equal inputs hash equally.
    h.update(format!("{config:?}\n").as_bytes());
    h.update(format!("{:?} {:?} {:?}\n", grid.dims, grid.dx_mm, grid.origin_mm).as_bytes());
    h.update(format!("{:?}\n{:?}\n{:?}\n", grid.materials, grid.port, grid.loads).as_bytes());
    for c in &grid.cells {
        h.update(c.to_le_bytes());
    }
    for axis in &grid.pec {
        let bits: Vec<u8> = axis.iter().map(|&b| u8::from(b)).collect();
        h.update(&bits);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone)]
pub struct RecordCache {
    dir: PathBuf,
}

impl RecordCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.bin"))
    }

    pub fn load(&self, key: &str) -> Result<Option<RunRecord>> {
        let path = self.path(key);
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(path, e)),
        };
        bincode::deserialize(&bytes).map(Some).map_err(|e| Error::Cache {
            path,
            message: e.to_string(),
        })
    }

    pub fn store(&self, key: &str, record: &RunRecord) -> Result<()> {
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let bytes = bincode::serialize(record).map_err(|e| Error::Cache {
            path: self.path(key),
            message: e.to_string(),
        })?;
        let tmp = self.dir.join(format!("{key}.tmp"));
        std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, self.path(key)).map_err(|e| Error::io(self.path(key), e))
    }

    /// The cached record for `(grid, config)`, running `run` on a miss.
    pub fn get_or_run<F>(&self, grid: &VoxelGrid, config: &SimConfig, run: F) -> Result<RunRecord>
    where
        F: FnOnce() -> wearfdtd_core::Result<RunRecord>,
    {
        let k = key(grid, config);
        if let Some(r) = self.load(&k)? {
            return Ok(r);
        }
        let r = run()?;
        self.store(&k, &r)?;
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use wearfdtd_core::dielectrics::MaterialSpec;
    use wearfdtd_core::scene::{rasterize, Aabb, Axis, PortSpec, Scene};
    use wearfdtd_core::solver::run;

    fn tiny() -> (VoxelGrid, SimConfig) {
        let mut s = Scene::new();
        s.add_solid(Aabb::new([0.0; 3], [2.0; 3]), MaterialSpec::dielectric("d", 2.0, 0.1, 1000.0).unwrap());
        s.set_port(PortSpec {
            position: [1.0, 1.0, 1.0],
            axis: Axis::Z,
            positive: true,
            impedance: 50.0,
        });
        let g = rasterize(&s, 1.0, 12, 12, 1_000_000).unwrap();
        let c = SimConfig {
            max_steps: 40,
            huygens: false,
            ..SimConfig::default()
        };
        (g, c)
    }

    #[test]
    fn key_tracks_inputs() {
        let (g, c) = tiny();
        assert_eq!(key(&g, &c), key(&g, &c));
        let mut c2 = c.clone();
        c2.max_steps += 1;
        assert_ne!(key(&g, &c), key(&g, &c2));
        let mut g2 = g.clone();
        g2.cells[0] = 1;
        assert_ne!(key(&g, &c), key(&g2, &c));
    }

    #[test]
    fn round_trip_and_hit() {
        let dir = tempfile::tempdir().unwrap();
        let cache = RecordCache::new(dir.path());
        let (g, c) = tiny();
        let first = cache.get_or_run(&g, &c, || run(&g, &c)).unwrap();
        let second = cache
            .get_or_run(&g, &c, || panic!("cache miss on the second lookup"))
            .unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn corrupt_entry_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let cache = RecordCache::new(dir.path());
        std::fs::write(dir.path().join("abc.bin"), b"junk").unwrap();
        assert!(matches!(cache.load("abc"), Err(Error::Cache { .. })));
        assert!(cache.load("missing").unwrap().is_none());
    }
}
