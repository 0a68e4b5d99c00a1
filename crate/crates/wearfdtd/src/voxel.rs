//! Voxel phantoms and field snapshots.
//!
//! Both share one layout: a 16-byte header (4-byte magic, then `nx`, `ny`, `nz` as
//! little-endian `u32`) followed by `nx·ny·nz` samples in x-fastest order. Phantoms store
//! `u8` tissue IDs with a sidecar text file of `id name` lines; snapshots store
//! little-endian `f32`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use wearfdtd_core::scene::{Axis, VoxelGrid, VoxelPhantom};
use wearfdtd_core::solver::RunRecord;

use crate::error::{Error, Result};

pub const PHANTOM_MAGIC: [u8; 4] = *b"WVOX";
pub const SNAPSHOT_MAGIC: [u8; 4] = *b"WFLD";
const HEADER: usize = 16;

fn header(magic: [u8; 4], dims: [usize; 3]) -> Result<[u8; HEADER]> {
    let mut h = [0u8; HEADER];
    h[..4].copy_from_slice(&magic);
    for a in 0..3 {
        let n = u32::try_from(dims[a]).map_err(|_| Error::Usage(format!("dimension {} too large", dims[a])))?;
        h[4 + 4 * a..8 + 4 * a].copy_from_slice(&n.to_le_bytes());
    }
    Ok(h)
}

fn parse_header(path: &Path, bytes: &[u8], magic: [u8; 4], sample: usize) -> Result<[usize; 3]> {
    if bytes.len() < HEADER {
        return Err(Error::parse(path, None, format!("file is {} bytes, shorter than the header", bytes.len())));
    }
    if bytes[..4] != magic {
        return Err(Error::parse(
            path,
            None,
            format!("bad magic {:?}, expected {:?}", &bytes[..4], std::str::from_utf8(&magic).unwrap_or("?")),
        ));
    }
    let mut dims = [0usize; 3];
    for a in 0..3 {
        let mut w = [0u8; 4];
        w.copy_from_slice(&bytes[4 + 4 * a..8 + 4 * a]);
        dims[a] = u32::from_le_bytes(w) as usize;
    }
    let expected = dims
        .iter()
        .try_fold(sample, |acc, &d| acc.checked_mul(d))
        .and_then(|n| n.checked_add(HEADER))
        .ok_or_else(|| Error::parse(path, None, "dimensions overflow"))?;
    if bytes.len() != expected {
        return Err(Error::parse(
            path,
            None,
            format!(
                "{}x{}x{} samples need {expected} bytes, file has {}",
                dims[0],
                dims[1],
                dims[2],
                bytes.len()
            ),
        ));
    }
    Ok(dims)
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Sidecar path used when a scene names none: `<voxel path>.map`.
pub fn default_map_path(voxel: &Path) -> PathBuf {
    let mut s = voxel.as_os_str().to_owned();
    s.push(".map");
    PathBuf::from(s)
}

/// Parse `id name` lines; `#` starts a comment.
pub fn parse_tissue_map(path: &Path, text: &str) -> Result<BTreeMap<u8, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(id), Some(name), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::parse(path, Some(i + 1), "expected `id tissue_name`"));
        };
        let id: u8 = id
            .parse()
            .map_err(|_| Error::parse(path, Some(i + 1), format!("`{id}` is not an ID in 0..=255")))?;
        if map.insert(id, name.to_string()).is_some() {
            return Err(Error::parse(path, Some(i + 1), format!("ID {id} mapped twice")));
        }
    }
    Ok(map)
}

pub fn read_phantom(path: &Path, map_path: &Path, pitch_mm: f64) -> Result<VoxelPhantom> {
    let bytes = read(path)?;
    let dims = parse_header(path, &bytes, PHANTOM_MAGIC, 1)?;
    let text = std::fs::read_to_string(map_path).map_err(|e| Error::io(map_path, e))?;
    let tissue_map = parse_tissue_map(map_path, &text)?;
    Ok(VoxelPhantom {
        dims,
        pitch_mm,
        ids: bytes[HEADER..].to_vec(),
        tissue_map,
    })
}

pub fn write_phantom(path: &Path, map_path: &Path, phantom: &VoxelPhantom) -> Result<()> {
    let mut bytes = header(PHANTOM_MAGIC, phantom.dims)?.to_vec();
    bytes.extend_from_slice(&phantom.ids);
    write(path, &bytes)?;
    let mut text = String::new();
    for (id, name) in &phantom.tissue_map {
        text.push_str(&format!("{id} {name}\n"));
    }
    write(map_path, text.as_bytes())
}

/// A real-valued volume in snapshot layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub dims: [usize; 3],
    pub values: Vec<f32>,
}

impl Snapshot {
    pub fn encode(&self) -> Result<Vec<u8>> {
        let mut bytes = Vec::with_capacity(HEADER + 4 * self.values.len());
        bytes.write_all(&header(SNAPSHOT_MAGIC, self.dims)?).expect("vec write");
        for v in &self.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        Ok(bytes)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write(path, &self.encode()?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = read(path)?;
        let dims = parse_header(path, &bytes, SNAPSHOT_MAGIC, 4)?;
        let values = bytes[HEADER..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Ok(Self { dims, values })
    }
}

/// SAR (or any per-cell quantity, `k` fastest) reordered into snapshot layout.
pub fn cell_snapshot(dims: [usize; 3], cells: &[f64]) -> Snapshot {
    let [nx, ny, nz] = dims;
    let mut values = Vec::with_capacity(nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                values.push(cells[(i * ny + j) * nz + k] as f32);
            }
        }
    }
    Snapshot { dims, values }
}

/// Peak amplitude `|E_axis|` on every edge of one orientation at DFT index `fi`.
///
/// Edges the recorder skipped (conductors, or lossless edges when only lossy ones were
/// kept) read as zero.
pub fn field_snapshot(record: &RunRecord, grid: &VoxelGrid, axis: Axis, fi: usize) -> Result<Snapshot> {
    let vol = record
        .volume
        .as_ref()
        .ok_or_else(|| Error::Usage("the run kept no volume fields".to_string()))?;
    let a = axis.index();
    let mut dims = [grid.dims[0] + 1, grid.dims[1] + 1, grid.dims[2] + 1];
    dims[a] -= 1;
    let [sx, sy, _] = grid.node_strides();
    let mut values = vec![0f32; dims[0] * dims[1] * dims[2]];
    for (&node, e) in vol.edges[a].iter().zip(&vol.values[fi][a]) {
        let node = node as usize;
        let (i, j, k) = (node / sx, (node % sx) / sy, node % sy);
        values[i + dims[0] * (j + dims[1] * k)] = e.norm() as f32;
    }
    Ok(Snapshot { dims, values })
}
