//! Specific absorption rate: point values, cube averages, limits and the figure of merit.
//!
//! Cube averaging works on integers. Each tissue cell's mass and absorbed power are
//! quantized once to multiples of a fixed quantum ([`Quantized`]); every cube sum after
//! that is exact, so the prefix-sum search, a brute-force enumeration and any parallel
//! split all agree bit for bit.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::analysis::{cell_losses, port_power};
use crate::consts::MM;
use crate::scene::VoxelGrid;
use crate::solver::RunRecord;
use crate::{Error, Result};

/// SAR limit for the head and trunk, W/kg (10 g average).
pub const TRUNK_LIMIT: f64 = 2.0;
/// SAR limit for the limbs, W/kg (10 g average).
pub const LIMB_LIMIT: f64 = 4.0;

/// Local SAR `½σ|E|²/ρ` for a peak-amplitude field, W/kg.
pub fn local_sar(sigma: f64, e_peak: f64, density: f64) -> f64 {
    0.5 * sigma * e_peak * e_peak / density
}

/// Per-cell SAR over a grid; zero outside tissue.
#[derive(Debug, Clone, PartialEq)]
pub struct SarField {
    pub dims: [usize; 3],
    pub dx_mm: f64,
    pub frequency: f64,
    /// Accepted port power the values are scaled to, W.
    pub normalization: f64,
    /// W/kg, `k` fastest.
    pub sar: Vec<f64>,
    /// Tissue density per cell, kg/m³; zero outside tissue.
    pub density: Vec<f64>,
}

impl SarField {
    pub fn cell_volume(&self) -> f64 {
        libm::pow(self.dx_mm * MM, 3.0)
    }

    pub fn cell_index(&self, c: [usize; 3]) -> usize {
        (c[0] * self.dims[1] + c[1]) * self.dims[2] + c[2]
    }

    pub fn cell_of(&self, idx: usize) -> [usize; 3] {
        let nz = self.dims[2];
        let ny = self.dims[1];
        [idx / (ny * nz), (idx / nz) % ny, idx % nz]
    }

    /// `Σ SAR·ρ·dV` over tissue: the absorbed power, W.
    pub fn absorbed_power(&self) -> f64 {
        let dv = self.cell_volume();
        self.sar.iter().zip(&self.density).map(|(s, r)| s * r * dv).sum()
    }

    pub fn tissue_mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.cell_volume()
    }

    /// Largest point SAR and its cell, or `None` without tissue.
    pub fn max_point(&self) -> Option<(f64, [usize; 3])> {
        let mut best: Option<(f64, usize)> = None;
        for (i, (&s, &r)) in self.sar.iter().zip(&self.density).enumerate() {
            if r > 0.0 && best.is_none_or(|(b, _)| s > b) {
                best = Some((s, i));
            }
        }
        best.map(|(s, i)| (s, self.cell_of(i)))
    }
}

/// Point SAR from a run, scaled so the port accepts `normalize_to` watts at `f`.
pub fn point_sar(record: &RunRecord, grid: &VoxelGrid, f: f64, normalize_to: f64) -> Result<SarField> {
    let fi = record
        .frequency_index(f)
        .ok_or_else(|| Error::Missing(format!("no DFT recorded at {f} Hz")))?;
    if !(normalize_to > 0.0) {
        return Err(Error::InvalidArgument("normalization power must be positive".to_string()));
    }
    let p_in = port_power(record, f);
    if !(p_in > 0.0) {
        return Err(Error::DegenerateBudget);
    }
    let losses = cell_losses(record, grid, fi)?;
    sar_from_losses(grid, &losses, normalize_to / p_in, f, normalize_to)
}

/// Point SAR from raw per-cell dissipated power multiplied by `scale`.
pub fn sar_from_losses(
    grid: &VoxelGrid,
    losses: &[f64],
    scale: f64,
    frequency: f64,
    normalization: f64,
) -> Result<SarField> {
    if losses.len() != grid.cell_count() {
        return Err(Error::InvalidArgument("loss volume does not match the grid".to_string()));
    }
    let dv = libm::pow(grid.dx_mm * MM, 3.0);
    let mut tissue_density = vec![0.0; grid.materials.len()];
    for (m, spec) in grid.materials.iter().enumerate() {
        if spec.is_tissue() {
            if !(spec.density > 0.0) {
                return Err(Error::Data(format!("tissue `{}` has non-positive density", spec.name)));
            }
            tissue_density[m] = spec.density;
        }
    }
    let mut sar = vec![0.0; losses.len()];
    let mut density = vec![0.0; losses.len()];
    for (ci, &p) in losses.iter().enumerate() {
        let rho = tissue_density[grid.cells[ci] as usize];
        if rho > 0.0 {
            density[ci] = rho;
            sar[ci] = p * scale / (rho * dv);
        }
    }
    Ok(SarField {
        dims: grid.dims,
        dx_mm: grid.dx_mm,
        frequency,
        normalization,
        sar,
        density,
    })
}

/// Per-cell mass and absorbed power as integer multiples of two quanta.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantized {
    pub dims: [usize; 3],
    pub mass: Vec<u64>,
    pub power: Vec<u64>,
    /// kg per unit.
    pub mass_quantum: f64,
    /// W per unit.
    pub power_quantum: f64,
}

/// Headroom so that any sum over the whole grid fits in a `u64`.
const QUANT_BITS: i32 = 60;

impl Quantized {
    pub fn new(field: &SarField) -> Self {
        let dv = field.cell_volume();
        let total_mass = field.tissue_mass();
        let total_power = field.absorbed_power();
        let mass_quantum = if total_mass > 0.0 { total_mass / libm::ldexp(1.0, QUANT_BITS) } else { 1.0 };
        let power_quantum = if total_power > 0.0 { total_power / libm::ldexp(1.0, QUANT_BITS) } else { 1.0 };
        let mass = field.density.iter().map(|&r| libm::round(r * dv / mass_quantum) as u64).collect();
        let power = field
            .sar
            .iter()
            .zip(&field.density)
            .map(|(&s, &r)| libm::round(s * r * dv / power_quantum) as u64)
            .collect();
        Self {
            dims: field.dims,
            mass,
            power,
            mass_quantum,
            power_quantum,
        }
    }

    /// Smallest whole number of mass units reaching `target_kg`.
    pub fn mass_units(&self, target_kg: f64) -> u64 {
        libm::ceil(target_kg / self.mass_quantum) as u64
    }

    /// Averaged SAR of a cube holding `mass` and `power` units.
    pub fn average(&self, mass: u64, power: u64) -> f64 {
        (power as f64 * self.power_quantum) / (mass as f64 * self.mass_quantum)
    }
}

/// Result of cube averaging around one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubeAverage {
    /// Cube half-width in cells; the edge is `2h + 1` cells.
    pub half_width: usize,
    pub mass: u64,
    pub power: u64,
}

/// Cube-averaged SAR over the whole field.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedSar {
    pub target_mass_kg: f64,
    /// Per cell; `None` outside tissue and for unevaluated cells.
    pub cubes: Vec<Option<CubeAverage>>,
    pub quantized: Quantized,
    pub evaluated: usize,
    pub unevaluated: usize,
}

impl AveragedSar {
    pub fn value(&self, idx: usize) -> Option<f64> {
        self.cubes[idx].map(|c| self.quantized.average(c.mass, c.power))
    }

    /// Largest averaged SAR with its centre cell index; ties go to the lowest index.
    pub fn max(&self) -> Option<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        for i in 0..self.cubes.len() {
            if let Some(v) = self.value(i) {
                if best.is_none_or(|(b, _)| v > b) {
                    best = Some((v, i));
                }
            }
        }
        best
    }
}

/// Inclusive 3D prefix sums over the tissue bounding box.
struct Prefix {
    lo: [usize; 3],
    n: [usize; 3],
    mass: Vec<u64>,
    power: Vec<u64>,
}

impl Prefix {
    fn new(q: &Quantized, lo: [usize; 3], hi: [usize; 3]) -> Self {
        let n = [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]];
        let len = (n[0] + 1) * (n[1] + 1) * (n[2] + 1);
        let mut mass = vec![0u64; len];
        let mut power = vec![0u64; len];
        let (sx, sy) = ((n[1] + 1) * (n[2] + 1), n[2] + 1);
        let [_, dy, dz] = q.dims;
        for i in 1..=n[0] {
            for j in 1..=n[1] {
                for k in 1..=n[2] {
                    let c = ((lo[0] + i - 1) * dy + lo[1] + j - 1) * dz + lo[2] + k - 1;
                    let p = i * sx + j * sy + k;
                    // Inclusion-exclusion; the signed terms cancel exactly in wrapping u64.
                    let f = |v: &Vec<u64>, own: u64| {
                        own.wrapping_add(v[p - sx])
                            .wrapping_add(v[p - sy])
                            .wrapping_add(v[p - 1])
                            .wrapping_sub(v[p - sx - sy])
                            .wrapping_sub(v[p - sx - 1])
                            .wrapping_sub(v[p - sy - 1])
                            .wrapping_add(v[p - sx - sy - 1])
                    };
                    mass[p] = f(&mass, q.mass[c]);
                    power[p] = f(&power, q.power[c]);
                }
            }
        }
        Self { lo, n, mass, power }
    }

    /// Sums over grid cells `a..=b` (inclusive), clipped to the box.
    fn sum(&self, a: [usize; 3], b: [usize; 3]) -> (u64, u64) {
        let mut l = [0usize; 3];
        let mut h = [0usize; 3];
        for d in 0..3 {
            let lo = a[d].max(self.lo[d]);
            let hi = (b[d] + 1).min(self.lo[d] + self.n[d]);
            if lo >= hi {
                return (0, 0);
            }
            l[d] = lo - self.lo[d];
            h[d] = hi - self.lo[d];
        }
        let (sx, sy) = ((self.n[1] + 1) * (self.n[2] + 1), self.n[2] + 1);
        let at = |i: usize, j: usize, k: usize| i * sx + j * sy + k;
        let f = |v: &Vec<u64>| {
            v[at(h[0], h[1], h[2])]
                .wrapping_sub(v[at(l[0], h[1], h[2])])
                .wrapping_sub(v[at(h[0], l[1], h[2])])
                .wrapping_sub(v[at(h[0], h[1], l[2])])
                .wrapping_add(v[at(l[0], l[1], h[2])])
                .wrapping_add(v[at(l[0], h[1], l[2])])
                .wrapping_add(v[at(h[0], l[1], l[2])])
                .wrapping_sub(v[at(l[0], l[1], l[2])])
        };
        (f(&self.mass), f(&self.power))
    }
}

/// Grow a centred cube around `c` until it holds `target` mass units.
fn grow(prefix: &Prefix, dims: [usize; 3], c: [usize; 3], target: u64) -> Option<CubeAverage> {
    let mut h = 0usize;
    loop {
        if (0..3).any(|d| c[d] < h || c[d] + h >= dims[d]) {
            return None;
        }
        let (mass, power) = prefix.sum(
            [c[0] - h, c[1] - h, c[2] - h],
            [c[0] + h, c[1] + h, c[2] + h],
        );
        if mass >= target {
            return Some(CubeAverage {
                half_width: h,
                mass,
                power,
            });
        }
        h += 1;
    }
}

/// Average SAR over cubes of `target_mass_g` grams of tissue centred on every tissue cell.
///
/// Each cube grows in whole-cell half-width steps until its tissue mass reaches the
/// target. Non-tissue cells add neither mass nor power. A cube that would leave the grid
/// first leaves its centre unevaluated.
pub fn sar_10g(field: &SarField, target_mass_g: f64) -> Result<AveragedSar> {
    if !(target_mass_g > 0.0) {
        return Err(Error::InvalidArgument("target mass must be positive".to_string()));
    }
    let q = Quantized::new(field);
    let target_kg = target_mass_g * 1e-3;
    let target = q.mass_units(target_kg);
    let dims = field.dims;
    let mut lo = dims;
    let mut hi = [0usize; 3];
    let mut any = false;
    for (i, &m) in q.mass.iter().enumerate() {
        if m > 0 {
            any = true;
            let c = field.cell_of(i);
            for d in 0..3 {
                lo[d] = lo[d].min(c[d]);
                hi[d] = hi[d].max(c[d] + 1);
            }
        }
    }
    if !any {
        return Err(Error::PhantomTooSmall);
    }
    let prefix = Prefix::new(&q, lo, hi);
    let eval = |i: usize| -> Option<CubeAverage> {
        if field.density[i] > 0.0 {
            grow(&prefix, dims, field.cell_of(i), target)
        } else {
            None
        }
    };
    #[cfg(feature = "parallel")]
    let cubes: Vec<Option<CubeAverage>> = {
        use rayon::prelude::*;
        (0..q.mass.len()).into_par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let cubes: Vec<Option<CubeAverage>> = (0..q.mass.len()).map(eval).collect();
    let tissue = field.density.iter().filter(|&&r| r > 0.0).count();
    let evaluated = cubes.iter().filter(|c| c.is_some()).count();
    if evaluated == 0 {
        return Err(Error::PhantomTooSmall);
    }
    Ok(AveragedSar {
        target_mass_kg: target_kg,
        cubes,
        quantized: q,
        evaluated,
        unevaluated: tissue - evaluated,
    })
}

/// Body region class that sets the applicable limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// Head and trunk, 2 W/kg.
    Trunk,
    /// Limbs, 4 W/kg.
    Limb,
}

impl Region {
    pub fn limit(self) -> f64 {
        match self {
            Region::Trunk => TRUNK_LIMIT,
            Region::Limb => LIMB_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Compliance {
    pub region: Region,
    pub limit: f64,
    pub pass: bool,
    /// `10·log10(limit/value)`; positive when under the limit.
    pub margin_db: f64,
}

/// Summary of one SAR evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SarReport {
    pub frequency: f64,
    pub normalization: f64,
    pub max_point: f64,
    pub max_point_cell: [usize; 3],
    pub max_averaged: f64,
    pub max_averaged_cell: [usize; 3],
    /// Edge of the maximizing cube, mm.
    pub cube_edge_mm: f64,
    pub target_mass_g: f64,
    /// Total absorbed power over total tissue mass, W/kg.
    pub mean_sar: f64,
    pub evaluated: usize,
    pub unevaluated: usize,
}

impl SarReport {
    pub fn compliance(&self, region: Region) -> Compliance {
        compliance(self.max_averaged, region)
    }
}

/// Point SAR, cube-averaged SAR and the whole-phantom mean in one report.
pub fn sar_report(field: &SarField, target_mass_g: f64) -> Result<SarReport> {
    let avg = sar_10g(field, target_mass_g)?;
    let (max_point, max_point_cell) = field.max_point().ok_or(Error::PhantomTooSmall)?;
    let (max_averaged, idx) = avg.max().ok_or(Error::PhantomTooSmall)?;
    let cube = avg.cubes[idx].expect("maximum comes from an evaluated cell");
    Ok(SarReport {
        frequency: field.frequency,
        normalization: field.normalization,
        max_point,
        max_point_cell,
        max_averaged,
        max_averaged_cell: field.cell_of(idx),
        cube_edge_mm: (2 * cube.half_width + 1) as f64 * field.dx_mm,
        target_mass_g,
        mean_sar: field.absorbed_power() / field.tissue_mass(),
        evaluated: avg.evaluated,
        unevaluated: avg.unevaluated,
    })
}

/// Compare an averaged SAR value against the limit for `region`.
pub fn compliance(value: f64, region: Region) -> Compliance {
    let limit = region.limit();
    Compliance {
        region,
        limit,
        pass: value <= limit,
        margin_db: 10.0 * libm::log10(limit / value),
    }
}

/// `F = η_ant / SAR_max`, kg.
pub fn figure_of_merit(eta_ant: f64, sar_max: f64) -> Result<f64> {
    if !(sar_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "figure of merit needs a positive SAR, got {sar_max} W/kg"
        )));
    }
    Ok(eta_ant / sar_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(dims: [usize; 3], dx_mm: f64, sar: f64, rho: f64) -> SarField {
        let n = dims[0] * dims[1] * dims[2];
        SarField {
            dims,
            dx_mm,
            frequency: 2.45e9,
            normalization: 0.1,
            sar: vec![sar; n],
            density: vec![rho; n],
        }
    }

    #[test]
    fn local_sar_example() {
        // |E|rms = 50 V/m is a 50√2 V/m peak.
        let s = local_sar(1.74, 50.0 * libm::sqrt(2.0), 1090.0);
        assert!((s - 3.99).abs() < 0.005, "{s}");
        assert_eq!(local_sar(0.0, 100.0, 1000.0), 0.0);
    }

    #[test]
    fn uniform_field_averages_to_itself() {
        let f = uniform([40, 40, 40], 1.0, 0.37, 1000.0);
        let r = sar_report(&f, 10.0).unwrap();
        assert!((r.max_averaged - 0.37).abs() < 1e-12);
        assert!((r.max_point - 0.37).abs() < 1e-15);
        // 10 g of 1000 kg/m³ needs 10 000 mm³, a 23-cell cube (h = 11) at 1 mm.
        assert_eq!(r.cube_edge_mm, 23.0);
        assert!(r.unevaluated > 0 && r.evaluated > 0);
    }

    #[test]
    fn small_phantom_is_rejected() {
        let f = uniform([8, 8, 8], 1.0, 1.0, 1000.0);
        assert!(matches!(sar_10g(&f, 10.0), Err(Error::PhantomTooSmall)));
        assert!(sar_10g(&f, 0.1).is_ok());
    }

    #[test]
    fn compliance_examples() {
        let c = compliance(0.316, Region::Trunk);
        assert!(c.pass);
        assert!((c.margin_db - 8.0).abs() < 0.05);
        assert!(!compliance(2.5, Region::Trunk).pass);
        assert!(compliance(2.5, Region::Limb).pass);
    }

    #[test]
    fn figure_of_merit_examples() {
        assert!((figure_of_merit(0.62, 0.316).unwrap() - 1.96).abs() < 0.005);
        let a = figure_of_merit(0.5, 0.2).unwrap();
        let b = figure_of_merit(0.5, 0.1).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12);
        assert!(figure_of_merit(0.5, 0.0).is_err());
        assert!(figure_of_merit(0.5, -1.0).is_err());
    }
}
