use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::consts::MM;
use crate::scene::{Axis, VoxelGrid};
use crate::solver::{material_media, EdgeMaterial, RunRecord};
use crate::{Complex, Error, Result};

/// Power balance at one frequency, scaled so that `p_in` equals `normalization`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerBudget {
    pub frequency: f64,
    pub normalization: f64,
    /// Net power accepted at the port, W.
    pub p_in: f64,
    /// Radiated through the Huygens box, W.
    pub p_r: f64,
    /// Dissipated in non-tissue materials, W.
    pub p_d: f64,
    /// Absorbed in tissue, W.
    pub p_a: f64,
    /// Tissue absorption by material name, in material-table order.
    pub p_a_by_material: Vec<(String, f64)>,
    /// Factor that converts raw spectral powers to normalized watts.
    pub scale: f64,
}

impl PowerBudget {
    /// `|P_in − (P_r + P_d + P_a)|/P_in`.
    pub fn closure_error(&self) -> f64 {
        (self.p_in - (self.p_r + self.p_d + self.p_a)).abs() / self.p_in
    }
}

/// Raw (unnormalized) dissipated power per cell, `k` fastest.
///
/// Each recorded edge dissipates `½σₑ|E|²Δx³`; the share belonging to each adjacent cell
/// follows the rule the solver used to form `σₑ`, so the per-cell values add up to the
/// edge total exactly.
pub fn cell_losses(record: &RunRecord, grid: &VoxelGrid, fi: usize) -> Result<Vec<f64>> {
    let vol = record
        .volume
        .as_ref()
        .ok_or_else(|| Error::Missing("volume field recorder was off".to_string()))?;
    if grid.dims != record.dims {
        return Err(Error::InvalidArgument("grid does not match the record".to_string()));
    }
    let media = material_media(grid, record.material_frequency)?;
    let dv = libm::pow(grid.dx_mm * MM, 3.0);
    let mut out = vec![0.0f64; grid.cell_count()];
    let [_, sy, _] = grid.node_strides();
    let sx = grid.node_strides()[0];
    let mut cells: [[usize; 3]; 4] = [[0; 3]; 4];
    for a in 0..3 {
        let axis = Axis::from_index(a);
        for (&node, e) in vol.edges[a].iter().zip(&vol.values[fi][a]) {
            let node = node as usize;
            let n = [node / sx, (node % sx) / sy, node % sy];
            let e2 = e.norm_sqr();
            if e2 == 0.0 {
                continue;
            }
            let mut k = 0;
            for c in grid.edge_cells(axis, n) {
                cells[k] = c;
                k += 1;
            }
            if k == 0 {
                continue;
            }
            match record.edge_material {
                EdgeMaterial::Average => {
                    for c in &cells[..k] {
                        let ci = grid.cell_index(c[0], c[1], c[2]);
                        let sigma = media[grid.cells[ci] as usize].sigma;
                        out[ci] += 0.5 * sigma / k as f64 * e2 * dv;
                    }
                }
                EdgeMaterial::Owner => {
                    let c = cells[0];
                    let ci = grid.cell_index(c[0], c[1], c[2]);
                    let sigma = media[grid.cells[ci] as usize].sigma;
                    out[ci] += 0.5 * sigma * e2 * dv;
                }
            }
        }
    }
    Ok(out)
}

/// Radiated power `½ Re ∮ (E × H*)·n dA` through the Huygens box (raw units).
pub fn huygens_power(record: &RunRecord, fi: usize) -> Result<f64> {
    let s = record
        .surface
        .as_ref()
        .ok_or_else(|| Error::Missing("Huygens surface recorder was off".to_string()))?;
    let mut total = 0.0;
    s.for_each_sample(fi, |p| {
        let sv = cross(p.e, conj3(p.h));
        let flux = sv[0] * p.normal[0] + sv[1] * p.normal[1] + sv[2] * p.normal[2];
        total += 0.5 * flux.re * p.weight;
    });
    Ok(total)
}

pub(crate) fn cross(a: [Complex; 3], b: [Complex; 3]) -> [Complex; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn conj3(a: [Complex; 3]) -> [Complex; 3] {
    [a[0].conj(), a[1].conj(), a[2].conj()]
}

/// Net port power `½ Re(V I*)` at `f` (raw units).
pub fn port_power(record: &RunRecord, f: f64) -> f64 {
    let v = record.port_phasor(&record.voltage, f);
    let i = record.port_phasor(&record.current, f);
    0.5 * (v * i.conj()).re
}

/// Power budget at `f`, normalized so the accepted power equals `normalize_to` watts.
pub fn power_budget(record: &RunRecord, grid: &VoxelGrid, f: f64, normalize_to: f64) -> Result<PowerBudget> {
    let fi = record
        .frequency_index(f)
        .ok_or_else(|| Error::Missing(format!("no DFT recorded at {f} Hz")))?;
    if !(normalize_to > 0.0) {
        return Err(Error::InvalidArgument("normalization power must be positive".to_string()));
    }
    let p_in_raw = port_power(record, f);
    if !(p_in_raw > 0.0) {
        return Err(Error::DegenerateBudget);
    }
    let scale = normalize_to / p_in_raw;
    let losses = cell_losses(record, grid, fi)?;
    let mut by_material = vec![0.0f64; grid.materials.len()];
    for (ci, &p) in losses.iter().enumerate() {
        if p != 0.0 {
            by_material[grid.cells[ci] as usize] += p;
        }
    }
    let mut p_a = 0.0;
    let mut p_d = 0.0;
    let mut p_a_by_material = Vec::new();
    for (m, &p) in grid.materials.iter().zip(&by_material) {
        if m.is_tissue() {
            p_a += p * scale;
            p_a_by_material.push((m.name.clone(), p * scale));
        } else {
            p_d += p * scale;
        }
    }
    let p_r = huygens_power(record, fi)? * scale;
    Ok(PowerBudget {
        frequency: f,
        normalization: normalize_to,
        p_in: normalize_to,
        p_r,
        p_d,
        p_a,
        p_a_by_material,
        scale,
    })
}

/// `η = P_r/(P_r + P_d + P_a)`.
pub fn radiation_efficiency(budget: &PowerBudget) -> Result<f64> {
    let total = budget.p_r + budget.p_d + budget.p_a;
    if !(total > 0.0) {
        return Err(Error::DegenerateBudget);
    }
    Ok(budget.p_r / total)
}

/// `1 − |S11|²`.
pub fn mismatch_factor(s11: Complex) -> f64 {
    1.0 - s11.norm_sqr()
}

/// `η_ant = η_rad·(1 − |S11(f)|²)`.
pub fn antenna_efficiency(eta_rad: f64, spectrum: &super::PortSpectrum, f: f64) -> Result<f64> {
    Ok(eta_rad * mismatch_factor(spectrum.s11_at(f)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget(p_r: f64, p_d: f64, p_a: f64) -> PowerBudget {
        PowerBudget {
            frequency: 2.45e9,
            normalization: 0.1,
            p_in: p_r + p_d + p_a,
            p_r,
            p_d,
            p_a,
            p_a_by_material: Vec::new(),
            scale: 1.0,
        }
    }

    #[test]
    fn efficiency_examples() {
        assert_eq!(radiation_efficiency(&budget(0.3, 0.0, 0.0)).unwrap(), 1.0);
        let eta = radiation_efficiency(&budget(0.060, 0.005, 0.035)).unwrap();
        assert!((eta - 0.60).abs() < 1e-12);
        assert!(matches!(
            radiation_efficiency(&budget(0.0, 0.0, 0.0)),
            Err(Error::DegenerateBudget)
        ));
    }

    #[test]
    fn mismatch_examples() {
        assert_eq!(mismatch_factor(Complex::new(0.0, 0.0)), 1.0);
        let s = Complex::new(libm::pow(10.0, -10.0 / 20.0), 0.0);
        assert!((mismatch_factor(s) - (1.0 - 0.1)).abs() < 1e-12);
        let s = Complex::from_polar(libm::sqrt(0.05), 0.7);
        assert!((0.62 * mismatch_factor(s) - 0.589).abs() < 1e-12);
    }

    #[test]
    fn cross_product_is_right_handed() {
        let one = Complex::new(1.0, 0.0);
        let zero = Complex::new(0.0, 0.0);
        let z = cross([one, zero, zero], [zero, one, zero]);
        assert_eq!(z, [zero, zero, one]);
    }
}
