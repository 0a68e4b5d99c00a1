//! Report bundles: CSV tables, a JSON report, plot data and a manifest.
//!
//! A study bundle looks like
//!
//! ```text
//! results.csv                      one row per placement
//! report.json                      rows, statistics, failures
//! figures/s11_<placement>.csv      frequency (GHz), |S11| (dB)
//! figures/pattern_<placement>_xy.csv, _xz.csv   angle (deg), directivity (dBi)
//! figures/absorption_vs_efficiency.csv          η_rad, P_a (mW) per on-body placement
//! figures/figure_of_merit.csv      F (kg) per on-body placement
//! manifest.json                    command, inputs, resolved parameters, file hashes
//! ```
//!
//! Nothing in a bundle depends on the clock or on the machine, so equal inputs give equal
//! bytes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use wearfdtd_core::analysis::{FarField, PortSpectrum, PowerBudget, ResonanceReport};
use wearfdtd_core::dielectrics::{MaterialKind, MaterialSpec};
use wearfdtd_core::dosimetry::{SarField, SarReport};
use wearfdtd_core::scene::{AntennaParams, Feed, PhantomKind, VoxelGrid};
use wearfdtd_core::solver::{EdgeMaterial, RunRecord, SimConfig, Termination, VolumeMode};
use wearfdtd_core::study::{AnalysisSettings, GridSettings, Placement, ScenarioSet, StatsRow, Study, StudyRow};

use crate::error::{Error, Result};

/// Files of a bundle, keyed by path relative to its root.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bundle {
    pub files: BTreeMap<String, Vec<u8>>,
}

fn hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Shortest decimal that reads back as the same `f64`.
fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn db10(v: f64) -> f64 {
    10.0 * v.log10()
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("write to memory");
    for r in rows {
        w.write_record(r).expect("write to memory");
    }
    w.into_inner().expect("flush to memory")
}

fn json_bytes(v: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("JSON values serialize");
    out.push(b'\n');
    out
}

impl Bundle {
    pub fn add(&mut self, path: impl Into<String>, bytes: Vec<u8>) {
        self.files.insert(path.into(), bytes);
    }

    pub fn add_csv(&mut self, path: impl Into<String>, header: &[&str], rows: &[Vec<String>]) {
        self.add(path, csv_bytes(header, rows));
    }

    pub fn add_json(&mut self, path: impl Into<String>, v: &Value) {
        self.add(path, json_bytes(v));
    }

    pub fn get(&self, path: &str) -> Option<&[u8]> {
        self.files.get(path).map(Vec::as_slice)
    }

    /// Add `manifest.json`, which lists every other file with its SHA-256.
    pub fn seal(&mut self, manifest: &Manifest) {
        self.files.remove("manifest.json");
        let files: Map<String, Value> = self
            .files
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(hex(v))))
            .collect();
        let mut m = manifest.to_json();
        m["files"] = Value::Object(files);
        self.add_json("manifest.json", &m);
    }

    pub fn write(&self, root: &Path) -> Result<()> {
        for (rel, bytes) in &self.files {
            let path = root.join(rel);
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    /// Read every file below `root` back, for comparisons.
    pub fn read(root: &Path) -> Result<Self> {
        fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) -> Result<()> {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
                .map_err(|e| Error::io(dir, e))?
                .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
                .collect::<Result<_>>()?;
            entries.sort();
            for p in entries {
                if p.is_dir() {
                    walk(root, &p, out)?;
                } else {
                    let rel = p.strip_prefix(root).expect("below root").to_string_lossy().replace('\\', "/");
                    out.insert(rel, std::fs::read(&p).map_err(|e| Error::io(&p, e))?);
                }
            }
            Ok(())
        }
        let mut files = BTreeMap::new();
        walk(root, root, &mut files)?;
        Ok(Self { files })
    }
}

/// What produced a bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub command: Vec<String>,
    /// `(path as given, SHA-256 of its contents)`.
    pub inputs: Vec<(String, String)>,
    pub output_directory: String,
    pub threads: usize,
    pub parameters: Value,
}

impl Manifest {
    pub fn new(command: Vec<String>, output_directory: &Path, threads: usize, parameters: Value) -> Self {
        Self {
            command,
            inputs: Vec::new(),
            output_directory: output_directory.display().to_string(),
            threads,
            parameters,
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        self.inputs.push((path.display().to_string(), hex(&bytes)));
        Ok(())
    }

    fn to_json(&self) -> Value {
        let inputs: Vec<Value> = self
            .inputs
            .iter()
            .map(|(p, h)| json!({ "path": p, "sha256": h }))
            .collect();
        json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "inputs": inputs,
            "output_directory": self.output_directory,
            "threads": self.threads,
            "determinism": "no random numbers, clock readings or host details enter any output; \
                            equal inputs give byte-identical files",
            "parameters": self.parameters,
        })
    }
}

pub fn material_json(m: &MaterialSpec) -> Value {
    let kind = match &m.kind {
        MaterialKind::Tissue(p) => json!({
            "type": "tissue",
            "eps_inf": p.eps_inf,
            "sigma_ionic": p.sigma_ionic,
            "terms": p.terms.iter().map(|t| json!([t.delta_eps, t.tau, t.alpha])).collect::<Vec<_>>(),
        }),
        MaterialKind::Dielectric { eps_r, sigma } => json!({ "type": "dielectric", "eps_r": eps_r, "sigma": sigma }),
        MaterialKind::Conductor { sigma } => json!({ "type": "conductor", "sigma": sigma }),
        MaterialKind::PerfectConductor => json!({ "type": "pec" }),
        MaterialKind::Air => json!({ "type": "air" }),
    };
    json!({ "name": m.name, "density_kg_m3": m.density, "kind": kind })
}

pub fn antenna_json(a: &AntennaParams) -> Value {
    json!({
        "w_b_mm": a.w_b, "l_b_mm": a.l_b, "w_p_mm": a.w_p, "l_p_mm": a.l_p,
        "w_l_mm": a.w_l, "l_l_mm": a.l_l, "d_mm": a.d, "h1_mm": a.h1, "h2_mm": a.h2,
        "h_b_mm": a.h_b, "wall_thickness_mm": a.wall_thickness,
        "slot_length_mm": a.slot_length, "slot_width_mm": a.slot_width,
        "plate_thickness_mm": a.plate_thickness, "support_mm": a.support,
        "port_impedance_ohm": a.port_impedance,
        "feed": match a.feed { Feed::EndWall => "end-wall", Feed::FloorPin => "floor-pin" },
        "box_material": material_json(&a.box_material),
        "coating_material": material_json(&a.coating_material),
        "plate_material": material_json(&a.plate_material),
        "support_material": material_json(&a.support_material),
    })
}

pub fn config_json(c: &SimConfig) -> Value {
    json!({
        "courant_factor": c.courant_factor,
        "max_steps": c.max_steps,
        "decay_stop_db": c.decay_stop_db,
        "source": { "center_hz": c.source.center, "bandwidth_hz": c.source.bandwidth, "amplitude_v": c.source.amplitude },
        "cpml": {
            "depth": c.cpml.depth, "order": c.cpml.order, "sigma_scale": c.cpml.sigma_scale,
            "kappa_max": c.cpml.kappa_max, "alpha_max_s_m": c.cpml.alpha_max,
        },
        "dft_frequencies_hz": c.dft_frequencies,
        "dft_stride": c.dft_stride,
        "material_frequency_hz": c.material_frequency,
        "edge_material": match c.edge_material { EdgeMaterial::Average => "average", EdgeMaterial::Owner => "owner" },
        "volume": match c.volume { VolumeMode::Off => "off", VolumeMode::Lossy => "lossy", VolumeMode::Full => "full" },
        "huygens": c.huygens,
        "huygens_margin": c.huygens_margin,
        "energy_interval": c.energy_interval,
    })
}

pub fn analysis_json(a: &AnalysisSettings) -> Value {
    json!({
        "z0_ohm": a.z0, "f_lo_hz": a.f_lo, "f_hi_hz": a.f_hi, "points": a.n_freq,
        "f_eval_hz": a.f_eval, "normalize_w": a.normalize_to, "target_mass_g": a.target_mass_g,
        "n_theta": a.n_theta, "n_phi": a.n_phi, "cut_points": a.cut_points,
    })
}

pub fn grid_json(g: &GridSettings) -> Value {
    json!({ "dx_mm": g.dx_mm, "padding_cells": g.padding_cells, "max_cells": g.max_cells })
}

fn placement_json(p: &Placement) -> Value {
    let phantom = p.phantom.as_ref().map(|ph| match &ph.kind {
        PhantomKind::Layered { layers, lateral_mm } => json!({
            "layers": layers.iter().map(|(t, d)| json!({ "tissue": t, "thickness_mm": d })).collect::<Vec<_>>(),
            "lateral_mm": lateral_mm,
        }),
        PhantomKind::Voxel(v) => json!({
            "voxel_dims": v.dims, "pitch_mm": v.pitch_mm, "tissues": v.tissue_map,
            "ids_sha256": hex(&v.ids),
        }),
    });
    json!({
        "name": p.name,
        "gap_mm": p.gap_mm,
        "region": format!("{:?}", p.region).to_lowercase(),
        "phantom": phantom,
    })
}

pub fn set_json(set: &ScenarioSet) -> Value {
    json!({
        "antenna": antenna_json(&set.antenna),
        "placements": set.placements.iter().map(placement_json).collect::<Vec<_>>(),
        "grid": grid_json(&set.grid),
        "solver": config_json(&set.solver),
        "analysis": analysis_json(&set.analysis),
    })
}

const RESULT_COLUMNS: [&str; 18] = [
    "placement",
    "f_res_ghz",
    "min_s11_db",
    "fractional_bw_percent",
    "shift_percent",
    "eta_rad",
    "eta_ant",
    "p_r_mw",
    "p_d_mw",
    "p_a_mw",
    "closure_error",
    "sar_10g_w_kg",
    "sar_point_w_kg",
    "figure_of_merit_kg",
    "compliance",
    "front_to_back_db",
    "peak_directivity_dbi",
    "leakage_warning",
];

fn row_cells(r: &StudyRow, leakage: bool) -> Vec<String> {
    vec![
        r.name.clone(),
        num(r.f_res / 1e9),
        num(r.min_s11_db),
        opt(r.fractional_bw.map(|b| 100.0 * b)),
        opt(r.shift_percent),
        num(r.eta_rad),
        num(r.eta_ant),
        num(r.p_r * 1e3),
        num(r.p_d * 1e3),
        num(r.p_a * 1e3),
        num(r.closure_error),
        opt(r.sar_10g),
        opt(r.sar_point),
        opt(r.figure_of_merit),
        r.compliance_pass.map(|p| if p { "pass" } else { "fail" }.to_string()).unwrap_or_default(),
        num(r.front_to_back_db),
        num(db10(r.peak_directivity)),
        leakage.to_string(),
    ]
}

fn row_json(r: &StudyRow, sar: Option<&SarReport>) -> Value {
    let by_material: Map<String, Value> =
        r.p_a_by_material.iter().map(|(k, v)| (k.clone(), json!(v * 1e3))).collect();
    json!({
        "placement": r.name,
        "f_res_hz": r.f_res,
        "min_s11_db": r.min_s11_db,
        "fractional_bw": r.fractional_bw,
        "shift_percent": r.shift_percent,
        "eta_rad": r.eta_rad,
        "eta_ant": r.eta_ant,
        "p_r_mw": r.p_r * 1e3,
        "p_d_mw": r.p_d * 1e3,
        "p_a_mw": r.p_a * 1e3,
        "p_a_by_tissue_mw": by_material,
        "closure_error": r.closure_error,
        "sar": sar.map(sar_json),
        "figure_of_merit_kg": r.figure_of_merit,
        "compliance": r.compliance_pass,
        "front_to_back_db": r.front_to_back_db,
        "peak_directivity": r.peak_directivity,
    })
}

pub fn sar_json(s: &SarReport) -> Value {
    json!({
        "frequency_hz": s.frequency,
        "normalization_w": s.normalization,
        "max_point_w_kg": s.max_point,
        "max_point_cell": s.max_point_cell,
        "max_averaged_w_kg": s.max_averaged,
        "max_averaged_cell": s.max_averaged_cell,
        "cube_edge_mm": s.cube_edge_mm,
        "target_mass_g": s.target_mass_g,
        "mean_w_kg": s.mean_sar,
        "evaluated_cells": s.evaluated,
        "unevaluated_cells": s.unevaluated,
    })
}

pub fn stats_json(rows: &[StatsRow]) -> Value {
    Value::Array(
        rows.iter()
            .map(|s| {
                json!({
                    "location": s.location, "mean_ghz": s.mean, "std_ghz": s.std,
                    "samples": s.samples, "modeled_ghz": s.modeled, "probability_per_ghz": s.probability,
                })
            })
            .collect(),
    )
}

pub fn s11_rows(s: &PortSpectrum) -> Vec<Vec<String>> {
    s.frequencies
        .iter()
        .zip(s.s11_db())
        .map(|(f, d)| vec![num(f / 1e9), num(d)])
        .collect()
}

/// Full spectrum table: S11 (dB and complex) and input impedance.
pub fn spectrum_rows(s: &PortSpectrum) -> Vec<Vec<String>> {
    s.frequencies
        .iter()
        .enumerate()
        .map(|(i, f)| {
            vec![
                num(f / 1e9),
                num(20.0 * s.s11[i].norm().log10()),
                num(s.s11[i].re),
                num(s.s11[i].im),
                num(s.zin[i].re),
                num(s.zin[i].im),
            ]
        })
        .collect()
}

pub const SPECTRUM_COLUMNS: [&str; 6] = ["f_ghz", "s11_db", "s11_re", "s11_im", "zin_re_ohm", "zin_im_ohm"];

pub fn pattern_rows(cut: &[(f64, f64)]) -> Vec<Vec<String>> {
    cut.iter().map(|(a, d)| vec![num(*a), num(db10(*d))]).collect()
}

/// S11, pattern cuts and budget of one run, as bundle files under `prefix`.
pub fn add_run_figures(b: &mut Bundle, name: &str, spectrum: &PortSpectrum, far: &FarField) {
    b.add_csv(format!("figures/s11_{name}.csv"), &["f_ghz", "s11_db"], &s11_rows(spectrum));
    b.add_csv(format!("figures/pattern_{name}_xy.csv"), &["angle_deg", "directivity_dbi"], &pattern_rows(&far.cut_xy));
    b.add_csv(format!("figures/pattern_{name}_xz.csv"), &["angle_deg", "directivity_dbi"], &pattern_rows(&far.cut_xz));
}

pub fn budget_json(b: &PowerBudget, eta_rad: f64, eta_ant: f64) -> Value {
    let by: Map<String, Value> = b.p_a_by_material.iter().map(|(k, v)| (k.clone(), json!(v * 1e3))).collect();
    json!({
        "frequency_hz": b.frequency,
        "p_in_mw": b.p_in * 1e3,
        "p_r_mw": b.p_r * 1e3,
        "p_d_mw": b.p_d * 1e3,
        "p_a_mw": b.p_a * 1e3,
        "p_a_by_tissue_mw": by,
        "closure_error": b.closure_error(),
        "eta_rad": eta_rad,
        "eta_ant": eta_ant,
    })
}

pub fn resonance_json(r: &ResonanceReport) -> Value {
    json!({
        "f_res_hz": r.f_res,
        "min_s11_db": r.min_db,
        "band_hz": r.band.map(|(a, b)| [a, b]),
        "fractional_bw": r.fractional_bw(),
    })
}

pub fn run_json(rec: &RunRecord, grid: &VoxelGrid) -> Value {
    json!({
        "dims": rec.dims,
        "dx_mm": rec.dx_mm,
        "origin_mm": grid.origin_mm,
        "dt_s": rec.dt,
        "steps": rec.steps,
        "termination": match rec.termination { Termination::Decayed => "decayed", Termination::MaxSteps => "max-steps" },
        "peak_energy": rec.peak_energy,
        "final_energy": rec.final_energy,
        "materials": grid.materials.iter().map(material_json).collect::<Vec<_>>(),
    })
}

/// The whole study as a bundle (without the manifest).
pub fn study_bundle(study: &Study, set: &ScenarioSet, stats: Option<&[StatsRow]>) -> Bundle {
    let mut b = Bundle::default();
    let res = &study.result;
    let outcome = |name: &str| {
        study
            .outcomes
            .iter()
            .find(|(n, _)| n == name)
            .and_then(|(_, o)| o.as_ref().ok())
    };
    let rows: Vec<Vec<String>> = res
        .rows
        .iter()
        .map(|r| row_cells(r, outcome(&r.name).is_some_and(|o| o.leakage_warning)))
        .collect();
    b.add_csv("results.csv", &RESULT_COLUMNS, &rows);
    for r in &res.rows {
        if let Some(o) = outcome(&r.name) {
            add_run_figures(&mut b, &r.name, &o.spectrum, &o.far_field);
        }
    }
    let on_body: Vec<&StudyRow> = res.on_body().collect();
    let scatter: Vec<Vec<String>> = on_body
        .iter()
        .map(|r| vec![r.name.clone(), num(r.eta_rad), num(r.p_a * 1e3)])
        .collect();
    b.add_csv("figures/absorption_vs_efficiency.csv", &["placement", "eta_rad", "p_a_mw"], &scatter);
    let fom: Vec<Vec<String>> = on_body
        .iter()
        .map(|r| vec![r.name.clone(), opt(r.figure_of_merit), opt(r.sar_10g), num(r.eta_ant)])
        .collect();
    b.add_csv(
        "figures/figure_of_merit.csv",
        &["placement", "figure_of_merit_kg", "sar_10g_w_kg", "eta_ant"],
        &fom,
    );
    let report = json!({
        "normalization_w": set.analysis.normalize_to,
        "evaluation_frequency_hz": set.analysis.f_eval,
        "rows": res.rows.iter().map(|r| row_json(r, outcome(&r.name).and_then(|o| o.sar.as_ref()))).collect::<Vec<_>>(),
        "pearson_r_eta_pa": res.pearson_r,
        "slope_pa_on_eta_w": res.slope,
        "failures": res.failures.iter().map(|(n, e)| json!({ "placement": n, "error": e })).collect::<Vec<_>>(),
        "measurement_statistics": stats.map(stats_json),
    });
    b.add_json("report.json", &report);
    b
}

/// Local SAR on the three planes through `cell`: `(u, v, SAR)` rows per plane.
pub fn sar_slices(field: &SarField, cell: [usize; 3]) -> [(String, Vec<Vec<String>>); 3] {
    let [nx, ny, nz] = field.dims;
    let dx = field.dx_mm;
    let at = |i: usize, j: usize, k: usize| field.sar[field.cell_index([i, j, k])];
    let mut yz = Vec::with_capacity(ny * nz);
    for j in 0..ny {
        for k in 0..nz {
            yz.push(vec![num(j as f64 * dx), num(k as f64 * dx), num(at(cell[0], j, k))]);
        }
    }
    let mut xz = Vec::with_capacity(nx * nz);
    for i in 0..nx {
        for k in 0..nz {
            xz.push(vec![num(i as f64 * dx), num(k as f64 * dx), num(at(i, cell[1], k))]);
        }
    }
    let mut xy = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            xy.push(vec![num(i as f64 * dx), num(j as f64 * dx), num(at(i, j, cell[2]))]);
        }
    }
    [("yz".to_string(), yz), ("xz".to_string(), xz), ("xy".to_string(), xy)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 2.4225e9, 1.0 / 3.0, -1e-300] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(opt(None), "");
    }

    #[test]
    fn seal_lists_hashes() {
        let mut b = Bundle::default();
        b.add_csv("a.csv", &["x"], &[vec!["1".into()]]);
        let m = Manifest::new(vec!["study".into()], Path::new("out"), 1, json!({}));
        b.seal(&m);
        let manifest: Value = serde_json::from_slice(b.get("manifest.json").unwrap()).unwrap();
        assert_eq!(manifest["files"]["a.csv"], json!(hex(b"x\n1\n")));
        assert_eq!(manifest["threads"], json!(1));
        let once = b.clone();
        b.seal(&m);
        assert_eq!(b, once);
    }

    #[test]
    fn bundle_disk_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut b = Bundle::default();
        b.add("figures/x.csv", b"1\n".to_vec());
        b.add("report.json", b"{}\n".to_vec());
        b.write(dir.path()).unwrap();
        assert_eq!(Bundle::read(dir.path()).unwrap(), b);
    }
}
