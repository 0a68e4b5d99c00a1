//! The `wearfdtd` command line.
//!
//! Exit status: 0 success, 1 I/O and other failures, 2 unreadable input or bad usage,
//! 3 cell budget exceeded, 4 numerical divergence, 5 validation failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use wearfdtd_core::analysis::{
    antenna_efficiency, front_to_back, ntff_with, power_budget, radiation_efficiency, resonance_and_bandwidth,
    s11_spectrum,
};
use wearfdtd_core::dielectrics::TissueDatabase;
use wearfdtd_core::dosimetry::{point_sar, sar_10g, sar_report};
use wearfdtd_core::scene::{slot_design_length, AntennaParams, Axis, VoxelGrid};
use wearfdtd_core::solver::{RunRecord, SimConfig, VolumeMode};
use wearfdtd_core::study::{stats_rows, AnalysisSettings, ScenarioSet, StatsRow};

use crate::cache::RecordCache;
use crate::config::{SceneSpec, Source};
use crate::error::{Error, Result};
use crate::measurements;
use crate::presets;
use crate::report::{self, Bundle, Manifest};
use crate::runner::{run_record, run_set, with_threads};
use crate::units::{self, Dimension};
use crate::voxel::{cell_snapshot, field_snapshot};

#[derive(Debug, Parser)]
#[command(name = "wearfdtd", version, about = "FDTD and dosimetry for body-worn cavity-backed slot antennas")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tissue permittivity, conductivity and density at one frequency.
    Materials(MaterialsArgs),
    /// Half-wave slot length and the default antenna dimensions.
    Design(DesignArgs),
    /// Run the solver on a scene and write port series, spectra and the run record.
    Simulate(RunArgs),
    /// S11, resonance, power budget and far field of one run.
    Analyze(RunArgs),
    /// Point and cube-averaged SAR of one run.
    Sar(RunArgs),
    /// Free space plus every body placement of a preset, reduced to one report.
    Study(StudyArgs),
    /// Compare measured resonances with modelled ones.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct MaterialsArgs {
    /// Tissue name, or `all`.
    pub tissue: String,
    #[arg(long, default_value = "2.45 GHz")]
    pub frequency: String,
    /// Also write the table to this CSV file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long)]
    pub frequency: String,
    #[arg(long)]
    pub eps_r: f64,
}

#[derive(Debug, Args, Clone)]
pub struct Shared {
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Directory of cached run records.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Cell size override, e.g. "0.5 mm".
    #[arg(long)]
    pub dx: Option<String>,
    /// DFT frequencies override, comma separated, e.g. "2.4 GHz, 2.45 GHz".
    #[arg(long)]
    pub frequencies: Option<String>,
    /// Accepted port power the budget and SAR are scaled to, mW.
    #[arg(long, default_value_t = 100.0)]
    pub normalize_mw: f64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub scene: PathBuf,
    /// Solver and analysis settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Analyse this saved record instead of running the solver.
    #[arg(long)]
    pub record: Option<PathBuf>,
    /// Keep every field edge and write per-component amplitude snapshots.
    #[arg(long)]
    pub snapshots: bool,
    #[command(flatten)]
    pub shared: Shared,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    /// Shipped preset name (`default`, `free-space`) or a study file.
    #[arg(long, default_value = "default")]
    pub preset: String,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Measured resonances to compare with the modelled ones.
    #[arg(long)]
    pub measurements: Option<PathBuf>,
    #[command(flatten)]
    pub shared: Shared,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub measurements: PathBuf,
    /// CSV with `placement` and `f_res_ghz` columns, such as a study's results.csv.
    #[arg(long)]
    pub modeled: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse `args` (program name first), run, and return the exit status.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let command: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli.command, &command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cmd: &Command, argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let db = TissueDatabase::builtin();
    match cmd {
        Command::Materials(a) => materials(a, &db, out),
        Command::Design(a) => design(a, out),
        Command::Simulate(a) => simulate(a, argv, &db, out, err),
        Command::Analyze(a) => analyze(a, argv, &db, out, err),
        Command::Sar(a) => sar(a, argv, &db, out, err),
        Command::Study(a) => study(a, argv, &db, out, err),
        Command::Stats(a) => stats(a, out),
    }
}

fn flag_quantity(flag: &str, text: &str, dim: Dimension) -> Result<f64> {
    units::parse(text, dim).map_err(|e| Error::Usage(format!("--{flag}: {e}")))
}

fn out_line(out: &mut dyn Write, line: impl AsRef<str>) -> Result<()> {
    writeln!(out, "{}", line.as_ref()).map_err(|e| Error::io("<stdout>", e))
}

fn materials(a: &MaterialsArgs, db: &TissueDatabase, out: &mut dyn Write) -> Result<()> {
    let f = flag_quantity("frequency", &a.frequency, Dimension::Frequency)?;
    let names: Vec<String> = if a.tissue == "all" {
        db.iter().map(|(n, _)| n.to_string()).collect()
    } else if db.get(&a.tissue).is_some() {
        vec![a.tissue.clone()]
    } else {
        let hint = db.suggestions(&a.tissue, 3).join(", ");
        return Err(Error::Core(wearfdtd_core::Error::UnknownTissue(format!(
            "{}; closest matches: {hint}",
            a.tissue
        ))));
    };
    let mut rows = Vec::new();
    for n in &names {
        let m = db.material(n)?;
        let medium = m.medium_at(f)?;
        rows.push(vec![n.clone(), format!("{}", f / 1e9), format!("{:.4}", medium.eps_r), format!("{:.4}", medium.sigma), format!("{}", m.density)]);
    }
    let header = ["tissue", "f_ghz", "eps_r", "sigma_s_m", "density_kg_m3"];
    let mut b = Bundle::default();
    b.add_csv("t.csv", &header, &rows);
    let table = b.get("t.csv").expect("just added").to_vec();
    out.write_all(&table).map_err(|e| Error::io("<stdout>", e))?;
    if let Some(path) = &a.out {
        std::fs::write(path, &table).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn design(a: &DesignArgs, out: &mut dyn Write) -> Result<()> {
    let f = flag_quantity("frequency", &a.frequency, Dimension::Frequency)?;
    let l = slot_design_length(f, a.eps_r)?;
    out_line(out, format!("slot_length = \"{l:.2} mm\"  # half wavelength at {} GHz, eps_r {}", f / 1e9, a.eps_r))?;
    let p = AntennaParams::default();
    out_line(out, "\n[antenna]  # default dimensions")?;
    for (k, v) in [
        ("w_b", p.w_b),
        ("l_b", p.l_b),
        ("w_p", p.w_p),
        ("l_p", p.l_p),
        ("w_l", p.w_l),
        ("l_l", p.l_l),
        ("d", p.d),
        ("h1", p.h1),
        ("h2", p.h2),
        ("h_b", p.h_b),
        ("wall_thickness", p.wall_thickness),
        ("slot_length", p.slot_length),
        ("slot_width", p.slot_width),
        ("plate_thickness", p.plate_thickness),
    ] {
        out_line(out, format!("{k} = \"{v} mm\""))?;
    }
    Ok(())
}

/// Scene, solver settings and analysis settings after every file and flag is applied.
struct Prepared {
    spec: SceneSpec,
    config: SimConfig,
    analysis: AnalysisSettings,
    inputs: Vec<PathBuf>,
}

fn apply_shared(s: &Shared, config: &mut SimConfig, analysis: &mut AnalysisSettings, dx: &mut f64) -> Result<()> {
    if let Some(d) = &s.dx {
        *dx = flag_quantity("dx", d, Dimension::Length)?;
    }
    if let Some(fs) = &s.frequencies {
        config.dft_frequencies = fs
            .split(',')
            .map(|t| flag_quantity("frequencies", t.trim(), Dimension::Frequency))
            .collect::<Result<_>>()?;
    }
    if !(s.normalize_mw > 0.0) {
        return Err(Error::Usage("--normalize-mw must be positive".to_string()));
    }
    analysis.normalize_to = s.normalize_mw * 1e-3;
    config.validate()?;
    Ok(())
}

fn prepare(a: &RunArgs, db: &TissueDatabase) -> Result<Prepared> {
    let scene_src = Source::read(&a.scene)?;
    let mut spec = scene_src.scene(db)?;
    let mut config = SimConfig::default();
    let mut analysis = AnalysisSettings::default();
    scene_src.apply_config(&mut config, &mut analysis)?;
    let mut inputs = vec![a.scene.clone()];
    if let Some(c) = &a.config {
        Source::read(c)?.apply_config(&mut config, &mut analysis)?;
        inputs.push(c.clone());
    }
    if a.snapshots {
        config.volume = VolumeMode::Full;
    }
    apply_shared(&a.shared, &mut config, &mut analysis, &mut spec.grid.dx_mm)?;
    Ok(Prepared {
        spec,
        config,
        analysis,
        inputs,
    })
}

fn parameters(p: &Prepared, grid: &VoxelGrid) -> Value {
    json!({
        "grid": report::grid_json(&p.spec.grid),
        "grid_dims": grid.dims,
        "grid_origin_mm": grid.origin_mm,
        "explicit_region": p.spec.region.map(|r| json!({ "min_mm": r.min, "max_mm": r.max })),
        "materials": grid.materials.iter().map(report::material_json).collect::<Vec<_>>(),
        "primitives": p.spec.scene.primitives.len(),
        "solver": report::config_json(&p.config),
        "analysis": report::analysis_json(&p.analysis),
    })
}

fn manifest(argv: &[String], out: &Path, threads: usize, params: Value, inputs: &[PathBuf]) -> Result<Manifest> {
    let mut m = Manifest::new(argv.to_vec(), out, threads, params);
    for i in inputs {
        m.add_input(i)?;
    }
    Ok(m)
}

/// The record for a prepared scene: loaded from `--record`, the cache, or a fresh run.
fn obtain_record(a: &RunArgs, p: &mut Prepared, grid: &VoxelGrid, err: &mut dyn Write) -> Result<(RunRecord, usize)> {
    if let Some(path) = &a.record {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let rec: RunRecord = bincode::deserialize(&bytes).map_err(|e| Error::Cache {
            path: path.clone(),
            message: e.to_string(),
        })?;
        if rec.dims != grid.dims || rec.dx_mm != grid.dx_mm {
            return Err(Error::Usage(format!(
                "{} was recorded on a {:?} grid at {} mm; the scene gives {:?} at {} mm",
                path.display(),
                rec.dims,
                rec.dx_mm,
                grid.dims,
                grid.dx_mm
            )));
        }
        p.inputs.push(path.clone());
        return Ok((rec, a.shared.threads));
    }
    let _ = writeln!(err, "running {:?} cells", grid.dims);
    let cache = a.shared.cache.as_ref().map(RecordCache::new);
    let (rec, threads) = with_threads(a.shared.threads, || run_record(grid, &p.config, cache.as_ref()))?;
    Ok((rec?, threads))
}

fn simulate(a: &RunArgs, argv: &[String], db: &TissueDatabase, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut p = prepare(a, db)?;
    let grid = p.spec.rasterize(&p.config)?;
    let (rec, threads) = obtain_record(a, &mut p, &grid, err)?;
    let mut b = Bundle::default();
    let series: Vec<Vec<String>> = rec
        .voltage
        .iter()
        .zip(&rec.current)
        .enumerate()
        .map(|(n, (v, i))| vec![n.to_string(), format!("{}", (n as f64 + 1.0) * rec.dt), format!("{v}"), format!("{i}")])
        .collect();
    b.add_csv("port_series.csv", &["step", "t_s", "v_v", "i_a"], &series);
    let spectrum = s11_spectrum(&rec, p.analysis.z0, &p.analysis.frequencies())?;
    let res = resonance_and_bandwidth(&spectrum)?;
    b.add_csv("spectrum.csv", &report::SPECTRUM_COLUMNS, &report::spectrum_rows(&spectrum));
    b.add_json(
        "summary.json",
        &json!({ "run": report::run_json(&rec, &grid), "resonance": report::resonance_json(&res),
                 "leakage_warning": spectrum.leakage_warning }),
    );
    if a.snapshots {
        for (fi, f) in rec.frequencies.iter().enumerate() {
            for axis in Axis::ALL {
                let s = field_snapshot(&rec, &grid, axis, fi)?;
                let name = format!("snapshots/e{}_{:.4}ghz.fld", ["x", "y", "z"][axis.index()], f / 1e9);
                b.add(name, s.encode()?);
            }
        }
    }
    b.add("record.bin", bincode::serialize(&rec).map_err(|e| Error::Usage(e.to_string()))?);
    b.seal(&manifest(argv, &a.out, threads, parameters(&p, &grid), &p.inputs)?);
    b.write(&a.out)?;
    out_line(
        out,
        format!(
            "f_res {:.4} GHz, min S11 {:.2} dB, {} steps ({:?})",
            res.f_res / 1e9,
            res.min_db,
            rec.steps,
            rec.termination
        ),
    )
}

fn analyze(a: &RunArgs, argv: &[String], db: &TissueDatabase, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut p = prepare(a, db)?;
    let grid = p.spec.rasterize(&p.config)?;
    let (rec, threads) = obtain_record(a, &mut p, &grid, err)?;
    let an = &p.analysis;
    let spectrum = s11_spectrum(&rec, an.z0, &an.frequencies())?;
    let res = resonance_and_bandwidth(&spectrum)?;
    let budget = power_budget(&rec, &grid, an.f_eval, an.normalize_to)?;
    let eta = radiation_efficiency(&budget)?;
    let eta_ant = antenna_efficiency(eta, &spectrum, an.f_eval)?;
    let mut b = Bundle::default();
    b.add_csv("spectrum.csv", &report::SPECTRUM_COLUMNS, &report::spectrum_rows(&spectrum));
    let far = if rec.surface.is_some() {
        let far = ntff_with(&rec, an.f_eval, an.n_theta, an.n_phi, an.cut_points)?;
        report::add_run_figures(&mut b, "run", &spectrum, &far);
        Some(far)
    } else {
        None
    };
    let far_json = far.as_ref().map(|f| {
        json!({
            "peak_directivity": f.peak_directivity(),
            "peak_directivity_dbi": 10.0 * f.peak_directivity().log10(),
            "front_to_back_db": front_to_back(f),
            "integrated_over_radiated": f.p_integrated / f.p_rad,
        })
    });
    b.add_json(
        "report.json",
        &json!({
            "run": report::run_json(&rec, &grid),
            "resonance": report::resonance_json(&res),
            "budget": report::budget_json(&budget, eta, eta_ant),
            "far_field": far_json,
            "leakage_warning": spectrum.leakage_warning,
        }),
    );
    b.seal(&manifest(argv, &a.out, threads, parameters(&p, &grid), &p.inputs)?);
    b.write(&a.out)?;
    out_line(
        out,
        format!(
            "f_res {:.4} GHz, eta_rad {:.3}, eta_ant {:.3}, P_a {:.2} mW, closure {:.2e}",
            res.f_res / 1e9,
            eta,
            eta_ant,
            budget.p_a * 1e3,
            budget.closure_error()
        ),
    )
}

fn sar(a: &RunArgs, argv: &[String], db: &TissueDatabase, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut p = prepare(a, db)?;
    let grid = p.spec.rasterize(&p.config)?;
    let (rec, threads) = obtain_record(a, &mut p, &grid, err)?;
    let an = &p.analysis;
    let field = point_sar(&rec, &grid, an.f_eval, an.normalize_to)?;
    let rep = sar_report(&field, an.target_mass_g)?;
    let avg = sar_10g(&field, an.target_mass_g)?;
    let c = rep.compliance(p.spec.sar_region);
    let mut b = Bundle::default();
    b.add_json(
        "sar.json",
        &json!({
            "report": report::sar_json(&rep),
            "absorbed_power_w": field.absorbed_power(),
            "tissue_mass_kg": field.tissue_mass(),
            "compliance": {
                "region": format!("{:?}", c.region).to_lowercase(),
                "limit_w_kg": c.limit,
                "pass": c.pass,
                "margin_db": c.margin_db,
            },
        }),
    );
    b.add("sar_point.fld", cell_snapshot(field.dims, &field.sar).encode()?);
    let averaged: Vec<f64> = (0..field.sar.len()).map(|i| avg.value(i).unwrap_or(f64::NAN)).collect();
    b.add("sar_averaged.fld", cell_snapshot(field.dims, &averaged).encode()?);
    for (plane, rows) in report::sar_slices(&field, rep.max_point_cell) {
        b.add_csv(format!("slices/sar_{plane}.csv"), &["u_mm", "v_mm", "sar_w_kg"], &rows);
    }
    b.seal(&manifest(argv, &a.out, threads, parameters(&p, &grid), &p.inputs)?);
    b.write(&a.out)?;
    out_line(
        out,
        format!(
            "max point SAR {:.4} W/kg, max {} g SAR {:.4} W/kg ({}; limit {} W/kg)",
            rep.max_point,
            rep.target_mass_g,
            rep.max_averaged,
            if c.pass { "pass" } else { "FAIL" },
            c.limit
        ),
    )
}

/// The scenario set a `study` invocation describes, with its input files.
pub fn study_set(a: &StudyArgs, db: &TissueDatabase) -> Result<(ScenarioSet, Vec<PathBuf>)> {
    let (src, mut inputs) = match presets::preset(&a.preset) {
        Some(src) => (src?, Vec::new()),
        None => {
            let path = PathBuf::from(&a.preset);
            (Source::read(&path)?, vec![path])
        }
    };
    let mut set = src.scenario_set(db)?;
    if let Some(c) = &a.config {
        Source::read(c)?.apply_config(&mut set.solver, &mut set.analysis)?;
        inputs.push(c.clone());
    }
    apply_shared(&a.shared, &mut set.solver, &mut set.analysis, &mut set.grid.dx_mm)?;
    set.validate()?;
    Ok((set, inputs))
}

fn stats_csv(rows: &[StatsRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|s| {
            vec![
                s.location.clone(),
                s.samples.to_string(),
                format!("{}", s.mean),
                format!("{}", s.std),
                format!("{}", s.modeled),
                format!("{}", s.probability),
            ]
        })
        .collect()
}

const STATS_COLUMNS: [&str; 6] = ["location", "samples", "mean_ghz", "std_ghz", "modeled_ghz", "probability_per_ghz"];

fn study(a: &StudyArgs, argv: &[String], db: &TissueDatabase, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let (set, mut inputs) = study_set(a, db)?;
    let cache = a.shared.cache.as_ref().map(RecordCache::new);
    let (study, threads) = with_threads(a.shared.threads, || {
        run_set(&set, db, cache.as_ref(), |name, dims| {
            let _ = writeln!(std::io::stderr(), "{name}: {dims:?} cells");
        })
    })?;
    let study = study?;
    let stats = match &a.measurements {
        Some(path) => {
            let ms = measurements::read(path)?;
            inputs.push(path.clone());
            let modeled: BTreeMap<String, f64> = study.result.rows.iter().map(|r| (r.name.clone(), r.f_res / 1e9)).collect();
            Some(stats_rows(&measurements::samples(&ms), &modeled)?)
        }
        None => None,
    };
    let mut b = report::study_bundle(&study, &set, stats.as_deref());
    if let Some(s) = &stats {
        b.add_csv("statistics.csv", &STATS_COLUMNS, &stats_csv(s));
    }
    b.seal(&manifest(argv, &a.out, threads, report::set_json(&set), &inputs)?);
    b.write(&a.out)?;
    for r in &study.result.rows {
        out_line(
            out,
            format!(
                "{:<12} f_res {:.4} GHz  shift {:>5}  eta {:.3}  P_a {:6.2} mW  SAR10g {}",
                r.name,
                r.f_res / 1e9,
                r.shift_percent.map_or(String::new(), |s| format!("{s:.2}%")),
                r.eta_rad,
                r.p_a * 1e3,
                r.sar_10g.map_or("-".to_string(), |s| format!("{s:.3} W/kg"))
            ),
        )?;
    }
    if let Some(r) = study.result.pearson_r {
        out_line(out, format!("pearson r(eta_rad, P_a) = {r:.4}"))?;
    }
    if let Some((name, e)) = study.result.failures.first() {
        for (n, e) in &study.result.failures {
            let _ = writeln!(err, "placement `{n}` failed: {e}");
        }
        return Err(Error::PartialStudy(format!(
            "{} placement(s) failed, first `{name}`: {e}",
            study.result.failures.len()
        )));
    }
    Ok(())
}

fn modeled_from_csv(path: &Path) -> Result<BTreeMap<String, f64>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::parse(path, None, e.to_string()))?;
    let headers = reader.headers().map_err(|e| Error::parse(path, Some(1), e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse(path, Some(1), format!("missing column `{name}`")))
    };
    let (ci, cf) = (col("placement")?, col("f_res_ghz")?);
    let mut map = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, Some(i + 2), e.to_string()))?;
        let f: f64 = rec
            .get(cf)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::parse(path, Some(i + 2), "f_res_ghz is not a number"))?;
        map.insert(rec.get(ci).unwrap_or("").trim().to_string(), f);
    }
    Ok(map)
}

fn stats(a: &StatsArgs, out: &mut dyn Write) -> Result<()> {
    let ms = measurements::read(&a.measurements)?;
    let modeled = modeled_from_csv(&a.modeled)?;
    let rows = stats_rows(&measurements::samples(&ms), &modeled)?;
    let mut b = Bundle::default();
    b.add_csv("statistics.csv", &STATS_COLUMNS, &stats_csv(&rows));
    let table = b.get("statistics.csv").expect("just added").to_vec();
    out.write_all(&table).map_err(|e| Error::io("<stdout>", e))?;
    if let Some(path) = &a.out {
        std::fs::write(path, &table).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with(std::iter::once("wearfdtd").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn design_prints_slot_length() {
        let (code, out, _) = run(&["design", "--frequency", "2.45 GHz", "--eps-r", "4"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("slot_length = \"38.6") || out.starts_with("slot_length = \"38.7"), "{out}");
    }

    #[test]
    fn missing_arguments_are_usage_errors() {
        let (code, _, err) = run(&["design", "--frequency", "2.45 GHz"]);
        assert_eq!(code, 2);
        assert!(err.contains("--eps-r"), "{err}");
        assert_eq!(run(&["bogus"]).0, 2);
    }

    #[test]
    fn unknown_tissue_suggests_names() {
        let (code, _, err) = run(&["materials", "musle"]);
        assert_eq!(code, 2);
        assert!(err.contains("muscle"), "{err}");
    }

    #[test]
    fn frequency_flag_needs_units() {
        let (code, _, err) = run(&["materials", "muscle", "--frequency", "2.45"]);
        assert_eq!(code, 2);
        assert!(err.contains("unit"), "{err}");
    }
}
