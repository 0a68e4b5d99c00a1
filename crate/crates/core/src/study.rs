//! Placement studies: the antenna in free space and on a set of layered phantoms.
//!
//! Each placement is rasterized and run independently; [`run_study`] then reduces the
//! runs to one [`StudyRow`] each plus the cross-placement statistics. The free-space
//! reference is looked up by name, so row order never affects any number.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::analysis::{
    antenna_efficiency, front_to_back, frequency_grid, ntff_with, power_budget, radiation_efficiency,
    resonance_and_bandwidth, s11_spectrum, FarField, PortSpectrum, PowerBudget, ResonanceReport,
};
use crate::dielectrics::TissueDatabase;
use crate::dosimetry::{figure_of_merit, point_sar, sar_report, Compliance, Region, SarReport};
use crate::scene::{
    build_antenna, build_phantom, fat_thickness_for_bmi, rasterize, AntennaParams, PhantomKind, PhantomSpec,
    Scene, VoxelGrid, DEFAULT_MAX_CELLS,
};
use crate::solver::{RunRecord, SimConfig};
use crate::stats::{frequency_shift, mean_std, model_measurement_probability, pearson_r, regression_slope};
use crate::{Error, Result};

/// Name of the mandatory reference placement.
pub const FREE_SPACE: &str = "free-space";

/// One antenna position: a phantom (or none for free space) and the air gap under the box.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub name: String,
    pub phantom: Option<PhantomSpec>,
    pub gap_mm: f64,
    /// Limit class for the compliance check.
    pub region: Region,
}

impl Placement {
    pub fn free_space() -> Self {
        Self {
            name: FREE_SPACE.to_string(),
            phantom: None,
            gap_mm: 0.0,
            region: Region::Trunk,
        }
    }

    pub fn layered(name: &str, layers: &[(&str, f64)], lateral_mm: [f64; 2], region: Region) -> Self {
        Self {
            name: name.to_string(),
            phantom: Some(PhantomSpec::layered(
                layers.iter().map(|(t, d)| (t.to_string(), *d)).collect(),
                lateral_mm,
            )),
            gap_mm: 0.0,
            region,
        }
    }

    /// Replace the fat layer thickness with the BMI surrogate.
    pub fn with_bmi(mut self, bmi: f64) -> Result<Self> {
        let fat = fat_thickness_for_bmi(bmi);
        match self.phantom.as_mut().map(|p| &mut p.kind) {
            Some(PhantomKind::Layered { layers, .. }) => {
                let layer = layers
                    .iter_mut()
                    .find(|(t, _)| t == "fat")
                    .ok_or_else(|| Error::InvalidArgument(format!("placement `{}` has no fat layer", self.name)))?;
                layer.1 = fat;
                Ok(self)
            }
            _ => Err(Error::InvalidArgument(format!(
                "placement `{}` has no layered phantom",
                self.name
            ))),
        }
    }
}

/// Grid resolution and extent shared by every placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSettings {
    pub dx_mm: f64,
    pub padding_cells: usize,
    pub max_cells: u64,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            dx_mm: 0.75,
            padding_cells: 16,
            max_cells: DEFAULT_MAX_CELLS,
        }
    }
}

/// Post-processing settings shared by every placement.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSettings {
    pub z0: f64,
    /// S11 grid: `n_freq` points from `f_lo` to `f_hi`.
    pub f_lo: f64,
    pub f_hi: f64,
    pub n_freq: usize,
    /// Frequency of the power budget, far field and SAR.
    pub f_eval: f64,
    /// Accepted port power, W.
    pub normalize_to: f64,
    pub target_mass_g: f64,
    pub n_theta: usize,
    pub n_phi: usize,
    pub cut_points: usize,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            z0: 50.0,
            f_lo: 1.5e9,
            f_hi: 3.5e9,
            n_freq: 401,
            f_eval: 2.45e9,
            normalize_to: 0.1,
            target_mass_g: 10.0,
            n_theta: 36,
            n_phi: 72,
            cut_points: 180,
        }
    }
}

impl AnalysisSettings {
    pub fn frequencies(&self) -> Vec<f64> {
        frequency_grid(self.f_lo, self.f_hi, self.n_freq)
    }
}

/// Placements plus everything they share.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    pub antenna: AntennaParams,
    pub placements: Vec<Placement>,
    pub grid: GridSettings,
    pub solver: SimConfig,
    pub analysis: AnalysisSettings,
}

/// Lateral extent of the preset phantoms: twice the box footprint.
fn preset_lateral(antenna: &AntennaParams) -> [f64; 2] {
    let o = antenna.outer_size();
    [2.0 * o[1], 2.0 * o[2]]
}

impl ScenarioSet {
    /// Free space plus the six body positions, each as a compositional phantom surrogate.
    pub fn default_preset() -> Self {
        let antenna = AntennaParams::default();
        let lat = preset_lateral(&antenna);
        let limb = Region::Limb;
        let trunk = Region::Trunk;
        let placements = vec![
            Placement::free_space(),
            Placement::layered(
                "wrist",
                &[("skin_dry", 1.5), ("fat", 2.0), ("muscle", 10.0), ("bone_cortical", 15.0)],
                lat,
                limb,
            ),
            Placement::layered(
                "above-elbow",
                &[("skin_dry", 1.5), ("fat", 3.0), ("muscle", 15.0), ("bone_cortical", 20.0)],
                lat,
                limb,
            ),
            Placement::layered(
                "upper-arm",
                &[("skin_dry", 2.0), ("fat", 5.0), ("muscle", 30.0), ("bone_cortical", 20.0)],
                lat,
                limb,
            ),
            Placement::layered("torso-1", &[("skin_dry", 2.0), ("fat", 7.0), ("muscle", 25.0)], lat, trunk),
            Placement::layered("torso-2", &[("skin_dry", 2.0), ("fat", 8.0), ("muscle", 30.0)], lat, trunk),
            Placement::layered(
                "thigh",
                &[("skin_dry", 2.0), ("fat", 6.0), ("muscle", 40.0)],
                lat,
                limb,
            ),
        ];
        Self {
            antenna,
            placements,
            grid: GridSettings::default(),
            solver: SimConfig::default(),
            analysis: AnalysisSettings::default(),
        }
    }

    /// Only the free-space reference.
    pub fn free_space_only() -> Self {
        let mut set = Self::default_preset();
        set.placements.retain(|p| p.name == FREE_SPACE);
        set
    }

    pub fn placement(&self, name: &str) -> Option<&Placement> {
        self.placements.iter().find(|p| p.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        if self.placement(FREE_SPACE).is_none() {
            return Err(Error::Validation(format!("scenario set lacks the `{FREE_SPACE}` placement")));
        }
        for (i, p) in self.placements.iter().enumerate() {
            if self.placements[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::Validation(format!("placement `{}` appears twice", p.name)));
            }
            if p.name != FREE_SPACE && p.phantom.is_none() {
                return Err(Error::Validation(format!("placement `{}` has no phantom", p.name)));
            }
            if !(p.gap_mm >= 0.0) {
                return Err(Error::Validation(format!("placement `{}` has a negative gap", p.name)));
            }
        }
        let f = self.analysis.f_eval;
        if !self.solver.dft_frequencies.iter().any(|&g| (g - f).abs() <= 1e-6 * f) {
            return Err(Error::Validation(format!(
                "evaluation frequency {f} Hz is not among the recorded DFT frequencies"
            )));
        }
        Ok(())
    }

    /// Antenna plus the placement's phantom.
    pub fn scene(&self, placement: &Placement, db: &TissueDatabase) -> Result<Scene> {
        let mut scene = build_antenna(&self.antenna)?;
        if let Some(ph) = &placement.phantom {
            let placed = ph.clone().placed(self.antenna.footprint_center(), placement.gap_mm);
            scene.merge(build_phantom(&placed, db)?);
        }
        Ok(scene)
    }

    pub fn rasterize(&self, placement: &Placement, db: &TissueDatabase) -> Result<VoxelGrid> {
        let scene = self.scene(placement, db)?;
        rasterize(
            &scene,
            self.grid.dx_mm,
            self.grid.padding_cells,
            self.solver.cpml.depth + 4,
            self.grid.max_cells,
        )
    }
}

/// Everything derived from one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub name: String,
    pub spectrum: PortSpectrum,
    pub resonance: ResonanceReport,
    pub budget: PowerBudget,
    pub eta_rad: f64,
    pub eta_ant: f64,
    pub far_field: FarField,
    pub front_to_back_db: f64,
    pub sar: Option<SarReport>,
    pub compliance: Option<Compliance>,
    pub figure_of_merit: Option<f64>,
    pub steps: usize,
    pub leakage_warning: bool,
}

/// Reduce one run to the study quantities.
pub fn analyze_scenario(
    set: &ScenarioSet,
    placement: &Placement,
    grid: &VoxelGrid,
    record: &RunRecord,
) -> Result<ScenarioOutcome> {
    let a = &set.analysis;
    let spectrum = s11_spectrum(record, a.z0, &a.frequencies())?;
    let resonance = resonance_and_bandwidth(&spectrum)?;
    let budget = power_budget(record, grid, a.f_eval, a.normalize_to)?;
    let eta_rad = radiation_efficiency(&budget)?;
    let eta_ant = antenna_efficiency(eta_rad, &spectrum, a.f_eval)?;
    let far_field = ntff_with(record, a.f_eval, a.n_theta, a.n_phi, a.cut_points)?;
    let front_to_back_db = front_to_back(&far_field);
    let (sar, compliance, fom) = if placement.phantom.is_some() {
        let field = point_sar(record, grid, a.f_eval, a.normalize_to)?;
        let report = sar_report(&field, a.target_mass_g)?;
        let c = report.compliance(placement.region);
        let fom = figure_of_merit(eta_ant, report.max_averaged)?;
        (Some(report), Some(c), Some(fom))
    } else {
        (None, None, None)
    };
    Ok(ScenarioOutcome {
        name: placement.name.clone(),
        leakage_warning: spectrum.leakage_warning,
        spectrum,
        resonance,
        budget,
        eta_rad,
        eta_ant,
        far_field,
        front_to_back_db,
        sar,
        compliance,
        figure_of_merit: fom,
        steps: record.steps,
    })
}

/// One line of the study table.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub name: String,
    pub f_res: f64,
    pub min_s11_db: f64,
    pub fractional_bw: Option<f64>,
    pub eta_rad: f64,
    pub eta_ant: f64,
    /// W, at the study normalization.
    pub p_r: f64,
    pub p_d: f64,
    pub p_a: f64,
    pub p_a_by_material: Vec<(String, f64)>,
    pub closure_error: f64,
    pub sar_10g: Option<f64>,
    pub sar_point: Option<f64>,
    pub figure_of_merit: Option<f64>,
    pub compliance_pass: Option<bool>,
    pub front_to_back_db: f64,
    pub peak_directivity: f64,
    /// Downward shift against free space, percent.
    pub shift_percent: Option<f64>,
}

/// Study table and cross-placement statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    /// Rows of the successful placements, in set order.
    pub rows: Vec<StudyRow>,
    /// `(placement, error message)` for placements that failed.
    pub failures: Vec<(String, String)>,
    /// Pearson r of `(η_rad, P_a)` over on-body rows; `None` with fewer than three.
    pub pearson_r: Option<f64>,
    /// Least-squares slope of `P_a` on `η_rad`, W.
    pub slope: Option<f64>,
}

impl StudyResult {
    pub fn row(&self, name: &str) -> Option<&StudyRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn on_body(&self) -> impl Iterator<Item = &StudyRow> {
        self.rows.iter().filter(|r| r.name != FREE_SPACE)
    }
}

fn row_of(o: &ScenarioOutcome) -> StudyRow {
    StudyRow {
        name: o.name.clone(),
        f_res: o.resonance.f_res,
        min_s11_db: o.resonance.min_db,
        fractional_bw: o.resonance.fractional_bw(),
        eta_rad: o.eta_rad,
        eta_ant: o.eta_ant,
        p_r: o.budget.p_r,
        p_d: o.budget.p_d,
        p_a: o.budget.p_a,
        p_a_by_material: o.budget.p_a_by_material.clone(),
        closure_error: o.budget.closure_error(),
        sar_10g: o.sar.as_ref().map(|s| s.max_averaged),
        sar_point: o.sar.as_ref().map(|s| s.max_point),
        figure_of_merit: o.figure_of_merit,
        compliance_pass: o.compliance.map(|c| c.pass),
        front_to_back_db: o.front_to_back_db,
        peak_directivity: o.far_field.peak_directivity(),
        shift_percent: None,
    }
}

/// Assemble the study table from per-placement outcomes.
pub fn aggregate(outcomes: &[(String, Result<ScenarioOutcome>)]) -> StudyResult {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (name, o) in outcomes {
        match o {
            Ok(o) => rows.push(row_of(o)),
            Err(e) => failures.push((name.clone(), e.to_string())),
        }
    }
    if let Some(f_free) = rows.iter().find(|r| r.name == FREE_SPACE).map(|r| r.f_res) {
        for r in &mut rows {
            r.shift_percent = frequency_shift(f_free, r.f_res).ok();
        }
    }
    // Sum in name order so that the statistics do not depend on row order, to the bit.
    let mut on_body: Vec<&StudyRow> = rows.iter().filter(|r| r.name != FREE_SPACE).collect();
    on_body.sort_by(|a, b| a.name.cmp(&b.name));
    let (eta, pa): (Vec<f64>, Vec<f64>) = on_body.iter().map(|r| (r.eta_rad, r.p_a)).unzip();
    StudyResult {
        pearson_r: pearson_r(&eta, &pa).ok(),
        slope: regression_slope(&eta, &pa).ok(),
        rows,
        failures,
    }
}

/// A study: the reduced table plus every per-placement outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Study {
    pub result: StudyResult,
    pub outcomes: Vec<(String, Result<ScenarioOutcome>)>,
}

/// Run every placement with `runner` (free space first) and reduce the results.
///
/// A placement that fails to rasterize, run or analyse is recorded in
/// [`StudyResult::failures`] and the remaining placements still run.
pub fn run_study<R>(set: &ScenarioSet, db: &TissueDatabase, mut runner: R) -> Result<Study>
where
    R: FnMut(&Placement, &VoxelGrid, &SimConfig) -> Result<RunRecord>,
{
    set.validate()?;
    let mut order: Vec<&Placement> = set.placements.iter().collect();
    order.sort_by_key(|p| p.name != FREE_SPACE);
    let mut done: BTreeMap<String, Result<ScenarioOutcome>> = BTreeMap::new();
    for p in order {
        let outcome = set
            .rasterize(p, db)
            .and_then(|grid| runner(p, &grid, &set.solver).and_then(|rec| analyze_scenario(set, p, &grid, &rec)));
        done.insert(p.name.clone(), outcome);
    }
    let outcomes: Vec<(String, Result<ScenarioOutcome>)> = set
        .placements
        .iter()
        .map(|p| {
            let o = done.remove(&p.name).expect("every placement ran");
            (p.name.clone(), o)
        })
        .collect();
    Ok(Study {
        result: aggregate(&outcomes),
        outcomes,
    })
}

/// Measured-versus-modelled agreement for one body position.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub location: String,
    /// Sample mean, GHz.
    pub mean: f64,
    /// Sample standard deviation (`n − 1`), GHz.
    pub std: f64,
    pub samples: usize,
    /// Modelled resonance, GHz.
    pub modeled: f64,
    /// Normal density of the measurements at the modelled value, 1/GHz.
    pub probability: f64,
}

/// Group `(location, f_res GHz)` samples and compare each group with its modelled value.
///
/// Locations without a modelled value are skipped; rows follow first appearance.
pub fn stats_rows(samples: &[(String, f64)], modeled_ghz: &BTreeMap<String, f64>) -> Result<Vec<StatsRow>> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (loc, f) in samples {
        if !groups.contains_key(loc.as_str()) {
            order.push(loc);
        }
        groups.entry(loc).or_default().push(*f);
    }
    let mut rows = Vec::new();
    for loc in order {
        let Some(&modeled) = modeled_ghz.get(loc) else {
            continue;
        };
        let xs = &groups[loc];
        let (mean, std) = mean_std(xs)?;
        let probability = model_measurement_probability(mean, std, modeled).map_err(|_| {
            Error::DegenerateVariance(format!("location `{loc}` has identical measurements"))
        })?;
        rows.push(StatsRow {
            location: loc.to_string(),
            mean,
            std,
            samples: xs.len(),
            modeled,
            probability,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_preset_is_valid() {
        let set = ScenarioSet::default_preset();
        set.validate().unwrap();
        assert_eq!(set.placements.len(), 7);
        let db = TissueDatabase::builtin();
        for p in &set.placements {
            set.scene(p, &db).unwrap();
        }
    }

    #[test]
    fn free_space_is_required_and_names_unique() {
        let mut set = ScenarioSet::default_preset();
        set.placements.remove(0);
        assert!(matches!(set.validate(), Err(Error::Validation(_))));
        let mut set = ScenarioSet::default_preset();
        let dup = set.placements[1].clone();
        set.placements.push(dup);
        assert!(matches!(set.validate(), Err(Error::Validation(_))));
    }

    #[test]
    fn bmi_sets_fat() {
        let set = ScenarioSet::default_preset();
        let p = set.placement("upper-arm").unwrap().clone().with_bmi(29.0).unwrap();
        let Some(PhantomKind::Layered { layers, .. }) = p.phantom.map(|p| p.kind) else {
            panic!("layered")
        };
        assert_eq!(layers.iter().find(|l| l.0 == "fat").unwrap().1, 15.0);
        assert!(Placement::free_space().with_bmi(20.0).is_err());
    }

    #[test]
    fn stats_rows_group_and_skip() {
        let s: Vec<(String, f64)> = [("a", 2.40), ("b", 2.0), ("a", 2.42), ("b", 2.2), ("c", 1.0), ("c", 1.1)]
            .iter()
            .map(|(l, f)| (l.to_string(), *f))
            .collect();
        let mut m = BTreeMap::new();
        m.insert("a".to_string(), 2.41);
        m.insert("b".to_string(), 2.1);
        let rows = stats_rows(&s, &m).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].location, "a");
        assert!((rows[0].std - 0.01414).abs() < 1e-5);
        let single = [("a".to_string(), 2.4)];
        assert!(matches!(stats_rows(&single, &m), Err(Error::InsufficientSamples { .. })));
    }
}
