//! Scene, solver and study files.
//!
//! All three are TOML documents sharing one schema; a file uses whichever sections it
//! needs. Physical quantities are strings with a unit suffix (`"33 mm"`, `"2.45 GHz"`) and
//! unknown keys are rejected. Errors point at the offending line.
//!
//! ```toml
//! [antenna]
//! l_p = "34 mm"
//! feed = "end-wall"
//!
//! [phantom]
//! gap = "0 mm"
//! [[phantom.layer]]
//! tissue = "skin_dry"
//! thickness = "2 mm"
//!
//! [grid]
//! dx = "0.75 mm"
//! ```

use std::collections::BTreeMap;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;
use wearfdtd_core::dielectrics::{constant_from_tand, MaterialSpec, TissueDatabase};
use wearfdtd_core::dosimetry::Region;
use wearfdtd_core::scene::{
    build_antenna, build_phantom, fat_thickness_for_bmi, pla, rasterize, rasterize_region, Aabb, AntennaParams,
    Axis, Feed, LumpedLoad, PhantomKind, PhantomSpec, PortSpec, Scene, VoxelGrid,
};
use wearfdtd_core::solver::{EdgeMaterial, SimConfig, VolumeMode};
use wearfdtd_core::study::{AnalysisSettings, GridSettings, Placement, ScenarioSet, FREE_SPACE};

use crate::error::{Error, Result};
use crate::units::{self, Dimension};
use crate::voxel;

type Q = Spanned<String>;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub study: Option<StudySection>,
    #[serde(default)]
    pub materials: BTreeMap<String, Spanned<MaterialSection>>,
    pub antenna: Option<AntennaSection>,
    pub phantom: Option<Spanned<PhantomSection>>,
    pub grid: Option<GridSection>,
    #[serde(default)]
    pub solid: Vec<SolidSection>,
    #[serde(default)]
    pub sheet: Vec<BoxSection>,
    #[serde(default)]
    pub aperture: Vec<BoxSection>,
    #[serde(default)]
    pub wire: Vec<WireSection>,
    pub port: Option<Spanned<PortSection>>,
    #[serde(default)]
    pub load: Vec<LoadSection>,
    #[serde(default)]
    pub placement: Vec<Spanned<PlacementSection>>,
    #[serde(skip)]
    placements: Vec<(Range<usize>, String, PhantomSection)>,
    pub solver: Option<SolverSection>,
    pub source: Option<SourceSection>,
    pub cpml: Option<CpmlSection>,
    pub dft: Option<DftSection>,
    pub recorders: Option<RecordersSection>,
    pub analysis: Option<AnalysisSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub name: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    /// `dielectric`, `conductor`, `pec` or `tissue`.
    pub kind: Spanned<String>,
    pub eps_r: Option<f64>,
    pub tan_delta: Option<f64>,
    pub f_ref: Option<Q>,
    pub sigma: Option<Q>,
    pub density: Option<Q>,
    /// Tissue database entry for `kind = "tissue"`.
    pub tissue: Option<Spanned<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntennaSection {
    pub w_b: Option<Q>,
    pub l_b: Option<Q>,
    pub w_p: Option<Q>,
    pub l_p: Option<Q>,
    pub w_l: Option<Q>,
    pub l_l: Option<Q>,
    pub d: Option<Q>,
    pub h1: Option<Q>,
    pub h2: Option<Q>,
    pub h_b: Option<Q>,
    pub wall_thickness: Option<Q>,
    pub slot_length: Option<Q>,
    pub slot_width: Option<Q>,
    pub plate_thickness: Option<Q>,
    /// `"y z height mm"`.
    pub support: Option<Q>,
    pub port_impedance: Option<Q>,
    /// `end-wall` or `floor-pin`.
    pub feed: Option<Spanned<String>>,
    pub box_material: Option<Spanned<String>>,
    pub coating_material: Option<Spanned<String>>,
    pub plate_material: Option<Spanned<String>>,
    pub support_material: Option<Spanned<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSection {
    pub tissue: String,
    pub thickness: Q,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomSection {
    #[serde(default)]
    pub layer: Vec<LayerSection>,
    /// `"y z mm"`; defaults to twice the antenna footprint.
    pub lateral: Option<Q>,
    pub gap: Option<Q>,
    /// Replaces the fat layer thickness with the BMI surrogate.
    pub bmi: Option<f64>,
    /// Voxel file, relative to the document.
    pub voxel: Option<String>,
    /// `id name` sidecar; defaults to the voxel path with `.map` appended.
    pub tissue_map: Option<String>,
    pub pitch: Option<Q>,
    /// Lateral centre `"y z mm"` for scenes without an antenna.
    pub center: Option<Q>,
    /// Surface plane for scenes without an antenna.
    pub surface_x: Option<Q>,
    /// `trunk` or `limb`.
    pub region: Option<Spanned<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementSection {
    pub name: String,
    #[serde(default)]
    pub layer: Vec<LayerSection>,
    pub lateral: Option<Q>,
    pub gap: Option<Q>,
    pub bmi: Option<f64>,
    pub voxel: Option<String>,
    pub tissue_map: Option<String>,
    pub pitch: Option<Q>,
    pub region: Option<Spanned<String>>,
}

impl PlacementSection {
    fn into_phantom(self) -> (String, PhantomSection) {
        let p = PhantomSection {
            layer: self.layer,
            lateral: self.lateral,
            gap: self.gap,
            bmi: self.bmi,
            voxel: self.voxel,
            tissue_map: self.tissue_map,
            pitch: self.pitch,
            center: None,
            surface_x: None,
            region: self.region,
        };
        (self.name, p)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dx: Option<Q>,
    pub padding: Option<usize>,
    pub max_cells: Option<u64>,
    /// Explicit grid box instead of padding around the scene.
    pub region_min: Option<Q>,
    pub region_max: Option<Q>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolidSection {
    pub material: Spanned<String>,
    pub min: Q,
    pub max: Q,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSection {
    pub min: Q,
    pub max: Q,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireSection {
    pub from: Q,
    pub to: Q,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortSection {
    pub position: Q,
    pub axis: Spanned<String>,
    pub impedance: Option<Q>,
    pub positive: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadSection {
    pub position: Q,
    pub axis: Spanned<String>,
    pub resistance: Q,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub courant: Option<f64>,
    pub max_steps: Option<usize>,
    pub decay_stop: Option<Q>,
    /// `average` or `owner`.
    pub edge_material: Option<Spanned<String>>,
    pub material_frequency: Option<Q>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub center: Option<Q>,
    pub bandwidth: Option<Q>,
    pub amplitude: Option<Q>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CpmlSection {
    pub depth: Option<usize>,
    pub order: Option<f64>,
    pub sigma_scale: Option<f64>,
    pub kappa_max: Option<f64>,
    pub alpha_max: Option<Q>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DftSection {
    pub frequencies: Option<Vec<Q>>,
    pub stride: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordersSection {
    /// `off`, `lossy` or `full`.
    pub volume: Option<Spanned<String>>,
    pub huygens: Option<bool>,
    pub huygens_margin: Option<usize>,
    pub energy_interval: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    pub z0: Option<Q>,
    pub f_lo: Option<Q>,
    pub f_hi: Option<Q>,
    pub points: Option<usize>,
    pub f_eval: Option<Q>,
    pub normalize: Option<Q>,
    pub target_mass: Option<Q>,
    pub n_theta: Option<usize>,
    pub n_phi: Option<usize>,
    pub cut_points: Option<usize>,
}

/// A parsed document together with the text it came from, for diagnostics.
#[derive(Debug)]
pub struct Source {
    pub path: PathBuf,
    pub text: String,
    pub doc: Document,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl Source {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(path, text)
    }

    pub fn parse(path: impl Into<PathBuf>, text: String) -> Result<Self> {
        let path = path.into();
        let mut doc: Document = toml::from_str(&text).map_err(|e| {
            let line = e.span().map(|s| line_of(&text, s.start));
            Error::parse(&path, line, e.message().trim().to_string())
        })?;
        doc.placements = std::mem::take(&mut doc.placement)
            .into_iter()
            .map(|p| {
                let span = p.span();
                let (name, ph) = p.into_inner().into_phantom();
                (span, name, ph)
            })
            .collect();
        Ok(Self { path, text, doc })
    }

    fn err(&self, span: Range<usize>, message: impl Into<String>) -> Error {
        Error::parse(&self.path, Some(line_of(&self.text, span.start)), message)
    }

    fn q(&self, q: &Q, dim: Dimension) -> Result<f64> {
        units::parse(q.get_ref(), dim).map_err(|e| self.err(q.span(), e.to_string()))
    }

    fn opt(&self, q: &Option<Q>, dim: Dimension, default: f64) -> Result<f64> {
        q.as_ref().map_or(Ok(default), |q| self.q(q, dim))
    }

    fn vec3(&self, q: &Q) -> Result<[f64; 3]> {
        units::parse_vec3(q.get_ref(), Dimension::Length).map_err(|e| self.err(q.span(), e.to_string()))
    }

    fn vec2(&self, q: &Q) -> Result<[f64; 2]> {
        let v = units::parse_list(q.get_ref(), Dimension::Length, 2).map_err(|e| self.err(q.span(), e.to_string()))?;
        Ok([v[0], v[1]])
    }

    fn choice<T: Copy>(&self, s: &Spanned<String>, options: &[(&str, T)]) -> Result<T> {
        options
            .iter()
            .find(|(k, _)| *k == s.get_ref())
            .map(|(_, v)| *v)
            .ok_or_else(|| {
                let names: Vec<&str> = options.iter().map(|(k, _)| *k).collect();
                self.err(s.span(), format!("`{}` is not one of: {}", s.get_ref(), names.join(", ")))
            })
    }

    fn axis(&self, s: &Spanned<String>) -> Result<Axis> {
        self.choice(s, &[("x", Axis::X), ("y", Axis::Y), ("z", Axis::Z)])
    }

    fn region(&self, s: &Option<Spanned<String>>) -> Result<Region> {
        s.as_ref()
            .map_or(Ok(Region::Trunk), |s| self.choice(s, &[("trunk", Region::Trunk), ("limb", Region::Limb)]))
    }

    fn relative(&self, file: &str) -> PathBuf {
        self.path.parent().unwrap_or(Path::new(".")).join(file)
    }

    /// Resolve a material name: document `[materials]`, then built-ins, then tissues.
    pub fn material(&self, name: &Spanned<String>, db: &TissueDatabase) -> Result<MaterialSpec> {
        let n = name.get_ref().as_str();
        if let Some(m) = self.doc.materials.get(n) {
            return self.custom_material(n, m, db);
        }
        if let Some(m) = builtin_material(n) {
            return Ok(m);
        }
        db.material(n).map_err(|_| {
            let hint = db.suggestions(n, 3).join(", ");
            self.err(
                name.span(),
                format!("unknown material `{n}` (not in [materials], not built in; closest tissues: {hint})"),
            )
        })
    }

    fn custom_material(&self, name: &str, m: &Spanned<MaterialSection>, db: &TissueDatabase) -> Result<MaterialSpec> {
        let span = m.span();
        let m = m.get_ref();
        let density = m.density.as_ref().map(|q| self.q(q, Dimension::Density)).transpose()?;
        let fail = |e: wearfdtd_core::Error| self.err(span.clone(), e.to_string());
        let spec = match m.kind.get_ref().as_str() {
            "dielectric" => {
                let eps_r = m
                    .eps_r
                    .ok_or_else(|| self.err(span.clone(), format!("dielectric `{name}` needs eps_r")))?;
                match (&m.sigma, m.tan_delta) {
                    (Some(s), None) => {
                        let sigma = self.q(s, Dimension::Conductivity)?;
                        MaterialSpec::dielectric(name, eps_r, sigma, density.unwrap_or(1000.0)).map_err(fail)?
                    }
                    (None, Some(t)) => {
                        let f_ref = self.opt(&m.f_ref, Dimension::Frequency, 2.45e9)?;
                        constant_from_tand(eps_r, t, f_ref)
                            .map_err(fail)?
                            .named(name)
                            .with_density(density.unwrap_or(1000.0))
                    }
                    (None, None) => MaterialSpec::dielectric(name, eps_r, 0.0, density.unwrap_or(1000.0)).map_err(fail)?,
                    (Some(_), Some(_)) => {
                        return Err(self.err(span, format!("`{name}`: give sigma or tan_delta, not both")))
                    }
                }
            }
            "conductor" => {
                let s = m
                    .sigma
                    .as_ref()
                    .ok_or_else(|| self.err(span.clone(), format!("conductor `{name}` needs sigma")))?;
                MaterialSpec::conductor(name, self.q(s, Dimension::Conductivity)?, density.unwrap_or(8000.0))
                    .map_err(fail)?
            }
            "pec" => {
                let m = MaterialSpec::perfect_conductor(name);
                match density {
                    Some(d) => m.with_density(d),
                    None => m,
                }
            }
            "tissue" => {
                let t = m
                    .tissue
                    .as_ref()
                    .ok_or_else(|| self.err(span.clone(), format!("tissue `{name}` needs a `tissue` entry")))?;
                let base = db.material(t.get_ref()).map_err(|e| self.err(t.span(), e.to_string()))?;
                let base = base.named(name);
                match density {
                    Some(d) => base.with_density(d),
                    None => base,
                }
            }
            _ => {
                return Err(self.err(
                    m.kind.span(),
                    format!("unknown material kind `{}` (dielectric, conductor, pec, tissue)", m.kind.get_ref()),
                ))
            }
        };
        Ok(spec)
    }

    /// Antenna parameters: defaults overridden by the `[antenna]` section.
    pub fn antenna(&self, db: &TissueDatabase) -> Result<Option<AntennaParams>> {
        let Some(a) = &self.doc.antenna else {
            return Ok(None);
        };
        let mut p = AntennaParams::default();
        let l = Dimension::Length;
        for (q, slot) in [
            (&a.w_b, &mut p.w_b),
            (&a.l_b, &mut p.l_b),
            (&a.w_p, &mut p.w_p),
            (&a.l_p, &mut p.l_p),
            (&a.w_l, &mut p.w_l),
            (&a.l_l, &mut p.l_l),
            (&a.d, &mut p.d),
            (&a.h1, &mut p.h1),
            (&a.h2, &mut p.h2),
            (&a.h_b, &mut p.h_b),
            (&a.wall_thickness, &mut p.wall_thickness),
            (&a.slot_length, &mut p.slot_length),
            (&a.slot_width, &mut p.slot_width),
            (&a.plate_thickness, &mut p.plate_thickness),
        ] {
            if let Some(q) = q {
                *slot = self.q(q, l)?;
            }
        }
        if let Some(q) = &a.support {
            p.support = self.vec3(q)?;
        }
        if let Some(q) = &a.port_impedance {
            p.port_impedance = self.q(q, Dimension::Resistance)?;
        }
        if let Some(f) = &a.feed {
            p.feed = self.choice(f, &[("end-wall", Feed::EndWall), ("floor-pin", Feed::FloorPin)])?;
        }
        for (name, slot) in [
            (&a.box_material, &mut p.box_material),
            (&a.coating_material, &mut p.coating_material),
            (&a.plate_material, &mut p.plate_material),
            (&a.support_material, &mut p.support_material),
        ] {
            if let Some(n) = name {
                *slot = self.material(n, db)?;
            }
        }
        Ok(Some(p))
    }

    /// A phantom description; `default_lateral` applies when `lateral` is absent.
    fn phantom_spec(
        &self,
        section: &PhantomSection,
        span: Range<usize>,
        default_lateral: Option<[f64; 2]>,
    ) -> Result<(PhantomSpec, f64)> {
        let gap = self.opt(&section.gap, Dimension::Length, 0.0)?;
        let kind = match (&section.voxel, section.layer.is_empty()) {
            (Some(file), true) => {
                let pitch = section
                    .pitch
                    .as_ref()
                    .ok_or_else(|| self.err(span.clone(), "voxel phantom needs a `pitch`"))?;
                let pitch = self.q(pitch, Dimension::Length)?;
                let path = self.relative(file);
                let map = section
                    .tissue_map
                    .as_ref()
                    .map(|m| self.relative(m))
                    .unwrap_or_else(|| voxel::default_map_path(&path));
                PhantomKind::Voxel(voxel::read_phantom(&path, &map, pitch)?)
            }
            (None, false) => {
                let mut layers = Vec::with_capacity(section.layer.len());
                for l in &section.layer {
                    layers.push((l.tissue.clone(), self.q(&l.thickness, Dimension::Length)?));
                }
                if let Some(bmi) = section.bmi {
                    let fat = layers
                        .iter_mut()
                        .find(|(t, _)| t == "fat")
                        .ok_or_else(|| self.err(span.clone(), "`bmi` needs a fat layer"))?;
                    fat.1 = fat_thickness_for_bmi(bmi);
                }
                let lateral = match (&section.lateral, default_lateral) {
                    (Some(q), _) => self.vec2(q)?,
                    (None, Some(l)) => l,
                    (None, None) => return Err(self.err(span, "layered phantom needs `lateral`")),
                };
                PhantomKind::Layered {
                    layers,
                    lateral_mm: lateral,
                }
            }
            (Some(_), false) => return Err(self.err(span, "give either `layer` entries or `voxel`, not both")),
            (None, true) => return Err(self.err(span, "phantom needs `layer` entries or a `voxel` file")),
        };
        let mut spec = PhantomSpec {
            kind,
            center_mm: [0.0, 0.0],
            surface_x_mm: -gap,
        };
        if let Some(c) = &section.center {
            spec.center_mm = self.vec2(c)?;
        }
        if let Some(x) = &section.surface_x {
            spec.surface_x_mm = self.q(x, Dimension::Length)?;
        }
        Ok((spec, gap))
    }

    pub fn grid_settings(&self, base: GridSettings) -> Result<(GridSettings, Option<Aabb>)> {
        let mut g = base;
        let Some(s) = &self.doc.grid else {
            return Ok((g, None));
        };
        if let Some(q) = &s.dx {
            g.dx_mm = self.q(q, Dimension::Length)?;
        }
        if let Some(p) = s.padding {
            g.padding_cells = p;
        }
        if let Some(m) = s.max_cells {
            g.max_cells = m;
        }
        let region = match (&s.region_min, &s.region_max) {
            (Some(a), Some(b)) => Some(Aabb::new(self.vec3(a)?, self.vec3(b)?)),
            (None, None) => None,
            (Some(q), None) | (None, Some(q)) => {
                return Err(self.err(q.span(), "give both region_min and region_max"))
            }
        };
        Ok((g, region))
    }

    /// Build the scene described by this document.
    pub fn scene(&self, db: &TissueDatabase) -> Result<SceneSpec> {
        let d = &self.doc;
        let antenna = self.antenna(db)?;
        let mut scene = match &antenna {
            Some(p) => build_antenna(p)?,
            None => Scene::new(),
        };
        let mut region = Region::Trunk;
        if let Some(ph) = &d.phantom {
            let lateral = antenna.as_ref().map(|a| {
                let o = a.outer_size();
                [2.0 * o[1], 2.0 * o[2]]
            });
            let (mut spec, gap) = self.phantom_spec(ph.get_ref(), ph.span(), lateral)?;
            if let Some(a) = &antenna {
                if ph.get_ref().center.is_none() {
                    spec.center_mm = a.footprint_center();
                }
                if ph.get_ref().surface_x.is_none() {
                    spec.surface_x_mm = -gap;
                }
            }
            region = self.region(&ph.get_ref().region)?;
            scene.gap_mm = gap;
            scene.merge(build_phantom(&spec, db)?);
        }
        for s in &d.solid {
            let m = self.material(&s.material, db)?;
            scene.add_solid(Aabb::new(self.vec3(&s.min)?, self.vec3(&s.max)?), m);
        }
        for s in &d.sheet {
            scene.add_sheet(Aabb::new(self.vec3(&s.min)?, self.vec3(&s.max)?));
        }
        for s in &d.aperture {
            scene.add_aperture(Aabb::new(self.vec3(&s.min)?, self.vec3(&s.max)?));
        }
        for w in &d.wire {
            scene.add_wire(self.vec3(&w.from)?, self.vec3(&w.to)?);
        }
        if let Some(p) = &d.port {
            if antenna.is_some() {
                return Err(self.err(p.span(), "the antenna already defines the port"));
            }
            let p = p.get_ref();
            scene.set_port(PortSpec {
                position: self.vec3(&p.position)?,
                axis: self.axis(&p.axis)?,
                positive: p.positive.unwrap_or(true),
                impedance: self.opt(&p.impedance, Dimension::Resistance, 50.0)?,
            });
        }
        for l in &d.load {
            scene.add_load(LumpedLoad {
                position: self.vec3(&l.position)?,
                axis: self.axis(&l.axis)?,
                resistance: self.q(&l.resistance, Dimension::Resistance)?,
            });
        }
        if scene.port.is_none() {
            return Err(Error::parse(&self.path, None, "scene has no port (add [antenna] or [port])"));
        }
        let (grid, region_box) = self.grid_settings(GridSettings::default())?;
        Ok(SceneSpec {
            scene,
            grid,
            region: region_box,
            sar_region: region,
        })
    }

    /// Overlay the solver and analysis sections onto `config` and `analysis`.
    pub fn apply_config(&self, config: &mut SimConfig, analysis: &mut AnalysisSettings) -> Result<()> {
        let d = &self.doc;
        let f = Dimension::Frequency;
        if let Some(s) = &d.solver {
            if let Some(c) = s.courant {
                config.courant_factor = c;
            }
            if let Some(m) = s.max_steps {
                config.max_steps = m;
            }
            if let Some(q) = &s.decay_stop {
                config.decay_stop_db = self.q(q, Dimension::Decibel)?;
            }
            if let Some(e) = &s.edge_material {
                config.edge_material = self.choice(e, &[("average", EdgeMaterial::Average), ("owner", EdgeMaterial::Owner)])?;
            }
            if let Some(q) = &s.material_frequency {
                config.material_frequency = self.q(q, f)?;
            }
        }
        if let Some(s) = &d.source {
            if let Some(q) = &s.center {
                config.source.center = self.q(q, f)?;
            }
            if let Some(q) = &s.bandwidth {
                config.source.bandwidth = self.q(q, f)?;
            }
            if let Some(q) = &s.amplitude {
                config.source.amplitude = self.q(q, Dimension::Voltage)?;
            }
        }
        if let Some(s) = &d.cpml {
            if let Some(v) = s.depth {
                config.cpml.depth = v;
            }
            if let Some(v) = s.order {
                config.cpml.order = v;
            }
            if let Some(v) = s.sigma_scale {
                config.cpml.sigma_scale = v;
            }
            if let Some(v) = s.kappa_max {
                config.cpml.kappa_max = v;
            }
            if let Some(q) = &s.alpha_max {
                config.cpml.alpha_max = self.q(q, Dimension::Conductivity)?;
            }
        }
        if let Some(s) = &d.dft {
            if let Some(fs) = &s.frequencies {
                config.dft_frequencies = fs.iter().map(|q| self.q(q, f)).collect::<Result<_>>()?;
            }
            if let Some(v) = s.stride {
                config.dft_stride = v;
            }
        }
        if let Some(s) = &d.recorders {
            if let Some(v) = &s.volume {
                config.volume = self.choice(
                    v,
                    &[("off", VolumeMode::Off), ("lossy", VolumeMode::Lossy), ("full", VolumeMode::Full)],
                )?;
            }
            if let Some(v) = s.huygens {
                config.huygens = v;
            }
            if let Some(v) = s.huygens_margin {
                config.huygens_margin = v;
            }
            if let Some(v) = s.energy_interval {
                config.energy_interval = v;
            }
        }
        if let Some(s) = &d.analysis {
            if let Some(q) = &s.z0 {
                analysis.z0 = self.q(q, Dimension::Resistance)?;
            }
            if let Some(q) = &s.f_lo {
                analysis.f_lo = self.q(q, f)?;
            }
            if let Some(q) = &s.f_hi {
                analysis.f_hi = self.q(q, f)?;
            }
            if let Some(v) = s.points {
                analysis.n_freq = v;
            }
            if let Some(q) = &s.f_eval {
                analysis.f_eval = self.q(q, f)?;
            }
            if let Some(q) = &s.normalize {
                analysis.normalize_to = self.q(q, Dimension::Power)?;
            }
            if let Some(q) = &s.target_mass {
                analysis.target_mass_g = self.q(q, Dimension::Mass)?;
            }
            if let Some(v) = s.n_theta {
                analysis.n_theta = v;
            }
            if let Some(v) = s.n_phi {
                analysis.n_phi = v;
            }
            if let Some(v) = s.cut_points {
                analysis.cut_points = v;
            }
        }
        config.validate()?;
        Ok(())
    }

    /// A scenario set from `[antenna]`, `[grid]`, `[[placement]]` and the solver sections.
    pub fn scenario_set(&self, db: &TissueDatabase) -> Result<ScenarioSet> {
        let mut set = ScenarioSet::default_preset();
        if let Some(a) = self.antenna(db)? {
            set.antenna = a;
        }
        let o = set.antenna.outer_size();
        let lateral = [2.0 * o[1], 2.0 * o[2]];
        if self.doc.placements.is_empty() {
            return Err(Error::parse(&self.path, None, "study file lists no [[placement]]"));
        }
        set.placements.clear();
        for (span, name, ph) in &self.doc.placements {
            let span = span.clone();
            let empty = ph.layer.is_empty() && ph.voxel.is_none();
            let placement = if empty {
                if name != FREE_SPACE {
                    return Err(self.err(span, format!("placement `{name}` has no phantom")));
                }
                Placement::free_space()
            } else {
                let (spec, gap) = self.phantom_spec(ph, span, Some(lateral))?;
                Placement {
                    name: name.clone(),
                    phantom: Some(spec),
                    gap_mm: gap,
                    region: self.region(&ph.region)?,
                }
            };
            set.placements.push(placement);
        }
        let (grid, region) = self.grid_settings(set.grid)?;
        if region.is_some() {
            return Err(Error::parse(&self.path, None, "studies pad around each scene; drop region_min/region_max"));
        }
        set.grid = grid;
        self.apply_config(&mut set.solver, &mut set.analysis)?;
        Ok(set)
    }
}

/// Materials available by name without a `[materials]` entry.
pub fn builtin_material(name: &str) -> Option<MaterialSpec> {
    match name {
        "air" => Some(MaterialSpec::air()),
        "pla" => Some(pla()),
        "pec" => Some(MaterialSpec::perfect_conductor("pec")),
        "silver_paste" => MaterialSpec::conductor("silver_paste", 4.3e6, 10_500.0).ok(),
        "brass" => MaterialSpec::conductor("brass", 1.59e7, 8_500.0).ok(),
        "copper" => MaterialSpec::conductor("copper", 5.8e7, 8_960.0).ok(),
        _ => None,
    }
}

/// A scene ready to rasterize.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub scene: Scene,
    pub grid: GridSettings,
    /// Explicit grid box; otherwise the scene is padded on every side.
    pub region: Option<Aabb>,
    /// Limit class for SAR compliance.
    pub sar_region: Region,
}

impl SceneSpec {
    pub fn rasterize(&self, config: &SimConfig) -> Result<VoxelGrid> {
        let g = &self.grid;
        let grid = match self.region {
            Some(r) => rasterize_region(&self.scene, g.dx_mm, r, g.max_cells)?,
            None => rasterize(&self.scene, g.dx_mm, g.padding_cells, config.cpml.depth + 4, g.max_cells)?,
        };
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src(text: &str) -> Result<Source> {
        Source::parse("test.toml", text.to_string())
    }

    #[test]
    fn unknown_key_reports_its_line() {
        let e = src("[antenna]\nl_p = \"34 mm\"\nbogus = 1\n").unwrap_err();
        let Error::Parse { line, message, .. } = e else { panic!() };
        assert_eq!(line, Some(3));
        assert!(message.contains("bogus"), "{message}");
    }

    #[test]
    fn unit_errors_point_at_the_value() {
        let s = src("[antenna]\n\nl_p = \"34 GHz\"\n").unwrap();
        let e = s.antenna(&TissueDatabase::builtin()).unwrap_err();
        let Error::Parse { line, .. } = e else { panic!() };
        assert_eq!(line, Some(3));
    }

    #[test]
    fn antenna_overrides_defaults() {
        let s = src("[antenna]\nl_p = \"3.3 cm\"\nfeed = \"floor-pin\"\nbox_material = \"pec\"\n").unwrap();
        let a = s.antenna(&TissueDatabase::builtin()).unwrap().unwrap();
        assert_eq!(a.l_p, 33.0);
        assert_eq!(a.feed, Feed::FloorPin);
        assert_eq!(a.w_b, AntennaParams::default().w_b);
        assert!(a.box_material.is_metal());
    }

    #[test]
    fn custom_materials_resolve() {
        let text = "[materials.sub]\nkind = \"dielectric\"\neps_r = 4.0\ntan_delta = 0.02\n\
                    [materials.wet]\nkind = \"tissue\"\ntissue = \"muscle\"\ndensity = \"1100 kg/m3\"\n";
        let s = src(text).unwrap();
        let db = TissueDatabase::builtin();
        let sub = s.material(&Spanned::new(0..0, "sub".to_string()), &db).unwrap();
        assert_eq!(sub.name, "sub");
        let wet = s.material(&Spanned::new(0..0, "wet".to_string()), &db).unwrap();
        assert!(wet.is_tissue());
        assert_eq!(wet.density, 1100.0);
        assert!(s.material(&Spanned::new(0..0, "musle".to_string()), &db).is_err());
    }

    #[test]
    fn config_sections_apply() {
        let s = src("[dft]\nfrequencies = [\"2.4 GHz\", \"2.45 GHz\"]\n[analysis]\nnormalize = \"1 W\"\n").unwrap();
        let mut c = SimConfig::default();
        let mut a = AnalysisSettings::default();
        s.apply_config(&mut c, &mut a).unwrap();
        assert_eq!(c.dft_frequencies, vec![2.4e9, 2.45e9]);
        assert_eq!(a.normalize_to, 1.0);
    }

    #[test]
    fn scene_needs_a_port() {
        let s = src("[[solid]]\nmaterial = \"pla\"\nmin = \"0 0 0 mm\"\nmax = \"1 1 1 mm\"\n").unwrap();
        assert!(s.scene(&TissueDatabase::builtin()).is_err());
    }
}
