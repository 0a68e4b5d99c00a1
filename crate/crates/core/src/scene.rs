//! Scenario geometry and its rasterization onto a uniform Yee grid.
//!
//! Coordinates are millimetres. The body surface normal is `+x`: the antenna box sits on
//! `x ≥ 0` with its bottom face at `x = 0`, and phantoms extend into `x < 0`. The slot face
//! of the box is the `+x` face, so boresight is `+x`.
//!
//! Four kinds of primitives are painted in order:
//!
//! * solids fill every cell whose centre lies inside the box with one material;
//! * sheets are zero-thickness perfect conductors snapped to the nearest grid plane;
//! * apertures clear conductor edges strictly inside a box (slots cut into sheets);
//! * wires are single lines of conductor edges.
//!
//! Solids are painted first (later ones win), then sheets, apertures and wires in their
//! listed order. Metal solids turn every edge touching them into conductor.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::consts::{C0, MM};
use crate::dielectrics::{constant_from_tand, MaterialSpec, TissueDatabase};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X = 0,
    Y = 1,
    Z = 2,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Axis {
        Self::ALL[i]
    }
}

/// Axis-aligned box in millimetres. Zero thickness along one axis describes a sheet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Self {
        Self { min, max }
    }

    pub fn size(&self) -> [f64; 3] {
        [
            self.max[0] - self.min[0],
            self.max[1] - self.min[1],
            self.max[2] - self.min[2],
        ]
    }

    pub fn volume(&self) -> f64 {
        let s = self.size();
        s[0] * s[1] * s[2]
    }

    fn union(&self, other: &Aabb) -> Aabb {
        let mut out = *self;
        for a in 0..3 {
            out.min[a] = out.min[a].min(other.min[a]);
            out.max[a] = out.max[a].max(other.max[a]);
        }
        out
    }

    fn is_valid(&self) -> bool {
        (0..3).all(|a| self.min[a].is_finite() && self.max[a].is_finite() && self.min[a] <= self.max[a])
    }

    /// The single axis along which the box is flat, if exactly one.
    fn flat_axis(&self) -> Option<Axis> {
        let s = self.size();
        let flat: Vec<usize> = (0..3).filter(|&a| s[a] == 0.0).collect();
        (flat.len() == 1).then(|| Axis::from_index(flat[0]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Primitive {
    Solid { region: Aabb, material: usize },
    Sheet { region: Aabb },
    Aperture { region: Aabb },
    /// Line of conductor edges between two points that differ along one axis.
    Wire { from: [f64; 3], to: [f64; 3] },
}

/// Lumped port: a one-cell voltage-source gap with a series reference resistance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortSpec {
    /// Lower node of the gap edge, mm.
    pub position: [f64; 3],
    pub axis: Axis,
    /// `true` when the positive terminal is at the upper node.
    pub positive: bool,
    /// Reference impedance, ohms.
    pub impedance: f64,
}

/// Lumped resistor occupying one grid edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LumpedLoad {
    pub position: [f64; 3],
    pub axis: Axis,
    pub resistance: f64,
}

/// Materials plus painted primitives; produced by the builders and merged into a [`Scene`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SceneFragment {
    pub materials: Vec<MaterialSpec>,
    pub primitives: Vec<Primitive>,
    /// Voxel pitch of imported phantoms, mm.
    pub voxel_pitch: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    /// Index 0 is always air.
    pub materials: Vec<MaterialSpec>,
    pub primitives: Vec<Primitive>,
    pub port: Option<PortSpec>,
    pub loads: Vec<LumpedLoad>,
    /// Gap between the antenna bottom and the phantom surface, mm.
    pub gap_mm: f64,
    pub voxel_pitches: Vec<f64>,
}

impl Default for Scene {
    fn default() -> Self {
        Self::new()
    }
}

impl Scene {
    pub fn new() -> Self {
        Self {
            materials: vec![MaterialSpec::air()],
            primitives: Vec::new(),
            port: None,
            loads: Vec::new(),
            gap_mm: 0.0,
            voxel_pitches: Vec::new(),
        }
    }

    /// Register a material, reusing an existing entry with the same name.
    pub fn add_material(&mut self, spec: MaterialSpec) -> usize {
        if let Some(i) = self.materials.iter().position(|m| m.name == spec.name) {
            return i;
        }
        self.materials.push(spec);
        self.materials.len() - 1
    }

    pub fn add_solid(&mut self, region: Aabb, material: MaterialSpec) -> usize {
        let m = self.add_material(material);
        self.primitives.push(Primitive::Solid { region, material: m });
        m
    }

    pub fn add_sheet(&mut self, region: Aabb) {
        self.primitives.push(Primitive::Sheet { region });
    }

    pub fn add_aperture(&mut self, region: Aabb) {
        self.primitives.push(Primitive::Aperture { region });
    }

    pub fn add_wire(&mut self, from: [f64; 3], to: [f64; 3]) {
        self.primitives.push(Primitive::Wire { from, to });
    }

    pub fn set_port(&mut self, port: PortSpec) {
        self.port = Some(port);
    }

    pub fn add_load(&mut self, load: LumpedLoad) {
        self.loads.push(load);
    }

    pub fn merge(&mut self, fragment: SceneFragment) {
        let remap: Vec<usize> = fragment
            .materials
            .into_iter()
            .map(|m| self.add_material(m))
            .collect();
        for p in fragment.primitives {
            self.primitives.push(match p {
                Primitive::Solid { region, material } => Primitive::Solid {
                    region,
                    material: remap[material],
                },
                other => other,
            });
        }
        if let Some(p) = fragment.voxel_pitch {
            self.voxel_pitches.push(p);
        }
    }

    /// Bounding box of everything in the scene, or `None` if it is empty.
    pub fn bounds(&self) -> Option<Aabb> {
        let mut out: Option<Aabb> = None;
        let mut grow = |b: Aabb| {
            out = Some(match out {
                Some(o) => o.union(&b),
                None => b,
            })
        };
        for p in &self.primitives {
            match p {
                Primitive::Solid { region, .. } | Primitive::Sheet { region } => grow(*region),
                Primitive::Wire { from, to } => {
                    let min = core::array::from_fn(|a| from[a].min(to[a]));
                    let max = core::array::from_fn(|a| from[a].max(to[a]));
                    grow(Aabb::new(min, max))
                }
                // Apertures only cut existing sheets; they never enlarge the scene.
                Primitive::Aperture { .. } => {}
            }
        }
        if let Some(port) = &self.port {
            grow(Aabb::new(port.position, port.position));
        }
        for l in &self.loads {
            grow(Aabb::new(l.position, l.position));
        }
        out
    }
}

/// Length of a half-wave slot on a dielectric surface, in mm.
///
/// `λ = c / (f √ε_eff)` with `ε_eff = (εᵣ + 1)/2`; returns `λ/2`.
pub fn slot_design_length(f: f64, eps_r: f64) -> Result<f64> {
    if !(f > 0.0) || !(eps_r >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "slot_design_length needs f > 0 and eps_r >= 1 (got {f}, {eps_r})"
        )));
    }
    let eps_eff = (eps_r + 1.0) / 2.0;
    let lambda = C0 / (f * libm::sqrt(eps_eff));
    Ok(lambda / 2.0 / MM)
}

/// Dimensions of the cavity-backed slot antenna, mm.
///
/// The ten box and feed dimensions carry their drawing symbols. The feed is a flat brass
/// monopole at height `h2` above the cavity floor: a `w_l × l_l` tab carrying the coaxial
/// pin, then the `w_p × l_p` plate running under the slot. `h1` is the clearance between
/// the plate and the slot face. With the default end-wall feed the tab starts at the near
/// end wall, which puts the plate centre `l_l + l_p/2 = 22.5 mm` from it (the drawing's
/// `d`); with [`Feed::FloorPin`] a vertical pin rises from the floor `d` from the slot
/// centre line instead.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaParams {
    pub w_b: f64,
    pub l_b: f64,
    pub w_p: f64,
    pub l_p: f64,
    pub w_l: f64,
    pub l_l: f64,
    pub d: f64,
    pub h1: f64,
    pub h2: f64,
    pub h_b: f64,
    pub wall_thickness: f64,
    pub slot_length: f64,
    pub slot_width: f64,
    pub plate_thickness: f64,
    /// Support block (y, z, height), mm.
    pub support: [f64; 3],
    pub port_impedance: f64,
    pub feed: Feed,
    pub box_material: MaterialSpec,
    pub coating_material: MaterialSpec,
    pub plate_material: MaterialSpec,
    pub support_material: MaterialSpec,
}

/// Where the coaxial feed enters the cavity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feed {
    /// Vertical pin from the floor at distance `d` from the slot centre line.
    FloorPin,
    /// Horizontal tab from the near end wall at plate height.
    EndWall,
}

/// PLA: εᵣ = 4, tanδ = 0.02 frozen at 2.45 GHz, 1240 kg/m³.
pub fn pla() -> MaterialSpec {
    constant_from_tand(4.0, 0.02, 2.45e9)
        .expect("valid PLA parameters")
        .named("pla")
        .with_density(1240.0)
}

impl Default for AntennaParams {
    fn default() -> Self {
        Self {
            w_b: 33.0,
            l_b: 56.0,
            w_p: 27.0,
            l_p: 34.0,
            w_l: 5.0,
            l_l: 5.5,
            d: 23.0,
            h1: 4.0,
            h2: 7.0,
            h_b: 11.0,
            wall_thickness: 1.5,
            slot_length: 47.0,
            slot_width: 9.0,
            plate_thickness: 0.1,
            support: [5.0, 5.0, 6.7],
            port_impedance: 50.0,
            feed: Feed::EndWall,
            box_material: pla(),
            coating_material: MaterialSpec::conductor("silver_paste", 4.3e6, 10_500.0)
                .expect("valid"),
            plate_material: MaterialSpec::conductor("brass", 1.59e7, 8_500.0).expect("valid"),
            support_material: pla(),
        }
    }
}

impl AntennaParams {
    /// Slot overhang folded onto each side wall, mm.
    pub fn fold_per_side(&self) -> f64 {
        ((self.slot_length - self.w_b) / 2.0).max(0.0)
    }

    pub fn outer_size(&self) -> [f64; 3] {
        let t2 = 2.0 * self.wall_thickness;
        [self.h_b + t2, self.l_b + t2, self.w_b + t2]
    }

    /// Interior cavity (x: height, y: length, z: width).
    pub fn cavity(&self) -> Aabb {
        let t = self.wall_thickness;
        Aabb::new([t, t, t], [t + self.h_b, t + self.l_b, t + self.w_b])
    }

    /// Lateral centre (y, z) of the box footprint.
    pub fn footprint_center(&self) -> [f64; 2] {
        let o = self.outer_size();
        [o[1] / 2.0, o[2] / 2.0]
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("W_b", self.w_b),
            ("L_b", self.l_b),
            ("W_p", self.w_p),
            ("L_p", self.l_p),
            ("W_L", self.w_l),
            ("L_L", self.l_l),
            ("H_2", self.h2),
            ("H_b", self.h_b),
            ("wall_thickness", self.wall_thickness),
            ("slot_length", self.slot_length),
            ("slot_width", self.slot_width),
            ("plate_thickness", self.plate_thickness),
            ("port_impedance", self.port_impedance),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.h1 >= 0.0) || !(self.d >= 0.0) {
            return Err(Error::InvalidArgument("H_1 and d must be non-negative".to_string()));
        }
        Ok(())
    }
}

/// Build the antenna scene: PLA shell, conductive coating with the folded slot, monopole
/// feed, support block and the 50 Ω port where the feed enters the cavity.
pub fn build_antenna(params: &AntennaParams) -> Result<Scene> {
    params.validate()?;
    let p = params;
    let t = p.wall_thickness;
    let outer = p.outer_size();
    let cav = p.cavity();
    let top = cav.max[0];
    let zc = outer[2] / 2.0;
    let slot_yc = t + p.l_b / 2.0;

    let fold = p.fold_per_side();
    if fold > p.h_b {
        return Err(Error::GeometryConflict(format!(
            "slot fold of {fold} mm per side exceeds the box height {} mm",
            p.h_b
        )));
    }
    if p.slot_width >= p.l_b {
        return Err(Error::GeometryConflict("slot wider than the box length".to_string()));
    }
    let plate_height = p.h2;
    if plate_height + p.h1 > p.h_b + 1e-9 {
        return Err(Error::GeometryConflict(format!(
            "plate height {} mm plus clearance {} mm exceeds the cavity height {} mm",
            plate_height, p.h1, p.h_b
        )));
    }
    let (pin_y, plate_y0) = match p.feed {
        Feed::FloorPin => (slot_yc - p.d, slot_yc - p.d + p.l_l),
        Feed::EndWall => (t, t + p.l_l),
    };
    let plate_y1 = plate_y0 + p.l_p;
    let pin_clear = pin_y > cav.min[1] || p.feed == Feed::EndWall;
    if !pin_clear || plate_y1 >= cav.max[1] || p.w_p >= p.w_b || p.w_l >= p.w_b {
        return Err(Error::GeometryConflict(format!(
            "feed does not fit inside the cavity (pin at y = {pin_y} mm, plate ends at {plate_y1} mm, \
             cavity spans {}..{} mm)",
            cav.min[1], cav.max[1]
        )));
    }
    if p.support[2] >= plate_height || p.support[0] > p.l_p || p.support[1] > p.w_p {
        return Err(Error::GeometryConflict("support block does not fit under the plate".to_string()));
    }

    let mut scene = Scene::new();
    scene.add_solid(Aabb::new([0.0; 3], outer), p.box_material.clone());
    scene.add_solid(cav, MaterialSpec::air());
    scene.add_solid(
        Aabb::new(
            [t, plate_y1 - p.support[0], zc - p.support[1] / 2.0],
            [t + p.support[2], plate_y1, zc + p.support[1] / 2.0],
        ),
        p.support_material.clone(),
    );
    // Conductive coating on the six interior faces.
    scene.add_material(p.coating_material.clone());
    let (lo, hi) = (cav.min, cav.max);
    for a in 0..3 {
        for plane in [lo[a], hi[a]] {
            let mut min = lo;
            let mut max = hi;
            min[a] = plane;
            max[a] = plane;
            scene.add_sheet(Aabb::new(min, max));
        }
    }
    // The slot: across the width on the top face, folded down both side walls.
    let (z0, z1, x0) = if fold > 0.0 {
        (cav.min[2] - t, cav.max[2] + t, top - fold)
    } else {
        (zc - p.slot_length / 2.0, zc + p.slot_length / 2.0, top)
    };
    scene.add_aperture(Aabb::new(
        [x0, slot_yc - p.slot_width / 2.0, z0],
        [top + t, slot_yc + p.slot_width / 2.0, z1],
    ));

    // Feed: pin, tab and plate as conductor sheets.
    scene.add_material(p.plate_material.clone());
    let plate_x = t + plate_height;
    let half_l = p.w_l / 2.0;
    match p.feed {
        Feed::FloorPin => {
            // The pin is a wire from the floor; rasterization turns its first edge into the port gap.
            scene.add_wire([t, pin_y, zc], [plate_x, pin_y, zc]);
            scene.add_sheet(Aabb::new([plate_x, pin_y, zc - half_l], [plate_x, plate_y0, zc + half_l]));
        }
        Feed::EndWall => {
            // The tab sheet stops short of the wall so only the centre edge bridges the gap.
            scene.add_wire([plate_x, t, zc], [plate_x, plate_y0, zc]);
            scene.add_sheet(Aabb::new([plate_x, t + 1.0, zc - half_l], [plate_x, plate_y0, zc + half_l]));
        }
    }
    scene.add_sheet(Aabb::new(
        [plate_x, plate_y0, zc - p.w_p / 2.0],
        [plate_x, plate_y1, zc + p.w_p / 2.0],
    ));
    let (position, axis) = match p.feed {
        Feed::FloorPin => ([t, pin_y, zc], Axis::X),
        Feed::EndWall => ([plate_x, t, zc], Axis::Y),
    };
    scene.set_port(PortSpec {
        position,
        axis,
        positive: true,
        impedance: p.port_impedance,
    });
    Ok(scene)
}

/// Imported voxel phantom: tissue IDs in x-fastest order.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelPhantom {
    pub dims: [usize; 3],
    pub pitch_mm: f64,
    pub ids: Vec<u8>,
    /// ID → tissue name. Unmapped ID 0 is air.
    pub tissue_map: BTreeMap<u8, String>,
}

impl VoxelPhantom {
    pub fn id_at(&self, i: usize, j: usize, k: usize) -> u8 {
        self.ids[i + self.dims[0] * (j + self.dims[1] * k)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhantomKind {
    /// Slabs listed from the surface inward: `(tissue, thickness mm)`.
    Layered {
        layers: Vec<(String, f64)>,
        /// Lateral extent (y, z), mm.
        lateral_mm: [f64; 2],
    },
    Voxel(VoxelPhantom),
}

/// A phantom whose surface faces `+x`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub kind: PhantomKind,
    /// Lateral (y, z) centre, mm.
    pub center_mm: [f64; 2],
    /// x coordinate of the surface, mm.
    pub surface_x_mm: f64,
}

/// Minimum layered depth that behaves as a body half-space at 2.45 GHz, mm.
pub const MIN_PHANTOM_DEPTH_MM: f64 = 20.0;

impl PhantomSpec {
    pub fn layered(layers: Vec<(String, f64)>, lateral_mm: [f64; 2]) -> Self {
        Self {
            kind: PhantomKind::Layered { layers, lateral_mm },
            center_mm: [0.0, 0.0],
            surface_x_mm: 0.0,
        }
    }

    /// Generic limb stack: skin 2 / fat 5 / muscle 30 / cortical bone 20 mm.
    pub fn default_layered(lateral_mm: [f64; 2]) -> Self {
        Self::layered(
            vec![
                ("skin_dry".to_string(), 2.0),
                ("fat".to_string(), 5.0),
                ("muscle".to_string(), 30.0),
                ("bone_cortical".to_string(), 20.0),
            ],
            lateral_mm,
        )
    }

    /// Place the phantom under an antenna footprint centred at `center` with `gap` mm.
    pub fn placed(mut self, center: [f64; 2], gap_mm: f64) -> Self {
        self.center_mm = center;
        self.surface_x_mm = -gap_mm;
        self
    }

    pub fn depth_mm(&self) -> f64 {
        match &self.kind {
            PhantomKind::Layered { layers, .. } => layers.iter().map(|(_, t)| t).sum(),
            PhantomKind::Voxel(v) => v.dims[0] as f64 * v.pitch_mm,
        }
    }
}

/// Fat thickness used as a BMI surrogate: BMI 17 → 3 mm, BMI 29 → 15 mm, linear between
/// and clamped outside.
pub fn fat_thickness_for_bmi(bmi: f64) -> f64 {
    let (b0, b1, t0, t1) = (17.0, 29.0, 3.0, 15.0);
    let s = ((bmi - b0) / (b1 - b0)).clamp(0.0, 1.0);
    t0 + s * (t1 - t0)
}

/// Turn a phantom description into primitives.
pub fn build_phantom(spec: &PhantomSpec, db: &TissueDatabase) -> Result<SceneFragment> {
    let mut frag = SceneFragment::default();
    let [yc, zc] = spec.center_mm;
    let surface = spec.surface_x_mm;
    match &spec.kind {
        PhantomKind::Layered { layers, lateral_mm } => {
            if layers.is_empty() {
                return Err(Error::InvalidArgument("layered phantom has no layers".to_string()));
            }
            if !(lateral_mm[0] > 0.0 && lateral_mm[1] > 0.0) {
                return Err(Error::InvalidArgument("lateral extent must be positive".to_string()));
            }
            let mut depth = 0.0;
            for (name, thickness) in layers {
                if !(*thickness > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "layer `{name}` has non-positive thickness {thickness} mm"
                    )));
                }
                let material = db.material(name)?;
                frag.materials.push(material);
                let m = frag.materials.len() - 1;
                frag.primitives.push(Primitive::Solid {
                    region: Aabb::new(
                        [surface - depth - thickness, yc - lateral_mm[0] / 2.0, zc - lateral_mm[1] / 2.0],
                        [surface - depth, yc + lateral_mm[0] / 2.0, zc + lateral_mm[1] / 2.0],
                    ),
                    material: m,
                });
                depth += thickness;
            }
            if depth < MIN_PHANTOM_DEPTH_MM {
                return Err(Error::InvalidArgument(format!(
                    "phantom depth {depth} mm is below the {MIN_PHANTOM_DEPTH_MM} mm minimum"
                )));
            }
        }
        PhantomKind::Voxel(v) => {
            let [nx, ny, nz] = v.dims;
            if v.ids.len() != nx * ny * nz || !(v.pitch_mm > 0.0) {
                return Err(Error::Data(format!(
                    "voxel phantom holds {} IDs for {}x{}x{} cells at pitch {}",
                    v.ids.len(),
                    nx,
                    ny,
                    nz,
                    v.pitch_mm
                )));
            }
            let pitch = v.pitch_mm;
            let mut ids: BTreeMap<u8, usize> = BTreeMap::new();
            for (&id, name) in &v.tissue_map {
                frag.materials.push(db.material(name)?);
                ids.insert(id, frag.materials.len() - 1);
            }
            // Snap the block to pitch multiples so voxel faces land on grid planes.
            let x0 = surface - nx as f64 * pitch;
            let y0 = libm::round((yc - ny as f64 * pitch / 2.0) / pitch) * pitch;
            let z0 = libm::round((zc - nz as f64 * pitch / 2.0) / pitch) * pitch;
            for k in 0..nz {
                for j in 0..ny {
                    let mut i = 0;
                    while i < nx {
                        let id = v.id_at(i, j, k);
                        let mut end = i + 1;
                        while end < nx && v.id_at(end, j, k) == id {
                            end += 1;
                        }
                        match ids.get(&id) {
                            Some(&m) => frag.primitives.push(Primitive::Solid {
                                region: Aabb::new(
                                    [x0 + i as f64 * pitch, y0 + j as f64 * pitch, z0 + k as f64 * pitch],
                                    [
                                        x0 + end as f64 * pitch,
                                        y0 + (j + 1) as f64 * pitch,
                                        z0 + (k + 1) as f64 * pitch,
                                    ],
                                ),
                                material: m,
                            }),
                            None if id == 0 => {}
                            None => {
                                return Err(Error::Data(format!(
                                    "voxel ID {id} has no tissue mapping"
                                )))
                            }
                        }
                        i = end;
                    }
                }
            }
            frag.voxel_pitch = Some(pitch);
        }
    }
    Ok(frag)
}

/// A lumped port resolved to a grid edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPort {
    pub axis: Axis,
    /// Node indices of the lower end of the gap edge.
    pub node: [usize; 3],
    pub positive: bool,
    pub impedance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridLoad {
    pub axis: Axis,
    pub node: [usize; 3],
    pub resistance: f64,
}

/// A scene rasterized onto a uniform grid of `dims` cells.
///
/// Cell `(i, j, k)` spans `origin + [i, i+1]·dx` etc. Edge arrays use the node layout
/// `(nx+1) × (ny+1) × (nz+1)` with `k` fastest; an edge along axis `a` at index
/// `(i, j, k)` starts at that node.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    pub dims: [usize; 3],
    pub dx_mm: f64,
    pub origin_mm: [f64; 3],
    pub materials: Vec<MaterialSpec>,
    /// Material index per cell, `k` fastest.
    pub cells: Vec<u16>,
    /// Conductor mask per edge component.
    pub pec: [Vec<bool>; 3],
    pub port: Option<GridPort>,
    pub loads: Vec<GridLoad>,
}

/// Default cap on grid size, in cells.
pub const DEFAULT_MAX_CELLS: u64 = 40_000_000;

impl VoxelGrid {
    pub fn cell_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    pub fn material_at(&self, i: usize, j: usize, k: usize) -> &MaterialSpec {
        &self.materials[self.cells[self.cell_index(i, j, k)] as usize]
    }

    /// Node strides `(sx, sy, 1)` of the edge/field layout.
    pub fn node_strides(&self) -> [usize; 3] {
        let [_, ny, nz] = self.dims;
        [(ny + 1) * (nz + 1), nz + 1, 1]
    }

    pub fn node_count(&self) -> usize {
        let [nx, ny, nz] = self.dims;
        (nx + 1) * (ny + 1) * (nz + 1)
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize, k: usize) -> usize {
        let s = self.node_strides();
        i * s[0] + j * s[1] + k
    }

    /// Cells sharing the edge along `axis` that starts at node `n`, clipped to the grid.
    pub fn edge_cells(&self, axis: Axis, n: [usize; 3]) -> impl Iterator<Item = [usize; 3]> + '_ {
        let a = axis.index();
        let (u, v) = ((a + 1) % 3, (a + 2) % 3);
        let dims = self.dims;
        [(0usize, 0usize), (1, 0), (0, 1), (1, 1)]
            .into_iter()
            .filter_map(move |(du, dv)| {
                let mut c = n;
                if n[a] >= dims[a] || n[u] < du || n[v] < dv {
                    return None;
                }
                c[u] = n[u] - du;
                c[v] = n[v] - dv;
                (c[u] < dims[u] && c[v] < dims[v]).then_some(c)
            })
    }

    /// Physical coordinate of node index `n` along `axis`, mm.
    pub fn node_coord(&self, axis: Axis, n: usize) -> f64 {
        self.origin_mm[axis.index()] + n as f64 * self.dx_mm
    }

    /// Cells of material `m`.
    pub fn count_material(&self, m: usize) -> usize {
        self.cells.iter().filter(|&&c| c as usize == m).count()
    }
}

/// Rasterize `scene` at cell size `dx_mm` with `padding_cells` of air on every side.
///
/// `padding_cells` must leave room for the absorbing layer plus four cells; the caller
/// passes the CPML depth it intends to use as `min_padding`.
pub fn rasterize(
    scene: &Scene,
    dx_mm: f64,
    padding_cells: usize,
    min_padding: usize,
    max_cells: u64,
) -> Result<VoxelGrid> {
    if padding_cells < min_padding {
        return Err(Error::InvalidArgument(format!(
            "padding of {padding_cells} cells is below the required {min_padding}"
        )));
    }
    check_scene(scene, dx_mm)?;
    let pad = padding_cells as i64;
    let (lo, hi) = match scene.bounds() {
        Some(b) => {
            let mut lo = [0i64; 3];
            let mut hi = [0i64; 3];
            for a in 0..3 {
                lo[a] = libm::floor(b.min[a] / dx_mm + 1e-9) as i64;
                hi[a] = (libm::ceil(b.max[a] / dx_mm - 1e-9) as i64).max(lo[a] + 1);
            }
            (lo, hi)
        }
        None => ([0; 3], [0; 3]),
    };
    let mut dims = [0usize; 3];
    let mut origin_cells = [0i64; 3];
    for a in 0..3 {
        origin_cells[a] = lo[a] - pad;
        dims[a] = ((hi[a] - lo[a]) + 2 * pad).max(8) as usize;
    }
    paint(scene, dx_mm, origin_cells, dims, max_cells)
}

/// Rasterize `scene` onto a grid covering exactly `region` (snapped outward to whole cells).
///
/// Primitives are clipped to the region. Useful for structures that must run into the
/// absorbing layer, such as transmission lines.
pub fn rasterize_region(scene: &Scene, dx_mm: f64, region: Aabb, max_cells: u64) -> Result<VoxelGrid> {
    check_scene(scene, dx_mm)?;
    if !region.is_valid() {
        return Err(Error::InvalidArgument(format!("degenerate grid region {region:?}")));
    }
    let mut origin_cells = [0i64; 3];
    let mut dims = [0usize; 3];
    for a in 0..3 {
        let lo = libm::floor(region.min[a] / dx_mm + 1e-9) as i64;
        let hi = (libm::ceil(region.max[a] / dx_mm - 1e-9) as i64).max(lo + 1);
        origin_cells[a] = lo;
        dims[a] = ((hi - lo) as usize).max(8);
    }
    paint(scene, dx_mm, origin_cells, dims, max_cells)
}

fn check_scene(scene: &Scene, dx_mm: f64) -> Result<()> {
    if !(dx_mm > 0.0) || !dx_mm.is_finite() {
        return Err(Error::InvalidArgument(format!("dx must be positive, got {dx_mm}")));
    }
    for &pitch in &scene.voxel_pitches {
        let ratio = pitch / dx_mm;
        if (ratio - libm::round(ratio)).abs() > 1e-6 || libm::round(ratio) < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "voxel pitch {pitch} mm is not an integer multiple of dx = {dx_mm} mm"
            )));
        }
    }
    for p in &scene.primitives {
        let region = match p {
            Primitive::Solid { region, material } => {
                if *material >= scene.materials.len() {
                    return Err(Error::Validation(format!("material index {material} out of range")));
                }
                region
            }
            Primitive::Sheet { region } => {
                if region.flat_axis().is_none() {
                    return Err(Error::Validation("sheet must be flat along exactly one axis".to_string()));
                }
                region
            }
            Primitive::Aperture { region } => region,
            Primitive::Wire { from, to } => {
                let differing = (0..3).filter(|&a| from[a] != to[a]).count();
                if differing != 1 || from.iter().chain(to).any(|x| !x.is_finite()) {
                    return Err(Error::Validation("wire must run along exactly one axis".to_string()));
                }
                continue;
            }
        };
        if !region.is_valid() {
            return Err(Error::Validation(format!("degenerate region {region:?}")));
        }
    }
    Ok(())
}

fn paint(scene: &Scene, dx_mm: f64, origin_cells: [i64; 3], dims: [usize; 3], max_cells: u64) -> Result<VoxelGrid> {
    let snap = |x: f64| libm::round(x / dx_mm) as i64;
    let required = dims.iter().map(|&d| d as u64).product::<u64>();
    if required > max_cells {
        return Err(Error::Capacity {
            required,
            budget: max_cells,
        });
    }
    let origin_mm = [
        origin_cells[0] as f64 * dx_mm,
        origin_cells[1] as f64 * dx_mm,
        origin_cells[2] as f64 * dx_mm,
    ];
    let materials = scene.materials.clone();
    let [nx, ny, nz] = dims;
    let mut cells = vec![0u16; nx * ny * nz];

    // Solids, centre-of-cell sampling. A centre at c·dx + dx/2 lies inside [min, max) exactly
    // when c lies in [ceil(min/dx − 1/2), ceil(max/dx − 1/2)).
    let cell_range = |min: f64, max: f64, a: usize| -> (usize, usize) {
        let c0 = libm::ceil(min / dx_mm - 0.5 - 1e-9) as i64 - origin_cells[a];
        let c1 = libm::ceil(max / dx_mm - 0.5 - 1e-9) as i64 - origin_cells[a];
        let n = dims[a] as i64;
        (c0.clamp(0, n) as usize, c1.clamp(0, n) as usize)
    };
    for p in &scene.primitives {
        if let Primitive::Solid { region, material } = p {
            let (i0, i1) = cell_range(region.min[0], region.max[0], 0);
            let (j0, j1) = cell_range(region.min[1], region.max[1], 1);
            let (k0, k1) = cell_range(region.min[2], region.max[2], 2);
            for i in i0..i1 {
                for j in j0..j1 {
                    let row = (i * ny + j) * nz;
                    cells[row + k0..row + k1].fill(*material as u16);
                }
            }
        }
    }

    let node_count = (nx + 1) * (ny + 1) * (nz + 1);
    let mut pec = [vec![false; node_count], vec![false; node_count], vec![false; node_count]];
    let strides = [(ny + 1) * (nz + 1), nz + 1, 1];
    let metal: Vec<bool> = materials.iter().map(|m| m.is_metal()).collect();
    if metal.iter().any(|&m| m) {
        for i in 0..nx {
            for j in 0..ny {
                for k in 0..nz {
                    if !metal[cells[(i * ny + j) * nz + k] as usize] {
                        continue;
                    }
                    // All twelve edges of the cell.
                    for a in 0..3 {
                        let (u, v) = ((a + 1) % 3, (a + 2) % 3);
                        for (du, dv) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                            let mut n = [i, j, k];
                            n[u] += du;
                            n[v] += dv;
                            pec[a][n[0] * strides[0] + n[1] * strides[1] + n[2]] = true;
                        }
                    }
                }
            }
        }
    }

    // Node-snapped ranges for sheets and apertures.
    let node_of = |x: f64, a: usize| -> i64 { snap(x) - origin_cells[a] };
    for p in &scene.primitives {
        match p {
            Primitive::Sheet { region } => {
                let n = region.flat_axis().expect("validated").index();
                let plane = node_of(region.min[n], n);
                if plane < 0 || plane > dims[n] as i64 {
                    continue;
                }
                let lo_n: [i64; 3] = core::array::from_fn(|a| node_of(region.min[a], a));
                let hi_n: [i64; 3] = core::array::from_fn(|a| node_of(region.max[a], a));
                for a in (0..3).filter(|&a| a != n) {
                    // Edges along `a` in the sheet plane; the other in-plane axis is closed.
                    let o = 3 - a - n;
                    for ca in lo_n[a].max(0)..hi_n[a].min(dims[a] as i64) {
                        for no in lo_n[o].max(0)..=hi_n[o].min(dims[o] as i64) {
                            let mut idx = [0i64; 3];
                            idx[a] = ca;
                            idx[o] = no;
                            idx[n] = plane;
                            let e = idx[0] as usize * strides[0] + idx[1] as usize * strides[1] + idx[2] as usize;
                            pec[a][e] = true;
                        }
                    }
                }
            }
            Primitive::Aperture { region } => {
                let lo_n: [i64; 3] = core::array::from_fn(|a| node_of(region.min[a], a));
                let hi_n: [i64; 3] = core::array::from_fn(|a| node_of(region.max[a], a));
                for a in 0..3 {
                    let (u, v) = ((a + 1) % 3, (a + 2) % 3);
                    for ca in lo_n[a].max(0)..hi_n[a].min(dims[a] as i64) {
                        for nu in (lo_n[u] + 1).max(0)..hi_n[u].min(dims[u] as i64 + 1) {
                            for nv in (lo_n[v] + 1).max(0)..hi_n[v].min(dims[v] as i64 + 1) {
                                let mut idx = [0i64; 3];
                                idx[a] = ca;
                                idx[u] = nu;
                                idx[v] = nv;
                                let e = idx[0] as usize * strides[0] + idx[1] as usize * strides[1] + idx[2] as usize;
                                pec[a][e] = false;
                            }
                        }
                    }
                }
            }
            Primitive::Wire { from, to } => {
                let a = (0..3).find(|&a| from[a] != to[a]).expect("validated");
                let n0 = node_of(from[a].min(to[a]), a).max(0);
                let n1 = node_of(from[a].max(to[a]), a).min(dims[a] as i64);
                let mut idx: [i64; 3] = core::array::from_fn(|b| node_of(from[b], b));
                if (0..3).any(|b| b != a && (idx[b] < 0 || idx[b] > dims[b] as i64)) {
                    continue;
                }
                for c in n0..n1 {
                    idx[a] = c;
                    let e = idx[0] as usize * strides[0] + idx[1] as usize * strides[1] + idx[2] as usize;
                    pec[a][e] = true;
                }
            }
            Primitive::Solid { .. } => {}
        }
    }

    let resolve = |pos: [f64; 3], axis: Axis, what: &str| -> Result<[usize; 3]> {
        let mut n = [0usize; 3];
        for a in 0..3 {
            let v = node_of(pos[a], a);
            let limit = if a == axis.index() { dims[a] as i64 - 1 } else { dims[a] as i64 };
            if v < 1 || v > limit - 1 {
                return Err(Error::GeometryConflict(format!("{what} lies on or outside the grid edge")));
            }
            n[a] = v as usize;
        }
        Ok(n)
    };
    let port = match scene.port {
        Some(p) => {
            if !(p.impedance > 0.0) {
                return Err(Error::InvalidArgument("port impedance must be positive".to_string()));
            }
            let node = resolve(p.position, p.axis, "port")?;
            let e = node[0] * strides[0] + node[1] * strides[1] + node[2];
            pec[p.axis.index()][e] = false;
            Some(GridPort {
                axis: p.axis,
                node,
                positive: p.positive,
                impedance: p.impedance,
            })
        }
        None => None,
    };
    let mut loads = Vec::with_capacity(scene.loads.len());
    for l in &scene.loads {
        if !(l.resistance > 0.0) {
            return Err(Error::InvalidArgument("load resistance must be positive".to_string()));
        }
        let node = resolve(l.position, l.axis, "lumped load")?;
        let e = node[0] * strides[0] + node[1] * strides[1] + node[2];
        pec[l.axis.index()][e] = false;
        loads.push(GridLoad {
            axis: l.axis,
            node,
            resistance: l.resistance,
        });
    }

    Ok(VoxelGrid {
        dims,
        dx_mm,
        origin_mm,
        materials,
        cells,
        pec,
        port,
        loads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn muscle() -> MaterialSpec {
        TissueDatabase::builtin().material("muscle").unwrap()
    }

    #[test]
    fn slot_length_examples() {
        let l = slot_design_length(2.45e9, 4.0).unwrap();
        assert!((l - 38.7).abs() < 0.05, "{l}");
        assert!((l - 38.5).abs() / 38.5 < 0.01);
        let l0 = slot_design_length(2.45e9, 1.0).unwrap();
        assert!((l0 - 61.18).abs() < 0.01, "{l0}");
        let l22 = slot_design_length(2.45e9, 2.2).unwrap();
        assert!((l22 - 48.37).abs() < 0.01, "{l22}");
        assert!(slot_design_length(0.0, 4.0).is_err());
        assert!(slot_design_length(2.45e9, 0.9).is_err());
    }

    #[test]
    fn default_params_match_drawing() {
        let p = AntennaParams::default();
        assert_eq!(
            [p.w_b, p.l_b, p.w_p, p.l_p, p.w_l, p.l_l, p.d, p.h1, p.h2, p.h_b],
            [33.0, 56.0, 27.0, 34.0, 5.0, 5.5, 23.0, 4.0, 7.0, 11.0]
        );
        assert_eq!(p.fold_per_side(), 7.0);
        let c = p.cavity().size();
        assert_eq!(c, [11.0, 56.0, 33.0]);
    }

    #[test]
    fn fold_boundary() {
        let p = AntennaParams {
            slot_length: 33.0,
            ..AntennaParams::default()
        };
        assert_eq!(p.fold_per_side(), 0.0);
        assert!(build_antenna(&p).is_ok());
    }

    #[test]
    fn fold_taller_than_box_is_rejected() {
        let p = AntennaParams {
            slot_length: 60.0,
            ..AntennaParams::default()
        };
        assert!(matches!(build_antenna(&p), Err(Error::GeometryConflict(_))));
    }

    #[test]
    fn oversized_plate_is_rejected() {
        let p = AntennaParams {
            l_p: 52.0,
            ..AntennaParams::default()
        };
        assert!(matches!(build_antenna(&p), Err(Error::GeometryConflict(_))));
    }

    #[test]
    fn antenna_scene_has_one_port() {
        let scene = build_antenna(&AntennaParams::default()).unwrap();
        let port = scene.port.unwrap();
        assert_eq!(port.impedance, 50.0);
        assert_eq!(port.axis, Axis::Y);
    }

    #[test]
    fn feed_gap_is_not_shorted() {
        for dx in [0.5, 0.75, 1.0] {
            let g = rasterize(&build_antenna(&AntennaParams::default()).unwrap(), dx, 12, 12, DEFAULT_MAX_CELLS)
                .unwrap();
            let port = g.port.unwrap();
            let [i, j, k] = port.node;
            let y = &g.pec[1];
            assert!(!y[g.node_index(i, j, k)]);
            assert!(!y[g.node_index(i, j, k - 1)] && !y[g.node_index(i, j, k + 1)], "dx {dx}");
            assert!(y[g.node_index(i, j + 1, k)], "dx {dx}");
        }
    }

    #[test]
    fn empty_scene_is_all_air() {
        let g = rasterize(&Scene::new(), 1.0, 12, 12, DEFAULT_MAX_CELLS).unwrap();
        assert!(g.cells.iter().all(|&c| c == 0));
        assert!(g.dims.iter().all(|&d| d >= 8));
        assert!(g.pec.iter().all(|m| m.iter().all(|&b| !b)));
    }

    #[test]
    fn cube_snaps_exactly() {
        let mut s = Scene::new();
        let m = s.add_solid(Aabb::new([0.0; 3], [10.0; 3]), muscle());
        let g = rasterize(&s, 1.0, 12, 12, DEFAULT_MAX_CELLS).unwrap();
        assert_eq!(g.count_material(m), 1000);
    }

    #[test]
    fn capacity_error_reports_cells() {
        let mut s = Scene::new();
        s.add_solid(Aabb::new([0.0; 3], [100.0; 3]), muscle());
        match rasterize(&s, 1.0, 12, 12, 1000) {
            Err(Error::Capacity { required, budget }) => {
                assert_eq!(required, 124 * 124 * 124);
                assert_eq!(budget, 1000);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn padding_below_minimum_is_rejected() {
        assert!(rasterize(&Scene::new(), 1.0, 5, 12, DEFAULT_MAX_CELLS).is_err());
    }

    #[test]
    fn volume_converges() {
        let region = Aabb::new([0.3, -1.7, 2.2], [7.9, 4.4, 9.1]);
        for dx in [1.0, 0.5, 0.25] {
            let mut s = Scene::new();
            let m = s.add_solid(region, muscle());
            let g = rasterize(&s, dx, 12, 12, DEFAULT_MAX_CELLS).unwrap();
            let v = g.count_material(m) as f64 * dx * dx * dx;
            let sz = region.size();
            let shell = 2.0 * (sz[0] * sz[1] + sz[1] * sz[2] + sz[0] * sz[2]) * dx;
            assert!((v - region.volume()).abs() <= shell, "dx={dx}: {v} vs {}", region.volume());
        }
    }

    #[test]
    fn painter_order_later_wins() {
        let mut s = Scene::new();
        let a = s.add_solid(Aabb::new([0.0; 3], [4.0; 3]), muscle());
        let b = s.add_solid(Aabb::new([0.0; 3], [2.0; 3]), pla());
        let g = rasterize(&s, 1.0, 12, 12, DEFAULT_MAX_CELLS).unwrap();
        assert_eq!(g.count_material(b), 8);
        assert_eq!(g.count_material(a), 56);
    }

    #[test]
    fn layered_phantom_slabs() {
        let db = TissueDatabase::builtin();
        let spec = PhantomSpec::layered(
            vec![("skin_dry".into(), 2.0), ("fat".into(), 5.0), ("muscle".into(), 30.0)],
            [40.0, 40.0],
        );
        assert_eq!(spec.depth_mm(), 37.0);
        let frag = build_phantom(&spec, &db).unwrap();
        assert_eq!(frag.primitives.len(), 3);
        assert_eq!(frag.materials[0].name, "skin_dry");
        match &frag.primitives[0] {
            Primitive::Solid { region, .. } => assert_eq!(region.max[0], 0.0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn layered_phantom_errors() {
        let db = TissueDatabase::builtin();
        let zero = PhantomSpec::layered(vec![("skin_dry".into(), 0.0), ("muscle".into(), 30.0)], [40.0, 40.0]);
        assert!(matches!(build_phantom(&zero, &db), Err(Error::InvalidArgument(_))));
        let unknown = PhantomSpec::layered(vec![("kryptonite".into(), 30.0)], [40.0, 40.0]);
        assert!(matches!(build_phantom(&unknown, &db), Err(Error::UnknownTissue(_))));
        let thin = PhantomSpec::layered(vec![("muscle".into(), 10.0)], [40.0, 40.0]);
        assert!(build_phantom(&thin, &db).is_err());
    }

    #[test]
    fn voxel_phantom_matches_cube() {
        let db = TissueDatabase::builtin();
        let mut map = BTreeMap::new();
        map.insert(1u8, "muscle".to_string());
        let vox = VoxelPhantom {
            dims: [40, 40, 40],
            pitch_mm: 1.0,
            ids: vec![1; 40 * 40 * 40],
            tissue_map: map,
        };
        let spec = PhantomSpec {
            kind: PhantomKind::Voxel(vox),
            center_mm: [20.0, 20.0],
            surface_x_mm: 0.0,
        };
        let mut a = Scene::new();
        a.merge(build_phantom(&spec, &db).unwrap());
        let mut b = Scene::new();
        b.add_solid(Aabb::new([-40.0, 0.0, 0.0], [0.0, 40.0, 40.0]), muscle());
        let ga = rasterize(&a, 1.0, 12, 12, DEFAULT_MAX_CELLS).unwrap();
        let gb = rasterize(&b, 1.0, 12, 12, DEFAULT_MAX_CELLS).unwrap();
        assert_eq!(ga.dims, gb.dims);
        assert_eq!(ga.origin_mm, gb.origin_mm);
        assert_eq!(ga.cells, gb.cells);

        // Pitch must be a multiple of dx.
        assert!(rasterize(&a, 0.75, 12, 12, DEFAULT_MAX_CELLS).is_err());
        assert!(rasterize(&a, 0.5, 12, 12, DEFAULT_MAX_CELLS).is_ok());
    }

    #[test]
    fn voxel_phantom_unmapped_id() {
        let db = TissueDatabase::builtin();
        let vox = VoxelPhantom {
            dims: [2, 2, 2],
            pitch_mm: 1.0,
            ids: vec![3; 8],
            tissue_map: BTreeMap::new(),
        };
        let spec = PhantomSpec {
            kind: PhantomKind::Voxel(vox),
            center_mm: [0.0, 0.0],
            surface_x_mm: 0.0,
        };
        assert!(matches!(build_phantom(&spec, &db), Err(Error::Data(_))));
    }

    #[test]
    fn bmi_map() {
        assert_eq!(fat_thickness_for_bmi(17.0), 3.0);
        assert_eq!(fat_thickness_for_bmi(29.0), 15.0);
        assert_eq!(fat_thickness_for_bmi(23.0), 9.0);
        assert_eq!(fat_thickness_for_bmi(40.0), 15.0);
    }

    fn antenna_grid() -> (AntennaParams, VoxelGrid) {
        let p = AntennaParams::default();
        let scene = build_antenna(&p).unwrap();
        let g = rasterize(&scene, 0.75, 12, 12, DEFAULT_MAX_CELLS).unwrap();
        (p, g)
    }

    #[test]
    fn antenna_walls_are_two_cells() {
        // A separately named support keeps the block out of the wall scan.
        let p = AntennaParams {
            support_material: pla().named("support"),
            ..AntennaParams::default()
        };
        let g = rasterize(&build_antenna(&p).unwrap(), 0.75, 12, 12, DEFAULT_MAX_CELLS).unwrap();
        let pla = g.materials.iter().position(|m| m.name == "pla").unwrap() as u16;
        let [nx, ny, nz] = g.dims;
        // Scan every axis-parallel line through the box and measure PLA runs that touch
        // the interior cavity; every wall crossing must be exactly two cells.
        let mut checked = 0;
        for a in 0..3 {
            let (u, v) = ((a + 1) % 3, (a + 2) % 3);
            let n = g.dims;
            for cu in 0..n[u] {
                for cv in 0..n[v] {
                    let mut line = Vec::with_capacity(n[a]);
                    for ca in 0..n[a] {
                        let mut c = [0; 3];
                        c[a] = ca;
                        c[u] = cu;
                        c[v] = cv;
                        line.push(g.cells[(c[0] * ny + c[1]) * nz + c[2]]);
                    }
                    // air - pla... - air(cavity) - pla... - air
                    let first = line.iter().position(|&m| m == pla);
                    let Some(first) = first else { continue };
                    let mut end = first;
                    while end < line.len() && line[end] == pla {
                        end += 1;
                    }
                    if end < line.len() && line[end] == 0 && line[end..].contains(&pla) {
                        assert_eq!(end - first, 2, "axis {a} line ({cu},{cv})");
                        let last = line.iter().rposition(|&m| m == pla).unwrap();
                        let mut start = last;
                        while line[start - 1] == pla {
                            start -= 1;
                        }
                        assert_eq!(last + 1 - start, 2, "axis {a} line ({cu},{cv})");
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked > 1000);
        let _ = nx;
    }

    #[test]
    fn slot_aperture_area() {
        let (p, g) = antenna_grid();
        let s = g.node_strides();
        let dx = g.dx_mm;
        let cav = p.cavity();
        let node = |x: f64, a: usize| libm::round((x - g.origin_mm[a]) / dx) as usize;
        let face_open = |n: usize, pos: [usize; 3]| {
            // Face normal to axis n with lower corner at node `pos`.
            let (u, v) = ((n + 1) % 3, (n + 2) % 3);
            let e = |a: usize, q: [usize; 3]| g.pec[a][q[0] * s[0] + q[1] * s[1] + q[2]];
            let mut qu = pos;
            qu[v] += 1;
            let mut qv = pos;
            qv[u] += 1;
            !e(u, pos) && !e(u, qu) && !e(v, pos) && !e(v, qv)
        };
        let mut open = 0usize;
        // Top plane and the two side walls.
        let planes = [(0usize, cav.max[0]), (2, cav.min[2]), (2, cav.max[2])];
        for (n, x) in planes {
            let pn = node(x, n);
            let (u, v) = ((n + 1) % 3, (n + 2) % 3);
            for cu in node(cav.min[u], u)..node(cav.max[u], u) {
                for cv in node(cav.min[v], v)..node(cav.max[v], v) {
                    let mut pos = [0; 3];
                    pos[n] = pn;
                    pos[u] = cu;
                    pos[v] = cv;
                    if face_open(n, pos) {
                        open += 1;
                    }
                }
            }
        }
        let area = open as f64 * dx * dx;
        let nominal = p.slot_length * p.slot_width;
        let ring = 2.0 * (p.slot_length + p.slot_width) * dx;
        assert!((area - nominal).abs() <= ring, "{area} vs {nominal}");
    }

    #[test]
    fn rasterization_is_deterministic() {
        let (_, a) = antenna_grid();
        let (_, b) = antenna_grid();
        assert_eq!(a, b);
    }
}
