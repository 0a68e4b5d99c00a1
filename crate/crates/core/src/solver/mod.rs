//! Uniform-grid FDTD for lossy dielectrics with CPML boundaries and a resistive port.
//!
//! Materials are frozen to `(εᵣ, σ)` at [`SimConfig::material_frequency`]. E sits on cell
//! edges, H on face centres. Fields are `f32`; DFT accumulators and reductions are `f64`.
//!
//! The port is a voltage source `V_s` in series with its reference resistance `R` across
//! one edge. With `V` the gap voltage (hot terminal at the `+axis` end for a positive port)
//! the branch current into the structure is `I = (V_s − V)/R`. Both are sampled at half
//! steps, `tₙ = (n + ½)Δt`, and stored per step in the [`RunRecord`].
//!
//! All phasors carry the peak-amplitude convention; power formulas elsewhere apply the ½.

mod cpml;
mod record;
mod yee;

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

pub use record::{FaceSpectra, SurfaceSample, SurfaceSpectra, VolumeSpectra};

use crate::consts::{C0, EPS0, MM, MU0, PI};
use crate::dielectrics::Medium;
use crate::scene::{Axis, VoxelGrid};
use crate::{Complex, Error, Result};

/// Gaussian-modulated sine `A·exp(−((t − t₀)/τ)²)·sin(2πf₀(t − t₀))`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SourceSpec {
    pub center: f64,
    /// Width of the band where the spectrum stays within 20 dB of its peak, Hz.
    pub bandwidth: f64,
    pub amplitude: f64,
}

impl Default for SourceSpec {
    fn default() -> Self {
        Self {
            center: 2.45e9,
            bandwidth: 3.0e9,
            amplitude: 1.0,
        }
    }
}

impl SourceSpec {
    /// Envelope width τ: the −20 dB points sit at `center ± bandwidth/2`.
    pub fn tau(&self) -> f64 {
        2.0 * libm::sqrt(libm::log(10.0)) / (PI * self.bandwidth)
    }

    pub fn delay(&self) -> f64 {
        5.0 * self.tau()
    }

    pub fn value(&self, t: f64) -> f64 {
        let tau = self.tau();
        let x = (t - self.delay()) / tau;
        self.amplitude * libm::exp(-x * x) * libm::sin(2.0 * PI * self.center * (t - self.delay()))
    }

    /// The `−20 dB` band `(lo, hi)` in Hz.
    pub fn band(&self) -> (f64, f64) {
        (self.center - 0.5 * self.bandwidth, self.center + 0.5 * self.bandwidth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpmlSpec {
    pub depth: usize,
    /// Polynomial grading order `m`.
    pub order: f64,
    /// Multiplier on `σ_opt = 0.8(m+1)/(η₀Δx)`.
    pub sigma_scale: f64,
    pub kappa_max: f64,
    /// Complex-frequency shift at the inner interface, S/m.
    pub alpha_max: f64,
}

impl Default for CpmlSpec {
    fn default() -> Self {
        Self {
            depth: 8,
            order: 3.0,
            sigma_scale: 1.0,
            kappa_max: 1.0,
            alpha_max: 0.05,
        }
    }
}

/// Minimum absorbing-layer depth accepted by the solver.
pub const MIN_CPML_DEPTH: usize = 8;

/// How an edge takes its `(ε, σ)` from the up to four cells around it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EdgeMaterial {
    /// Arithmetic mean over the adjacent cells.
    #[default]
    Average,
    /// The cell on the `+u, +v` side of the edge (its own cell index) where it exists.
    Owner,
}

/// Which edges the volume recorder keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VolumeMode {
    Off,
    /// Edges with non-zero conductivity: everything the power budget and SAR need.
    #[default]
    Lossy,
    /// Every non-conductor edge (snapshot export).
    Full,
}

/// A time-domain probe, recorded once per step at `(n + 1)Δt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub axis: Axis,
    /// Start node of the first edge.
    pub node: [usize; 3],
    /// Number of consecutive edges; the probe records `Σ E·Δx` in volts.
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub courant_factor: f64,
    pub max_steps: usize,
    /// Stop once total energy falls this many dB below its peak (after the pulse).
    pub decay_stop_db: f64,
    pub source: SourceSpec,
    pub cpml: CpmlSpec,
    pub dft_frequencies: Vec<f64>,
    /// Frequency at which dispersive materials are frozen to `(εᵣ, σ)`.
    pub material_frequency: f64,
    pub edge_material: EdgeMaterial,
    pub volume: VolumeMode,
    pub huygens: bool,
    /// Gap between the Huygens box and the inner CPML face, cells.
    pub huygens_margin: usize,
    /// Accumulate volume and surface DFTs every this many steps.
    pub dft_stride: usize,
    /// Check the energy every this many steps.
    pub energy_interval: usize,
    pub probes: Vec<Probe>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            courant_factor: 0.99,
            max_steps: 60_000,
            decay_stop_db: -40.0,
            source: SourceSpec::default(),
            cpml: CpmlSpec::default(),
            dft_frequencies: vec![2.45e9],
            material_frequency: 2.45e9,
            edge_material: EdgeMaterial::Average,
            volume: VolumeMode::Lossy,
            huygens: true,
            huygens_margin: 2,
            dft_stride: 8,
            energy_interval: 25,
            probes: Vec::new(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.courant_factor > 0.0 && self.courant_factor <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "courant factor must lie in (0, 1], got {}",
                self.courant_factor
            )));
        }
        if self.cpml.depth < MIN_CPML_DEPTH {
            return Err(Error::InvalidArgument(format!(
                "CPML depth must be at least {MIN_CPML_DEPTH} cells, got {}",
                self.cpml.depth
            )));
        }
        if !(self.cpml.order >= 1.0) || !(self.cpml.sigma_scale >= 0.0) || !(self.cpml.kappa_max >= 1.0)
            || !(self.cpml.alpha_max >= 0.0)
        {
            return Err(Error::InvalidArgument("invalid CPML grading".to_string()));
        }
        let s = &self.source;
        if !(s.center > 0.0) || !(s.bandwidth > 0.0) || !s.amplitude.is_finite() {
            return Err(Error::InvalidArgument("invalid source parameters".to_string()));
        }
        let (lo, hi) = s.band();
        for &f in &self.dft_frequencies {
            if !(f >= lo && f <= hi) {
                return Err(Error::InvalidArgument(format!(
                    "DFT frequency {f} Hz lies outside the source band {lo}..{hi} Hz"
                )));
            }
        }
        for (i, f) in self.dft_frequencies.iter().enumerate() {
            if self.dft_frequencies[..i].contains(f) {
                return Err(Error::InvalidArgument(format!("DFT frequency {f} Hz listed twice")));
            }
        }
        if self.dft_stride == 0 || self.energy_interval == 0 {
            return Err(Error::InvalidArgument("strides must be positive".to_string()));
        }
        if !(self.decay_stop_db < 0.0) {
            return Err(Error::InvalidArgument("decay threshold must be negative dB".to_string()));
        }
        if !(self.material_frequency > 0.0) {
            return Err(Error::InvalidArgument("material frequency must be positive".to_string()));
        }
        Ok(())
    }
}

/// Time step `courant·Δx/(c√3)` in seconds for `dx` in millimetres.
pub fn cfl_timestep(dx_mm: f64, courant_factor: f64) -> Result<f64> {
    if !(dx_mm > 0.0) || !dx_mm.is_finite() {
        return Err(Error::InvalidArgument(format!("dx must be positive, got {dx_mm}")));
    }
    if !(courant_factor > 0.0 && courant_factor <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "courant factor must lie in (0, 1], got {courant_factor}"
        )));
    }
    Ok(courant_factor * dx_mm * MM / (C0 * libm::sqrt(3.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Termination {
    /// Energy decayed below the threshold.
    Decayed,
    /// Stopped at `max_steps` above the threshold; spectra may leak.
    MaxSteps,
}

/// Everything one run produces.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunRecord {
    pub dims: [usize; 3],
    pub dx_mm: f64,
    pub dt: f64,
    pub steps: usize,
    pub termination: Termination,
    pub source: SourceSpec,
    pub material_frequency: f64,
    pub edge_material: EdgeMaterial,
    pub port_impedance: f64,
    /// Port gap voltage at `(n + ½)Δt`.
    pub voltage: Vec<f64>,
    /// Port branch current at `(n + ½)Δt`.
    pub current: Vec<f64>,
    pub probes: Vec<Vec<f64>>,
    pub frequencies: Vec<f64>,
    pub volume: Option<VolumeSpectra>,
    pub surface: Option<SurfaceSpectra>,
    pub peak_energy: f64,
    pub final_energy: f64,
}

impl RunRecord {
    /// Spectral density `Σ xₙ e^{−jω(n+½)Δt} Δt` of a port series.
    pub fn port_phasor(&self, series: &[f64], f: f64) -> Complex {
        dft_half_step(series, f, self.dt)
    }

    pub fn frequency_index(&self, f: f64) -> Option<usize> {
        self.frequencies
            .iter()
            .position(|&g| (g - f).abs() <= 1e-6 * f.abs().max(1.0))
    }
}

pub(crate) fn dft_half_step(series: &[f64], f: f64, dt: f64) -> Complex {
    let w = -2.0 * PI * f * dt;
    // Rotate incrementally in f64; the recurrence is re-anchored every 1024 samples.
    let mut acc = Complex::new(0.0, 0.0);
    let step = Complex::new(libm::cos(w), libm::sin(w));
    let mut rot = Complex::new(0.0, 0.0);
    for (n, &x) in series.iter().enumerate() {
        if n % 1024 == 0 {
            let ph = w * (n as f64 + 0.5);
            rot = Complex::new(libm::cos(ph), libm::sin(ph));
        }
        acc += rot * x;
        rot *= step;
    }
    acc * dt
}

struct PortState {
    idx: usize,
    axis: usize,
    sign: f64,
    resistance: f64,
    /// Coefficient of `V_s` in the E update.
    drive: f32,
    dx_m: f64,
}

/// A stepping FDTD simulation bound to one grid.
///
/// The field kernel always runs a unit-amplitude source; the source amplitude is applied
/// to everything read out of it. Scaling the amplitude therefore scales every output
/// exactly, without the kernel's `f32` underflow behaviour depending on it.
pub struct Simulation<'g> {
    grid: &'g VoxelGrid,
    config: SimConfig,
    dt: f64,
    fields: yee::Fields,
    ca: [Vec<f32>; 3],
    cb: [Vec<f32>; 3],
    eps_r: [Vec<f32>; 3],
    db: f32,
    slabs: Vec<cpml::Slab>,
    port: PortState,
    volume: Option<record::VolumeRecorder>,
    surface: Option<record::SurfaceRecorder>,
    step: usize,
    voltage: Vec<f64>,
    current: Vec<f64>,
    probes: Vec<Vec<f64>>,
    dft_step: [Vec<Complex>; 2],
    gain: f64,
}

/// Relative permittivity and conductivity of every material at `f` (conductors as vacuum).
pub fn material_media(grid: &VoxelGrid, f: f64) -> Result<Vec<Medium>> {
    grid.materials.iter().map(|m| m.medium_at(f)).collect()
}

/// `(εᵣ, σ)` of the edge along `axis` at `node` under the chosen rule.
pub fn edge_medium(grid: &VoxelGrid, media: &[Medium], rule: EdgeMaterial, axis: Axis, node: [usize; 3]) -> Medium {
    let mut eps = 0.0;
    let mut sigma = 0.0;
    let mut n = 0usize;
    for c in grid.edge_cells(axis, node) {
        let m = media[grid.cells[grid.cell_index(c[0], c[1], c[2])] as usize];
        if rule == EdgeMaterial::Owner {
            return m;
        }
        eps += m.eps_r;
        sigma += m.sigma;
        n += 1;
    }
    if n == 0 {
        return Medium::VACUUM;
    }
    Medium {
        eps_r: eps / n as f64,
        sigma: sigma / n as f64,
    }
}

impl<'g> Simulation<'g> {
    pub fn new(grid: &'g VoxelGrid, config: SimConfig) -> Result<Self> {
        config.validate()?;
        if grid.dims.iter().any(|&n| n < 2 * config.cpml.depth + 2) {
            return Err(Error::InvalidArgument(format!(
                "grid {:?} too small for a {}-cell CPML",
                grid.dims, config.cpml.depth
            )));
        }
        let gp = grid
            .port
            .ok_or_else(|| Error::Validation("scene has no port".to_string()))?;
        let dt = cfl_timestep(grid.dx_mm, config.courant_factor)?;
        let dx_m = grid.dx_mm * MM;
        let media = material_media(grid, config.material_frequency)?;
        let nn = grid.node_count();
        let [nx, ny, nz] = grid.dims;
        let s = grid.node_strides();

        let mut ca = [vec![0.0f32; nn], vec![0.0f32; nn], vec![0.0f32; nn]];
        let mut cb = [vec![0.0f32; nn], vec![0.0f32; nn], vec![0.0f32; nn]];
        let mut eps_r = [vec![0.0f32; nn], vec![0.0f32; nn], vec![0.0f32; nn]];
        let mut sigma_e = [vec![0.0f64; 0], vec![0.0f64; 0], vec![0.0f64; 0]];
        let want_sigma = config.volume != VolumeMode::Off;
        // Lumped resistors per edge: conductance sum (1/R).
        let mut lumped: Vec<(usize, usize, f64)> = Vec::new();
        lumped.push((gp.axis.index(), grid.node_index(gp.node[0], gp.node[1], gp.node[2]), 1.0 / gp.impedance));
        for l in &grid.loads {
            let idx = grid.node_index(l.node[0], l.node[1], l.node[2]);
            let a = l.axis.index();
            match lumped.iter_mut().find(|e| e.0 == a && e.1 == idx) {
                Some(e) => e.2 += 1.0 / l.resistance,
                None => lumped.push((a, idx, 1.0 / l.resistance)),
            }
        }
        for a in 0..3 {
            if want_sigma {
                sigma_e[a] = vec![0.0; nn];
            }
            let lim = [nx + (a != 0) as usize, ny + (a != 1) as usize, nz + (a != 2) as usize];
            for i in 0..lim[0] {
                for j in 0..lim[1] {
                    for k in 0..lim[2] {
                        let idx = i * s[0] + j * s[1] + k;
                        if grid.pec[a][idx] {
                            continue;
                        }
                        let m = edge_medium(grid, &media, config.edge_material, Axis::from_index(a), [i, j, k]);
                        let eps = m.eps_r * EPS0;
                        let g = lumped
                            .iter()
                            .find(|e| e.0 == a && e.1 == idx)
                            .map_or(0.0, |e| e.2);
                        let loss = (m.sigma + g / dx_m) * dt / (2.0 * eps);
                        ca[a][idx] = ((1.0 - loss) / (1.0 + loss)) as f32;
                        cb[a][idx] = (dt / (eps * dx_m * (1.0 + loss))) as f32;
                        eps_r[a][idx] = m.eps_r as f32;
                        if want_sigma {
                            sigma_e[a][idx] = m.sigma;
                        }
                    }
                }
            }
        }
        let port_idx = grid.node_index(gp.node[0], gp.node[1], gp.node[2]);
        let pa = gp.axis.index();
        let port = PortState {
            idx: port_idx,
            axis: pa,
            sign: if gp.positive { 1.0 } else { -1.0 },
            resistance: gp.impedance,
            drive: {
                // cb already carries 1/(ε Δx (1 + loss)); the source adds dt·V_s/(ε R Δx²).
                (cb[pa][port_idx] as f64 / (gp.impedance * dx_m)) as f32
            },
            dx_m,
        };

        let volume = match config.volume {
            VolumeMode::Off => None,
            mode => {
                let mut edges: [Vec<u32>; 3] = [Vec::new(), Vec::new(), Vec::new()];
                for a in 0..3 {
                    for idx in 0..nn {
                        let keep = match mode {
                            VolumeMode::Lossy => sigma_e[a][idx] > 0.0,
                            _ => cb[a][idx] != 0.0,
                        };
                        if keep {
                            edges[a].push(idx as u32);
                        }
                    }
                }
                Some(record::VolumeRecorder::new(edges, config.dft_frequencies.len()))
            }
        };
        let surface = if config.huygens {
            let off = config.cpml.depth + config.huygens_margin;
            let lo = [off; 3];
            let hi = [nx - off, ny - off, nz - off];
            if (0..3).any(|a| hi[a] <= lo[a] + 1) {
                return Err(Error::InvalidArgument("grid too small for the Huygens box".to_string()));
            }
            Some(record::SurfaceRecorder::new(lo, hi, config.dft_frequencies.len()))
        } else {
            None
        };
        let slabs = cpml::Slab::all(&config.cpml, grid.dims, dx_m, dt);
        let nf = config.dft_frequencies.len();
        let probes = vec![Vec::new(); config.probes.len()];
        for p in &config.probes {
            let a = p.axis.index();
            let mut end = p.node;
            end[a] += p.length;
            if (0..3).any(|b| end[b] > grid.dims[b]) || p.length == 0 {
                return Err(Error::InvalidArgument(format!("probe {p:?} leaves the grid")));
            }
        }
        Ok(Self {
            grid,
            dt,
            fields: yee::Fields::new(grid.dims),
            ca,
            cb,
            eps_r,
            db: (dt / (MU0 * dx_m)) as f32,
            slabs,
            port,
            volume,
            surface,
            step: 0,
            voltage: Vec::new(),
            current: Vec::new(),
            probes,
            dft_step: [vec![Complex::new(0.0, 0.0); nf], vec![Complex::new(0.0, 0.0); nf]],
            gain: config.source.amplitude,
            config,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    /// Total field energy in joules.
    pub fn energy(&self) -> f64 {
        let dv = libm::pow(self.grid.dx_mm * MM, 3.0);
        yee::energy(&self.fields, &self.eps_r, dv, EPS0, MU0) * self.gain * self.gain
    }

    /// E on the edge along `axis` starting at `node`, V/m.
    pub fn e_at(&self, axis: Axis, node: [usize; 3]) -> f32 {
        (self.fields.e[axis.index()][self.grid.node_index(node[0], node[1], node[2])] as f64 * self.gain) as f32
    }

    /// Advance one step: H to `n + ½`, then E to `n + 1`, port and recorders.
    pub fn step(&mut self) -> Result<()> {
        let n = self.step;
        yee::update_h(&mut self.fields, self.db);
        for s in &mut self.slabs {
            s.update_h(&mut self.fields, self.db);
        }
        let port = &self.port;
        let e_old = self.fields.e[port.axis][port.idx] as f64;
        yee::update_e(&mut self.fields, &self.ca, &self.cb);
        for s in &mut self.slabs {
            s.update_e(&mut self.fields, &self.cb);
        }
        let unit = SourceSpec {
            amplitude: 1.0,
            ..self.config.source
        };
        let vs = unit.value((n as f64 + 0.5) * self.dt);
        let e = &mut self.fields.e[port.axis][port.idx];
        *e -= (port.sign * vs) as f32 * port.drive;
        let v = -port.sign * port.dx_m * 0.5 * (e_old + *e as f64);
        if !v.is_finite() {
            return Err(Error::NumericalDivergence { step: n });
        }
        self.voltage.push(v * self.gain);
        self.current.push((vs - v) / port.resistance * self.gain);

        let dx_m = self.grid.dx_mm * MM;
        for (p, out) in self.config.probes.iter().zip(&mut self.probes) {
            let a = p.axis.index();
            let mut sum = 0.0f64;
            let mut node = p.node;
            for _ in 0..p.length {
                sum += self.fields.e[a][self.grid.node_index(node[0], node[1], node[2])] as f64;
                node[a] += 1;
            }
            out.push(sum * dx_m * self.gain);
        }

        if (n + 1) % self.config.dft_stride == 0 && (self.volume.is_some() || self.surface.is_some()) {
            let w = self.dt * self.config.dft_stride as f64 * self.gain;
            for (fi, &f) in self.config.dft_frequencies.iter().enumerate() {
                let om = -2.0 * PI * f * self.dt;
                let te = om * (n as f64 + 1.0);
                let th = om * (n as f64 + 0.5);
                self.dft_step[0][fi] = Complex::new(libm::cos(te), libm::sin(te)) * w;
                self.dft_step[1][fi] = Complex::new(libm::cos(th), libm::sin(th)) * w;
            }
            if let Some(v) = &mut self.volume {
                v.accumulate(&self.fields, &self.dft_step[0]);
            }
            if let Some(s) = &mut self.surface {
                s.accumulate(&self.fields, &self.dft_step[0], &self.dft_step[1]);
            }
        }
        self.step += 1;
        Ok(())
    }

    /// Step to termination and hand back the record.
    pub fn run(mut self) -> Result<RunRecord> {
        let threshold = libm::pow(10.0, self.config.decay_stop_db / 10.0);
        let quiet_after = 2.0 * self.config.source.delay();
        let mut peak = 0.0f64;
        let mut last = 0.0f64;
        let mut termination = Termination::MaxSteps;
        while self.step < self.config.max_steps {
            self.step()?;
            if self.step % self.config.energy_interval == 0 {
                last = self.energy();
                if !last.is_finite() {
                    return Err(Error::NumericalDivergence { step: self.step });
                }
                peak = peak.max(last);
                if self.step as f64 * self.dt > quiet_after && last <= peak * threshold {
                    termination = Termination::Decayed;
                    break;
                }
            }
        }
        Ok(self.finish(termination, peak, last))
    }

    fn finish(self, termination: Termination, peak_energy: f64, final_energy: f64) -> RunRecord {
        let freqs = self.config.dft_frequencies.clone();
        let dx_m = self.grid.dx_mm * MM;
        let origin_m = [
            self.grid.origin_mm[0] * MM,
            self.grid.origin_mm[1] * MM,
            self.grid.origin_mm[2] * MM,
        ];
        RunRecord {
            dims: self.grid.dims,
            dx_mm: self.grid.dx_mm,
            dt: self.dt,
            steps: self.step,
            termination,
            source: self.config.source,
            material_frequency: self.config.material_frequency,
            edge_material: self.config.edge_material,
            port_impedance: self.port.resistance,
            voltage: self.voltage,
            current: self.current,
            probes: self.probes,
            volume: self.volume.map(|v| v.finish(freqs.clone())),
            surface: self.surface.map(|s| s.finish(freqs.clone(), origin_m, dx_m)),
            frequencies: freqs,
            peak_energy,
            final_energy,
        }
    }
}

/// Run `grid` under `config` to termination.
pub fn run(grid: &VoxelGrid, config: &SimConfig) -> Result<RunRecord> {
    Simulation::new(grid, config.clone())?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dielectrics::MaterialSpec;
    use crate::scene::{rasterize, Aabb, PortSpec, Scene, DEFAULT_MAX_CELLS};

    fn small_grid() -> VoxelGrid {
        let mut s = Scene::new();
        s.add_solid(
            Aabb::new([-3.0, -3.0, -3.0], [3.0, 3.0, 3.0]),
            MaterialSpec::dielectric("block", 4.0, 0.05, 1000.0).unwrap(),
        );
        s.set_port(PortSpec {
            position: [0.0, 0.0, 0.0],
            axis: Axis::Z,
            positive: true,
            impedance: 50.0,
        });
        rasterize(&s, 1.0, 12, 12, DEFAULT_MAX_CELLS).unwrap()
    }

    #[test]
    fn cfl_examples() {
        let dt = cfl_timestep(0.75, 0.99).unwrap();
        assert!((dt - 1.430e-12).abs() < 0.001e-12, "{dt}");
        let dt = cfl_timestep(1.0, 1.0).unwrap();
        assert!((dt - 1.926e-12).abs() < 0.001e-12, "{dt}");
        let a = cfl_timestep(0.5, 0.7).unwrap();
        let b = cfl_timestep(1.0, 0.7).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
        assert!(cfl_timestep(0.0, 0.5).is_err());
        assert!(cfl_timestep(1.0, 1.01).is_err());
        assert!(cfl_timestep(1.0, 0.0).is_err());
    }

    #[test]
    fn source_band_edges_are_twenty_db_down() {
        let s = SourceSpec::default();
        // Envelope spectrum ∝ exp(−(πτΔf)²); at Δf = B/2 that is 0.1.
        let x = PI * s.tau() * 0.5 * s.bandwidth;
        assert!((libm::exp(-x * x) - 0.1).abs() < 1e-12);
        let (lo, hi) = s.band();
        assert!(lo <= 1.5e9 && hi >= 3.5e9);
        assert!(s.value(0.0).abs() < 1e-9);
    }

    #[test]
    fn zero_source_keeps_fields_zero() {
        let grid = small_grid();
        let mut cfg = SimConfig::default();
        cfg.source.amplitude = 0.0;
        let mut sim = Simulation::new(&grid, cfg).unwrap();
        for _ in 0..200 {
            sim.step().unwrap();
        }
        assert_eq!(sim.energy(), 0.0);
        assert!(sim.voltage.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn config_validation() {
        let grid = small_grid();
        let mut cfg = SimConfig::default();
        cfg.cpml.depth = 6;
        assert!(Simulation::new(&grid, cfg).is_err());
        let mut cfg = SimConfig::default();
        cfg.dft_frequencies = vec![9e9];
        assert!(cfg.validate().is_err());
        let mut cfg = SimConfig::default();
        cfg.dft_frequencies = vec![2.45e9, 2.45e9];
        assert!(cfg.validate().is_err());
        let mut cfg = SimConfig::default();
        cfg.courant_factor = 1.2;
        assert!(cfg.validate().is_err());
        let mut no_port = grid.clone();
        no_port.port = None;
        assert!(Simulation::new(&no_port, SimConfig::default()).is_err());
    }

    #[test]
    fn energy_decays_after_pulse() {
        let grid = small_grid();
        let cfg = SimConfig {
            max_steps: 3000,
            ..SimConfig::default()
        };
        let mut sim = Simulation::new(&grid, cfg.clone()).unwrap();
        let quiet = (2.0 * cfg.source.delay() / sim.dt()) as usize;
        let mut prev = f64::INFINITY;
        for n in 0..3000 {
            sim.step().unwrap();
            if n > quiet && n % 100 == 0 {
                let e = sim.energy();
                assert!(e <= prev * 1.001, "energy grew at step {n}: {prev} -> {e}");
                prev = e;
            }
        }
    }

    #[test]
    fn record_lengths_match_steps() {
        let grid = small_grid();
        let cfg = SimConfig {
            max_steps: 400,
            probes: vec![Probe {
                axis: Axis::X,
                node: [14, 15, 15],
                length: 2,
            }],
            ..SimConfig::default()
        };
        let rec = run(&grid, &cfg).unwrap();
        assert_eq!(rec.steps, 400);
        assert_eq!(rec.voltage.len(), 400);
        assert_eq!(rec.current.len(), 400);
        assert_eq!(rec.probes[0].len(), 400);
        assert_eq!(rec.termination, Termination::MaxSteps);
        assert_eq!(rec.frequencies, vec![2.45e9]);
        let vol = rec.volume.unwrap();
        assert_eq!(vol.values.len(), 1);
        assert!(vol.edge_count() > 0);
    }

    #[test]
    fn runs_are_bit_identical() {
        let grid = small_grid();
        let cfg = SimConfig {
            max_steps: 300,
            ..SimConfig::default()
        };
        assert_eq!(run(&grid, &cfg).unwrap(), run(&grid, &cfg).unwrap());
    }
}
