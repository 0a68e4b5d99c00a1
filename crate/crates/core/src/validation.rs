//! Small reference problems with closed-form answers, used to check the solver.
//!
//! Each function builds its own scene, runs it and returns the measured quantity next to
//! whatever it should be compared with; the caller decides the tolerance.

use alloc::vec;
use alloc::vec::Vec;

use crate::analysis::{frequency_grid, ntff, s11_spectrum, FarField};
use crate::consts::{C0, PI};
use crate::dielectrics::MaterialSpec;
use crate::scene::{rasterize, rasterize_region, Aabb, Axis, LumpedLoad, PortSpec, Scene, VoxelGrid};
use crate::solver::{run, Probe, SimConfig, SourceSpec, VolumeMode};
use crate::{Complex, Result};

fn node(grid: &VoxelGrid, p: [f64; 3]) -> [usize; 3] {
    core::array::from_fn(|a| libm::round((p[a] - grid.origin_mm[a]) / grid.dx_mm) as usize)
}

/// Probes only: no volume or surface recorders, runs to `steps`.
fn bare(steps: usize, source: SourceSpec, f: f64, probes: Vec<Probe>) -> SimConfig {
    SimConfig {
        max_steps: steps,
        decay_stop_db: -300.0,
        source,
        dft_frequencies: vec![f],
        volume: VolumeMode::Off,
        huygens: false,
        probes,
        ..SimConfig::default()
    }
}

fn port_at_origin(axis: Axis) -> PortSpec {
    PortSpec {
        position: [0.0; 3],
        axis,
        positive: true,
        impedance: 50.0,
    }
}

const COAX_DX: f64 = 0.75;
const OUTER: f64 = 3.0;
const INNER: f64 = 0.75;

/// Square coaxial line along +x, shorted at `x = 0` and fed there through a one-cell gap
/// between the end wall and the inner conductor. Runs to `length` mm, into the CPML, and
/// is filled with εr = 4 beyond `fill_from`.
pub fn coax_line(length: f64, fill_from: Option<f64>) -> Result<VoxelGrid> {
    let mut s = Scene::new();
    if let Some(x) = fill_from {
        s.add_solid(
            Aabb::new([x, -20.0, -20.0], [length + 20.0, 20.0, 20.0]),
            MaterialSpec::dielectric("fill", 4.0, 0.0, 1000.0)?,
        );
    }
    s.add_solid(
        Aabb::new([3.0, -INNER, -INNER], [length + 20.0, INNER, INNER]),
        MaterialSpec::perfect_conductor("inner"),
    );
    for w in [-OUTER, OUTER] {
        s.add_sheet(Aabb::new([0.0, w, -OUTER], [length + 20.0, w, OUTER]));
        s.add_sheet(Aabb::new([0.0, -OUTER, w], [length + 20.0, OUTER, w]));
    }
    s.add_sheet(Aabb::new([0.0, -OUTER, -OUTER], [0.0, OUTER, OUTER]));
    s.add_wire([COAX_DX, 0.0, 0.0], [3.0, 0.0, 0.0]);
    s.set_port(port_at_origin(Axis::X));
    let region = Aabb::new([-7.5, -9.0, -9.0], [length, 9.0, 9.0]);
    rasterize_region(&s, COAX_DX, region, 10_000_000)
}

/// Inner-to-outer voltage at station `x` of a [`coax_line`].
fn line_probe(grid: &VoxelGrid, x: f64) -> Probe {
    Probe {
        axis: Axis::Z,
        node: node(grid, [x, 0.0, INNER]),
        length: libm::round((OUTER - INNER) / COAX_DX) as usize,
    }
}

/// Speed of a TEM pulse down an air-filled line, m/s, from the cross-correlation lag
/// between two stations 60 mm apart.
pub fn pulse_speed() -> Result<f64> {
    let grid = coax_line(150.0, None)?;
    let (x1, x2) = (30.0, 90.0);
    let config = bare(3000, SourceSpec::default(), 2.45e9, vec![line_probe(&grid, x1), line_probe(&grid, x2)]);
    let r = run(&grid, &config)?;
    let (a, b) = (&r.probes[0], &r.probes[1]);
    let xcorr = |lag: usize| -> f64 { a.iter().zip(&b[lag..]).map(|(p, q)| p * q).sum() };
    let corr: Vec<f64> = (0..600).map(xcorr).collect();
    let k = (1..corr.len() - 1)
        .max_by(|&i, &j| corr[i].total_cmp(&corr[j]))
        .unwrap_or(1);
    let (l, m, h) = (corr[k - 1], corr[k], corr[k + 1]);
    let lag = k as f64 + 0.5 * (l - h) / (l - 2.0 * m + h);
    Ok((x2 - x1) * 1e-3 / (lag * r.dt))
}

/// Magnitude of the reflection at 2.45 GHz off an εr = 4 half-space filling the line,
/// separated into forward and backward waves from two stations. Fresnel gives 1/3.
pub fn half_space_reflection() -> Result<f64> {
    let (x1, x2, interface) = (60.0, 90.0, 120.0);
    let grid = coax_line(240.0, Some(interface))?;
    // Run until the bounces between the feed and the interface have died out.
    let config = SimConfig {
        max_steps: 30_000,
        decay_stop_db: -80.0,
        ..bare(0, SourceSpec::default(), 2.45e9, vec![line_probe(&grid, x1), line_probe(&grid, x2)])
    };
    let r = run(&grid, &config)?;
    let f = 2.45e9;
    let (v1, v2) = (r.port_phasor(&r.probes[0], f), r.port_phasor(&r.probes[1], f));
    // Numerical wavenumber of the Yee scheme along an axis.
    let dx_m = COAX_DX * 1e-3;
    let s = libm::sin(PI * f * r.dt) / (C0 * r.dt);
    let beta = 2.0 / dx_m * libm::asin(s * dx_m);
    let e = |x: f64, sign: f64| Complex::from_polar(1.0, sign * beta * x * 1e-3);
    // V(x) = A e^{-jβx} + B e^{+jβx}
    let det = e(x1, -1.0) * e(x2, 1.0) - e(x1, 1.0) * e(x2, -1.0);
    let fwd = (v1 * e(x2, 1.0) - v2 * e(x1, 1.0)) / det;
    let back = (e(x1, -1.0) * v2 - e(x2, -1.0) * v1) / det;
    Ok(back.norm() / fwd.norm())
}

/// Lowest resonance of a 56 × 33 × 11 mm PEC box: `(measured, analytic)` in Hz.
pub fn cavity_resonance() -> Result<(f64, f64)> {
    let (a, b, h) = (56.0, 33.0, 11.0);
    let mut s = Scene::new();
    for x in [0.0, a] {
        s.add_sheet(Aabb::new([x, 0.0, 0.0], [x, b, h]));
    }
    for y in [0.0, b] {
        s.add_sheet(Aabb::new([0.0, y, 0.0], [a, y, h]));
    }
    for z in [0.0, h] {
        s.add_sheet(Aabb::new([0.0, 0.0, z], [a, b, z]));
    }
    s.set_port(PortSpec {
        position: [20.0, 12.0, 4.0],
        axis: Axis::Z,
        positive: true,
        impedance: 1000.0,
    });
    let grid = rasterize(&s, 1.0, 9, 8, 10_000_000)?;
    let probe = Probe {
        axis: Axis::Z,
        node: node(&grid, [36.0, 21.0, 0.0]),
        length: 11,
    };
    let source = SourceSpec {
        center: 5.27e9,
        ..SourceSpec::default()
    };
    let r = run(&grid, &bare(8000, source, 5.27e9, vec![probe]))?;
    let fs = frequency_grid(4.5e9, 6.0e9, 1501);
    let mag: Vec<f64> = fs.iter().map(|&f| r.port_phasor(&r.probes[0], f).norm()).collect();
    let k = (1..mag.len() - 1).max_by(|&i, &j| mag[i].total_cmp(&mag[j])).unwrap_or(0);
    let expected = C0 / 2.0 * libm::sqrt(libm::pow(1.0 / (a * 1e-3), 2.0) + libm::pow(1.0 / (b * 1e-3), 2.0));
    Ok((fs[k], expected))
}

fn point_source_grid(padding: usize) -> Result<VoxelGrid> {
    let mut s = Scene::new();
    s.set_port(port_at_origin(Axis::Z));
    rasterize(&s, 1.0, padding, 8, 20_000_000)
}

/// Far field at 2.45 GHz of a one-cell port in vacuum, a Hertzian dipole along z.
pub fn hertzian_dipole() -> Result<FarField> {
    let grid = point_source_grid(22)?;
    let config = SimConfig {
        volume: VolumeMode::Off,
        ..SimConfig::default()
    };
    ntff(&run(&grid, &config)?, 2.45e9)
}

/// Worst-case reflection off the CPML, dB relative to the incident peak: a probe two
/// cells in front of the layer compared with the same point in a domain so large that
/// no echo returns within the window.
pub fn cpml_reflection_db() -> Result<f64> {
    let source = SourceSpec {
        center: 10.0e9,
        bandwidth: 20.0e9,
        amplitude: 1.0,
    };
    let probe_at = |grid: &VoxelGrid, offset: f64| Probe {
        axis: Axis::Z,
        node: node(grid, [offset, 0.0, 0.0]),
        length: 1,
    };
    let small = point_source_grid(16)?;
    let offset = (small.dims[0] as f64 - 1.0) / 2.0 - 8.0 - 2.0;
    let steps = 300;
    let rs = run(&small, &bare(steps, source, 10.0e9, vec![probe_at(&small, offset)]))?;
    let large = point_source_grid(16 + 84)?;
    let rl = run(&large, &bare(steps, source, 10.0e9, vec![probe_at(&large, offset)]))?;
    let (ps, pl) = (&rs.probes[0], &rl.probes[0]);
    let peak = pl.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let err = ps.iter().zip(pl).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(20.0 * libm::log10(err / peak))
}

/// |S11| in dB over 2 to 3 GHz of a 50 Ω port closed by `resistance` on its own edge.
pub fn loaded_port_s11_db(resistance: f64) -> Result<Vec<f64>> {
    let mut s = Scene::new();
    s.set_port(port_at_origin(Axis::Z));
    s.add_load(LumpedLoad {
        position: [0.0; 3],
        axis: Axis::Z,
        resistance,
    });
    let grid = rasterize(&s, 1.0, 12, 8, 1_000_000)?;
    let config = SimConfig {
        volume: VolumeMode::Off,
        huygens: false,
        ..SimConfig::default()
    };
    let r = run(&grid, &config)?;
    Ok(s11_spectrum(&r, 50.0, &frequency_grid(2.0e9, 3.0e9, 101))?.s11_db())
}
