//! Power budget, SAR and scaling checks on a small lossy scene.

use std::sync::OnceLock;

use wearfdtd_core::analysis::{
    frequency_grid, ntff, port_power, power_budget, radiation_efficiency, s11_spectrum, front_to_back,
};
use wearfdtd_core::dielectrics::{MaterialSpec, TissueDatabase};
use wearfdtd_core::dosimetry::{point_sar, sar_report};
use wearfdtd_core::scene::{rasterize, Aabb, Axis, PortSpec, Scene, VoxelGrid};
use wearfdtd_core::solver::{run, RunRecord, SimConfig, Simulation, SourceSpec};

const F: f64 = 2.45e9;

/// A short dipole between a muscle block and a lossy plastic block.
fn grid() -> &'static VoxelGrid {
    static GRID: OnceLock<VoxelGrid> = OnceLock::new();
    GRID.get_or_init(|| {
        let db = TissueDatabase::builtin();
        let mut s = Scene::new();
        s.add_solid(Aabb::new([-20.0, -15.0, -15.0], [-4.0, 15.0, 15.0]), db.material("muscle").unwrap());
        s.add_solid(
            Aabb::new([3.0, -4.0, -6.0], [6.0, 4.0, 6.0]),
            MaterialSpec::dielectric("plastic", 4.0, 0.05, 1250.0).unwrap(),
        );
        s.add_wire([0.0, 0.0, -9.0], [0.0, 0.0, 0.0]);
        s.add_wire([0.0, 0.0, 1.0], [0.0, 0.0, 10.0]);
        s.set_port(PortSpec {
            position: [0.0, 0.0, 0.0],
            axis: Axis::Z,
            positive: true,
            impedance: 50.0,
        });
        rasterize(&s, 1.0, 14, 8, 5_000_000).unwrap()
    })
}

fn config(amplitude: f64) -> SimConfig {
    SimConfig {
        source: SourceSpec {
            amplitude,
            ..SourceSpec::default()
        },
        ..SimConfig::default()
    }
}

fn record(k: usize) -> &'static RunRecord {
    static RUNS: [OnceLock<RunRecord>; 2] = [OnceLock::new(), OnceLock::new()];
    RUNS[k - 1].get_or_init(|| run(grid(), &config(k as f64)).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn budget_closes_and_splits_sensibly() {
    let b = power_budget(record(1), grid(), F, 0.1).unwrap();
    assert!(b.p_r > 0.0 && b.p_d > 0.0 && b.p_a > 0.0);
    assert!(b.closure_error() <= 0.02, "closure {}", b.closure_error());
    assert_eq!(b.p_a_by_material.len(), 1);
    assert_eq!(b.p_a_by_material[0].0, "muscle");
}

#[test]
fn summed_sar_equals_absorbed_power() {
    let b = power_budget(record(1), grid(), F, 0.1).unwrap();
    let field = point_sar(record(1), grid(), F, 0.1).unwrap();
    assert!(rel(field.absorbed_power(), b.p_a) <= 1e-6, "{} vs {}", field.absorbed_power(), b.p_a);
    for (i, (&s, &rho)) in field.sar.iter().zip(&field.density).enumerate() {
        assert!(s >= 0.0);
        let tissue = grid().materials[grid().cells[i] as usize].is_tissue();
        assert_eq!(rho > 0.0, tissue);
        if !tissue {
            assert_eq!(s, 0.0);
        }
    }
    let report = sar_report(&field, 10.0).unwrap();
    assert!(report.max_averaged <= report.max_point);
}

#[test]
fn port_reflection_is_passive() {
    let sp = s11_spectrum(record(1), 50.0, &frequency_grid(1.5e9, 3.5e9, 201)).unwrap();
    for s in &sp.s11 {
        assert!(s.norm() <= 1.0 + 1e-3, "|S11| = {}", s.norm());
    }
}

#[test]
fn pattern_integral_matches_huygens_power() {
    let far = ntff(record(1), F).unwrap();
    assert!(rel(far.p_integrated, far.p_rad) <= 0.02, "{} vs {}", far.p_integrated, far.p_rad);
    assert!(far.peak_directivity() >= 1.0);
}

#[test]
fn doubling_the_source_quadruples_power_only() {
    let (r1, r2) = (record(1), record(2));
    assert_eq!(r1.steps, r2.steps);
    let d = rel(port_power(r2, F), 4.0 * port_power(r1, F));
    assert!(d <= 1e-9, "port power ratio off by {d}");
    let (b1, b2) = (power_budget(r1, grid(), F, 0.1).unwrap(), power_budget(r2, grid(), F, 0.1).unwrap());
    for (a, b) in [(b1.p_r, b2.p_r), (b1.p_d, b2.p_d), (b1.p_a, b2.p_a)] {
        assert!(rel(b, a) <= 1e-9);
    }
    let (e1, e2) = (radiation_efficiency(&b1).unwrap(), radiation_efficiency(&b2).unwrap());
    assert!(rel(e2, e1) <= 1e-9);
    let fs = frequency_grid(2.0e9, 3.0e9, 11);
    let (s1, s2) = (s11_spectrum(r1, 50.0, &fs).unwrap(), s11_spectrum(r2, 50.0, &fs).unwrap());
    for (a, b) in s1.s11.iter().zip(&s2.s11) {
        assert!((a - b).norm() <= 1e-9 * a.norm());
    }
    let (f1, f2) = (ntff(r1, F).unwrap(), ntff(r2, F).unwrap());
    assert!(rel(f2.peak_directivity(), f1.peak_directivity()) <= 1e-9);
    assert!((front_to_back(&f2) - front_to_back(&f1)).abs() <= 1e-9);
}

#[test]
fn energy_never_grows_after_the_pulse() {
    let cfg = config(1.0);
    let off = (2.0 * cfg.source.delay() / wearfdtd_core::solver::cfl_timestep(1.0, cfg.courant_factor).unwrap())
        .ceil() as usize;
    let mut sim = Simulation::new(grid(), cfg).unwrap();
    let mut last = f64::INFINITY;
    for n in 0..off + 3000 {
        sim.step().unwrap();
        if n >= off && n % 100 == 0 {
            let e = sim.energy();
            // 0.1% per 1000 steps, pro rata.
            assert!(e <= last * (1.0 + 1e-4), "energy rose at step {n}: {last} -> {e}");
            last = e;
        }
    }
}
