//! Solver checks against closed-form electromagnetics.

use wearfdtd_core::consts::C0;
use wearfdtd_core::validation;

#[test]
fn tem_pulse_travels_at_c() {
    let speed = validation::pulse_speed().unwrap();
    assert!((speed / C0 - 1.0).abs() < 0.01, "speed {speed} m/s");
}

#[test]
fn half_space_reflection_matches_fresnel() {
    let gamma = validation::half_space_reflection().unwrap();
    assert!((gamma * 3.0 - 1.0).abs() < 0.02, "|reflection| = {gamma}");
}

#[test]
fn pec_cavity_resonates_at_the_tm110_frequency() {
    let (peak, expected) = validation::cavity_resonance().unwrap();
    assert!((expected - 5.273e9).abs() < 1e6);
    assert!((peak / expected - 1.0).abs() < 0.01, "peak at {peak} Hz");
}

#[test]
fn short_dipole_has_the_hertzian_pattern() {
    let far = validation::hertzian_dipole().unwrap();
    let d = far.peak_directivity();
    assert!((d / 1.5 - 1.0).abs() < 0.05, "peak directivity {d}");
    let np = far.phi.len();
    for (i, &th) in far.theta.iter().enumerate() {
        for j in 0..np {
            let want = 1.5 * th.sin().powi(2);
            let got = far.directivity[i * np + j];
            assert!((got - want).abs() < 0.075, "D({th}, {}) = {got}, want {want}", far.phi[j]);
        }
    }
}

#[test]
fn cpml_reflection_is_below_sixty_db() {
    let db = validation::cpml_reflection_db().unwrap();
    assert!(db < -60.0, "reflection {db:.1} dB");
}

#[test]
fn matched_load_does_not_reflect() {
    let worst = validation::loaded_port_s11_db(50.0).unwrap().into_iter().fold(f64::MIN, f64::max);
    assert!(worst < -30.0, "|S11| reaches {worst:.1} dB");
}

#[test]
fn short_circuit_reflects_fully() {
    for db in validation::loaded_port_s11_db(1e-3).unwrap() {
        assert!(db.abs() < 0.5, "|S11| = {db:.2} dB");
    }
}
