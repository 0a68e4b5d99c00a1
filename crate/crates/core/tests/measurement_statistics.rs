//! Measurement statistics on a six-location summary of measured and modelled resonances.

use std::collections::BTreeMap;

use wearfdtd_core::stats::{frequency_shift, mean_std, model_measurement_probability, pearson_r};
use wearfdtd_core::study::stats_rows;
use wearfdtd_core::Error;

/// Location, measured mean and std (GHz), modelled resonance (GHz), reported density (1/GHz).
const ROWS: [(&str, f64, f64, f64, f64); 6] = [
    ("wrist", 2.386, 2.46e-2, 2.282, 2.11e-3),
    ("above-elbow", 2.413, 2.45e-2, 2.262, 9.43e-8),
    ("upper-arm", 2.411, 3.38e-2, 2.307, 1.04e-1),
    ("torso-1", 2.438, 6.67e-3, 2.320, 1.01e-66),
    ("torso-2", 2.384, 2.60e-2, 2.302, 1.02e-1),
    ("thigh", 2.425, 1.85e-2, 2.280, 1.04e-12),
];

#[test]
fn densities_reproduce_the_reported_column() {
    for (name, mean, std, modeled, reported) in ROWS {
        let p = model_measurement_probability(mean, std, modeled).unwrap();
        // Torso 1 sits about 18 standard deviations out, where the three-digit rounding of
        // the std alone moves the density by tens of percent.
        let ok = if name == "torso-1" {
            (p / reported).ln().abs() < 2f64.ln()
        } else {
            (p / reported - 1.0).abs() < 0.10
        };
        assert!(ok, "{name}: {p:e} vs {reported:e}");
    }
}

#[test]
fn modelled_shifts_against_free_space() {
    let expected = [
        ("above-elbow", 6.61),
        ("thigh", 5.86),
        ("upper-arm", 4.75),
        ("torso-1", 4.21),
        ("torso-2", 4.95),
    ];
    for (name, want) in expected {
        let modeled = ROWS.iter().find(|r| r.0 == name).unwrap().3;
        let got = frequency_shift(2.422, modeled).unwrap();
        assert!((got - want).abs() < 0.005, "{name}: {got:.3}");
    }
}

#[test]
fn small_examples() {
    let r = pearson_r(&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 4.0, 3.0]).unwrap();
    assert!((r - 0.6).abs() < 1e-12);
    let (m, s) = mean_std(&[2.40, 2.42]).unwrap();
    assert!((m - 2.41).abs() < 1e-12 && (s - 0.01414).abs() < 1e-5);
    assert!(matches!(mean_std(&[2.4]), Err(Error::InsufficientSamples { .. })));
}

/// Two samples with the given mean and (n − 1) standard deviation.
fn pair(mean: f64, std: f64) -> [f64; 2] {
    let h = std / 2f64.sqrt();
    [mean - h, mean + h]
}

#[test]
fn grouped_rows_follow_the_samples() {
    let mut samples = Vec::new();
    let mut modeled = BTreeMap::new();
    for (name, mean, std, f, _) in ROWS {
        for x in pair(mean, std) {
            samples.push((name.to_string(), x));
        }
        modeled.insert(name.to_string(), f);
    }
    let rows = stats_rows(&samples, &modeled).unwrap();
    assert_eq!(rows.len(), ROWS.len());
    for (row, (name, mean, std, f, _)) in rows.iter().zip(ROWS) {
        assert_eq!(row.location, name);
        assert_eq!(row.samples, 2);
        assert!((row.mean - mean).abs() < 1e-12);
        assert!((row.std / std - 1.0).abs() < 1e-9);
        let p = model_measurement_probability(mean, std, f).unwrap();
        assert!((row.probability / p - 1.0).abs() < 1e-6);
    }
    // Feeding the same file twice doubles the counts and leaves the means alone.
    let doubled: Vec<_> = samples.iter().chain(&samples).cloned().collect();
    let again = stats_rows(&doubled, &modeled).unwrap();
    for (a, b) in rows.iter().zip(&again) {
        assert_eq!(b.samples, 2 * a.samples);
        assert!((a.mean - b.mean).abs() < 1e-12);
        assert!(b.std < a.std);
    }
    let identical = vec![("wrist".to_string(), 2.4), ("wrist".to_string(), 2.4)];
    assert!(matches!(stats_rows(&identical, &modeled), Err(Error::DegenerateVariance(_))));
}
