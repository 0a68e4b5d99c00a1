//! Property tests over the pure parts of the library.

use proptest::prelude::*;

use wearfdtd_core::analysis::{
    antenna_efficiency, radiation_efficiency, FarField, PortSpectrum, PowerBudget, ResonanceReport,
};
use wearfdtd_core::dielectrics::{effective_conductivity, evaluate_cole_cole, MaterialSpec, TissueDatabase};
use wearfdtd_core::dosimetry::{sar_10g, CubeAverage, Quantized, SarField};
use wearfdtd_core::scene::{rasterize, Aabb, Axis, PortSpec, Scene};
use wearfdtd_core::stats::{frequency_shift, mean_std, pearson_r, regression_slope};
use wearfdtd_core::study::{aggregate, ScenarioOutcome, FREE_SPACE};
use wearfdtd_core::Complex;

fn tissue_names() -> Vec<String> {
    TissueDatabase::builtin().iter().map(|(n, _)| n.to_string()).collect()
}

proptest! {
    #[test]
    fn tissue_dispersion_is_monotone(idx in 0usize..64, a in 8.0f64..10.0, b in 8.0f64..10.0) {
        let db = TissueDatabase::builtin();
        let names = tissue_names();
        let entry = db.get(&names[idx % names.len()]).unwrap();
        let (lo, hi) = (10f64.powf(a.min(b)), 10f64.powf(a.max(b)));
        let (e_lo, e_hi) = (evaluate_cole_cole(&entry.params, lo).unwrap(), evaluate_cole_cole(&entry.params, hi).unwrap());
        prop_assert!(e_lo.re >= e_hi.re);
        prop_assert!(e_hi.re >= 1.0 && e_lo.im <= 0.0 && e_hi.im <= 0.0);
        prop_assert!(effective_conductivity(e_lo, lo) <= effective_conductivity(e_hi, hi));
        let again = evaluate_cole_cole(&entry.params, hi).unwrap();
        prop_assert_eq!(again.re.to_bits(), e_hi.re.to_bits());
        prop_assert_eq!(again.im.to_bits(), e_hi.im.to_bits());
    }
}

fn random_box() -> impl Strategy<Value = Aabb> {
    (prop::array::uniform3(-10.0f64..10.0), prop::array::uniform3(0.1f64..8.0))
        .prop_map(|(min, size)| Aabb::new(min, [min[0] + size[0], min[1] + size[1], min[2] + size[2]]))
}

fn painted(boxes: &[Aabb]) -> Scene {
    let mut s = Scene::new();
    for (i, b) in boxes.iter().enumerate() {
        s.add_solid(*b, MaterialSpec::dielectric(&format!("d{}", i % 3), 2.0 + (i % 3) as f64, 0.01, 1000.0).unwrap());
    }
    s.set_port(PortSpec {
        position: [0.0; 3],
        axis: Axis::Z,
        positive: true,
        impedance: 50.0,
    });
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rasterization_is_a_function_of_the_scene(boxes in prop::collection::vec(random_box(), 1..5), dx in prop::sample::select(vec![0.5, 0.75, 1.0])) {
        let s = painted(&boxes);
        let a = rasterize(&s, dx, 8, 8, 10_000_000).unwrap();
        let b = rasterize(&s.clone(), dx, 8, 8, 10_000_000).unwrap();
        prop_assert_eq!(&a, &b);
        // A single box: its cell volume is within one surface layer of the true volume.
        let one = painted(&boxes[..1]);
        let g = rasterize(&one, dx, 8, 8, 10_000_000).unwrap();
        let v = g.count_material(1) as f64 * dx * dx * dx;
        let size = boxes[0].size();
        let shell = 2.0 * (size[0] * size[1] + size[1] * size[2] + size[0] * size[2]) * dx
            + 4.0 * (size[0] + size[1] + size[2]) * dx * dx + 8.0 * dx * dx * dx;
        prop_assert!((v - boxes[0].volume()).abs() <= shell, "{} vs {}", v, boxes[0].volume());
    }
}

/// Exhaustive cube growth straight from the definition, without prefix sums.
fn brute_cube(q: &Quantized, c: [usize; 3], target: u64) -> Option<CubeAverage> {
    let d = q.dims;
    let mut h = 0;
    loop {
        if (0..3).any(|a| c[a] < h || c[a] + h >= d[a]) {
            return None;
        }
        let (mut mass, mut power) = (0u64, 0u64);
        for i in c[0] - h..=c[0] + h {
            for j in c[1] - h..=c[1] + h {
                for k in c[2] - h..=c[2] + h {
                    let idx = (i * d[1] + j) * d[2] + k;
                    mass += q.mass[idx];
                    power += q.power[idx];
                }
            }
        }
        if mass >= target {
            return Some(CubeAverage {
                half_width: h,
                mass,
                power,
            });
        }
        h += 1;
    }
}

fn random_field() -> impl Strategy<Value = SarField> {
    (prop::array::uniform3(6usize..=20), any::<u64>()).prop_map(|(dims, seed)| {
        let n = dims[0] * dims[1] * dims[2];
        // Small LCG so the field is a pure function of the seed.
        let mut state = seed | 1;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut sar = vec![0.0; n];
        let mut density = vec![0.0; n];
        for i in 0..n {
            if next() < 0.7 {
                density[i] = [911.0, 1090.0, 1109.0, 1908.0][(next() * 4.0) as usize % 4];
                sar[i] = next() * next() * 2.0;
            }
        }
        SarField {
            dims,
            dx_mm: 5.0,
            frequency: 2.45e9,
            normalization: 0.1,
            sar,
            density,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn cube_average_matches_brute_force(field in random_field(), grams in prop::sample::select(vec![1.0, 2.5, 10.0])) {
        let avg = sar_10g(&field, grams).unwrap();
        let q = Quantized::new(&field);
        prop_assert_eq!(&avg.quantized, &q);
        let target = q.mass_units(grams * 1e-3);
        let (mut evaluated, mut unevaluated) = (0, 0);
        for idx in 0..field.sar.len() {
            if field.density[idx] == 0.0 {
                prop_assert!(avg.cubes[idx].is_none());
                continue;
            }
            let want = brute_cube(&q, field.cell_of(idx), target);
            prop_assert_eq!(avg.cubes[idx], want);
            match want {
                Some(c) => {
                    evaluated += 1;
                    // Mass within [target, target + outer shell].
                    let m = c.mass as f64 * q.mass_quantum;
                    prop_assert!(m >= grams * 1e-3 * (1.0 - 1e-12));
                    let inner = (2 * c.half_width).pow(3) as f64 * 1908.0 * field.cell_volume();
                    let outer = (2 * c.half_width + 1).pow(3) as f64 * 1908.0 * field.cell_volume();
                    prop_assert!(m <= grams * 1e-3 + (outer - inner));
                }
                None => unevaluated += 1,
            }
        }
        prop_assert_eq!(avg.evaluated, evaluated);
        prop_assert_eq!(avg.unevaluated, unevaluated);
        if let (Some((a, _)), Some((p, _))) = (avg.max(), field.max_point()) {
            prop_assert!(a <= p * (1.0 + 1e-12));
        }
    }
}

fn budget(p_in: f64, p_r: f64, p_d: f64, p_a: f64) -> PowerBudget {
    PowerBudget {
        frequency: 2.45e9,
        normalization: p_in,
        p_in,
        p_r,
        p_d,
        p_a,
        p_a_by_material: Vec::new(),
        scale: 1.0,
    }
}

proptest! {
    #[test]
    fn mismatch_never_raises_efficiency(
        p_r in 0.001f64..1.0, p_d in 0.0f64..0.5, p_a in 0.0f64..0.5,
        re in -0.99f64..0.99, im in -0.99f64..0.99,
    ) {
        let b = budget(p_r + p_d + p_a, p_r, p_d, p_a);
        let eta = radiation_efficiency(&b).unwrap();
        let s = Complex::new(re, im);
        let s = if s.norm() >= 1.0 { s / (s.norm() * 1.01) } else { s };
        let spectrum = |s11: Complex| PortSpectrum {
            frequencies: vec![2.0e9, 3.0e9],
            s11: vec![s11, s11],
            zin: vec![Complex::new(50.0, 0.0); 2],
            z0: 50.0,
            leakage_warning: false,
        };
        let eta_ant = antenna_efficiency(eta, &spectrum(s), 2.45e9).unwrap();
        prop_assert!(eta_ant <= eta);
        prop_assert_eq!(eta_ant == eta, s.norm_sqr() == 0.0);
        prop_assert_eq!(antenna_efficiency(eta, &spectrum(Complex::new(0.0, 0.0)), 2.45e9).unwrap(), eta);
    }

    #[test]
    fn fixed_loss_budgets_are_perfectly_anticorrelated(
        p_in in 0.01f64..1.0, d_frac in 0.0f64..0.2, etas in prop::collection::vec(0.3f64..0.8, 3..10),
    ) {
        prop_assume!(etas.iter().any(|&e| (e - etas[0]).abs() > 1e-3));
        let p_d = d_frac * p_in;
        let pa: Vec<f64> = etas.iter().map(|&e| p_in * (1.0 - e) - p_d).collect();
        let r = pearson_r(&etas, &pa).unwrap();
        prop_assert!((r + 1.0).abs() < 1e-12, "r = {}", r);
        let slope = regression_slope(&etas, &pa).unwrap();
        prop_assert!((slope / -p_in - 1.0).abs() < 1e-9, "slope {} vs {}", slope, -p_in);
    }

    #[test]
    fn moments_and_shifts_respect_translation_and_scale(
        samples in prop::collection::vec(2.2f64..2.6, 2..20), c in -0.5f64..0.5, k in 0.1f64..10.0,
        f_free in 2.0f64..3.0, f_body in 2.0f64..3.0,
    ) {
        let (m, s) = mean_std(&samples).unwrap();
        let shifted: Vec<f64> = samples.iter().map(|x| x + c).collect();
        let (m2, s2) = mean_std(&shifted).unwrap();
        prop_assert!((m2 - m - c).abs() < 1e-12);
        prop_assert!((s2 - s).abs() < 1e-9);
        prop_assert!(s >= 0.0);
        let a = frequency_shift(f_free, f_body).unwrap();
        let b = frequency_shift(k * f_free, k * f_body).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert_eq!(frequency_shift(f_free, f_free).unwrap(), 0.0);
    }
}

fn outcome(name: &str, f_res: f64, eta: f64, p_a: f64) -> ScenarioOutcome {
    let p_in = 0.1;
    let p_r = eta * p_in;
    let b = budget(p_in, p_r, p_in - p_r - p_a, p_a);
    ScenarioOutcome {
        name: name.to_string(),
        spectrum: PortSpectrum {
            frequencies: vec![f_res],
            s11: vec![Complex::new(0.1, 0.0)],
            zin: vec![Complex::new(61.1, 0.0)],
            z0: 50.0,
            leakage_warning: false,
        },
        resonance: ResonanceReport {
            f_res,
            min_db: -20.0,
            band: Some((0.94 * f_res, 1.06 * f_res)),
        },
        eta_rad: radiation_efficiency(&b).unwrap(),
        eta_ant: 0.99 * eta,
        budget: b,
        far_field: FarField {
            frequency: 2.45e9,
            theta: Vec::new(),
            phi: Vec::new(),
            directivity: vec![2.0],
            p_rad: 1.0,
            p_integrated: 1.0,
            cut_xy: Vec::new(),
            cut_xz: Vec::new(),
            d_front: 2.0,
            d_back: 0.5,
        },
        front_to_back_db: 6.0,
        sar: None,
        compliance: None,
        figure_of_merit: None,
        steps: 1000,
        leakage_warning: false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scenario_order_changes_nothing(
        rows in prop::collection::vec((2.2f64..2.45, 0.5f64..0.9, 0.0f64..0.05), 3..8),
        rotation in 0usize..8, reverse in any::<bool>(),
    ) {
        let mut outcomes: Vec<_> = rows
            .iter()
            .enumerate()
            .map(|(i, &(f, e, pa))| {
                let name = format!("site-{i}");
                (name.clone(), Ok(outcome(&name, f * 1e9, e, pa)))
            })
            .collect();
        outcomes.insert(0, (FREE_SPACE.to_string(), Ok(outcome(FREE_SPACE, 2.42e9, 0.97, 0.0))));
        let reference = aggregate(&outcomes);
        let n = outcomes.len();
        outcomes.rotate_left(rotation % n);
        if reverse {
            outcomes.reverse();
        }
        let permuted = aggregate(&outcomes);
        prop_assert_eq!(reference.pearson_r.map(f64::to_bits), permuted.pearson_r.map(f64::to_bits));
        prop_assert_eq!(reference.slope.map(f64::to_bits), permuted.slope.map(f64::to_bits));
        for row in &reference.rows {
            prop_assert_eq!(Some(row), permuted.row(&row.name));
        }
        prop_assert_eq!(permuted.row(FREE_SPACE).unwrap().shift_percent, Some(0.0));
    }
}
