//! Statistics for placement studies: frequency shift, correlation, sample moments and the
//! agreement density between a modelled and a measured resonance.

use alloc::string::ToString;

use crate::consts::PI;
use crate::{Error, Result};

/// Downward shift of `f_body` relative to `f_free`, percent.
pub fn frequency_shift(f_free: f64, f_body: f64) -> Result<f64> {
    if !(f_free > 0.0) {
        return Err(Error::InvalidArgument("free-space frequency must be positive".to_string()));
    }
    Ok(100.0 * (f_free - f_body) / f_free)
}

/// Sample Pearson correlation coefficient.
pub fn pearson_r(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument("samples differ in length".to_string()));
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateVariance("a sample set is constant".to_string()));
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Least-squares slope of `ys` on `xs`.
pub fn regression_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: xs.len().min(ys.len()),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateVariance("regressor is constant".to_string()));
    }
    Ok(sxy / sxx)
}

/// Sample mean and standard deviation (`n − 1` denominator).
pub fn mean_std(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let ss: f64 = samples.iter().map(|s| (s - mean) * (s - mean)).sum();
    Ok((mean, libm::sqrt(ss / (n - 1.0))))
}

/// Normal density of the measurement distribution `N(mean, std²)` at `modeled`.
///
/// Units are the inverse of the inputs' (1/GHz for GHz inputs).
pub fn model_measurement_probability(mean: f64, std: f64, modeled: f64) -> Result<f64> {
    if !(std > 0.0) {
        return Err(Error::InvalidArgument("standard deviation must be positive".to_string()));
    }
    let z = (modeled - mean) / std;
    Ok(libm::exp(-0.5 * z * z) / (std * libm::sqrt(2.0 * PI)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_examples() {
        assert!((frequency_shift(2.422, 2.262).unwrap() - 6.61).abs() < 0.005);
        assert!((frequency_shift(2.422, 2.320).unwrap() - 4.21).abs() < 0.005);
        assert_eq!(frequency_shift(2.4, 2.4).unwrap(), 0.0);
        assert!(frequency_shift(0.0, 1.0).is_err());
    }

    #[test]
    fn pearson_examples() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson_r(&xs, &[2.0, 1.0, 4.0, 3.0]).unwrap() - 0.6).abs() < 1e-12);
        let up: [f64; 4] = core::array::from_fn(|i| 3.0 * xs[i] + 1.0);
        let down: [f64; 4] = core::array::from_fn(|i| -0.5 * xs[i] + 7.0);
        assert!((pearson_r(&xs, &up).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson_r(&xs, &down).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(pearson_r(&xs, &[1.0; 4]), Err(Error::DegenerateVariance(_))));
        assert!(pearson_r(&xs[..2], &up[..2]).is_err());
    }

    #[test]
    fn mean_std_examples() {
        assert_eq!(mean_std(&[2.4, 2.4, 2.4]).unwrap().1, 0.0);
        let (m, s) = mean_std(&[2.40, 2.42]).unwrap();
        assert!((m - 2.41).abs() < 1e-12);
        assert!((s - 0.01414).abs() < 1e-5);
        assert!(mean_std(&[1.0]).is_err());
    }

    #[test]
    fn density_peak() {
        let s = 0.02;
        let p = model_measurement_probability(2.4, s, 2.4).unwrap();
        assert!((p - 1.0 / (s * libm::sqrt(2.0 * PI))).abs() < 1e-9);
        assert!(model_measurement_probability(2.4, 0.0, 2.4).is_err());
    }

    #[test]
    fn slope_of_line() {
        let xs = [0.6, 0.7, 0.8];
        let ys: [f64; 3] = core::array::from_fn(|i| 0.1 * (1.0 - xs[i]) - 0.002);
        assert!((regression_slope(&xs, &ys).unwrap() + 0.1).abs() < 1e-12);
    }
}
