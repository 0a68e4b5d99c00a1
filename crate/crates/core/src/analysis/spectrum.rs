use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::solver::{dft_half_step, RunRecord, Termination};
use crate::{Complex, Error, Result};

/// Reflection coefficient and input impedance over a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PortSpectrum {
    pub frequencies: Vec<f64>,
    pub s11: Vec<Complex>,
    pub zin: Vec<Complex>,
    pub z0: f64,
    /// The run stopped before its energy decayed; expect leakage ripple.
    pub leakage_warning: bool,
}

impl PortSpectrum {
    pub fn s11_db(&self) -> Vec<f64> {
        self.s11.iter().map(|s| 20.0 * libm::log10(s.norm())).collect()
    }

    /// Linearly interpolated S11 at `f`.
    pub fn s11_at(&self, f: f64) -> Result<Complex> {
        let fs = &self.frequencies;
        if fs.is_empty() || f < fs[0] || f > fs[fs.len() - 1] {
            return Err(Error::InvalidArgument(format!("{f} Hz lies outside the spectrum grid")));
        }
        let i = fs.partition_point(|&g| g < f);
        if i < fs.len() && fs[i] == f {
            return Ok(self.s11[i]);
        }
        let t = (f - fs[i - 1]) / (fs[i] - fs[i - 1]);
        Ok(self.s11[i - 1] * (1.0 - t) + self.s11[i] * t)
    }
}

/// `n` evenly spaced frequencies from `lo` to `hi` inclusive.
pub fn frequency_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// S11 from the incident and reflected waves `a = (V + Z₀I)/2√Z₀`, `b = (V − Z₀I)/2√Z₀`.
pub fn s11_spectrum(record: &RunRecord, z0: f64, frequencies: &[f64]) -> Result<PortSpectrum> {
    if !(z0 > 0.0) {
        return Err(Error::InvalidArgument("reference impedance must be positive".to_string()));
    }
    if record.voltage.is_empty() || record.voltage.len() != record.current.len() {
        return Err(Error::Missing("port time series".to_string()));
    }
    let root = libm::sqrt(z0);
    let a: Vec<f64> = record
        .voltage
        .iter()
        .zip(&record.current)
        .map(|(v, i)| (v + z0 * i) / (2.0 * root))
        .collect();
    let b: Vec<f64> = record
        .voltage
        .iter()
        .zip(&record.current)
        .map(|(v, i)| (v - z0 * i) / (2.0 * root))
        .collect();
    let mut s11 = Vec::with_capacity(frequencies.len());
    let mut zin = Vec::with_capacity(frequencies.len());
    for &f in frequencies {
        let s = dft_half_step(&b, f, record.dt) / dft_half_step(&a, f, record.dt);
        s11.push(s);
        zin.push((Complex::new(1.0, 0.0) + s) / (Complex::new(1.0, 0.0) - s) * z0);
    }
    Ok(PortSpectrum {
        frequencies: frequencies.to_vec(),
        s11,
        zin,
        z0,
        leakage_warning: record.termination == Termination::MaxSteps,
    })
}

/// Minimum of |S11| and the surrounding −10 dB band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceReport {
    pub f_res: f64,
    pub min_db: f64,
    /// `(band_lo, band_hi)`; `None` when |S11| never reaches −10 dB.
    pub band: Option<(f64, f64)>,
}

impl ResonanceReport {
    /// `(hi − lo)/((hi + lo)/2)`.
    pub fn fractional_bw(&self) -> Option<f64> {
        self.band.map(|(lo, hi)| (hi - lo) / (0.5 * (hi + lo)))
    }
}

/// Resonance as `argmin |S11|` and the contiguous `|S11| ≤ −10 dB` band around it.
///
/// Band edges are interpolated linearly in dB between grid points; a band touching the
/// end of the grid is clipped there.
pub fn resonance_and_bandwidth(spectrum: &PortSpectrum) -> Result<ResonanceReport> {
    let db = spectrum.s11_db();
    let fs = &spectrum.frequencies;
    if fs.is_empty() {
        return Err(Error::InvalidArgument("empty spectrum".to_string()));
    }
    let (imin, &min_db) = db
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let band = band_around(fs, &db, imin, -10.0);
    Ok(ResonanceReport {
        f_res: fs[imin],
        min_db,
        band,
    })
}

fn band_around(fs: &[f64], db: &[f64], i: usize, level: f64) -> Option<(f64, f64)> {
    if db[i] > level {
        return None;
    }
    let cross = |a: usize, b: usize| {
        let t = (level - db[a]) / (db[b] - db[a]);
        fs[a] + t * (fs[b] - fs[a])
    };
    let mut lo = i;
    while lo > 0 && db[lo - 1] <= level {
        lo -= 1;
    }
    let mut hi = i;
    while hi + 1 < db.len() && db[hi + 1] <= level {
        hi += 1;
    }
    let f_lo = if lo == 0 { fs[0] } else { cross(lo, lo - 1) };
    let f_hi = if hi + 1 == db.len() { fs[hi] } else { cross(hi, hi + 1) };
    Some((f_lo, f_hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(fs: &[f64], s: impl Fn(f64) -> Complex) -> PortSpectrum {
        let s11: Vec<Complex> = fs.iter().map(|&f| s(f)).collect();
        PortSpectrum {
            frequencies: fs.to_vec(),
            zin: s11.iter().map(|s| (1.0 + s) / (1.0 - s) * 50.0).collect(),
            s11,
            z0: 50.0,
            leakage_warning: false,
        }
    }

    #[test]
    fn paper_band_fraction() {
        let r = ResonanceReport {
            f_res: 2.42e9,
            min_db: -20.0,
            band: Some((2.27e9, 2.57e9)),
        };
        assert!((r.fractional_bw().unwrap() - 0.124).abs() < 0.0005);
    }

    #[test]
    fn shallow_dip_has_no_band() {
        let fs = frequency_grid(2e9, 3e9, 101);
        let sp = synthetic(&fs, |f| {
            let x = (f - 2.5e9) / 1e8;
            Complex::new(1.0 - (1.0 - 0.398) / (1.0 + x * x), 0.0)
        });
        let r = resonance_and_bandwidth(&sp).unwrap();
        assert!(r.band.is_none());
        assert!((r.min_db + 8.0).abs() < 0.01);
        assert_eq!(r.f_res, 2.5e9);
    }

    #[test]
    fn lorentzian_band_edges() {
        // |S11|² = 1 − A/(1 + x²), x = (f − f0)/γ. The −10 dB crossing solves
        // 1 − A/(1 + x²) = 0.1, i.e. x = ±√(A/0.9 − 1).
        let (f0, gamma, amp) = (2.45e9, 0.1e9, 0.99);
        let fs = frequency_grid(1.5e9, 3.5e9, 2001);
        let sp = synthetic(&fs, |f| {
            let x = (f - f0) / gamma;
            Complex::new(libm::sqrt(1.0 - amp / (1.0 + x * x)), 0.0)
        });
        let r = resonance_and_bandwidth(&sp).unwrap();
        let xc = libm::sqrt(amp / 0.9 - 1.0);
        let (lo, hi) = r.band.unwrap();
        let bin = fs[1] - fs[0];
        assert!((lo - (f0 - xc * gamma)).abs() < bin);
        assert!((hi - (f0 + xc * gamma)).abs() < bin);
        assert!((r.f_res - f0).abs() < bin);
        assert!(lo <= r.f_res && r.f_res <= hi);
    }

    #[test]
    fn interpolation_and_range() {
        let fs = [1.0, 2.0, 3.0];
        let sp = synthetic(&fs, |f| Complex::new(f / 10.0, 0.0));
        assert!((sp.s11_at(2.5).unwrap().re - 0.25).abs() < 1e-12);
        assert_eq!(sp.s11_at(3.0).unwrap().re, 0.3);
        assert!(sp.s11_at(3.5).is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = frequency_grid(1.5e9, 3.5e9, 201);
        assert_eq!(g.len(), 201);
        assert_eq!(g[0], 1.5e9);
        assert_eq!(g[200], 3.5e9);
    }
}
