use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::power::huygens_power;
use crate::consts::{C0, ETA0, PI};
use crate::solver::{RunRecord, SurfaceSpectra};
use crate::{Complex, Error, Result};

/// Far-field directivity on a `θ × φ` grid plus the two principal cuts.
///
/// `θ` is measured from `+z`, `φ` from `+x` towards `+y`; boresight `+x` is `θ = φ = 90°, 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarField {
    pub frequency: f64,
    /// Cell-centre polar angles, rad.
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// `directivity[i·phi.len() + j]` at `(theta[i], phi[j])`.
    pub directivity: Vec<f64>,
    /// Radiated power from the Huygens flux (raw units).
    pub p_rad: f64,
    /// `∮ U dΩ` over the grid (raw units).
    pub p_integrated: f64,
    /// x-y plane (`θ = 90°`): `(φ in degrees, D)`.
    pub cut_xy: Vec<(f64, f64)>,
    /// x-z plane: `(angle in degrees from +x towards +z, D)`.
    pub cut_xz: Vec<(f64, f64)>,
    /// Directivity at `+x` and `−x`.
    pub d_front: f64,
    pub d_back: f64,
}

impl FarField {
    pub fn peak_directivity(&self) -> f64 {
        self.directivity
            .iter()
            .chain(self.cut_xy.iter().map(|c| &c.1))
            .chain(self.cut_xz.iter().map(|c| &c.1))
            .fold(0.0f64, |m, &d| m.max(d))
    }
}

/// Equivalent surface currents, positioned relative to the box centre.
struct Currents {
    /// Half-cell lattice coordinates of each sample.
    lattice: Vec<[u32; 3]>,
    j: Vec<[Complex; 3]>,
    m: Vec<[Complex; 3]>,
    centre_half: [f64; 3],
    half_m: f64,
}

fn currents(s: &SurfaceSpectra, fi: usize) -> Currents {
    let mut out = Currents {
        lattice: Vec::new(),
        j: Vec::new(),
        m: Vec::new(),
        centre_half: [0.0; 3],
        half_m: 0.5 * s.dx_m,
    };
    for a in 0..3 {
        out.centre_half[a] = (s.lo[a] + s.hi[a]) as f64;
    }
    s.for_each_sample(fi, |p| {
        let n = [
            Complex::new(p.normal[0], 0.0),
            Complex::new(p.normal[1], 0.0),
            Complex::new(p.normal[2], 0.0),
        ];
        let w = p.weight;
        let jv = super::power::cross(n, p.h);
        let mv = super::power::cross(p.e, n);
        let mut l = [0u32; 3];
        for a in 0..3 {
            l[a] = libm::round((p.position[a] - s.origin_m[a]) / out.half_m) as u32;
        }
        out.lattice.push(l);
        out.j.push([jv[0] * w, jv[1] * w, jv[2] * w]);
        out.m.push([mv[0] * w, mv[1] * w, mv[2] * w]);
    });
    out
}

impl Currents {
    /// Radiation intensity per unit solid angle along `(θ, φ)` (raw units).
    fn intensity(&self, k: f64, theta: f64, phi: f64, tables: &mut [Vec<Complex>; 3]) -> f64 {
        let (st, ct) = (libm::sin(theta), libm::cos(theta));
        let (sp, cp) = (libm::sin(phi), libm::cos(phi));
        let r = [st * cp, st * sp, ct];
        for a in 0..3 {
            let n = tables[a].len();
            for h in 0..n {
                let x = (h as f64 - self.centre_half[a]) * self.half_m;
                let ph = k * r[a] * x;
                tables[a][h] = Complex::new(libm::cos(ph), libm::sin(ph));
            }
        }
        let mut nv = [Complex::new(0.0, 0.0); 3];
        let mut lv = [Complex::new(0.0, 0.0); 3];
        for ((l, j), m) in self.lattice.iter().zip(&self.j).zip(&self.m) {
            let e = tables[0][l[0] as usize] * tables[1][l[1] as usize] * tables[2][l[2] as usize];
            for a in 0..3 {
                nv[a] += j[a] * e;
                lv[a] += m[a] * e;
            }
        }
        let th = [ct * cp, ct * sp, -st];
        let ph = [-sp, cp, 0.0];
        let dot = |v: &[Complex; 3], u: &[f64; 3]| v[0] * u[0] + v[1] * u[1] + v[2] * u[2];
        let (n_t, n_p) = (dot(&nv, &th), dot(&nv, &ph));
        let (l_t, l_p) = (dot(&lv, &th), dot(&lv, &ph));
        let a = l_p + n_t * ETA0;
        let b = l_t - n_p * ETA0;
        k * k / (32.0 * PI * PI * ETA0) * (a.norm_sqr() + b.norm_sqr())
    }
}

/// Near-to-far-field transform at `f` with the default 5° pattern grid and 2° cuts.
pub fn ntff(record: &RunRecord, f: f64) -> Result<FarField> {
    ntff_with(record, f, 36, 72, 180)
}

/// Near-to-far-field transform on an `n_theta × n_phi` grid and cuts of `n_cut` points.
pub fn ntff_with(record: &RunRecord, f: f64, n_theta: usize, n_phi: usize, n_cut: usize) -> Result<FarField> {
    let s = record
        .surface
        .as_ref()
        .ok_or_else(|| Error::Missing("Huygens surface recorder was off".to_string()))?;
    let fi = record
        .frequency_index(f)
        .ok_or_else(|| Error::Missing(format!("no DFT recorded at {f} Hz")))?;
    if n_theta == 0 || n_phi == 0 || n_cut == 0 {
        return Err(Error::InvalidArgument("empty angular grid".to_string()));
    }
    let p_rad = huygens_power(record, fi)?;
    if !(p_rad > 0.0) {
        return Err(Error::DegenerateBudget);
    }
    let cur = currents(s, fi);
    let k = 2.0 * PI * f / C0;
    let mut tables = [
        vec![Complex::new(0.0, 0.0); 2 * (s.hi[0] + 1)],
        vec![Complex::new(0.0, 0.0); 2 * (s.hi[1] + 1)],
        vec![Complex::new(0.0, 0.0); 2 * (s.hi[2] + 1)],
    ];
    let theta: Vec<f64> = (0..n_theta).map(|i| (i as f64 + 0.5) * PI / n_theta as f64).collect();
    let phi: Vec<f64> = (0..n_phi).map(|j| j as f64 * 2.0 * PI / n_phi as f64).collect();
    let (dth, dph) = (PI / n_theta as f64, 2.0 * PI / n_phi as f64);
    let mut directivity = Vec::with_capacity(n_theta * n_phi);
    let mut p_integrated = 0.0;
    for &t in &theta {
        for &p in &phi {
            let u = cur.intensity(k, t, p, &mut tables);
            p_integrated += u * libm::sin(t) * dth * dph;
            directivity.push(4.0 * PI * u / p_rad);
        }
    }
    let d = |t: f64, p: f64, tables: &mut [Vec<Complex>; 3]| 4.0 * PI * cur.intensity(k, t, p, tables) / p_rad;
    let mut cut_xy = Vec::with_capacity(n_cut);
    let mut cut_xz = Vec::with_capacity(n_cut);
    for i in 0..n_cut {
        let ang = i as f64 * 2.0 * PI / n_cut as f64;
        cut_xy.push((ang * 180.0 / PI, d(0.5 * PI, ang, &mut tables)));
        // Angle from +x towards +z in the x-z plane.
        let (t, p) = if ang <= 0.5 * PI {
            (0.5 * PI - ang, 0.0)
        } else if ang <= 1.5 * PI {
            (ang - 0.5 * PI, PI)
        } else {
            (2.5 * PI - ang, 0.0)
        };
        cut_xz.push((ang * 180.0 / PI, d(t, p, &mut tables)));
    }
    let d_front = d(0.5 * PI, 0.0, &mut tables);
    let d_back = d(0.5 * PI, PI, &mut tables);
    Ok(FarField {
        frequency: f,
        theta,
        phi,
        directivity,
        p_rad,
        p_integrated,
        cut_xy,
        cut_xz,
        d_front,
        d_back,
    })
}

/// `10·log10(U(+x)/U(−x))`.
pub fn front_to_back(far: &FarField) -> f64 {
    10.0 * libm::log10(far.d_front / far.d_back)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_fronts(front: f64, back: f64) -> FarField {
        FarField {
            frequency: 1.0,
            theta: Vec::new(),
            phi: Vec::new(),
            directivity: Vec::new(),
            p_rad: 1.0,
            p_integrated: 1.0,
            cut_xy: Vec::new(),
            cut_xz: Vec::new(),
            d_front: front,
            d_back: back,
        }
    }

    #[test]
    fn front_to_back_definition() {
        assert_eq!(front_to_back(&with_fronts(1.0, 1.0)), 0.0);
        assert!((front_to_back(&with_fronts(100.0, 1.0)) - 20.0).abs() < 1e-12);
    }
}
