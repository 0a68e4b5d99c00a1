//! Running DFT recorders: field volumes on selected edges and the Huygens box.

use alloc::vec;
use alloc::vec::Vec;

use super::yee::Fields;
use crate::Complex;

/// Peak-amplitude E phasors on a set of edges.
///
/// Phasors are spectral densities (V·s/m): the running sum `Σ E(tₙ) e^{−jωtₙ} Δt`.
/// Every quantity in a [`RunRecord`](super::RunRecord) uses the same convention, so
/// ratios and normalized powers are independent of it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VolumeSpectra {
    pub frequencies: Vec<f64>,
    /// Node index of every recorded edge, per component, ascending.
    pub edges: [Vec<u32>; 3],
    /// `values[f][axis][n]` is the phasor on `edges[axis][n]`.
    pub values: Vec<[Vec<Complex>; 3]>,
}

impl VolumeSpectra {
    /// Phasor of the edge along `axis` starting at node index `node`, if recorded.
    pub fn get(&self, f: usize, axis: usize, node: usize) -> Option<Complex> {
        let pos = self.edges[axis].binary_search(&(node as u32)).ok()?;
        Some(self.values[f][axis][pos])
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }
}

pub(crate) struct VolumeRecorder {
    edges: [Vec<u32>; 3],
    values: Vec<[Vec<Complex>; 3]>,
}

impl VolumeRecorder {
    pub fn new(edges: [Vec<u32>; 3], nf: usize) -> Self {
        let values = (0..nf)
            .map(|_| {
                [
                    vec![Complex::new(0.0, 0.0); edges[0].len()],
                    vec![Complex::new(0.0, 0.0); edges[1].len()],
                    vec![Complex::new(0.0, 0.0); edges[2].len()],
                ]
            })
            .collect();
        Self { edges, values }
    }

    /// Add `E` weighted by one phasor per frequency.
    pub fn accumulate(&mut self, f: &Fields, phasors: &[Complex]) {
        for (vals, &w) in self.values.iter_mut().zip(phasors) {
            for a in 0..3 {
                let e = &f.e[a];
                for (v, &n) in vals[a].iter_mut().zip(&self.edges[a]) {
                    *v += w * e[n as usize] as f64;
                }
            }
        }
    }

    pub fn finish(self, frequencies: Vec<f64>) -> VolumeSpectra {
        VolumeSpectra {
            frequencies,
            edges: self.edges,
            values: self.values,
        }
    }
}

/// Tangential field phasors on one face of the Huygens box.
///
/// With `(d, u, v)` the cyclic triple starting at the face normal `d`, station `u` holds
/// `E_u` and `H_v` at points `(plane, a + ½, b)`, station `v` holds `E_v` and `H_u` at
/// `(plane, a, b + ½)` (coordinates in cells along `d, u, v`). H is averaged across the
/// plane so both fields sit at the same point. Arrays are `[frequency][a·(rows) + b]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FaceSpectra {
    pub normal: usize,
    pub high: bool,
    pub e_u: Vec<Vec<Complex>>,
    pub h_v: Vec<Vec<Complex>>,
    pub e_v: Vec<Vec<Complex>>,
    pub h_u: Vec<Vec<Complex>>,
}

/// A point sample of the equivalent surface: position (m), area weight (m²), outward
/// unit normal, and the tangential E and H present at the point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub position: [f64; 3],
    pub weight: f64,
    pub normal: [f64; 3],
    pub e: [Complex; 3],
    pub h: [Complex; 3],
}

/// Huygens-box spectra: six faces of the node box `lo..=hi`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SurfaceSpectra {
    pub frequencies: Vec<f64>,
    pub origin_m: [f64; 3],
    pub dx_m: f64,
    pub lo: [usize; 3],
    pub hi: [usize; 3],
    pub faces: Vec<FaceSpectra>,
}

impl SurfaceSpectra {
    /// Visit every sample of the box at frequency index `fi`.
    ///
    /// Weights use the trapezoid rule along the node direction, so box edges and corners
    /// are shared between faces without double counting.
    pub fn for_each_sample(&self, fi: usize, mut visit: impl FnMut(SurfaceSample)) {
        let zero = Complex::new(0.0, 0.0);
        for face in &self.faces {
            let d = face.normal;
            let (u, v) = ((d + 1) % 3, (d + 2) % 3);
            let plane = if face.high { self.hi[d] } else { self.lo[d] };
            let mut normal = [0.0; 3];
            normal[d] = if face.high { 1.0 } else { -1.0 };
            let (nu, nv) = (self.hi[u] - self.lo[u], self.hi[v] - self.lo[v]);
            let area = self.dx_m * self.dx_m;
            let pos = |cu: f64, cv: f64| {
                let mut p = [0.0; 3];
                p[d] = self.origin_m[d] + plane as f64 * self.dx_m;
                p[u] = self.origin_m[u] + (self.lo[u] as f64 + cu) * self.dx_m;
                p[v] = self.origin_m[v] + (self.lo[v] as f64 + cv) * self.dx_m;
                p
            };
            for a in 0..nu {
                for b in 0..=nv {
                    let k = a * (nv + 1) + b;
                    let w = if b == 0 || b == nv { 0.5 } else { 1.0 };
                    let mut e = [zero; 3];
                    let mut h = [zero; 3];
                    e[u] = face.e_u[fi][k];
                    h[v] = face.h_v[fi][k];
                    visit(SurfaceSample {
                        position: pos(a as f64 + 0.5, b as f64),
                        weight: w * area,
                        normal,
                        e,
                        h,
                    });
                }
            }
            for a in 0..=nu {
                for b in 0..nv {
                    let k = a * nv + b;
                    let w = if a == 0 || a == nu { 0.5 } else { 1.0 };
                    let mut e = [zero; 3];
                    let mut h = [zero; 3];
                    e[v] = face.e_v[fi][k];
                    h[u] = face.h_u[fi][k];
                    visit(SurfaceSample {
                        position: pos(a as f64, b as f64 + 0.5),
                        weight: w * area,
                        normal,
                        e,
                        h,
                    });
                }
            }
        }
    }
}

pub(crate) struct SurfaceRecorder {
    lo: [usize; 3],
    hi: [usize; 3],
    faces: Vec<FaceSpectra>,
}

impl SurfaceRecorder {
    pub fn new(lo: [usize; 3], hi: [usize; 3], nf: usize) -> Self {
        let mut faces = Vec::with_capacity(6);
        for d in 0..3 {
            let (u, v) = ((d + 1) % 3, (d + 2) % 3);
            let (nu, nv) = (hi[u] - lo[u], hi[v] - lo[v]);
            let zeros = |n: usize| vec![vec![Complex::new(0.0, 0.0); n]; nf];
            for high in [false, true] {
                faces.push(FaceSpectra {
                    normal: d,
                    high,
                    e_u: zeros(nu * (nv + 1)),
                    h_v: zeros(nu * (nv + 1)),
                    e_v: zeros((nu + 1) * nv),
                    h_u: zeros((nu + 1) * nv),
                });
            }
        }
        Self { lo, hi, faces }
    }

    /// Accumulate E with `pe` and plane-averaged H with `ph` (one phasor per frequency).
    pub fn accumulate(&mut self, f: &Fields, pe: &[Complex], ph: &[Complex]) {
        let s = f.strides;
        for face in &mut self.faces {
            let d = face.normal;
            let (u, v) = ((d + 1) % 3, (d + 2) % 3);
            let p = if face.high { self.hi[d] } else { self.lo[d] };
            let (nu, nv) = (self.hi[u] - self.lo[u], self.hi[v] - self.lo[v]);
            let node = |a: usize, b: usize| p * s[d] + (self.lo[u] + a) * s[u] + (self.lo[v] + b) * s[v];
            for a in 0..nu {
                for b in 0..=nv {
                    let idx = node(a, b);
                    let k = a * (nv + 1) + b;
                    let e = f.e[u][idx] as f64;
                    let h = 0.5 * (f.h[v][idx] as f64 + f.h[v][idx - s[d]] as f64);
                    for fi in 0..pe.len() {
                        face.e_u[fi][k] += pe[fi] * e;
                        face.h_v[fi][k] += ph[fi] * h;
                    }
                }
            }
            for a in 0..=nu {
                for b in 0..nv {
                    let idx = node(a, b);
                    let k = a * nv + b;
                    let e = f.e[v][idx] as f64;
                    let h = 0.5 * (f.h[u][idx] as f64 + f.h[u][idx - s[d]] as f64);
                    for fi in 0..pe.len() {
                        face.e_v[fi][k] += pe[fi] * e;
                        face.h_u[fi][k] += ph[fi] * h;
                    }
                }
            }
        }
    }

    pub fn finish(self, frequencies: Vec<f64>, origin_m: [f64; 3], dx_m: f64) -> SurfaceSpectra {
        SurfaceSpectra {
            frequencies,
            origin_m,
            dx_m,
            lo: self.lo,
            hi: self.hi,
            faces: self.faces,
        }
    }
}
