//! Convolutional PML in the six boundary slabs.
//!
//! Each slab stretches one axis `d` with the complex-frequency-shifted profile
//! `s = κ + σ/(α + jωε₀)`. For the cyclic triple `(d, u, v)` the curl of H contributes
//! `+∂H_u/∂d` to `E_v` and `−∂H_v/∂d` to `E_u`; the bulk update already applied the plain
//! difference, so the slab adds `(1/κ − 1)·diff + ψ` with the matching sign.

use alloc::vec;
use alloc::vec::Vec;

use super::yee::Fields;
use super::CpmlSpec;
use crate::consts::{EPS0, ETA0};

struct Layer {
    b: f32,
    c: f32,
    kinv_m1: f32,
}

fn layer(spec: &CpmlSpec, rho: f64, dx_m: f64, dt: f64) -> Layer {
    let m = spec.order;
    let sigma_max = spec.sigma_scale * 0.8 * (m + 1.0) / (ETA0 * dx_m);
    let g = libm::pow(rho, m);
    let sigma = sigma_max * g;
    let kappa = 1.0 + (spec.kappa_max - 1.0) * g;
    let alpha = spec.alpha_max * (1.0 - rho);
    let b = libm::exp(-(sigma / kappa + alpha) * dt / EPS0);
    let den = sigma * kappa + kappa * kappa * alpha;
    let c = if den > 0.0 { sigma * (b - 1.0) / den } else { 0.0 };
    Layer {
        b: b as f32,
        c: c as f32,
        kinv_m1: (1.0 / kappa - 1.0) as f32,
    }
}

pub(crate) struct Slab {
    d: usize,
    high: bool,
    e_layers: Vec<Layer>,
    h_layers: Vec<Layer>,
    /// ψ for E_u, E_v, H_u, H_v; layout `[layer][u][v]` over the full node plane.
    psi: [Vec<f32>; 4],
    plane: [usize; 2],
}

impl Slab {
    pub fn all(spec: &CpmlSpec, dims: [usize; 3], dx_m: f64, dt: f64) -> Vec<Slab> {
        let depth = spec.depth;
        let mut out = Vec::with_capacity(6);
        for d in 0..3 {
            let (u, v) = ((d + 1) % 3, (d + 2) % 3);
            let plane = [dims[u] + 1, dims[v] + 1];
            for high in [false, true] {
                let e_layers = (0..depth)
                    .map(|l| layer(spec, (depth - l) as f64 / depth as f64, dx_m, dt))
                    .collect();
                let h_layers = (0..depth)
                    .map(|l| layer(spec, (depth as f64 - l as f64 - 0.5) / depth as f64, dx_m, dt))
                    .collect();
                let n = depth * plane[0] * plane[1];
                out.push(Slab {
                    d,
                    high,
                    e_layers,
                    h_layers,
                    psi: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
                    plane,
                });
            }
        }
        out
    }

    /// Range of updated E node indices along `d` inside the slab.
    fn e_range(&self, n: usize, depth: usize) -> (usize, usize) {
        if self.high {
            (n + 1 - depth, n)
        } else {
            (1, depth)
        }
    }

    /// Range of H half-node indices `q` (position `q + ½`) inside the slab.
    fn h_range(&self, n: usize, depth: usize) -> (usize, usize) {
        if self.high {
            (n - depth, n)
        } else {
            (0, depth)
        }
    }

    pub fn update_e(&mut self, f: &mut Fields, cb: &[Vec<f32>; 3]) {
        let d = self.d;
        let (u, v) = ((d + 1) % 3, (d + 2) % 3);
        let n = f.dims;
        let s = f.strides;
        let depth = self.e_layers.len();
        let (p0, p1) = self.e_range(n[d], depth);
        let pv = self.plane[1];
        let plane = self.plane[0] * pv;

        // E_u: u in 0..n_u, v in 1..n_v; term −∂H_v/∂d.
        let mut r = [(0, 0); 3];
        r[d] = (p0, p1);
        r[u] = (0, n[u]);
        r[v] = (1, n[v]);
        let psi_eu = &mut self.psi[0];
        for_box(r, |x| {
            let idx = x[0] * s[0] + x[1] * s[1] + x[2];
            let l = if self.high { n[d] - x[d] } else { x[d] };
            let Layer { b, c, kinv_m1 } = self.e_layers[l];
            let diff = f.h[v][idx] - f.h[v][idx - s[d]];
            let k = l * plane + x[u] * pv + x[v];
            let psi = b * psi_eu[k] + c * diff;
            psi_eu[k] = psi;
            f.e[u][idx] -= cb[u][idx] * (kinv_m1 * diff + psi);
        });
        // E_v: u in 1..n_u, v in 0..n_v; term +∂H_u/∂d.
        r[u] = (1, n[u]);
        r[v] = (0, n[v]);
        let psi_ev = &mut self.psi[1];
        for_box(r, |x| {
            let idx = x[0] * s[0] + x[1] * s[1] + x[2];
            let l = if self.high { n[d] - x[d] } else { x[d] };
            let Layer { b, c, kinv_m1 } = self.e_layers[l];
            let diff = f.h[u][idx] - f.h[u][idx - s[d]];
            let k = l * plane + x[u] * pv + x[v];
            let psi = b * psi_ev[k] + c * diff;
            psi_ev[k] = psi;
            f.e[v][idx] += cb[v][idx] * (kinv_m1 * diff + psi);
        });
    }

    pub fn update_h(&mut self, f: &mut Fields, db: f32) {
        let d = self.d;
        let (u, v) = ((d + 1) % 3, (d + 2) % 3);
        let n = f.dims;
        let s = f.strides;
        let depth = self.h_layers.len();
        let (q0, q1) = self.h_range(n[d], depth);
        let pv = self.plane[1];
        let plane = self.plane[0] * pv;

        // H_u: u in 0..=n_u, v in 0..n_v; term +∂E_v/∂d.
        let mut r = [(0, 0); 3];
        r[d] = (q0, q1);
        r[u] = (0, n[u] + 1);
        r[v] = (0, n[v]);
        let psi_hu = &mut self.psi[2];
        for_box(r, |x| {
            let idx = x[0] * s[0] + x[1] * s[1] + x[2];
            let l = if self.high { n[d] - 1 - x[d] } else { x[d] };
            let Layer { b, c, kinv_m1 } = self.h_layers[l];
            let diff = f.e[v][idx + s[d]] - f.e[v][idx];
            let k = l * plane + x[u] * pv + x[v];
            let psi = b * psi_hu[k] + c * diff;
            psi_hu[k] = psi;
            f.h[u][idx] += db * (kinv_m1 * diff + psi);
        });
        // H_v: u in 0..n_u, v in 0..=n_v; term −∂E_u/∂d.
        r[u] = (0, n[u]);
        r[v] = (0, n[v] + 1);
        let psi_hv = &mut self.psi[3];
        for_box(r, |x| {
            let idx = x[0] * s[0] + x[1] * s[1] + x[2];
            let l = if self.high { n[d] - 1 - x[d] } else { x[d] };
            let Layer { b, c, kinv_m1 } = self.h_layers[l];
            let diff = f.e[u][idx + s[d]] - f.e[u][idx];
            let k = l * plane + x[u] * pv + x[v];
            let psi = b * psi_hv[k] + c * diff;
            psi_hv[k] = psi;
            f.h[v][idx] -= db * (kinv_m1 * diff + psi);
        });
    }
}

/// Visit every index in the half-open box in memory order (`k` fastest).
#[inline(always)]
fn for_box(r: [(usize, usize); 3], mut f: impl FnMut([usize; 3])) {
    for i in r[0].0..r[0].1 {
        for j in r[1].0..r[1].1 {
            for k in r[2].0..r[2].1 {
                f([i, j, k]);
            }
        }
    }
}
