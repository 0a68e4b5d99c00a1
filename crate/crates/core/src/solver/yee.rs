//! Staggered-grid field storage and the bulk leapfrog updates.
//!
//! All six components share the node layout `(nx+1) × (ny+1) × (nz+1)` with `k` fastest.
//! Entries that do not correspond to a Yee component stay zero forever.

use alloc::vec;
use alloc::vec::Vec;

pub(crate) struct Fields {
    pub dims: [usize; 3],
    pub strides: [usize; 3],
    pub e: [Vec<f32>; 3],
    pub h: [Vec<f32>; 3],
}

impl Fields {
    pub fn new(dims: [usize; 3]) -> Self {
        let [nx, ny, nz] = dims;
        let n = (nx + 1) * (ny + 1) * (nz + 1);
        Self {
            dims,
            strides: [(ny + 1) * (nz + 1), nz + 1, 1],
            e: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            h: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        }
    }
}

/// Run `f(plane_index, plane)` over consecutive `plane`-sized chunks of `data`.
fn for_planes<F>(data: &mut [f32], plane: usize, count: usize, f: F)
where
    F: Fn(usize, &mut [f32]) + Sync + Send,
{
    let data = &mut data[..plane * count];
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        data.par_chunks_mut(plane)
            .enumerate()
            .for_each(|(i, p)| f(i, p));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(plane).enumerate().for_each(|(i, p)| f(i, p));
    }
}

/// `out[k] = ca[k]·out[k] + cb[k]·((p[k] − pm[k]) − (q[k] − qm[k]))`
#[inline(always)]
fn e_row(out: &mut [f32], ca: &[f32], cb: &[f32], p: &[f32], pm: &[f32], q: &[f32], qm: &[f32]) {
    let n = out.len();
    let (ca, cb, p, pm, q, qm) = (&ca[..n], &cb[..n], &p[..n], &pm[..n], &q[..n], &qm[..n]);
    for k in 0..n {
        out[k] = ca[k] * out[k] + cb[k] * ((p[k] - pm[k]) - (q[k] - qm[k]));
    }
}

/// `out[k] −= db·((pp[k] − p[k]) − (qp[k] − q[k]))`
#[inline(always)]
fn h_row(out: &mut [f32], db: f32, pp: &[f32], p: &[f32], qp: &[f32], q: &[f32]) {
    let n = out.len();
    let (pp, p, qp, q) = (&pp[..n], &p[..n], &qp[..n], &q[..n]);
    for k in 0..n {
        out[k] -= db * ((pp[k] - p[k]) - (qp[k] - q[k]));
    }
}

/// Advance H by one step from the current E.
pub(crate) fn update_h(f: &mut Fields, db: f32) {
    let [nx, ny, nz] = f.dims;
    let [sx, sy, _] = f.strides;
    let [ex, ey, ez] = &f.e;
    let [hx, hy, hz] = &mut f.h;

    // Hx(i, j+½, k+½) -= db (∂Ez/∂y − ∂Ey/∂z)
    for_planes(hx, sx, nx + 1, |i, plane| {
        for j in 0..ny {
            let g = i * sx + j * sy;
            let l = j * sy;
            h_row(
                &mut plane[l..l + nz],
                db,
                &ez[g + sy..],
                &ez[g..],
                &ey[g + 1..],
                &ey[g..],
            );
        }
    });
    // Hy(i+½, j, k+½) -= db (∂Ex/∂z − ∂Ez/∂x)
    for_planes(hy, sx, nx, |i, plane| {
        for j in 0..=ny {
            let g = i * sx + j * sy;
            let l = j * sy;
            h_row(
                &mut plane[l..l + nz],
                db,
                &ex[g + 1..],
                &ex[g..],
                &ez[g + sx..],
                &ez[g..],
            );
        }
    });
    // Hz(i+½, j+½, k) -= db (∂Ey/∂x − ∂Ex/∂y)
    for_planes(hz, sx, nx, |i, plane| {
        for j in 0..ny {
            let g = i * sx + j * sy;
            let l = j * sy;
            h_row(
                &mut plane[l..l + nz + 1],
                db,
                &ey[g + sx..],
                &ey[g..],
                &ex[g + sy..],
                &ex[g..],
            );
        }
    });
}

/// Advance E by one step from the current H with per-edge coefficients.
pub(crate) fn update_e(f: &mut Fields, ca: &[Vec<f32>; 3], cb: &[Vec<f32>; 3]) {
    let [nx, ny, nz] = f.dims;
    let [sx, sy, _] = f.strides;
    let [hx, hy, hz] = &f.h;
    let [ex, ey, ez] = &mut f.e;

    // Ex(i+½, j, k) += ∂Hz/∂y − ∂Hy/∂z
    for_planes(ex, sx, nx, |i, plane| {
        for j in 1..ny {
            let g = i * sx + j * sy + 1;
            let l = j * sy + 1;
            let n = nz - 1;
            e_row(
                &mut plane[l..l + n],
                &ca[0][g..],
                &cb[0][g..],
                &hz[g..],
                &hz[g - sy..],
                &hy[g..],
                &hy[g - 1..],
            );
        }
    });
    // Ey(i, j+½, k) += ∂Hx/∂z − ∂Hz/∂x ; plane 0 is the boundary.
    for_planes(ey, sx, nx, |i, plane| {
        if i == 0 {
            return;
        }
        for j in 0..ny {
            let g = i * sx + j * sy + 1;
            let l = j * sy + 1;
            let n = nz - 1;
            e_row(
                &mut plane[l..l + n],
                &ca[1][g..],
                &cb[1][g..],
                &hx[g..],
                &hx[g - 1..],
                &hz[g..],
                &hz[g - sx..],
            );
        }
    });
    // Ez(i, j, k+½) += ∂Hy/∂x − ∂Hx/∂y
    for_planes(ez, sx, nx, |i, plane| {
        if i == 0 {
            return;
        }
        for j in 1..ny {
            let g = i * sx + j * sy;
            let l = j * sy;
            e_row(
                &mut plane[l..l + nz],
                &ca[2][g..],
                &cb[2][g..],
                &hy[g..],
                &hy[g - sx..],
                &hx[g..],
                &hx[g - sy..],
            );
        }
    });
}

/// Total electromagnetic energy `½ε₀Σεᵣ|E|²dV + ½μ₀Σ|H|²dV` in joules.
///
/// `eps` holds the relative permittivity per E edge (0 where the edge is a conductor).
/// Partial sums are formed per x-plane and added in plane order so the result does not
/// depend on how planes were scheduled.
pub(crate) fn energy(f: &Fields, eps: &[Vec<f32>; 3], dv: f64, eps0: f64, mu0: f64) -> f64 {
    let plane = f.strides[0];
    let nplanes = f.dims[0] + 1;
    let plane_sum = |i: usize| -> f64 {
        let r = i * plane..(i + 1) * plane;
        let mut we = 0.0f64;
        let mut wh = 0.0f64;
        for a in 0..3 {
            let e = &f.e[a][r.clone()];
            let w = &eps[a][r.clone()];
            we += e.iter().zip(w).map(|(&e, &w)| (w * e * e) as f64).sum::<f64>();
            wh += f.h[a][r.clone()].iter().map(|&h| (h * h) as f64).sum::<f64>();
        }
        0.5 * dv * (eps0 * we + mu0 * wh)
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<f64> = {
        use rayon::prelude::*;
        (0..nplanes).into_par_iter().map(plane_sum).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<f64> = (0..nplanes).map(plane_sum).collect();
    parts.iter().sum()
}
