//! Full-wave simulation and dosimetry for cavity-backed slot antennas worn on the body.
//!
//! The crate is `no_std` (with `alloc`). Everything here is pure computation:
//!
//! * [`dielectrics`]: 4-term Cole-Cole tissue permittivity and fixed-property materials.
//! * [`scene`]: antenna and phantom geometry, rasterized onto a uniform Yee grid.
//! * [`solver`]: lossy-dielectric FDTD with CPML boundaries and a resistive lumped port.
//! * [`analysis`]: S11, resonance, power budget, near-to-far-field transform.
//! * [`dosimetry`]: point SAR, cube-averaged SAR, compliance and figure of merit.
//! * [`stats`] and [`study`]: placement studies and their statistics.
//! * [`validation`]: reference problems with closed-form answers.
//!
//! File formats, the command-line tool and report bundles live in the `wearfdtd` crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
pub mod consts;
pub mod dielectrics;
pub mod dosimetry;
mod error;
pub mod scene;
pub mod solver;
pub mod stats;
pub mod study;
pub mod validation;

pub use error::{Error, Result};

/// Double-precision complex number used for all phasors.
pub type Complex = num_complex::Complex64;
