//! From run records to the quantities reported for an antenna: S11, resonance and
//! bandwidth, the power budget `P_in = P_r + P_d + P_a`, efficiencies and far fields.
//!
//! Powers computed from raw phasors are in arbitrary (spectral-density) units; a
//! [`PowerBudget`] rescales them so the accepted port power equals the requested drive.

mod ntff;
mod power;
mod spectrum;

pub use ntff::{front_to_back, ntff, ntff_with, FarField};
pub use power::{
    antenna_efficiency, cell_losses, huygens_power, mismatch_factor, port_power, power_budget,
    radiation_efficiency, PowerBudget,
};
pub use spectrum::{frequency_grid, resonance_and_bandwidth, s11_spectrum, PortSpectrum, ResonanceReport};
