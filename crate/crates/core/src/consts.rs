//! Physical constants (SI).

/// Speed of light in vacuum, m/s.
pub const C0: f64 = 299_792_458.0;
/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 8.854_187_817e-12;
/// Vacuum permeability, H/m.
pub const MU0: f64 = 1.0 / (EPS0 * C0 * C0);
/// Free-space wave impedance, ohms.
pub const ETA0: f64 = MU0 * C0;
/// Density assigned to air, kg/m³.
pub const AIR_DENSITY: f64 = 1.2;
/// Millimetres to metres.
pub const MM: f64 = 1e-3;

pub(crate) const PI: f64 = core::f64::consts::PI;
