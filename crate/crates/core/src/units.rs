//! SI constants (CODATA 2018 exact/recommended values) and unit helpers.
//!
//! Inside the library every energy is an angular frequency in rad/s (ħ = 1).
//! SI conversions happen only where a formula needs charges, fields or lengths.

use std::f64::consts::PI;

pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const VACUUM_PERMEABILITY: f64 = 1.256_637_062_12e-6;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Superconducting flux quantum h / 2e.
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE);

/// Converts a frequency in GHz to an angular frequency in rad/s.
pub fn ghz(f: f64) -> f64 {
    2.0 * PI * f * 1e9
}

/// Converts a frequency in MHz to an angular frequency in rad/s.
pub fn mhz(f: f64) -> f64 {
    2.0 * PI * f * 1e6
}

/// Angular frequency (rad/s) to ordinary frequency in GHz.
pub fn to_ghz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e9)
}
