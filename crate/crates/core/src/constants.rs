//! Physical constants and fixed calibration values (SI units).

use std::f64::consts::PI;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Elementary charge, C (J per eV).
pub const ELECTRON_VOLT: f64 = 1.602_176_634e-19;

/// Density of GaAs, kg/m³.
pub const RHO_GAAS: f64 = 5317.0;

/// Scalar QD deformation potential, Hz per unit strain.
pub const DEFORMATION_POTENTIAL_HZ: f64 = 6.5e14;

/// Complex depth-decay constant of the SAW mode along GaAs (110), (re, im).
pub const KAPPA_DEPTH: (f64, f64) = (0.483, -0.489);

/// SAW wavelength at ~3.6 GHz on GaAs, m.
pub const LAMBDA_SAW: f64 = 0.830e-6;

/// Loss between the RF generator and the sample mount, dB.
pub const CABLE_LOSS_DB: f64 = 3.5;

/// Standard microwave line impedance, Ω.
pub const LINE_IMPEDANCE: f64 = 50.0;

pub const TWO_PI: f64 = 2.0 * PI;

/// Converts a power in dBm to watts.
pub fn dbm_to_watt(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// Converts a power in watts to dBm.
pub fn watt_to_dbm(watt: f64) -> f64 {
    10.0 * (watt / 1e-3).log10()
}

/// Applies an attenuation in dB to a power in watts.
pub fn attenuate(watt: f64, loss_db: f64) -> f64 {
    watt * 10f64.powf(-loss_db / 10.0)
}
