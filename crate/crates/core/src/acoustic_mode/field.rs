use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::DeviceConfig;
use crate::error::{domain, Result};

/// Complex displacement components of the normalised standing-wave mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeField {
    pub ux: Complex64,
    pub uy: Complex64,
    pub uz: Complex64,
}

impl ModeField {
    pub fn norm_sqr(&self) -> f64 {
        self.ux.norm_sqr() + self.uy.norm_sqr() + self.uz.norm_sqr()
    }
}

/// Paraxial Gaussian standing-wave SAW mode at `(x, y, z)`, `z ≤ 0` into the
/// substrate.
///
/// `u_z = e^{ikκz} (w₀/w) exp(−y²/w² + iky²/2R − iψ) · 2cos kx` and
/// `u_x = −1/(3√2 κ) · (same envelope) · 2i sin kx`, with the Gouy phase
/// `ψ = atan(x/x_R)`.
pub fn mode_field(x: f64, y: f64, z: f64, cfg: &DeviceConfig) -> Result<ModeField> {
    if z > 0.0 {
        return domain(format!("z = {z} lies above the surface (z must be ≤ 0)"));
    }
    if !x.is_finite() || !y.is_finite() || !z.is_finite() {
        return domain("mode_field coordinates must be finite");
    }
    Ok(field_unchecked(x, y, z, cfg))
}

/// Depth-independent part of the mode envelope at `(x, y)`.
pub(crate) fn transverse_envelope(x: f64, y: f64, cfg: &DeviceConfig) -> Complex64 {
    let k = cfg.wavenumber();
    let xr = cfg.rayleigh_range();
    let w = cfg.waist_at(x);
    let inv_r = x / (x * x + xr * xr);
    let psi = (x / xr).atan();
    let exponent = Complex64::new(-y * y / (w * w), k * y * y * inv_r / 2.0 - psi);
    exponent.exp() * (cfg.w0 / w)
}

/// `e^{ikκz}`.
pub(crate) fn depth_factor(z: f64, cfg: &DeviceConfig) -> Complex64 {
    (Complex64::i() * cfg.wavenumber() * cfg.kappa() * z).exp()
}

/// Prefactor of the in-plane component, `−1/(3√2 κ)`.
pub(crate) fn ux_prefactor(cfg: &DeviceConfig) -> Complex64 {
    -1.0 / (3.0 * std::f64::consts::SQRT_2 * cfg.kappa())
}

pub(crate) fn field_unchecked(x: f64, y: f64, z: f64, cfg: &DeviceConfig) -> ModeField {
    let kx = cfg.wavenumber() * x;
    let env = transverse_envelope(x, y, cfg) * depth_factor(z, cfg);
    ModeField {
        ux: ux_prefactor(cfg) * env * Complex64::new(0.0, 2.0 * kx.sin()),
        uy: Complex64::new(0.0, 0.0),
        uz: env * (2.0 * kx.cos()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dev1() -> DeviceConfig {
        DeviceConfig::builtin("dev1").unwrap()
    }

    #[test]
    fn antinode_at_origin() {
        let u = mode_field(0.0, 0.0, 0.0, &dev1()).unwrap();
        assert!((u.uz.norm() - 2.0).abs() < 1e-15);
        assert_eq!(u.ux.norm(), 0.0);
        assert_eq!(u.uy.norm(), 0.0);
    }

    #[test]
    fn quarter_wave_node() {
        let c = dev1();
        let u = mode_field(c.lambda_saw / 4.0, 0.0, 0.0, &c).unwrap();
        assert!(u.uz.norm() < 1e-15);
        // 2 / (3 sqrt2 |kappa|) * w0/w(lambda/4), |kappa| = hypot(0.483, 0.489)
        let x = c.lambda_saw / 4.0;
        let xr = std::f64::consts::PI * c.w0 * c.w0 / c.lambda_saw;
        let focusing = 1.0 / (1.0 + (x / xr).powi(2)).sqrt();
        let oracle = 2.0 / (3.0 * 2f64.sqrt() * 0.483f64.hypot(0.489)) * focusing;
        assert!((u.ux.norm() - oracle).abs() < 1e-12);
        assert!((u.ux.norm() - 0.686).abs() < 1e-3);
    }

    #[test]
    fn gaussian_envelope_in_y() {
        let c = dev1();
        let x = 3.0 * c.lambda_saw;
        let w = c.waist_at(x);
        let a0 = mode_field(x, 0.0, 0.0, &c).unwrap().uz.norm();
        let a1 = mode_field(x, w, 0.0, &c).unwrap().uz.norm();
        assert!((a1 / a0 - (-1f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn decays_into_substrate() {
        let c = dev1();
        let a = mode_field(0.0, 0.0, -0.2e-6, &c).unwrap().uz.norm();
        let b = mode_field(0.0, 0.0, -0.8e-6, &c).unwrap().uz.norm();
        assert!(b < a && a < 2.0);
        assert!(mode_field(0.0, 0.0, 1e-9, &c).is_err());
    }
}
