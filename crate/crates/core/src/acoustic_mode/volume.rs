use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{depth_factor, field_unchecked};
use super::DeviceConfig;
use crate::constants::HBAR;
use crate::error::{require_positive, Error, Result};

/// Mode volume and the zero-point displacement scale it implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeVolumeResult {
    /// V, m³.
    pub volume: f64,
    /// u₀ = √(ħ / (2ρωV)), m.
    pub u0_zpm: f64,
    /// Grid halvings performed before the convergence test passed.
    pub refinements: usize,
    /// Relative change of the last refinement.
    pub relative_change: f64,
}

/// Grid controls for [`mode_volume_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Multiplies every initial step (λ/20 in x and z, w(x)/20 in y).
    pub step_scale: f64,
    /// Relative change between successive halvings accepted as converged.
    pub tolerance: f64,
    pub max_refinements: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { step_scale: 1.0, tolerance: 0.01, max_refinements: 4 }
    }
}

/// Depth where the amplitude envelope has fallen to this fraction.
const DEPTH_CUTOFF: f64 = 1e-6;
/// Transverse half-width of the y integration in beam radii.
const Y_EXTENT: f64 = 6.0;

/// `u₀ = √(ħ/(2ρωV))`.
pub fn zero_point_displacement(volume: f64, rho: f64, f_m: f64) -> Result<f64> {
    require_positive("volume", volume)?;
    require_positive("rho", rho)?;
    require_positive("f_m", f_m)?;
    Ok((HBAR / (2.0 * rho * crate::constants::TWO_PI * f_m * volume)).sqrt())
}

/// Numerical mode volume `∫|u|² d³x` over the cavity length with default grids.
pub fn mode_volume(cfg: &DeviceConfig) -> Result<ModeVolumeResult> {
    mode_volume_with(cfg, &QuadratureOptions::default())
}

/// Nested trapezoid quadrature with step halving; once two successive grids
/// agree within tolerance the Richardson extrapolate of the pair is returned.
///
/// The depth dependence `|e^{ikκz}|²` factorises out of the field, so the
/// depth integral and the surface integral are refined separately and
/// multiplied.
pub fn mode_volume_with(cfg: &DeviceConfig, opts: &QuadratureOptions) -> Result<ModeVolumeResult> {
    cfg.validate()?;
    require_positive("step_scale", opts.step_scale)?;
    require_positive("tolerance", opts.tolerance)?;

    let raw = |level: usize| {
        let scale = opts.step_scale * 0.5f64.powi(level as i32);
        depth_integral(cfg, scale) * surface_integral(cfg, scale)
    };
    let mut coarse = raw(0);
    let mut history = vec![coarse];
    for level in 1..=opts.max_refinements {
        let fine = raw(level);
        history.push(fine);
        let change = ((fine - coarse) / fine).abs();
        if change < opts.tolerance && fine.is_finite() && fine > 0.0 {
            let volume = richardson(coarse, fine);
            return Ok(ModeVolumeResult {
                volume,
                u0_zpm: zero_point_displacement(volume, cfg.rho, cfg.f_m)?,
                refinements: level,
                relative_change: change,
            });
        }
        coarse = fine;
    }
    Err(Error::Numerical {
        message: format!(
            "mode volume did not converge to {} after {} refinements",
            opts.tolerance, opts.max_refinements
        ),
        diagnostics: history.iter().enumerate().map(|(i, v)| format!("level {i}: V = {v:e} m^3")).collect(),
    })
}

/// Second-order Richardson extrapolation from a grid and its halving.
fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

fn depth_integral(cfg: &DeviceConfig, scale: f64) -> f64 {
    let decay = -cfg.wavenumber() * cfg.kappa_depth[1];
    let z_min = DEPTH_CUTOFF.ln() / decay;
    let n = intervals(-z_min, cfg.lambda_saw / 20.0 * scale);
    let h = -z_min / n as f64;
    trapezoid(n, h, |i| depth_factor(-(i as f64) * h, cfg).norm_sqr())
}

fn surface_integral(cfg: &DeviceConfig, scale: f64) -> f64 {
    let half = 0.5 * cfg.l_eff;
    let nx = intervals(cfg.l_eff, cfg.lambda_saw / 20.0 * scale);
    let hx = cfg.l_eff / nx as f64;
    let ny = intervals(2.0 * Y_EXTENT, scale / 20.0);
    let rows: Vec<f64> = (0..=nx)
        .into_par_iter()
        .map(|i| {
            let x = -half + i as f64 * hx;
            let w = cfg.waist_at(x);
            let hy = 2.0 * Y_EXTENT * w / ny as f64;
            trapezoid(ny, hy, |j| field_unchecked(x, -Y_EXTENT * w + j as f64 * hy, 0.0, cfg).norm_sqr())
        })
        .collect();
    trapezoid(nx, hx, |i| rows[i])
}

fn intervals(span: f64, step: f64) -> usize {
    ((span / step).ceil() as usize).max(2)
}

fn trapezoid(n: usize, h: f64, f: impl Fn(usize) -> f64) -> f64 {
    let inner: f64 = (1..n).map(&f).sum();
    h * (inner + 0.5 * (f(0) + f(n)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_point_scaling() {
        let a = zero_point_displacement(1e-16, 5317.0, 3.6e9).unwrap();
        let b = zero_point_displacement(1e-16, 2.0 * 5317.0, 3.6e9).unwrap();
        assert!((b / a - 1.0 / 2f64.sqrt()).abs() < 1e-14);
        let c = zero_point_displacement(4e-16, 5317.0, 3.6e9).unwrap();
        assert!((c / a - 0.5).abs() < 1e-14);
        assert!(zero_point_displacement(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn trapezoid_is_exact_for_lines() {
        let v = trapezoid(7, 0.5, |i| 2.0 * i as f64 * 0.5 + 1.0);
        assert!((v - (3.5f64 * 3.5 + 3.5)).abs() < 1e-12);
    }

    #[test]
    fn non_convergence_is_reported() {
        let cfg = DeviceConfig::builtin("dev3").unwrap();
        let opts = QuadratureOptions { step_scale: 1.0, tolerance: 1e-15, max_refinements: 1 };
        match mode_volume_with(&cfg, &opts) {
            Err(Error::Numerical { diagnostics, .. }) => assert_eq!(diagnostics.len(), 2),
            other => panic!("expected numerical error, got {other:?}"),
        }
    }
}
