use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::field_unchecked;
use super::{mode_volume, DeviceConfig, ModeVolumeResult};
use crate::error::{domain, require_positive, Result};

/// How the two complex strain-coupling amplitudes are reduced to a rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum G0Projection {
    /// `|A_x| + |A_z|`: peak shift over an acoustic cycle, independent of the
    /// arbitrary time origin of the complex amplitude.
    #[default]
    Envelope,
    /// `|Re(i A_x)| + |Re(i A_z)|`: the instantaneous shift at a fixed phase.
    InPhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct G0Options {
    pub projection: G0Projection,
    /// Transverse emitter offset from the beam centre, m.
    pub y_offset: f64,
}

/// Single-phonon coupling rate g₀/2π (Hz) sampled along the cavity axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G0Profile {
    pub x: Vec<f64>,
    pub g0_over_2pi: Vec<f64>,
}

impl G0Profile {
    pub fn max(&self) -> f64 {
        self.g0_over_2pi.iter().copied().fold(0.0, f64::max)
    }
}

/// g₀/2π along `x_range` at the emitter depth, on the beam axis.
pub fn g0_profile(cfg: &DeviceConfig, x_range: (f64, f64), samples: usize) -> Result<G0Profile> {
    g0_profile_with(cfg, x_range, samples, &G0Options::default())
}

pub fn g0_profile_with(cfg: &DeviceConfig, x_range: (f64, f64), samples: usize, opts: &G0Options) -> Result<G0Profile> {
    if samples < 2 {
        return domain("g0 profile needs at least two samples");
    }
    let (lo, hi) = x_range;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return domain(format!("invalid x range [{lo}, {hi}]"));
    }
    let mv = mode_volume(cfg)?;
    let x: Vec<f64> = (0..samples).map(|i| lo + (hi - lo) * i as f64 / (samples - 1) as f64).collect();
    let g0_over_2pi = x.iter().map(|&xi| g0_at(xi, cfg, &mv, opts)).collect();
    Ok(G0Profile { x, g0_over_2pi })
}

/// Coupling amplitudes `(A_x, A_z) = k G u₀ (u_x, u_z)` in Hz.
///
/// G is an ordinary-frequency deformation potential, so the angular shift per
/// unit strain is 2πG and `A/2π` reduces to `k G u₀ u`.
pub fn coupling_amplitudes(x: f64, y: f64, cfg: &DeviceConfig, mv: &ModeVolumeResult) -> (Complex64, Complex64) {
    let u = field_unchecked(x, y, -cfg.z_qd, cfg);
    let scale = cfg.wavenumber() * cfg.deformation_potential * mv.u0_zpm;
    (u.ux * scale, u.uz * scale)
}

pub fn g0_at(x: f64, cfg: &DeviceConfig, mv: &ModeVolumeResult, opts: &G0Options) -> f64 {
    let (ax, az) = coupling_amplitudes(x, opts.y_offset, cfg, mv);
    match opts.projection {
        G0Projection::Envelope => ax.norm() + az.norm(),
        G0Projection::InPhase => {
            let i = Complex64::i();
            (i * ax).re.abs() + (i * az).re.abs()
        }
    }
}

/// g₀/2π (Hz) from a measured modulation index and phonon number:
/// `g₀ = δ ω_m / (2√n)`.
pub fn g0_from_measurement(delta: f64, n_phonon: f64, f_m: f64) -> Result<f64> {
    require_positive("n_phonon", n_phonon)?;
    require_positive("f_m", f_m)?;
    if !(delta >= 0.0) {
        return domain(format!("modulation index must be ≥ 0, got {delta}"));
    }
    Ok(delta * f_m / (2.0 * n_phonon.sqrt()))
}

/// Relative strain envelope `(w₀/w(x)) exp(−y²/w(x)²)`, 1 at the focus centre.
pub fn strain_envelope(cfg: &DeviceConfig, x: f64, y: f64) -> f64 {
    let w = cfg.waist_at(x);
    cfg.w0 / w * (-(y * y) / (w * w)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measured_coupling_reference() {
        assert_eq!(g0_from_measurement(0.0, 1e11, 3.6e9).unwrap(), 0.0);
        let g = g0_from_measurement(0.275, 1.25e11, 3.6e9).unwrap();
        assert!((g - 1400.0).abs() < 10.0, "{g}");
        assert!(g0_from_measurement(0.1, 0.0, 3.6e9).is_err());
        assert!(g0_from_measurement(0.1, -1.0, 3.6e9).is_err());
    }

    #[test]
    fn zero_deformation_potential_gives_zero_profile() {
        let mut cfg = DeviceConfig::builtin("dev3").unwrap();
        cfg.deformation_potential = 0.0;
        let p = g0_profile(&cfg, (-1e-6, 1e-6), 11).unwrap();
        assert!(p.g0_over_2pi.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn envelope_bounds_in_phase() {
        let cfg = DeviceConfig::builtin("dev1").unwrap();
        let mv = mode_volume(&cfg).unwrap();
        let inphase = G0Options { projection: G0Projection::InPhase, y_offset: 0.0 };
        for i in 0..50 {
            let x = i as f64 * 17e-9;
            assert!(g0_at(x, &cfg, &mv, &inphase) <= g0_at(x, &cfg, &mv, &G0Options::default()) + 1e-9);
        }
    }

    #[test]
    fn offset_reduces_coupling() {
        let cfg = DeviceConfig::builtin("dev3").unwrap();
        let mv = mode_volume(&cfg).unwrap();
        let centre = g0_at(0.0, &cfg, &mv, &G0Options::default());
        let off = G0Options { y_offset: cfg.w0, ..Default::default() };
        let shifted = g0_at(0.0, &cfg, &mv, &off);
        assert!((shifted / centre - (-1f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn envelope_of_strain() {
        let cfg = DeviceConfig::builtin("dev1").unwrap();
        assert_eq!(strain_envelope(&cfg, 0.0, 0.0), 1.0);
        let xr = cfg.rayleigh_range();
        assert!((strain_envelope(&cfg, xr, 0.0) - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_sampling() {
        let cfg = DeviceConfig::builtin("dev1").unwrap();
        assert!(g0_profile(&cfg, (0.0, 1e-6), 1).is_err());
        assert!(g0_profile(&cfg, (1e-6, 0.0), 5).is_err());
    }
}
