use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{default_blur_fwhm, random_ensemble, smear_metric, synth_ensemble_with, BeamScan};
use crate::acoustic_mode::{strain_envelope, DeviceConfig};
use crate::error::{domain, require_non_negative, require_positive, Result};

/// Direction of a beam scan; the other coordinate is held fixed (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanAxis {
    /// Across the beam at fixed x.
    Y { x: f64 },
    /// Along the cavity at fixed y.
    X { y: f64 },
}

/// Synthetic measurement settings for [`scan_beam_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Spectral window centre, m.
    pub center: f64,
    pub half_window: f64,
    pub step: f64,
    /// Spectrometer FWHM, m; `None` selects the 30 µeV default.
    pub blur_fwhm: Option<f64>,
    /// Half-wave voltage relating drive power to the peak modulation index,
    /// `δ_peak = π√(2ZP)/V_π`.
    pub calibration_v_pi: f64,
    /// Relative Gaussian noise on each D value.
    pub noise: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { center: 915e-9, half_window: 10e-9, step: 2e-12, blur_fwhm: None, calibration_v_pi: 0.4, noise: 0.0 }
    }
}

/// D at each position for drive power `drive` (W) with default settings.
pub fn scan_beam(cfg: &DeviceConfig, axis: ScanAxis, positions: &[f64], seed: u64, drive: f64) -> Result<BeamScan> {
    scan_beam_with(cfg, axis, positions, seed, drive, &ScanOptions::default())
}

/// One ensemble is drawn from `seed` and probed at every position with
/// `δ_local = δ_peak · (w₀/w(x)) exp(−y²/w(x)²)`.
pub fn scan_beam_with(
    cfg: &DeviceConfig,
    axis: ScanAxis,
    positions: &[f64],
    seed: u64,
    drive: f64,
    opts: &ScanOptions,
) -> Result<BeamScan> {
    cfg.validate()?;
    require_non_negative("drive", drive)?;
    require_positive("calibration_v_pi", opts.calibration_v_pi)?;
    require_positive("half_window", opts.half_window)?;
    require_positive("step", opts.step)?;
    require_non_negative("noise", opts.noise)?;
    let half = 0.5 * cfg.l_eff;
    let coords: Vec<(f64, f64)> = positions
        .iter()
        .map(|&p| match axis {
            ScanAxis::Y { x } => (x, p),
            ScanAxis::X { y } => (p, y),
        })
        .collect();
    if let Some((x, _)) = coords.iter().find(|(x, _)| x.abs() > half || !x.is_finite()) {
        return domain(format!("x = {x} lies outside the cavity (|x| ≤ {half})"));
    }
    let n = (2.0 * opts.half_window / opts.step).round() as usize + 1;
    let grid: Vec<f64> = (0..n).map(|i| opts.center - opts.half_window + i as f64 * opts.step).collect();
    let blur = opts.blur_fwhm.unwrap_or_else(|| default_blur_fwhm(opts.center));
    let lines = random_ensemble(seed, opts.center, opts.half_window);
    let reference = synth_ensemble_with(&lines, 0.0, cfg.f_m, &grid, blur)?;
    let delta_peak = PI * (2.0 * cfg.impedance * drive).sqrt() / opts.calibration_v_pi;

    let mut metric = coords
        .par_iter()
        .map(|&(x, y)| {
            let delta = delta_peak * strain_envelope(cfg, x, y);
            let on = synth_ensemble_with(&lines, delta, cfg.f_m, &grid, blur)?;
            smear_metric(&reference, &on)
        })
        .collect::<Result<Vec<f64>>>()?;

    if opts.noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_d1ff);
        let normal = Normal::new(0.0, opts.noise).expect("noise level validated");
        for d in metric.iter_mut() {
            *d = (*d * (1.0 + normal.sample(&mut rng))).max(0.0);
        }
    }
    BeamScan::new(positions.to_vec(), metric, Some(drive))
}
