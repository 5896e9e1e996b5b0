use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PLSpectrum;
use crate::constants::{ELECTRON_VOLT, PLANCK, SPEED_OF_LIGHT};
use crate::error::{domain, require_non_negative, Result};
use crate::spectrum::{check_strictly_increasing, default_truncation, sideband_weights};

/// One emitter line of an ensemble; lengths in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterLine {
    pub center: f64,
    /// Full width at half maximum.
    pub fwhm: f64,
    pub height: f64,
}

/// Default spectrometer resolution: 30 µeV expressed as a wavelength FWHM at `lambda`.
pub fn default_blur_fwhm(lambda: f64) -> f64 {
    let energy = PLANCK * SPEED_OF_LIGHT / lambda;
    lambda * 30e-6 * ELECTRON_VOLT / energy
}

/// Seeded synthetic ensemble: 20–40 lines with centres uniform over the
/// central 80% of `center ± half_window`, FWHM 10–25 pm and log-uniform
/// heights spanning a decade.
pub fn random_ensemble(seed: u64, center: f64, half_window: f64) -> Vec<EmitterLine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(20..=40);
    (0..count)
        .map(|_| EmitterLine {
            center: center + rng.gen_range(-0.8..=0.8) * half_window,
            fwhm: rng.gen_range(10e-12..=25e-12),
            height: 10f64.powf(rng.gen_range(0.0..=1.0)),
        })
        .collect()
}

/// Ensemble spectrum under phase modulation with index `delta_local`,
/// blurred by the default spectrometer response.
pub fn synth_ensemble(lines: &[EmitterLine], delta_local: f64, f_m: f64, grid: &[f64]) -> Result<PLSpectrum> {
    let mid = grid.get(grid.len() / 2).copied().unwrap_or(0.0);
    synth_ensemble_with(lines, delta_local, f_m, grid, default_blur_fwhm(mid))
}

/// As [`synth_ensemble`] with an explicit Gaussian blur FWHM (m); 0 disables it.
///
/// Each line becomes a comb of Lorentzians with weights `J_n²(δ)` spaced by
/// `λ² f_m / c`.
pub fn synth_ensemble_with(
    lines: &[EmitterLine],
    delta_local: f64,
    f_m: f64,
    grid: &[f64],
    blur_fwhm: f64,
) -> Result<PLSpectrum> {
    require_non_negative("delta_local", delta_local)?;
    require_non_negative("blur_fwhm", blur_fwhm)?;
    if grid.len() < 2 {
        return domain("grid needs at least two points");
    }
    check_strictly_increasing("grid", grid)?;
    if lines.is_empty() {
        return domain("ensemble has no lines");
    }
    let n_max = default_truncation(delta_local);
    let weights = sideband_weights(delta_local, n_max);
    let mut counts = vec![0.0; grid.len()];
    for line in lines {
        let spacing = line.center * line.center * f_m / SPEED_OF_LIGHT;
        let hw2 = (0.5 * line.fwhm).powi(2);
        for (n, &w) in weights.iter().enumerate() {
            if w < 1e-16 {
                continue;
            }
            let amp = line.height * w;
            let offsets: &[f64] = if n == 0 { &[0.0] } else { &[1.0, -1.0] };
            for &sign in offsets {
                let c = line.center + sign * n as f64 * spacing;
                for (out, &x) in counts.iter_mut().zip(grid) {
                    let d = x - c;
                    *out += amp * hw2 / (hw2 + d * d);
                }
            }
        }
    }
    if blur_fwhm > 0.0 {
        counts = gaussian_blur(grid, &counts, blur_fwhm);
    }
    PLSpectrum::new(grid.to_vec(), counts)
}

/// Normalised local Gaussian average; weights are renormalised near the
/// grid edges.
fn gaussian_blur(grid: &[f64], values: &[f64], fwhm: f64) -> Vec<f64> {
    let sigma = fwhm / (8.0 * std::f64::consts::LN_2).sqrt();
    let reach = 4.0 * sigma;
    let n = grid.len();
    let mut lo = 0;
    let mut hi = 0;
    (0..n)
        .map(|i| {
            let x = grid[i];
            while grid[lo] < x - reach {
                lo += 1;
            }
            while hi + 1 < n && grid[hi + 1] <= x + reach {
                hi += 1;
            }
            let (mut num, mut den) = (0.0, 0.0);
            for j in lo..=hi {
                let t = (grid[j] - x) / sigma;
                let w = (-0.5 * t * t).exp();
                num += w * values[j];
                den += w;
            }
            num / den
        })
        .collect()
}
