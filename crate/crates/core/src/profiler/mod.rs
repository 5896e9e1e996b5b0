//! Beam mapping through spectral smearing of ensemble photoluminescence:
//! normalised cumulative spectra, the CDF-difference metric D, synthetic
//! quantum-dot ensembles and position scans.

mod ensemble;
mod scan;

pub use ensemble::{default_blur_fwhm, random_ensemble, synth_ensemble, synth_ensemble_with, EmitterLine};
pub use scan::{scan_beam, scan_beam_with, ScanAxis, ScanOptions};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::spectrum::check_strictly_increasing;

/// Photoluminescence spectrum; wavelengths in metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PLSpectrum {
    pub wavelength: Vec<f64>,
    pub counts: Vec<f64>,
}

impl PLSpectrum {
    pub fn new(wavelength: Vec<f64>, counts: Vec<f64>) -> Result<Self> {
        if wavelength.len() != counts.len() {
            return domain("wavelength and counts differ in length");
        }
        if wavelength.len() < 2 {
            return domain("a spectrum needs at least two samples");
        }
        check_strictly_increasing("wavelength", &wavelength)?;
        if counts.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
            return domain("counts must be finite and non-negative");
        }
        if counts.iter().sum::<f64>() <= 0.0 {
            return domain("spectrum has zero total counts");
        }
        Ok(Self { wavelength, counts })
    }

    /// Linear interpolation onto `grid`, which must lie inside this
    /// spectrum's range (to within half a local step).
    pub fn resample(&self, grid: &[f64]) -> Result<Self> {
        let n = self.wavelength.len();
        let (lo, hi) = (self.wavelength[0], self.wavelength[n - 1]);
        let tol_lo = 0.5 * (self.wavelength[1] - lo);
        let tol_hi = 0.5 * (hi - self.wavelength[n - 2]);
        if grid[0] < lo - tol_lo || grid[grid.len() - 1] > hi + tol_hi {
            return domain(format!(
                "grid mismatch: [{:e}, {:e}] not covered by [{lo:e}, {hi:e}]",
                grid[0],
                grid[grid.len() - 1]
            ));
        }
        let counts = grid
            .iter()
            .map(|&x| {
                let k = self.wavelength.partition_point(|&w| w < x).clamp(1, n - 1);
                let (x0, x1) = (self.wavelength[k - 1], self.wavelength[k]);
                let t = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
                self.counts[k - 1] + t * (self.counts[k] - self.counts[k - 1])
            })
            .collect();
        PLSpectrum::new(grid.to_vec(), counts)
    }
}

/// Normalised cumulative distribution: running sum of counts over the total.
pub fn cdf(spec: &PLSpectrum) -> Result<Vec<f64>> {
    let total: f64 = spec.counts.iter().sum();
    if !(total > 0.0) {
        return domain("cannot normalise a spectrum with zero total counts");
    }
    let mut acc = 0.0;
    let mut out: Vec<f64> = spec
        .counts
        .iter()
        .map(|c| {
            acc += c;
            acc / total
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    Ok(out)
}

/// `D = [∫ |C_off − C_on| dλ]²` (m²), trapezoid rule on the grid of `off`.
/// `on` is linearly resampled when the grids differ.
pub fn smear_metric(off: &PLSpectrum, on: &PLSpectrum) -> Result<f64> {
    let resampled;
    let on = if on.wavelength == off.wavelength {
        on
    } else {
        resampled = on.resample(&off.wavelength)?;
        &resampled
    };
    let a = cdf(off)?;
    let b = cdf(on)?;
    let x = &off.wavelength;
    let mut integral = 0.0;
    for i in 1..x.len() {
        let d0 = (a[i - 1] - b[i - 1]).abs();
        let d1 = (a[i] - b[i]).abs();
        integral += 0.5 * (d0 + d1) * (x[i] - x[i - 1]);
    }
    Ok(integral * integral)
}

/// Positions (m) against the metric D at fixed drive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamScan {
    pub position: Vec<f64>,
    pub metric: Vec<f64>,
    /// Drive power, W, when known.
    pub drive_power: Option<f64>,
}

impl BeamScan {
    pub fn new(position: Vec<f64>, metric: Vec<f64>, drive_power: Option<f64>) -> Result<Self> {
        if position.len() != metric.len() {
            return domain("position and metric differ in length");
        }
        if position.is_empty() {
            return Err(Error::Degenerate("empty beam scan".into()));
        }
        check_strictly_increasing("position", &position)?;
        if metric.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return domain("metric values must be finite and non-negative");
        }
        Ok(Self { position, metric, drive_power })
    }
}
