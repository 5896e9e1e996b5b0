//! Phase-modulated resonance fluorescence: Bessel-weighted Lorentzian sideband
//! combs, instrument filter closure and sideband weight utilities.
//!
//! Frequencies inside [`ModulationModel`] are angular (rad/s). Traces carry
//! ordinary-frequency detunings in Hz.

mod bessel;

pub(crate) use bessel::bessel_j_derivatives;
pub use bessel::{bessel_j, bessel_j_orders, MAX_ARGUMENT, MAX_ORDER};

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::constants::TWO_PI;
use crate::error::{domain, require_non_negative, require_positive, Result};

/// Tail mass of the sideband distribution tolerated by [`default_truncation`].
const TRUNCATION_TAIL: f64 = 1e-15;

/// Sampled spectrum: detuning from the carrier (Hz) against counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTrace {
    pub detuning: Vec<f64>,
    pub counts: Vec<f64>,
}

impl SpectrumTrace {
    pub fn new(detuning: Vec<f64>, counts: Vec<f64>) -> Result<Self> {
        if detuning.len() != counts.len() {
            return domain(format!("trace arrays differ in length ({} vs {})", detuning.len(), counts.len()));
        }
        if detuning.len() < 2 {
            return domain("a trace needs at least two samples");
        }
        check_strictly_increasing("detuning", &detuning)?;
        if let Some(c) = counts.iter().find(|c| !(**c >= 0.0) || !c.is_finite()) {
            return domain(format!("counts must be finite and non-negative, found {c}"));
        }
        Ok(Self { detuning, counts })
    }

    pub fn len(&self) -> usize {
        self.detuning.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detuning.is_empty()
    }

    /// Index of the sample closest to `detuning_hz`.
    pub fn nearest_index(&self, detuning_hz: f64) -> usize {
        let pos = self.detuning.partition_point(|&d| d < detuning_hz);
        if pos == 0 {
            0
        } else if pos == self.len() {
            self.len() - 1
        } else if (self.detuning[pos] - detuning_hz).abs() < (detuning_hz - self.detuning[pos - 1]).abs() {
            pos
        } else {
            pos - 1
        }
    }
}

pub(crate) fn check_strictly_increasing(name: &str, xs: &[f64]) -> Result<()> {
    if xs.iter().any(|x| !x.is_finite()) {
        return domain(format!("{name} contains non-finite values"));
    }
    if let Some(i) = xs.windows(2).position(|w| w[1] <= w[0]) {
        return domain(format!("{name} must be strictly increasing (index {})", i + 1));
    }
    Ok(())
}

/// Parameters of the classical phase-modulation spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationModel {
    /// Modulation index δ.
    pub delta: f64,
    /// Lorentzian half-width γ of the emitter component, rad/s.
    pub gamma: f64,
    /// Carrier position relative to the detuning origin, rad/s.
    pub omega0: f64,
    /// Modulation frequency ω_m, rad/s.
    pub omega_m: f64,
    pub amplitude: f64,
    pub background: f64,
    /// Sidebands kept on each side of the carrier.
    pub n_max: usize,
    /// Instrument filter FWHM, Hz (0 disables the filter).
    pub filter_fwhm: f64,
}

impl ModulationModel {
    /// Unit-amplitude model with no background or filter, centred at zero
    /// detuning and truncated by [`default_truncation`].
    pub fn new(delta: f64, gamma: f64, omega_m: f64) -> Self {
        Self {
            delta,
            gamma,
            omega0: 0.0,
            omega_m,
            amplitude: 1.0,
            background: 0.0,
            n_max: default_truncation(delta),
            filter_fwhm: 0.0,
        }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_background(mut self, background: f64) -> Self {
        self.background = background;
        self
    }

    pub fn with_filter_fwhm(mut self, filter_fwhm: f64) -> Self {
        self.filter_fwhm = filter_fwhm;
        self
    }

    pub fn with_center(mut self, omega0: f64) -> Self {
        self.omega0 = omega0;
        self
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return domain(format!("modulation index must be finite and ≥ 0, got {}", self.delta));
        }
        require_positive("gamma", self.gamma)?;
        require_positive("omega_m", self.omega_m)?;
        require_non_negative("filter_fwhm", self.filter_fwhm)?;
        let floor = minimum_truncation(self.delta);
        if self.n_max < floor {
            return domain(format!("n_max = {} is below the truncation floor ceil(δ)+5 = {floor}", self.n_max));
        }
        if !self.amplitude.is_finite() || !self.background.is_finite() || !self.omega0.is_finite() {
            return domain("amplitude, background and omega0 must be finite");
        }
        Ok(())
    }

    /// Half-width of each sideband after the instrument filter, rad/s.
    pub fn effective_gamma(&self) -> f64 {
        self.gamma + PI * self.filter_fwhm
    }
}

/// The truncation floor `ceil(δ) + 5`.
pub fn minimum_truncation(delta: f64) -> usize {
    delta.ceil() as usize + 5
}

/// Smallest order `N ≥ ceil(δ)+5` whose two-sided tail `2 Σ_{n>N} J_n²(δ)`
/// is below 1e-15.
pub fn default_truncation(delta: f64) -> usize {
    let floor = minimum_truncation(delta);
    if delta == 0.0 {
        return floor;
    }
    let ceiling = floor + 20 + (4.0 * delta.cbrt()).ceil() as usize;
    let orders = bessel_j_orders(ceiling, delta);
    let mut tail = 0.0;
    let mut n = ceiling;
    while n > floor {
        let next = tail + 2.0 * orders[n] * orders[n];
        if next >= TRUNCATION_TAIL {
            return n;
        }
        tail = next;
        n -= 1;
    }
    floor
}

/// Unit-peak Lorentzian with half-width `gamma`.
#[inline]
pub fn lorentzian(offset: f64, gamma: f64) -> f64 {
    let g2 = gamma * gamma;
    g2 / (g2 + offset * offset)
}

/// Synthesises the sideband comb on `grid` (detunings, Hz).
pub fn synth_spectrum(model: &ModulationModel, grid: &[f64]) -> Result<SpectrumTrace> {
    model.validate()?;
    check_strictly_increasing("grid", grid)?;
    let weights = sideband_weights(model.delta, model.n_max);
    let gamma = model.effective_gamma();
    let counts = grid
        .iter()
        .map(|&d| model.background + model.amplitude * comb_value(TWO_PI * d, model, &weights, gamma))
        .collect();
    SpectrumTrace::new(grid.to_vec(), counts)
}

/// Multiplies every count by `1 + relative·N(0, 1)` from a ChaCha8 stream
/// seeded with `seed`, clamping at zero.
pub fn add_relative_noise(trace: &SpectrumTrace, relative: f64, seed: u64) -> Result<SpectrumTrace> {
    require_non_negative("relative noise", relative)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = trace
        .counts
        .iter()
        .map(|&c| {
            let e: f64 = rng.sample(StandardNormal);
            (c * (1.0 + relative * e)).max(0.0)
        })
        .collect();
    SpectrumTrace::new(trace.detuning.clone(), counts)
}

/// `Σ_n J_n² L(ω − (ω₀ − nω_m))` at angular detuning `omega`; `weights[|n|]`.
pub(crate) fn comb_value(omega: f64, model: &ModulationModel, weights: &[f64], gamma: f64) -> f64 {
    let base = omega - model.omega0;
    let mut sum = weights[0] * lorentzian(base, gamma);
    for (n, w) in weights.iter().enumerate().skip(1) {
        let shift = n as f64 * model.omega_m;
        sum += w * (lorentzian(base + shift, gamma) + lorentzian(base - shift, gamma));
    }
    sum
}

/// `J_n²(δ)` for `n = 0..=n_max`.
pub fn sideband_weights(delta: f64, n_max: usize) -> Vec<f64> {
    bessel_j_orders(n_max, delta).into_iter().map(|j| j * j).collect()
}

/// Effective sideband half-width (rad/s) after a Lorentzian instrument filter.
///
/// Two Lorentzians convolve to a Lorentzian whose FWHM is the sum of the two.
pub fn convolve_filter(gamma_qd: f64, filter_fwhm: f64) -> Result<f64> {
    require_non_negative("gamma_qd", gamma_qd)?;
    require_non_negative("filter_fwhm", filter_fwhm)?;
    Ok(gamma_qd + PI * filter_fwhm)
}

/// Fraction of emitted power in sideband `n`, `J_n²(δ)`.
pub fn sideband_power(n: i32, delta: f64) -> Result<f64> {
    let order = n.unsigned_abs();
    if order > MAX_ORDER {
        return domain(format!("sideband order {n} exceeds ±{MAX_ORDER}"));
    }
    require_non_negative("delta", delta)?;
    let j = bessel_j(order, delta)?;
    Ok(j * j)
}

/// Ratio of phonon-subtraction to phonon-addition first-sideband weights,
/// `(n+1)/n`, for a cavity occupation `n`.
pub fn sideband_asymmetry_ratio(n_phonon: f64) -> Result<f64> {
    require_positive("n_phonon", n_phonon)?;
    Ok(1.0 + 1.0 / n_phonon)
}

/// Inverts `J_1²(δ)/J_0²(δ) = ratio` on the first branch `δ ∈ [0, j_{0,1})`.
pub fn delta_from_sideband_ratio(ratio: f64) -> f64 {
    if !(ratio > 0.0) {
        return 0.0;
    }
    const FIRST_ZERO_J0: f64 = 2.404_825_557_695_773;
    let f = |d: f64| {
        let j = bessel_j_orders(1, d);
        j[1] * j[1] - ratio * j[0] * j[0]
    };
    let (mut lo, mut hi) = (0.0, FIRST_ZERO_J0 * (1.0 - 1e-12));
    if f(hi) < 0.0 {
        return hi;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    const F_M: f64 = 3.6e9;

    #[test]
    fn zero_index_is_a_single_lorentzian() {
        let gamma = TWO_PI * 100e6;
        let m = ModulationModel::new(0.0, gamma, TWO_PI * F_M);
        let g = grid(-10e9, 10e9, 2001);
        let t = synth_spectrum(&m, &g).unwrap();
        for (d, c) in t.detuning.iter().zip(&t.counts) {
            assert!((c - lorentzian(TWO_PI * d, gamma)).abs() < 1e-15);
        }
    }

    #[test]
    fn first_sideband_ratio_at_unit_index() {
        let m = ModulationModel::new(1.0, TWO_PI * 100e6, TWO_PI * F_M);
        let t = synth_spectrum(&m, &[-F_M, 0.0, F_M]).unwrap();
        // Bessel oracle: (0.440051 / 0.765198)^2 = 0.330734
        let ratio = t.counts[2] / t.counts[1];
        assert!((ratio - 0.3307).abs() < 2e-3, "ratio {ratio}");
        assert!((t.counts[0] - t.counts[2]).abs() < 1e-15);
    }

    #[test]
    fn carrier_vanishes_at_first_zero_of_j0() {
        let m = ModulationModel::new(2.404_826, TWO_PI * 1e6, TWO_PI * F_M);
        let t = synth_spectrum(&m, &[0.0, F_M]).unwrap();
        assert!(t.counts[0] < 1e-6 * t.counts[1]);
    }

    #[test]
    fn filter_closure() {
        let g = TWO_PI * 50e6;
        assert_eq!(convolve_filter(g, 0.0).unwrap(), g);
        // 200 MHz + 600 MHz FWHM -> 800 MHz FWHM -> half-width pi*800 MHz
        let eff = convolve_filter(PI * 200e6, 600e6).unwrap();
        assert!((eff / PI - 800e6).abs() < 1e-3);
        assert!(convolve_filter(-1.0, 0.0).is_err());
        assert!(convolve_filter(1.0, -1.0).is_err());
    }

    #[test]
    fn sideband_power_values() {
        assert_eq!(sideband_power(0, 0.0).unwrap(), 1.0);
        let p = sideband_power(1, 2.0).unwrap();
        assert!((p - 0.3326).abs() < 1e-4, "{p}");
        assert_eq!(sideband_power(-1, 2.0).unwrap(), p);
        assert!(sideband_power(61, 1.0).is_err());
    }

    #[test]
    fn asymmetry_ratio() {
        assert_eq!(sideband_asymmetry_ratio(1.0).unwrap(), 2.0);
        assert_eq!(sideband_asymmetry_ratio(4.0).unwrap(), 1.25);
        assert!((sideband_asymmetry_ratio(1e11).unwrap() - 1.0).abs() < 1e-10);
        assert!(sideband_asymmetry_ratio(0.0).is_err());
        assert!(sideband_asymmetry_ratio(-3.0).is_err());
    }

    #[test]
    fn model_validation() {
        let ok = ModulationModel::new(1.0, 1.0, 1.0);
        assert!(ok.validate().is_ok());
        assert!(ok.with_n_max(5).validate().is_err());
        assert!(ModulationModel::new(-0.1, 1.0, 1.0).validate().is_err());
        assert!(ModulationModel::new(0.1, 0.0, 1.0).validate().is_err());
        assert!(ModulationModel::new(0.1, 1.0, 0.0).validate().is_err());
        assert!(ok.with_filter_fwhm(-1.0).validate().is_err());
    }

    #[test]
    fn trace_invariants() {
        assert!(SpectrumTrace::new(vec![0.0], vec![1.0]).is_err());
        assert!(SpectrumTrace::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(SpectrumTrace::new(vec![1.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(SpectrumTrace::new(vec![0.0, 1.0], vec![1.0, -1.0]).is_err());
        assert!(SpectrumTrace::new(vec![0.0, 1.0], vec![1.0, 0.0]).is_ok());
    }

    #[test]
    fn sideband_ratio_inversion() {
        for &d in &[0.05, 0.3, 1.0, 1.7, 2.2] {
            let j = bessel_j_orders(1, d);
            let r = (j[1] / j[0]).powi(2);
            assert!((delta_from_sideband_ratio(r) - d).abs() < 1e-9);
        }
        assert_eq!(delta_from_sideband_ratio(0.0), 0.0);
    }

    #[test]
    fn default_truncation_respects_floor() {
        for &d in &[0.0, 0.4, 1.0, 3.3, 10.0, 40.0] {
            assert!(default_truncation(d) >= minimum_truncation(d));
        }
    }
}
