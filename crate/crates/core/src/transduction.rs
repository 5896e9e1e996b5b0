//! Conversion chain from microwave drive to optical modulation:
//! power → voltage, power → phonon number → modulation index, half-wave
//! voltage, single-phonon scaling and total efficiency.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::acoustic_mode::DeviceConfig;
use crate::cavity::{phonon_number, phonon_number_detuned, CavityRates};
use crate::constants::{HBAR, TWO_PI};
use crate::error::{domain, require_non_negative, require_positive, Error, Result};
use crate::spectrum::bessel_j;

/// Largest modulation index treated as the single-phonon (J₁² ≈ δ²/4) regime.
pub const SMALL_DELTA: f64 = 0.3;

/// `V = √(2ZP)`.
pub fn voltage_from_power(p_micro: f64, impedance: f64) -> Result<f64> {
    require_non_negative("p_micro", p_micro)?;
    require_positive("impedance", impedance)?;
    Ok((2.0 * impedance * p_micro).sqrt())
}

/// Modulation index `δ = 2g₀√n/ω_m` for a resonant drive; `g0_hz` is g₀/2π.
pub fn delta_from_drive(p_micro: f64, cfg: &DeviceConfig, rates: &CavityRates, g0_hz: f64) -> Result<f64> {
    delta_from_drive_detuned(p_micro, cfg, rates, g0_hz, 0.0)
}

/// As [`delta_from_drive`] with the drive `detuning_hz` away from the cavity mode.
pub fn delta_from_drive_detuned(
    p_micro: f64,
    cfg: &DeviceConfig,
    rates: &CavityRates,
    g0_hz: f64,
    detuning_hz: f64,
) -> Result<f64> {
    cfg.validate()?;
    require_non_negative("g0", g0_hz)?;
    let n = phonon_number_detuned(p_micro, cfg.f_m, rates, detuning_hz)?;
    Ok(2.0 * TWO_PI * g0_hz * n.sqrt() / cfg.omega_m())
}

/// Half-wave voltage implied by the chain, `V_π = πV/δ`; independent of power.
pub fn v_pi_from_chain(cfg: &DeviceConfig, rates: &CavityRates, g0_hz: f64, detuning_hz: f64) -> Result<f64> {
    let p_ref = 1e-3;
    let delta = delta_from_drive_detuned(p_ref, cfg, rates, g0_hz, detuning_hz)?;
    if !(delta > 0.0) {
        return Err(Error::Degenerate("no modulation: V_π is unbounded".into()));
    }
    Ok(PI * voltage_from_power(p_ref, cfg.impedance)? / delta)
}

/// Ratio `V_π(off) / V_π(on)` for a drive `detuning_hz` off resonance.
///
/// The cavity part follows from the detuned phonon occupation; any
/// electro-acoustic (IDT matching) gain in drive power enters through
/// `impedance_multiplier`, so the ratio is `√(multiplier · n_on / n_off)`.
pub fn vpi_enhancement(rates: &CavityRates, f_m: f64, detuning_hz: f64, impedance_multiplier: f64) -> Result<f64> {
    require_positive("impedance_multiplier", impedance_multiplier)?;
    let on = phonon_number(1.0, f_m, rates)?;
    let off = phonon_number_detuned(1.0, f_m, rates, detuning_hz)?;
    if !(off > 0.0) {
        return Err(Error::Degenerate("no off-resonant occupation".into()));
    }
    Ok((impedance_multiplier * on / off).sqrt())
}

/// `η = rate / (P / ħω_m)`: detected photons per incident microwave photon.
pub fn total_efficiency(count_rate: f64, p_micro: f64, f_m: f64) -> Result<f64> {
    require_non_negative("count_rate", count_rate)?;
    require_positive("p_micro", p_micro)?;
    require_positive("f_m", f_m)?;
    Ok(count_rate / (p_micro / (HBAR * TWO_PI * f_m)))
}

/// Resonant scattering counts against drive power for a pump red-detuned by
/// one mechanical quantum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSweep {
    pub p_micro: Vec<f64>,
    pub counts: Vec<f64>,
    pub background: f64,
    /// Modulation index at each power, when known.
    pub delta: Option<Vec<f64>>,
}

impl RateSweep {
    pub fn new(p_micro: Vec<f64>, counts: Vec<f64>, background: f64, delta: Option<Vec<f64>>) -> Result<Self> {
        if p_micro.len() != counts.len() || delta.as_ref().is_some_and(|d| d.len() != p_micro.len()) {
            return domain("sweep arrays differ in length");
        }
        for &p in &p_micro {
            require_positive("p_micro", p)?;
        }
        for &c in &counts {
            require_non_negative("counts", c)?;
        }
        require_non_negative("background", background)?;
        Ok(Self { p_micro, counts, background, delta })
    }
}

/// Synthetic sweep `counts = bg + A·J₁²(δ)` with `δ = delta_per_sqrt_watt·√P`.
pub fn synth_rate_sweep(
    p_micro: &[f64],
    delta_per_sqrt_watt: f64,
    amplitude: f64,
    background: f64,
) -> Result<RateSweep> {
    require_non_negative("delta_per_sqrt_watt", delta_per_sqrt_watt)?;
    let delta: Vec<f64> = p_micro.iter().map(|p| delta_per_sqrt_watt * p.max(0.0).sqrt()).collect();
    let counts =
        delta.iter().map(|&d| Ok(background + amplitude * bessel_j(1, d)?.powi(2))).collect::<Result<Vec<f64>>>()?;
    RateSweep::new(p_micro.to_vec(), counts, background, Some(delta))
}

/// Log-log power law of background-subtracted counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub slope: f64,
    pub slope_sigma: f64,
    /// True when the sweep leaves the single-phonon regime.
    pub flagged: bool,
    pub warnings: Vec<String>,
}

/// Fits `ln(counts − bg) = a + s·ln P`; a slope of one marks single-phonon
/// absorption.
pub fn resonant_rate_scaling(sweep: &RateSweep) -> Result<ScalingResult> {
    let mut warnings = Vec::new();
    let points: Vec<(f64, f64)> = sweep
        .p_micro
        .iter()
        .zip(&sweep.counts)
        .filter(|(_, &c)| c > sweep.background)
        .map(|(&p, &c)| (p.ln(), (c - sweep.background).ln()))
        .collect();
    if points.len() < sweep.counts.len() {
        warnings.push(format!("{} point(s) at or below background excluded", sweep.counts.len() - points.len()));
    }
    if points.len() < 2 {
        return Err(Error::Degenerate("fewer than two points above background".into()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("sweep has a single power".into()));
    }
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    let slope_sigma = if points.len() > 2 {
        let rss: f64 = points.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let mut flagged = false;
    if let Some(d) = &sweep.delta {
        let max = d.iter().copied().fold(0.0, f64::max);
        if max >= SMALL_DELTA {
            flagged = true;
            warnings.push(format!("sweep reaches δ = {max:.3} ≥ {SMALL_DELTA}; J₁² saturates"));
        }
    } else if (slope - 1.0).abs() > 0.05 {
        flagged = true;
        warnings.push(format!("slope {slope:.3} departs from single-phonon scaling"));
    }
    Ok(ScalingResult { slope, slope_sigma, flagged, warnings })
}

/// Chain evaluated at one drive power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransductionReport {
    /// W at the device.
    pub p_micro: f64,
    pub voltage: f64,
    pub n_phonon: f64,
    pub delta: f64,
    pub g0_over_2pi: f64,
    pub v_pi: f64,
    /// `None` without a measured count rate.
    pub eta: Option<f64>,
}

/// Evaluates the chain at `p_micro`; `count_rate` (detected photons/s)
/// enables η.
pub fn transduction_report(
    p_micro: f64,
    cfg: &DeviceConfig,
    rates: &CavityRates,
    g0_hz: f64,
    count_rate: Option<f64>,
) -> Result<TransductionReport> {
    require_positive("p_micro", p_micro)?;
    let voltage = voltage_from_power(p_micro, cfg.impedance)?;
    let n_phonon = phonon_number(p_micro, cfg.f_m, rates)?;
    let delta = delta_from_drive(p_micro, cfg, rates, g0_hz)?;
    let v_pi = if delta > 0.0 { PI * voltage / delta } else { f64::INFINITY };
    let eta = count_rate.map(|r| total_efficiency(r, p_micro, cfg.f_m)).transpose()?;
    Ok(TransductionReport { p_micro, voltage, n_phonon, delta, g0_over_2pi: g0_hz, v_pi, eta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::CavityParams;

    fn dev1() -> (DeviceConfig, CavityRates) {
        let cfg = DeviceConfig::builtin("dev1").unwrap();
        let rates = CavityRates::from_q(&CavityParams::new(cfg.f_m, 7600.0, 15300.0).unwrap()).unwrap();
        (cfg, rates)
    }

    #[test]
    fn voltage_examples() {
        assert_eq!(voltage_from_power(0.0, 50.0).unwrap(), 0.0);
        assert!((voltage_from_power(1e-3, 50.0).unwrap() - 0.316227766).abs() < 1e-9);
        let v = voltage_from_power(2e-3, 50.0).unwrap();
        assert!((voltage_from_power(8e-3, 50.0).unwrap() / v - 2.0).abs() < 1e-15);
        assert!(voltage_from_power(-1.0, 50.0).is_err());
    }

    #[test]
    fn delta_at_one_microwatt() {
        let (cfg, rates) = dev1();
        let d = delta_from_drive(1e-6, &cfg, &rates, 1.4e3).unwrap();
        assert!((d - 0.275).abs() < 0.005, "{d}");
        assert_eq!(delta_from_drive(0.0, &cfg, &rates, 1.4e3).unwrap(), 0.0);
        let d4 = delta_from_drive(4e-6, &cfg, &rates, 1.4e3).unwrap();
        assert!((d4 / d - 2.0).abs() < 1e-14);
    }

    #[test]
    fn efficiency_examples() {
        assert_eq!(total_efficiency(0.0, 1e-3, 3.6e9).unwrap(), 0.0);
        let p = 1e17 * HBAR * TWO_PI * 3.6e9;
        assert!((total_efficiency(100.0, p, 3.6e9).unwrap() / 1e-15 - 1.0).abs() < 1e-12);
        assert!(total_efficiency(1.0, 0.0, 3.6e9).is_err());
    }

    #[test]
    fn scaling_flags() {
        let p: Vec<f64> = (0..10).map(|i| 1e-6 * 1.5f64.powi(i)).collect();
        let small = resonant_rate_scaling(&synth_rate_sweep(&p, 2.0, 1e4, 10.0).unwrap()).unwrap();
        assert!(!small.flagged);
        let big = resonant_rate_scaling(&synth_rate_sweep(&p, 2.0 / p[9].sqrt(), 1e4, 10.0).unwrap()).unwrap();
        assert!(big.flagged && big.slope < 1.0);
    }

    #[test]
    fn report_is_consistent() {
        let (cfg, rates) = dev1();
        let r = transduction_report(1e-3, &cfg, &rates, 1.4e3, Some(50.0)).unwrap();
        assert!((r.delta * r.v_pi / (PI * r.voltage) - 1.0).abs() < 1e-12);
        assert!(r.eta.unwrap() > 0.0);
        let chain = v_pi_from_chain(&cfg, &rates, 1.4e3, 0.0).unwrap();
        assert!((chain / r.v_pi - 1.0).abs() < 1e-12);
    }
}
