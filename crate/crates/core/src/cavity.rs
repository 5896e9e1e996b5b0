//! Microwave side of the SAW cavity: quality factors, decay rates, one-port
//! reflection, free spectral range, finesse and steady-state phonon number.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, TWO_PI};
use crate::error::{domain, require_non_negative, require_positive, Result};

/// Mode frequency (Hz) with internal and external quality factors.
///
/// `q_external = f64::INFINITY` describes a decoupled cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    pub f_m: f64,
    pub q_internal: f64,
    pub q_external: f64,
}

impl CavityParams {
    pub fn new(f_m: f64, q_internal: f64, q_external: f64) -> Result<Self> {
        let p = Self { f_m, q_internal, q_external };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("f_m", self.f_m)?;
        require_positive("q_internal", self.q_internal)?;
        require_positive("q_external", self.q_external)?;
        if !self.f_m.is_finite() || !self.q_internal.is_finite() {
            return domain("f_m and q_internal must be finite");
        }
        Ok(())
    }

    /// Angular total decay rate κ.
    pub fn kappa_loss(&self) -> f64 {
        TWO_PI * self.f_m * (1.0 / self.q_internal + 1.0 / self.q_external)
    }

    /// Angular external coupling rate κ_ext.
    pub fn kappa_ext(&self) -> f64 {
        TWO_PI * self.f_m / self.q_external
    }
}

/// Angular decay rates plus longitudinal-mode bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityRates {
    /// Total decay rate κ, rad/s.
    pub kappa_loss: f64,
    /// External coupling rate κ_ext, rad/s.
    pub kappa_ext: f64,
    /// Free spectral range, Hz.
    pub fsr: f64,
    pub finesse: f64,
}

impl CavityRates {
    /// Internal loss rate κ − κ_ext.
    pub fn kappa_int(&self) -> f64 {
        self.kappa_loss - self.kappa_ext
    }

    /// Recovers the quality factors at mode frequency `f_m`.
    pub fn to_params(&self, f_m: f64) -> Result<CavityParams> {
        let omega = TWO_PI * f_m;
        let q_e = if self.kappa_ext == 0.0 { f64::INFINITY } else { omega / self.kappa_ext };
        CavityParams::new(f_m, omega / self.kappa_int(), q_e)
    }

    /// Rates without longitudinal-mode information (FSR and finesse left NaN),
    /// for callers that only need the reflection line shape.
    pub fn from_q(p: &CavityParams) -> Result<Self> {
        p.validate()?;
        Ok(Self { kappa_loss: p.kappa_loss(), kappa_ext: p.kappa_ext(), fsr: f64::NAN, finesse: f64::NAN })
    }

    fn validate(&self) -> Result<()> {
        require_positive("kappa_loss", self.kappa_loss)?;
        require_non_negative("kappa_ext", self.kappa_ext)?;
        if self.kappa_ext > self.kappa_loss {
            return domain("kappa_ext exceeds kappa_loss");
        }
        Ok(())
    }
}

/// κ = 2πf(1/Q_i + 1/Q_e), κ_ext = 2πf/Q_e, FSR = v/(2L), F = FSR/(κ/2π).
pub fn rates_from_params(p: &CavityParams, v_saw: f64, l_eff: f64) -> Result<CavityRates> {
    p.validate()?;
    require_positive("v_saw", v_saw)?;
    require_positive("l_eff", l_eff)?;
    let kappa_loss = p.kappa_loss();
    let fsr = v_saw / (2.0 * l_eff);
    Ok(CavityRates { kappa_loss, kappa_ext: p.kappa_ext(), fsr, finesse: fsr / (kappa_loss / TWO_PI) })
}

/// One-port reflection amplitude at `detuning` (Hz) from the mode.
pub fn s11_model(detuning: f64, rates: &CavityRates) -> Complex64 {
    let d = 2.0 * TWO_PI * detuning;
    let ke = rates.kappa_ext;
    let ki = rates.kappa_int();
    Complex64::new(ke - ki, -d) / Complex64::new(ke + ki, d)
}

/// Power reflection in dB.
pub fn s11_db(detuning: f64, rates: &CavityRates) -> f64 {
    10.0 * s11_model(detuning, rates).norm_sqr().log10()
}

/// Steady-state phonon number for resonant drive power `p_micro` (W).
pub fn phonon_number(p_micro: f64, f_m: f64, rates: &CavityRates) -> Result<f64> {
    phonon_number_detuned(p_micro, f_m, rates, 0.0)
}

/// Phonon number for a drive detuned by `detuning` (Hz) from the mode:
/// `n = P/(ħω) · 4κ_ext / (κ² + 4Δ²)`.
pub fn phonon_number_detuned(p_micro: f64, f_m: f64, rates: &CavityRates, detuning: f64) -> Result<f64> {
    require_non_negative("p_micro", p_micro)?;
    require_positive("f_m", f_m)?;
    rates.validate()?;
    let flux = p_micro / (HBAR * TWO_PI * f_m);
    let d = TWO_PI * detuning;
    let k = rates.kappa_loss;
    Ok(flux * 4.0 * rates.kappa_ext / (k * k + 4.0 * d * d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn measured_q() -> CavityParams {
        CavityParams::new(3.6e9, 7600.0, 15300.0).unwrap()
    }

    fn dev1_rates() -> CavityRates {
        rates_from_params(&measured_q(), 0.830e-6 * 3.6e9, 146e-6).unwrap()
    }

    #[test]
    fn linewidth_fsr_finesse() {
        let r = dev1_rates();
        assert!((r.kappa_loss / TWO_PI / 709.0e3 - 1.0).abs() < 2e-3);
        assert!((r.fsr - 10.233e6).abs() < 1e3);
        assert!((r.finesse - 14.4).abs() < 0.1, "{}", r.finesse);
    }

    #[test]
    fn decoupled_limit() {
        let p = CavityParams::new(3.6e9, 7600.0, f64::INFINITY).unwrap();
        let r = rates_from_params(&p, 2988.0, 146e-6).unwrap();
        assert_eq!(r.kappa_ext, 0.0);
        assert!((r.kappa_loss - TWO_PI * 3.6e9 / 7600.0).abs() < 1e-6);
        assert_eq!(r.to_params(3.6e9).unwrap().q_external, f64::INFINITY);
        assert_eq!(phonon_number(1.0, 3.6e9, &r).unwrap(), 0.0);
        assert!((s11_model(0.0, &r).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_params() {
        assert!(CavityParams::new(0.0, 1.0, 1.0).is_err());
        assert!(CavityParams::new(1.0, -1.0, 1.0).is_err());
        assert!(CavityParams::new(1.0, 1.0, 0.0).is_err());
        assert!(rates_from_params(&measured_q(), 0.0, 1.0).is_err());
        assert!(rates_from_params(&measured_q(), 1.0, -1.0).is_err());
    }

    #[test]
    fn resonance_dip() {
        let r = dev1_rates();
        // ((1/7600 - 1/15300) / (1/7600 + 1/15300))^2 in dB
        let qi: f64 = 1.0 / 7600.0;
        let qe = 1.0 / 15300.0;
        let oracle = 20.0 * ((qi - qe) / (qi + qe)).log10();
        assert!((s11_db(0.0, &r) - oracle).abs() < 1e-10);
        assert!((s11_db(0.0, &r) + 9.47).abs() < 0.01);
        assert!((s11_model(1e12, &r).norm() - 1.0).abs() < 1e-6);
        assert!((s11_model(-1e12, &r).norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn critical_coupling_is_perfect_absorption() {
        let p = CavityParams::new(3.6e9, 9000.0, 9000.0).unwrap();
        let r = CavityRates::from_q(&p).unwrap();
        assert!(s11_model(0.0, &r).norm() < 1e-15);
    }

    #[test]
    fn phonon_number_reference() {
        let r = dev1_rates();
        assert_eq!(phonon_number(0.0, 3.6e9, &r).unwrap(), 0.0);
        let n = phonon_number(1e-6, 3.6e9, &r).unwrap();
        assert!((n / 1.25e11 - 1.0).abs() < 0.01, "{n:e}");
        let n2 = phonon_number(2e-6, 3.6e9, &r).unwrap();
        assert!((n2 / n - 2.0).abs() < 1e-12);
        assert!(phonon_number(-1.0, 3.6e9, &r).is_err());
    }

    #[test]
    fn detuned_occupation() {
        let r = dev1_rates();
        let n0 = phonon_number(1e-6, 3.6e9, &r).unwrap();
        let half = r.kappa_loss / (2.0 * TWO_PI);
        let nh = phonon_number_detuned(1e-6, 3.6e9, &r, half).unwrap();
        assert!((nh / n0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn round_trip_quality_factors() {
        let back = dev1_rates().to_params(3.6e9).unwrap();
        assert!((back.q_internal / 7600.0 - 1.0).abs() < 1e-12);
        assert!((back.q_external / 15300.0 - 1.0).abs() < 1e-12);
    }
}
