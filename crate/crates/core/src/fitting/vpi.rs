use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::lm::FitResult;
use crate::error::{domain, require_positive, Error, Result};

/// Drive powers (W, after cable-loss calibration) with the modulation index
/// fitted at each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSweep {
    pub p_micro: Vec<f64>,
    pub delta: Vec<f64>,
    /// Line impedance, Ω.
    pub impedance: f64,
}

impl PowerSweep {
    pub fn new(p_micro: Vec<f64>, delta: Vec<f64>, impedance: f64) -> Result<Self> {
        if p_micro.len() != delta.len() {
            return domain("power and delta arrays differ in length");
        }
        if p_micro.len() < 2 {
            return domain("a power sweep needs at least two points");
        }
        if let Some(p) = p_micro.iter().find(|p| !(**p > 0.0) || !p.is_finite()) {
            return domain(format!("drive powers must be positive, found {p}"));
        }
        if p_micro.windows(2).any(|w| w[1] <= w[0]) {
            return domain("drive powers must be strictly increasing");
        }
        if delta.iter().any(|d| !d.is_finite()) {
            return domain("delta values must be finite");
        }
        require_positive("impedance", impedance)?;
        Ok(Self { p_micro, delta, impedance })
    }
}

/// Least-squares fit of `δ = π √(2ZP) / V_π` through the origin.
///
/// Linear in `1/V_π`, so the solution is closed form; the reported sigma is
/// the propagated one-standard-deviation uncertainty of V_π (volts).
pub fn fit_vpi(sweep: &PowerSweep) -> Result<FitResult> {
    let s: Vec<f64> = sweep.p_micro.iter().map(|p| PI * (2.0 * sweep.impedance * p).sqrt()).collect();
    let sxx: f64 = s.iter().map(|v| v * v).sum();
    let sxy: f64 = s.iter().zip(&sweep.delta).map(|(a, b)| a * b).sum();
    if !(sxy > 0.0) {
        return Err(Error::Degenerate("modulation indices do not grow with drive".into()));
    }
    let b = sxy / sxx;
    let rss: f64 = s.iter().zip(&sweep.delta).map(|(x, y)| (y - b * x).powi(2)).sum();
    let m = s.len();
    let var_b = rss / (m - 1) as f64 / sxx;
    let v_pi = 1.0 / b;
    let var_v = var_b / b.powi(4);
    Ok(FitResult {
        names: vec!["v_pi".into()],
        params: vec![v_pi],
        covariance: vec![vec![var_v]],
        residual_norm: rss.sqrt(),
        iterations: 0,
        converged: true,
        gradient_norm: 0.0,
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep(v_pi: f64, scale: f64) -> PowerSweep {
        let p: Vec<f64> = (1..=8).map(|i| scale * 1e-6 * (i * i) as f64).collect();
        let d = p.iter().map(|p| PI * (100.0 * p).sqrt() / v_pi).collect();
        PowerSweep::new(p, d, 50.0).unwrap()
    }

    #[test]
    fn exact_recovery() {
        let fit = fit_vpi(&sweep(0.044, 1.0)).unwrap();
        assert!((fit.params[0] - 0.044).abs() < 1e-12);
        assert!(fit.sigma("v_pi").unwrap() < 1e-12);
    }

    #[test]
    fn power_rescaling_leaves_vpi_unchanged() {
        let a = sweep(0.22, 1.0);
        let b = sweep(0.22, 4.0);
        for (x, y) in a.delta.iter().zip(&b.delta) {
            assert!((y / x - 2.0).abs() < 1e-12);
        }
        let fa = fit_vpi(&a).unwrap().params[0];
        let fb = fit_vpi(&b).unwrap().params[0];
        assert!((fa - fb).abs() < 1e-12);
    }

    #[test]
    fn invalid_sweeps() {
        assert!(PowerSweep::new(vec![0.0, 1.0], vec![0.0, 1.0], 50.0).is_err());
        assert!(PowerSweep::new(vec![-1.0, 1.0], vec![0.0, 1.0], 50.0).is_err());
        assert!(PowerSweep::new(vec![1.0], vec![1.0], 50.0).is_err());
        assert!(PowerSweep::new(vec![2.0, 1.0], vec![1.0, 1.0], 50.0).is_err());
        let flat = PowerSweep::new(vec![1.0, 2.0], vec![0.0, 0.0], 50.0).unwrap();
        assert!(fit_vpi(&flat).is_err());
    }
}
