use nalgebra::DMatrix;

use super::lm::{nlls_fit, Bounds, FitResult, LmOptions, Problem};
use crate::constants::TWO_PI;
use crate::error::{domain, require_positive, Result};
use crate::spectrum::{
    bessel_j_derivatives, bessel_j_orders, default_truncation, delta_from_sideband_ratio, sideband_weights,
    ModulationModel, SpectrumTrace, MAX_ARGUMENT,
};

/// Parameter names reported by [`fit_modulation`]; `gamma` and `center` are
/// angular (rad/s).
pub const MODULATION_PARAMS: [&str; 5] = ["delta", "gamma", "amplitude", "background", "center"];

/// Residuals of the sideband-comb model against a trace.
///
/// Internal parameters are `[δ, γ/γ₀, A/A₀, b/A₀, ω₀/γ₀]` so that all
/// components are of order one.
pub struct ModulationProblem<'a> {
    omega: Vec<f64>,
    counts: &'a [f64],
    omega_m: f64,
    filter_hw: f64,
    gamma_scale: f64,
    amp_scale: f64,
}

impl<'a> ModulationProblem<'a> {
    pub fn new(trace: &'a SpectrumTrace, f_m: f64, filter_fwhm: f64, gamma_scale: f64, amp_scale: f64) -> Self {
        Self {
            omega: trace.detuning.iter().map(|d| TWO_PI * d).collect(),
            counts: &trace.counts,
            omega_m: TWO_PI * f_m,
            filter_hw: std::f64::consts::PI * filter_fwhm,
            gamma_scale,
            amp_scale,
        }
    }

    /// Internal parameter vector for a physical model.
    pub fn internal(&self, m: &ModulationModel) -> Vec<f64> {
        vec![
            m.delta,
            m.gamma / self.gamma_scale,
            m.amplitude / self.amp_scale,
            m.background / self.amp_scale,
            m.omega0 / self.gamma_scale,
        ]
    }

    fn evaluate(&self, p: &[f64], jac: Option<&mut DMatrix<f64>>) -> Vec<f64> {
        let delta = p[0];
        let gamma = p[1] * self.gamma_scale + self.filter_hw;
        let amp = p[2] * self.amp_scale;
        let bg = p[3] * self.amp_scale;
        let center = p[4] * self.gamma_scale;
        let n_max = default_truncation(delta.abs().min(MAX_ARGUMENT));
        let orders = bessel_j_orders(n_max + 1, delta);
        let deriv = bessel_j_derivatives(&orders);
        let w: Vec<f64> = orders[..=n_max].iter().map(|j| j * j).collect();
        let dw: Vec<f64> = (0..=n_max).map(|n| 2.0 * orders[n] * deriv[n]).collect();
        let g2 = gamma * gamma;
        let mut out = Vec::with_capacity(self.omega.len());
        let mut jac = jac;
        for (i, &om) in self.omega.iter().enumerate() {
            let base = om - center;
            let (mut s, mut s_d, mut s_g, mut s_c) = (0.0, 0.0, 0.0, 0.0);
            for n in 0..=n_max {
                let shifts: &[f64] = if n == 0 { &[0.0] } else { &[1.0, -1.0] };
                for &sign in shifts {
                    let d = base + sign * n as f64 * self.omega_m;
                    let den = g2 + d * d;
                    let l = g2 / den;
                    s += w[n] * l;
                    s_d += dw[n] * l;
                    s_g += w[n] * 2.0 * gamma * d * d / (den * den);
                    s_c += w[n] * 2.0 * g2 * d / (den * den);
                }
            }
            out.push(bg + amp * s - self.counts[i]);
            if let Some(j) = jac.as_deref_mut() {
                j[(i, 0)] = amp * s_d;
                j[(i, 1)] = amp * s_g * self.gamma_scale;
                j[(i, 2)] = s * self.amp_scale;
                j[(i, 3)] = self.amp_scale;
                j[(i, 4)] = amp * s_c * self.gamma_scale;
            }
        }
        out
    }
}

impl Problem for ModulationProblem<'_> {
    fn residuals(&self, params: &[f64]) -> Vec<f64> {
        self.evaluate(params, None)
    }

    fn jacobian(&self, params: &[f64]) -> Option<DMatrix<f64>> {
        let mut j = DMatrix::zeros(self.omega.len(), 5);
        self.evaluate(params, Some(&mut j));
        Some(j)
    }
}

/// Seed for δ from first-sideband and carrier peak heights above the floor.
fn seed_delta(trace: &SpectrumTrace, f_m: f64, center_hz: f64, floor: f64) -> Option<f64> {
    let lo = trace.detuning[0];
    let hi = trace.detuning[trace.len() - 1];
    let at = |d: f64| -> Option<f64> {
        if d < lo || d > hi {
            None
        } else {
            Some(trace.counts[trace.nearest_index(d)] - floor)
        }
    };
    let carrier = at(center_hz)?;
    let sides: Vec<f64> = [center_hz - f_m, center_hz + f_m].iter().filter_map(|&d| at(d)).collect();
    if sides.is_empty() {
        return None;
    }
    let side = sides.iter().sum::<f64>() / sides.len() as f64;
    if carrier <= 0.0 {
        return Some(delta_from_sideband_ratio(f64::MAX));
    }
    Some(delta_from_sideband_ratio(side.max(0.0) / carrier))
}

/// Fits the sideband-comb model to `trace`: δ, γ, amplitude, background and
/// carrier centre. `init` supplies the starting γ, centre and the (fixed)
/// filter width; δ and amplitude are seeded from the data.
pub fn fit_modulation(trace: &SpectrumTrace, f_m: f64, init: &ModulationModel) -> Result<FitResult> {
    require_positive("f_m", f_m)?;
    require_positive("init.gamma", init.gamma)?;
    if init.filter_fwhm < 0.0 {
        return domain("filter_fwhm must be non-negative");
    }
    let floor = trace.counts.iter().copied().fold(f64::INFINITY, f64::min);
    let peak = trace.counts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let center_hz = init.omega0 / TWO_PI;
    let mut delta0 = seed_delta(trace, f_m, center_hz, floor).unwrap_or(init.delta);
    if delta0 > 2.3 && init.delta > delta0 {
        delta0 = init.delta;
    }
    let wmax = sideband_weights(delta0, default_truncation(delta0)).into_iter().fold(0.0, f64::max);
    let amp0 = ((peak - floor) / wmax).max(f64::MIN_POSITIVE);
    let gamma_scale = init.gamma;
    let problem = ModulationProblem::new(trace, f_m, init.filter_fwhm, gamma_scale, amp0);
    let start = init.with_amplitude(amp0).with_background(floor);
    let mut x0 = problem.internal(&start);
    x0[0] = delta0;

    let center_limit = 0.5 * TWO_PI * f_m / gamma_scale;
    let bounds = Bounds {
        lower: vec![0.0, 1e-6, 0.0, f64::NEG_INFINITY, -center_limit],
        upper: vec![MAX_ARGUMENT, f64::INFINITY, f64::INFINITY, f64::INFINITY, center_limit],
    };
    let mut fit = nlls_fit(&problem, &x0, Some(&bounds), &LmOptions::default())?.with_names(&MODULATION_PARAMS);
    fit.rescale(1, gamma_scale, 0.0);
    fit.rescale(2, amp0, 0.0);
    fit.rescale(3, amp0, 0.0);
    fit.rescale(4, gamma_scale, 0.0);

    let delta = fit.params[0];
    if delta <= 1e-9 {
        fit.warnings.push("delta at lower bound 0".into());
    } else if delta >= MAX_ARGUMENT {
        fit.warnings.push(format!("delta at upper bound {MAX_ARGUMENT}"));
    }
    let span = trace.detuning[trace.len() - 1] - trace.detuning[0];
    if delta > 0.5 && span < 2.0 * f_m {
        fit.warnings.push("trace spans fewer than two sideband orders".into());
    }
    Ok(fit)
}

/// Physical model corresponding to a [`fit_modulation`] result.
pub fn model_from_fit(fit: &FitResult, f_m: f64, filter_fwhm: f64) -> ModulationModel {
    ModulationModel::new(fit.params[0], fit.params[1], TWO_PI * f_m)
        .with_amplitude(fit.params[2])
        .with_background(fit.params[3])
        .with_center(fit.params[4])
        .with_filter_fwhm(filter_fwhm)
}
