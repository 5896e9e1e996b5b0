use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lm::{nlls_fit, Bounds, FitResult, LmOptions, Problem};
use crate::cavity::CavityParams;
use crate::constants::TWO_PI;
use crate::error::{domain, Result};
use crate::spectrum::check_strictly_increasing;

/// Largest quality factor the fitter will report.
pub const Q_UPPER_BOUND: f64 = 1e9;

/// Reflection samples: power in dB, or the complex amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum S11Data {
    MagnitudeDb(Vec<f64>),
    Complex(Vec<Complex64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S11Trace {
    /// Probe frequency, Hz.
    pub freq: Vec<f64>,
    pub data: S11Data,
}

impl S11Trace {
    pub fn new(freq: Vec<f64>, data: S11Data) -> Result<Self> {
        let n = match &data {
            S11Data::MagnitudeDb(v) => v.len(),
            S11Data::Complex(v) => v.len(),
        };
        if n != freq.len() {
            return domain("S11 frequency and data arrays differ in length");
        }
        if n < 5 {
            return domain("an S11 trace needs at least five samples");
        }
        check_strictly_increasing("freq", &freq)?;
        let finite = match &data {
            // −∞ dB is a perfect dip (zero reflected power).
            S11Data::MagnitudeDb(v) => v.iter().all(|x| x.is_finite() || *x == f64::NEG_INFINITY),
            S11Data::Complex(v) => v.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
        };
        if !finite {
            return domain("S11 data contain non-finite values");
        }
        Ok(Self { freq, data })
    }

    /// |S11|² on a linear scale.
    pub fn power(&self) -> Vec<f64> {
        match &self.data {
            S11Data::MagnitudeDb(v) => v.iter().map(|db| 10f64.powf(db / 10.0)).collect(),
            S11Data::Complex(v) => v.iter().map(|z| z.norm_sqr()).collect(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self.data, S11Data::Complex(_))
    }
}

/// Which side of critical coupling a magnitude-only fit reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingBranch {
    /// κ_ext < κ_int, i.e. Q_i < Q_e.
    #[default]
    UnderCoupled,
    OverCoupled,
}

/// Residuals of the one-port reflection model.
///
/// Internal parameters: `u = (f_m − f₀)/ℓ`, `k_e = κ_ext/κ₀`, `k_i = κ_int/κ₀`
/// followed by the prefactor (`|a|²` for magnitude data, `Re a, Im a` for
/// complex data), with `ℓ = κ₀/2π`.
pub struct S11Problem<'a> {
    trace: &'a S11Trace,
    power: Vec<f64>,
    f0: f64,
    linewidth: f64,
}

impl<'a> S11Problem<'a> {
    pub fn new(trace: &'a S11Trace, f0: f64, linewidth: f64) -> Self {
        Self { trace, power: trace.power(), f0, linewidth }
    }

    pub fn n_params(&self) -> usize {
        if self.trace.is_complex() {
            5
        } else {
            4
        }
    }

    fn scaled_detuning(&self, f: f64, u: f64) -> f64 {
        (f - self.f0) / self.linewidth - u
    }

    fn evaluate(&self, p: &[f64], mut jac: Option<&mut DMatrix<f64>>) -> Vec<f64> {
        let (u, ke, ki) = (p[0], p[1], p[2]);
        let m = self.trace.freq.len();
        match &self.trace.data {
            S11Data::MagnitudeDb(_) => {
                let s = p[3];
                let mut out = Vec::with_capacity(m);
                for (i, &f) in self.trace.freq.iter().enumerate() {
                    let d = self.scaled_detuning(f, u);
                    let num = (ke - ki).powi(2) + 4.0 * d * d;
                    let den = (ke + ki).powi(2) + 4.0 * d * d;
                    let r = num / den;
                    out.push(s * r - self.power[i]);
                    if let Some(j) = jac.as_deref_mut() {
                        let den2 = den * den;
                        j[(i, 0)] = -s * (8.0 * d * den - 8.0 * d * num) / den2;
                        j[(i, 1)] = s * (2.0 * (ke - ki) * den - 2.0 * (ke + ki) * num) / den2;
                        j[(i, 2)] = s * (-2.0 * (ke - ki) * den - 2.0 * (ke + ki) * num) / den2;
                        j[(i, 3)] = r;
                    }
                }
                out
            }
            S11Data::Complex(z) => {
                let a = Complex64::new(p[3], p[4]);
                let mut out = vec![0.0; 2 * m];
                for (i, &f) in self.trace.freq.iter().enumerate() {
                    let d = self.scaled_detuning(f, u);
                    let num = Complex64::new(ke - ki, -2.0 * d);
                    let den = Complex64::new(ke + ki, 2.0 * d);
                    let s = num / den;
                    let r = a * s - z[i];
                    out[i] = r.re;
                    out[m + i] = r.im;
                    if let Some(j) = jac.as_deref_mut() {
                        let den2 = den * den;
                        let two_i = Complex64::new(0.0, 2.0);
                        let cols = [
                            a * (two_i * den + two_i * num) / den2,
                            a * (den - num) / den2,
                            a * (-den - num) / den2,
                            s,
                            Complex64::i() * s,
                        ];
                        for (c, v) in cols.iter().enumerate() {
                            j[(i, c)] = v.re;
                            j[(m + i, c)] = v.im;
                        }
                    }
                }
                out
            }
        }
    }
}

impl Problem for S11Problem<'_> {
    fn residuals(&self, params: &[f64]) -> Vec<f64> {
        self.evaluate(params, None)
    }

    fn jacobian(&self, params: &[f64]) -> Option<DMatrix<f64>> {
        let rows = if self.trace.is_complex() { 2 * self.trace.freq.len() } else { self.trace.freq.len() };
        let mut j = DMatrix::zeros(rows, self.n_params());
        self.evaluate(params, Some(&mut j));
        Some(j)
    }
}

struct Seed {
    f0: f64,
    baseline: f64,
    depth_ratio: f64,
    linewidth: Option<f64>,
}

fn seed(freq: &[f64], power: &[f64]) -> Seed {
    let n = freq.len();
    let edge = (n / 20).max(2);
    let baseline = (power[..edge].iter().sum::<f64>() + power[n - edge..].iter().sum::<f64>()) / (2 * edge) as f64;
    let (imin, pmin) =
        power.iter().copied().enumerate().fold((0, f64::INFINITY), |acc, (i, p)| if p < acc.1 { (i, p) } else { acc });
    let floor = (pmin / baseline).clamp(0.0, 1.0);
    // |S|² reaches (1 + floor)/2 of the baseline at Δ = ±κ/2.
    let level = 0.5 * (1.0 + floor) * baseline;
    let crossing = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = imin;
        for i in range {
            if power[i] >= level {
                let (p0, p1) = (power[prev], power[i]);
                let t = if p1 == p0 { 0.0 } else { (level - p0) / (p1 - p0) };
                return Some(freq[prev] + t * (freq[i] - freq[prev]));
            }
            prev = i;
        }
        None
    };
    let right = crossing(&mut (imin + 1..n));
    let left = crossing(&mut (0..imin).rev());
    let linewidth = match (left, right) {
        (Some(l), Some(r)) if r > l => Some(r - l),
        (Some(l), None) => Some(2.0 * (freq[imin] - l)),
        (None, Some(r)) => Some(2.0 * (r - freq[imin])),
        _ => None,
    };
    Seed { f0: freq[imin], baseline, depth_ratio: floor.sqrt(), linewidth }
}

/// Fits the one-port reflection model (times a complex prefactor) to an S11
/// trace and reports `f_m`, `q_internal`, `q_external` and the prefactor.
///
/// Seeds come from the data: `f_m` at the deepest sample, the total linewidth
/// from the half-depth crossings and the coupling ratio from the dip depth.
/// `init` is used when the trace has no measurable dip width.
pub fn fit_s11(trace: &S11Trace, init: &CavityParams, branch: CouplingBranch) -> Result<FitResult> {
    init.validate()?;
    let power = trace.power();
    let seed = seed(&trace.freq, &power);
    let span = trace.freq[trace.freq.len() - 1] - trace.freq[0];
    let mut warnings = Vec::new();

    let noise = {
        let diffs: Vec<f64> = power.windows(2).map(|w| w[1] - w[0]).collect();
        let mean_sq = diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64;
        (mean_sq / 2.0).sqrt() / seed.baseline
    };
    let depth = 1.0 - seed.depth_ratio * seed.depth_ratio;
    let linewidth = match seed.linewidth {
        Some(lw) if depth > 0.01 && depth > 5.0 * noise => lw,
        _ => {
            let mut result = unconverged(trace, init, seed.baseline);
            result.warnings.push("no resonance dip found in the trace".into());
            return Ok(result);
        }
    };
    if span < 3.0 * linewidth {
        warnings.push(format!("trace spans {:.2} linewidths (fewer than 3)", span / linewidth));
    }

    let r = seed.depth_ratio.min(0.999);
    let (small, large) = ((1.0 - r) / 2.0, (1.0 + r) / 2.0);
    let (ke0, ki0) = match branch {
        CouplingBranch::UnderCoupled => (small, large),
        CouplingBranch::OverCoupled => (large, small),
    };
    let problem = S11Problem::new(trace, seed.f0, linewidth);
    let omega_over_kappa0 = TWO_PI * seed.f0 / (TWO_PI * linewidth);
    let k_min = omega_over_kappa0 / Q_UPPER_BOUND;
    let k_max = omega_over_kappa0;
    let u_lim = span / linewidth;
    let mut x0 = vec![0.0, ke0, ki0];
    let mut lower = vec![-u_lim, k_min, k_min];
    let mut upper = vec![u_lim, k_max, k_max];
    match &trace.data {
        S11Data::MagnitudeDb(_) => {
            x0.push(seed.baseline);
            lower.push(0.0);
            upper.push(f64::INFINITY);
        }
        S11Data::Complex(z) => {
            let n = z.len();
            let edge = (n / 20).max(2);
            let far: Complex64 = z[..edge].iter().chain(&z[n - edge..]).sum::<Complex64>() / (2 * edge) as f64;
            x0.extend([far.re, far.im]);
            lower.extend([f64::NEG_INFINITY; 2]);
            upper.extend([f64::INFINITY; 2]);
        }
    }
    let bounds = Bounds { lower, upper };
    let raw = nlls_fit(&problem, &x0, Some(&bounds), &LmOptions::default())?;

    let mut p = raw.params.clone();
    let mut swapped = false;
    if !trace.is_complex() {
        warnings.push(format!(
            "magnitude-only data cannot distinguish under- from over-coupling; reporting the {} branch",
            match branch {
                CouplingBranch::UnderCoupled => "under-coupled (Q_i < Q_e)",
                CouplingBranch::OverCoupled => "over-coupled (Q_e < Q_i)",
            }
        ));
        let wrong_side = match branch {
            CouplingBranch::UnderCoupled => p[1] > p[2],
            CouplingBranch::OverCoupled => p[1] < p[2],
        };
        if wrong_side {
            p.swap(1, 2);
            swapped = true;
        }
    } else if (p[1] > p[2]) != (branch == CouplingBranch::OverCoupled) {
        warnings.push("the phase response selects the other coupling branch".into());
    }

    let kappa0 = TWO_PI * linewidth;
    let f_m = seed.f0 + p[0] * linewidth;
    let q_e = TWO_PI * f_m / (p[1] * kappa0);
    let q_i = TWO_PI * f_m / (p[2] * kappa0);
    for (name, q, k) in [("q_external", q_e, p[1]), ("q_internal", q_i, p[2])] {
        if k <= k_min * (1.0 + 1e-9) {
            warnings.push(format!("{name} at upper bound {Q_UPPER_BOUND:e}"));
        }
        if !q.is_finite() {
            warnings.push(format!("{name} is not finite"));
        }
    }

    // Jacobian of (f_m, Q_e, Q_i, prefactor…) with respect to the internal parameters.
    let n = p.len();
    let mut t = DMatrix::<f64>::identity(n, n);
    t[(0, 0)] = linewidth;
    t[(1, 0)] = TWO_PI * linewidth / (p[1] * kappa0);
    t[(1, 1)] = -q_e / p[1];
    t[(2, 0)] = TWO_PI * linewidth / (p[2] * kappa0);
    t[(2, 2)] = -q_i / p[2];
    let map = |k: usize| if swapped && (k == 1 || k == 2) { 3 - k } else { k };
    let c = DMatrix::from_fn(n, n, |i, j| raw.covariance[map(i)][map(j)]);
    let cov = &t * c * t.transpose();

    let mut names = vec!["f_m", "q_external", "q_internal"];
    let mut params = vec![f_m, q_e, q_i];
    if trace.is_complex() {
        names.extend(["prefactor_re", "prefactor_im"]);
        params.extend([p[3], p[4]]);
    } else {
        names.push("scale");
        params.push(p[3]);
    }
    // Report Q_i before Q_e.
    let order = [0usize, 2, 1, 3, 4];
    let order = &order[..n];
    warnings.extend(raw.warnings.iter().cloned());
    Ok(FitResult {
        names: order.iter().map(|&i| names[i].to_string()).collect(),
        params: order.iter().map(|&i| params[i]).collect(),
        covariance: order.iter().map(|&i| order.iter().map(|&j| cov[(i, j)]).collect()).collect(),
        residual_norm: raw.residual_norm,
        iterations: raw.iterations,
        converged: raw.converged,
        gradient_norm: raw.gradient_norm,
        warnings,
    })
}

fn unconverged(trace: &S11Trace, init: &CavityParams, baseline: f64) -> FitResult {
    let mut names = vec!["f_m", "q_internal", "q_external"];
    let mut params = vec![init.f_m, init.q_internal, Q_UPPER_BOUND];
    if trace.is_complex() {
        names.extend(["prefactor_re", "prefactor_im"]);
        params.extend([baseline.sqrt(), 0.0]);
    } else {
        names.push("scale");
        params.push(baseline);
    }
    let n = params.len();
    FitResult {
        names: names.iter().map(|s| s.to_string()).collect(),
        params,
        covariance: vec![vec![f64::NAN; n]; n],
        residual_norm: f64::NAN,
        iterations: 0,
        converged: false,
        gradient_norm: f64::NAN,
        warnings: vec![format!("q_external at upper bound {Q_UPPER_BOUND:e}")],
    }
}
