use nalgebra::DMatrix;

use super::lm::{nlls_fit, Bounds, FitResult, LmOptions, Problem};
use crate::error::{Error, Result};
use crate::profiler::BeamScan;

/// Parameter names reported by [`fit_gaussian_profile`] (positions in m).
pub const GAUSSIAN_PARAMS: [&str; 4] = ["waist", "center", "amplitude", "offset"];

/// Residuals of `A exp(−2(y − y₀)²/w²) + c`.
///
/// Internal parameters: `[w/s, (y₀ − ȳ)/s, A/h, c/h]` with length scale `s`
/// and height scale `h`.
pub struct GaussianProblem<'a> {
    y: &'a [f64],
    d: &'a [f64],
    length: f64,
    origin: f64,
    height: f64,
}

impl<'a> GaussianProblem<'a> {
    pub fn new(scan: &'a BeamScan, length: f64, origin: f64, height: f64) -> Self {
        Self { y: &scan.position, d: &scan.metric, length, origin, height }
    }

    fn evaluate(&self, p: &[f64], mut jac: Option<&mut DMatrix<f64>>) -> Vec<f64> {
        let (w, c, a, off) = (p[0], p[1], p[2], p[3]);
        self.y
            .iter()
            .zip(self.d)
            .enumerate()
            .map(|(i, (&y, &d))| {
                let t = (y - self.origin) / self.length - c;
                let e = (-2.0 * t * t / (w * w)).exp();
                if let Some(j) = jac.as_deref_mut() {
                    j[(i, 0)] = self.height * a * e * 4.0 * t * t / (w * w * w);
                    j[(i, 1)] = self.height * a * e * 4.0 * t / (w * w);
                    j[(i, 2)] = self.height * e;
                    j[(i, 3)] = self.height;
                }
                self.height * (a * e + off) - d
            })
            .collect()
    }
}

impl Problem for GaussianProblem<'_> {
    fn residuals(&self, params: &[f64]) -> Vec<f64> {
        self.evaluate(params, None)
    }

    fn jacobian(&self, params: &[f64]) -> Option<DMatrix<f64>> {
        let mut j = DMatrix::zeros(self.y.len(), 4);
        self.evaluate(params, Some(&mut j));
        Some(j)
    }
}

/// Fits `A exp(−2(y − y₀)²/w²) + c` to a beam scan; `w` is the waist.
///
/// Seeds come from the profile moments above the minimum. A scan with no
/// contrast yields [`Error::Degenerate`].
pub fn fit_gaussian_profile(scan: &BeamScan) -> Result<FitResult> {
    let n = scan.position.len();
    if n < 5 {
        return Err(Error::Degenerate(format!("a waist fit needs at least 5 points, got {n}")));
    }
    let lo = scan.metric.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scan.metric.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi - lo > 1e-12 * hi.abs().max(lo.abs())) || hi - lo == 0.0 {
        return Err(Error::Degenerate("flat beam scan: no profile to fit".into()));
    }
    let weights: Vec<f64> = scan.metric.iter().map(|d| d - lo).collect();
    let total: f64 = weights.iter().sum();
    let mean = scan.position.iter().zip(&weights).map(|(y, w)| y * w).sum::<f64>() / total;
    let var = scan.position.iter().zip(&weights).map(|(y, w)| (y - mean).powi(2) * w).sum::<f64>() / total;
    let span = scan.position[n - 1] - scan.position[0];
    // exp(−2y²/w²) has standard deviation w/2.
    let w0 = (2.0 * var.sqrt()).clamp(span / (4.0 * n as f64), span);
    let height = hi - lo;

    let problem = GaussianProblem::new(scan, w0, mean, height);
    let x0 = [1.0, 0.0, 1.0, lo / height];
    let bounds = Bounds { lower: vec![1e-6, f64::NEG_INFINITY, 0.0, f64::NEG_INFINITY], upper: vec![f64::INFINITY; 4] };
    let mut fit = nlls_fit(&problem, &x0, Some(&bounds), &LmOptions::default())?.with_names(&GAUSSIAN_PARAMS);
    fit.rescale(0, w0, 0.0);
    fit.rescale(1, w0, mean);
    fit.rescale(2, height, 0.0);
    fit.rescale(3, height, 0.0);
    if span < fit.params[0] {
        fit.warnings.push("scan spans less than one waist".into());
    }
    if fit.params[2] == 0.0 {
        fit.warnings.push("amplitude at lower bound 0".into());
    }
    Ok(fit)
}
