//! Bounded Levenberg–Marquardt least squares.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// A least-squares problem: residuals r(p), optionally with an analytic
/// jacobian ∂r/∂p (m × n). Without one, central differences are used.
pub trait Problem {
    fn residuals(&self, params: &[f64]) -> Vec<f64>;

    fn jacobian(&self, _params: &[f64]) -> Option<DMatrix<f64>> {
        None
    }
}

/// Wraps a residual closure as a [`Problem`].
pub struct FnProblem<F>(pub F);

impl<F: Fn(&[f64]) -> Vec<f64>> Problem for FnProblem<F> {
    fn residuals(&self, params: &[f64]) -> Vec<f64> {
        (self.0)(params)
    }
}

/// Box constraints; use ±∞ for free parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn unbounded(n: usize) -> Self {
        Self { lower: vec![f64::NEG_INFINITY; n], upper: vec![f64::INFINITY; n] }
    }

    fn project(&self, p: &mut [f64]) {
        for ((v, lo), hi) in p.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*lo, *hi);
        }
    }

    /// Indices of parameters sitting on a bound.
    pub fn active(&self, p: &[f64]) -> Vec<usize> {
        (0..p.len()).filter(|&i| p[i] <= self.lower[i] || p[i] >= self.upper[i]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Relative scaled step below which the iteration stops.
    pub xtol: f64,
    /// Scaled gradient (cosine between residual and jacobian columns) below
    /// which the iteration stops.
    pub gtol: f64,
    pub initial_damping: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iterations: 500, xtol: 1e-10, gtol: 1e-12, initial_damping: 1e-3 }
    }
}

/// Outcome of a least-squares fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub names: Vec<String>,
    pub params: Vec<f64>,
    /// σ²(JᵀJ)⁺ with σ² = ‖r‖²/(m − n).
    pub covariance: Vec<Vec<f64>>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest cosine between the residual vector and a jacobian column.
    pub gradient_norm: f64,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.params[i])
    }

    /// One-standard-deviation uncertainty.
    pub fn sigma(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.covariance[i][i].max(0.0).sqrt())
    }

    pub fn sigmas(&self) -> Vec<f64> {
        (0..self.params.len()).map(|i| self.covariance[i][i].max(0.0).sqrt()).collect()
    }

    pub(crate) fn with_names(mut self, names: &[&str]) -> Self {
        self.names = names.iter().map(|s| s.to_string()).collect();
        self
    }

    /// Rescales parameter `i` (and its covariance row/column) by `factor`,
    /// then adds `offset`.
    pub fn rescale(&mut self, i: usize, factor: f64, offset: f64) {
        self.params[i] = self.params[i] * factor + offset;
        for row in self.covariance.iter_mut() {
            row[i] *= factor;
        }
        for v in self.covariance[i].iter_mut() {
            *v *= factor;
        }
    }
}

/// Central-difference jacobian, one-sided next to a bound.
pub fn finite_difference_jacobian<P: Problem + ?Sized>(
    problem: &P,
    params: &[f64],
    bounds: Option<&Bounds>,
) -> DMatrix<f64> {
    let r0 = problem.residuals(params);
    let m = r0.len();
    let n = params.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut p = params.to_vec();
    for j in 0..n {
        let h = 6.055e-6 * params[j].abs().max(1e-3);
        let (lo, hi) = bounds.map_or((f64::NEG_INFINITY, f64::INFINITY), |b| (b.lower[j], b.upper[j]));
        let (plus, minus) = if params[j] + h > hi {
            (params[j], params[j] - h)
        } else if params[j] - h < lo {
            (params[j] + h, params[j])
        } else {
            (params[j] + h, params[j] - h)
        };
        p[j] = plus;
        let rp = problem.residuals(&p);
        p[j] = minus;
        let rm = problem.residuals(&p);
        p[j] = params[j];
        let width = plus - minus;
        for i in 0..m {
            jac[(i, j)] = (rp[i] - rm[i]) / width;
        }
    }
    jac
}

/// Largest column-relative discrepancy between the analytic and the
/// central-difference jacobian at `params`.
pub fn jacobian_check<P: Problem + ?Sized>(problem: &P, params: &[f64]) -> Option<f64> {
    let analytic = problem.jacobian(params)?;
    let numeric = finite_difference_jacobian(problem, params, None);
    let mut worst: f64 = 0.0;
    for j in 0..params.len() {
        let scale = numeric.column(j).amax().max(analytic.column(j).amax());
        if scale == 0.0 {
            continue;
        }
        let diff = (analytic.column(j) - numeric.column(j)).amax();
        worst = worst.max(diff / scale);
    }
    Some(worst)
}

fn evaluate_jacobian<P: Problem + ?Sized>(problem: &P, p: &[f64], bounds: &Bounds) -> DMatrix<f64> {
    problem.jacobian(p).unwrap_or_else(|| finite_difference_jacobian(problem, p, Some(bounds)))
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Minimises ½‖r(p)‖² from `init` with Marquardt-scaled damping; bounds are
/// enforced by projecting every trial point onto the box.
pub fn nlls_fit<P: Problem + ?Sized>(
    problem: &P,
    init: &[f64],
    bounds: Option<&Bounds>,
    opts: &LmOptions,
) -> Result<FitResult> {
    let n = init.len();
    let bounds = bounds.cloned().unwrap_or_else(|| Bounds::unbounded(n));
    if bounds.lower.len() != n || bounds.upper.len() != n {
        return domain("bounds and initial parameters differ in length");
    }
    let mut x = init.to_vec();
    bounds.project(&mut x);
    let mut r = problem.residuals(&x);
    let m = r.len();
    if r.iter().any(|v| !v.is_finite()) {
        return domain("residuals are not finite at the initial parameters");
    }
    if m == 0 {
        return domain("no residuals");
    }
    let mut cost = sum_sq(&r);
    let mut lambda = opts.initial_damping;
    let mut scale = vec![0.0f64; n];
    let mut converged = false;
    let mut warnings = Vec::new();
    let mut gnorm = 0.0;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        if cost == 0.0 {
            converged = true;
            break;
        }
        let jac = evaluate_jacobian(problem, &x, &bounds);
        let rv = DVector::from_column_slice(&r);
        let g = jac.tr_mul(&rv);
        let jtj = jac.tr_mul(&jac);
        let rnorm = cost.sqrt();
        gnorm = (0..n)
            .map(|j| {
                let c = jac.column(j).norm();
                if c == 0.0 {
                    0.0
                } else {
                    (g[j] / (c * rnorm)).abs()
                }
            })
            .fold(0.0, f64::max);
        if gnorm <= opts.gtol {
            converged = true;
            break;
        }
        for j in 0..n {
            scale[j] = scale[j].max(jtj[(j, j)]).max(1e-300);
        }
        let xnorm: f64 = (0..n).map(|j| scale[j] * x[j] * x[j]).sum::<f64>().sqrt();

        iterations += 1;
        let mut accepted = false;
        let mut last_step = f64::INFINITY;
        while lambda < 1e20 {
            let mut a = jtj.clone();
            for j in 0..n {
                a[(j, j)] += lambda * scale[j];
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let delta = chol.solve(&(-&g));
            let mut trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            bounds.project(&mut trial);
            let step: f64 = (0..n).map(|j| scale[j] * (trial[j] - x[j]).powi(2)).sum::<f64>().sqrt();
            last_step = step;
            let r_trial = problem.residuals(&trial);
            let c_trial = sum_sq(&r_trial);
            if c_trial.is_finite() && c_trial < cost {
                x = trial;
                r = r_trial;
                cost = c_trial;
                lambda = (lambda / 3.0).max(1e-15);
                accepted = true;
                break;
            }
            if step <= opts.xtol * xnorm {
                break;
            }
            lambda *= 4.0;
        }
        if last_step <= opts.xtol * xnorm || (accepted && last_step == 0.0) {
            converged = true;
            break;
        }
        if !accepted {
            warnings.push("damping saturated without reducing the residual".to_string());
            break;
        }
    }
    if !converged && iterations >= opts.max_iterations {
        warnings.push(format!("maximum of {} iterations reached", opts.max_iterations));
    }

    let jac = evaluate_jacobian(problem, &x, &bounds);
    let covariance = covariance(&jac, cost, m, n);
    Ok(FitResult {
        names: (0..n).map(|i| format!("p{i}")).collect(),
        params: x,
        covariance,
        residual_norm: cost.sqrt(),
        iterations,
        converged,
        gradient_norm: gnorm,
        warnings,
    })
}

fn covariance(jac: &DMatrix<f64>, cost: f64, m: usize, n: usize) -> Vec<Vec<f64>> {
    let sigma2 = if m > n { cost / (m - n) as f64 } else { f64::NAN };
    let jtj = jac.tr_mul(jac);
    let svd = jtj.svd(true, true);
    let cutoff = 1e-14 * svd.singular_values.max();
    let pinv = svd.pseudo_inverse(cutoff).unwrap_or_else(|_| DMatrix::from_element(n, n, f64::NAN));
    (0..n).map(|i| (0..n).map(|j| sigma2 * 0.5 * (pinv[(i, j)] + pinv[(j, i)])).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_residual_at_start() {
        let p = FnProblem(|q: &[f64]| vec![q[0] - 2.0, q[1] + 1.0]);
        let fit = nlls_fit(&p, &[2.0, -1.0], None, &LmOptions::default()).unwrap();
        assert!(fit.converged);
        assert!(fit.iterations <= 1);
        assert_eq!(fit.params, vec![2.0, -1.0]);
    }

    #[test]
    fn exact_straight_line() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.25 * x - 1.5).collect();
        let p = FnProblem(move |q: &[f64]| xs.iter().zip(&ys).map(|(x, y)| q[0] * x + q[1] - y).collect());
        let fit = nlls_fit(&p, &[0.0, 0.0], None, &LmOptions::default()).unwrap();
        assert!(fit.converged);
        assert!((fit.params[0] - 3.25).abs() < 1e-10);
        assert!((fit.params[1] + 1.5).abs() < 1e-10);
    }

    #[test]
    fn rosenbrock_valley() {
        let p = FnProblem(|q: &[f64]| vec![10.0 * (q[1] - q[0] * q[0]), 1.0 - q[0]]);
        let fit = nlls_fit(&p, &[-1.2, 1.0], None, &LmOptions::default()).unwrap();
        assert!(fit.converged, "{fit:?}");
        assert!((fit.params[0] - 1.0).abs() < 1e-6);
        assert!((fit.params[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bounds_are_respected() {
        // Unconstrained minimum at q = -3; lower bound 0.5 is active.
        let p = FnProblem(|q: &[f64]| vec![q[0] + 3.0, 0.1 * (q[0] + 3.0)]);
        let b = Bounds { lower: vec![0.5], upper: vec![10.0] };
        let fit = nlls_fit(&p, &[4.0], Some(&b), &LmOptions::default()).unwrap();
        assert_eq!(fit.params[0], 0.5);
        assert_eq!(b.active(&fit.params), vec![0]);
    }

    #[test]
    fn iteration_cap_is_flagged() {
        let p = FnProblem(|q: &[f64]| vec![10.0 * (q[1] - q[0] * q[0]), 1.0 - q[0]]);
        let opts = LmOptions { max_iterations: 2, ..Default::default() };
        let fit = nlls_fit(&p, &[-1.2, 1.0], None, &opts).unwrap();
        assert!(!fit.converged);
        assert!(fit.warnings.iter().any(|w| w.contains("maximum")));
    }

    #[test]
    fn non_finite_start_is_rejected() {
        let p = FnProblem(|q: &[f64]| vec![q[0].ln()]);
        assert!(nlls_fit(&p, &[-1.0], None, &LmOptions::default()).is_err());
    }

    #[test]
    fn covariance_of_linear_fit() {
        // y = a x with unit-variance-like residual pattern; analytic var(a) = s²/Σx².
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [1.1, 1.9, 3.2, 3.8];
        let p = FnProblem(move |q: &[f64]| xs.iter().zip(&ys).map(|(x, y)| q[0] * x - y).collect());
        let fit = nlls_fit(&p, &[1.0], None, &LmOptions::default()).unwrap();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let a = xs.iter().zip(&ys).map(|(x, y)| x * y).sum::<f64>() / sxx;
        let s2 = xs.iter().zip(&ys).map(|(x, y)| (a * x - y).powi(2)).sum::<f64>() / 3.0;
        assert!((fit.params[0] - a).abs() < 1e-10);
        assert!((fit.covariance[0][0] / (s2 / sxx) - 1.0).abs() < 1e-6);
    }
}
