//! Inverse problems: a bounded Levenberg–Marquardt engine and fitters for
//! modulation spectra, S11 traces, power sweeps and beam profiles.

mod gaussian;
mod lm;
mod modulation;
mod s11;
mod vpi;

pub use gaussian::{fit_gaussian_profile, GaussianProblem, GAUSSIAN_PARAMS};
pub use lm::{finite_difference_jacobian, jacobian_check, nlls_fit, Bounds, FitResult, FnProblem, LmOptions, Problem};
pub use modulation::{fit_modulation, model_from_fit, ModulationProblem, MODULATION_PARAMS};
pub use s11::{fit_s11, CouplingBranch, S11Data, S11Problem, S11Trace, Q_UPPER_BOUND};
pub use vpi::{fit_vpi, PowerSweep};
