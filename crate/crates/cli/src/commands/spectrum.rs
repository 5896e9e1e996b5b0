use std::f64::consts::PI;
use std::path::PathBuf;

use clap::Subcommand;

use sawqd::constants::TWO_PI;
use sawqd::fitting::fit_modulation;
use sawqd::io::{read_spectrum_csv, write_spectrum_csv};
use sawqd::spectrum::{add_relative_noise, synth_spectrum, ModulationModel};

use crate::device;
use crate::output::{emit, open_input, write_json, CmdResult, Failure, FitReport, Format, TableJson};
use crate::GlobalArgs;

#[derive(Debug, Subcommand)]
pub enum SpectrumCmd {
    /// Writes a synthetic `detuning_hz,counts` trace.
    Synth {
        #[arg(long)]
        delta: f64,
        /// Emitter FWHM, Hz.
        #[arg(long, default_value_t = 200e6)]
        linewidth_hz: f64,
        /// Modulation frequency, Hz; defaults to the device mode.
        #[arg(long)]
        f_m_hz: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 0.0)]
        background: f64,
        /// Lorentzian filter FWHM, Hz (0 disables it).
        #[arg(long, default_value_t = 0.0)]
        filter_fwhm_hz: f64,
        #[arg(long, default_value_t = 0.0)]
        center_hz: f64,
        /// Half-span of the detuning grid, Hz; defaults to (⌈δ⌉ + 4)·f_m.
        #[arg(long)]
        span_hz: Option<f64>,
        #[arg(long, default_value_t = 2001)]
        points: usize,
        /// Relative Gaussian noise per point, seeded by --seed.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
    /// Fits the sideband model to a `detuning_hz,counts` trace.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        f_m_hz: Option<f64>,
        /// Starting modulation index, used when the sideband ratio saturates.
        #[arg(long, default_value_t = 1.0)]
        delta_guess: f64,
        #[arg(long, default_value_t = 200e6)]
        linewidth_guess_hz: f64,
        #[arg(long, default_value_t = 0.0)]
        filter_fwhm_hz: f64,
    },
}

pub fn run(cmd: &SpectrumCmd, global: &GlobalArgs) -> CmdResult {
    let cfg = device::resolve(global)?;
    match cmd {
        SpectrumCmd::Synth {
            delta,
            linewidth_hz,
            f_m_hz,
            amplitude,
            background,
            filter_fwhm_hz,
            center_hz,
            span_hz,
            points,
            noise,
        } => {
            let f_m = f_m_hz.unwrap_or(cfg.f_m);
            if *points < 2 {
                return Err(Failure::Input("--points must be at least 2".into()));
            }
            let span = span_hz.unwrap_or((delta.max(0.0).ceil() + 4.0) * f_m);
            if !(span > 0.0) {
                return Err(Failure::Input("--span-hz must be positive".into()));
            }
            let model = ModulationModel::new(*delta, PI * linewidth_hz, TWO_PI * f_m)
                .with_amplitude(*amplitude)
                .with_background(*background)
                .with_filter_fwhm(*filter_fwhm_hz)
                .with_center(TWO_PI * center_hz);
            let grid: Vec<f64> = (0..*points).map(|i| -span + 2.0 * span * i as f64 / (*points - 1) as f64).collect();
            let mut trace = synth_spectrum(&model, &grid)?;
            if *noise > 0.0 {
                trace = add_relative_noise(&trace, *noise, global.seed)?;
            }
            emit(global.out.as_deref(), |w| match global.format.unwrap_or(Format::Csv) {
                Format::Json => write_json(
                    w,
                    &TableJson { columns: vec!["detuning_hz", "counts"], data: vec![&trace.detuning, &trace.counts] },
                ),
                _ => Ok(write_spectrum_csv(w, &trace)?),
            })
        }
        SpectrumCmd::Fit { input, f_m_hz, delta_guess, linewidth_guess_hz, filter_fwhm_hz } => {
            let trace = read_spectrum_csv(open_input(input)?)?;
            let f_m = f_m_hz.unwrap_or(cfg.f_m);
            let init = ModulationModel::new(*delta_guess, PI * linewidth_guess_hz, TWO_PI * f_m)
                .with_filter_fwhm(*filter_fwhm_hz);
            let mut fit = fit_modulation(&trace, f_m, &init)?;
            // Report the half-width as an ordinary-frequency FWHM and the
            // carrier offset in Hz.
            fit.rescale(1, 1.0 / PI, 0.0);
            fit.rescale(4, 1.0 / TWO_PI, 0.0);
            fit.names[1] = "linewidth_hz".into();
            fit.names[4] = "center_hz".into();
            FitReport::new("modulation", Some(cfg.name.clone()), fit, vec![])
                .emit(global.out.as_deref(), global.format.unwrap_or(Format::Json))
        }
    }
}
