use std::path::PathBuf;

use clap::{Subcommand, ValueEnum};

use sawqd::fitting::fit_gaussian_profile;
use sawqd::io::{read_beam_scan_csv, write_beam_scan_csv};
use sawqd::profiler::{scan_beam_with, ScanAxis, ScanOptions};

use crate::device;
use crate::output::{emit, open_input, write_json, CmdResult, Derived, Failure, FitReport, Format, TableJson};
use crate::GlobalArgs;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Axis {
    /// Across the beam.
    Y,
    /// Along the cavity.
    X,
}

#[derive(Debug, Subcommand)]
pub enum ProfileCmd {
    /// Synthetic smearing metric D along one axis, written as `position_um,D`.
    Scan {
        #[arg(long, value_enum, default_value = "y")]
        axis: Axis,
        /// The fixed coordinate, µm (x for a y scan and vice versa).
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        at_um: f64,
        /// Scan start, µm; defaults to −3w(x) across or −0.45L along.
        #[arg(long, allow_hyphen_values = true)]
        from_um: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        to_um: Option<f64>,
        #[arg(long, default_value_t = 25)]
        points: usize,
        #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
        drive_dbm: f64,
        /// Half-wave voltage calibrating the peak modulation index, V.
        #[arg(long, default_value_t = 0.4)]
        v_pi_cal: f64,
        /// Relative Gaussian noise on each D value.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 915.0)]
        center_nm: f64,
        #[arg(long, default_value_t = 10.0)]
        half_window_nm: f64,
        #[arg(long, default_value_t = 2.0)]
        step_pm: f64,
    },
    /// Gaussian waist fitted to a `position_um,D` scan.
    Waist {
        #[arg(long)]
        input: PathBuf,
    },
}

pub fn run(cmd: &ProfileCmd, global: &GlobalArgs) -> CmdResult {
    let cfg = device::resolve(global)?;
    match cmd {
        ProfileCmd::Scan {
            axis,
            at_um,
            from_um,
            to_um,
            points,
            drive_dbm,
            v_pi_cal,
            noise,
            center_nm,
            half_window_nm,
            step_pm,
        } => {
            let at = at_um * 1e-6;
            let (axis, default_half) = match axis {
                Axis::Y => (ScanAxis::Y { x: at }, 3.0 * cfg.waist_at(at)),
                Axis::X => (ScanAxis::X { y: at }, 0.45 * cfg.l_eff),
            };
            let lo = from_um.map_or(-default_half, |v| v * 1e-6);
            let hi = to_um.map_or(default_half, |v| v * 1e-6);
            if *points < 2 || !(lo < hi) {
                return Err(Failure::Input("need from < to and at least two points".into()));
            }
            let positions: Vec<f64> = (0..*points).map(|i| lo + (hi - lo) * i as f64 / (*points - 1) as f64).collect();
            let drive = device::input_power(Some(*drive_dbm), None, global)?;
            let opts = ScanOptions {
                center: center_nm * 1e-9,
                half_window: half_window_nm * 1e-9,
                step: step_pm * 1e-12,
                blur_fwhm: None,
                calibration_v_pi: *v_pi_cal,
                noise: *noise,
            };
            let scan = scan_beam_with(&cfg, axis, &positions, global.seed, drive, &opts)?;
            emit(global.out.as_deref(), |w| match global.format.unwrap_or(Format::Csv) {
                Format::Json => {
                    let um: Vec<f64> = scan.position.iter().map(|p| p * 1e6).collect();
                    write_json(w, &TableJson { columns: vec!["position_um", "D"], data: vec![&um, &scan.metric] })
                }
                _ => Ok(write_beam_scan_csv(w, &scan)?),
            })
        }
        ProfileCmd::Waist { input } => {
            let scan = read_beam_scan_csv(open_input(input)?)?;
            let fit = fit_gaussian_profile(&scan)?;
            let w = fit.params[0];
            let s = fit.sigmas()[0];
            let derived = vec![Derived::new("waist_um", w * 1e6, Some(s * 1e6), "um")];
            FitReport::new("waist", Some(cfg.name.clone()), fit, derived)
                .emit(global.out.as_deref(), global.format.unwrap_or(Format::Text))
        }
    }
}
