use std::path::PathBuf;

use clap::Subcommand;
use serde::Serialize;

use sawqd::fitting::{fit_vpi, PowerSweep};
use sawqd::io::read_power_sweep_csv;
use sawqd::transduction::{transduction_report, vpi_enhancement};

use crate::device;
use crate::output::{emit, open_input, write_json, write_text_rows, CmdResult, Derived, FitReport, Format};
use crate::GlobalArgs;

#[derive(Debug, Subcommand)]
pub enum TransduceCmd {
    /// Half-wave voltage from a `p_dbm,delta` or `p_watt,delta` sweep.
    Vpi {
        #[arg(long)]
        input: PathBuf,
    },
    /// Voltage, phonon number, modulation index, V_π and η at one drive power.
    Report {
        #[arg(long, allow_hyphen_values = true)]
        power_dbm: Option<f64>,
        #[arg(long)]
        power_w: Option<f64>,
        /// Single-phonon coupling rate g₀/2π, Hz.
        #[arg(long)]
        g0_hz: f64,
        /// Detected photon rate, 1/s; enables η.
        #[arg(long)]
        count_rate: Option<f64>,
        #[arg(long)]
        qi: Option<f64>,
        #[arg(long)]
        qe: Option<f64>,
        /// Off-resonant drive detuning for the V_π comparison, Hz.
        #[arg(long)]
        off_detuning_hz: Option<f64>,
        /// Extra drive-power gain on resonance from IDT matching.
        #[arg(long, default_value_t = 1.0)]
        impedance_multiplier: f64,
    },
}

#[derive(Debug, Serialize)]
struct Report {
    device: String,
    p_micro_w: f64,
    voltage_v: f64,
    n_phonon: f64,
    delta: f64,
    g0_over_2pi_hz: f64,
    v_pi_v: f64,
    eta: Option<f64>,
    off_detuning_hz: Option<f64>,
    vpi_enhancement: Option<f64>,
}

pub fn run(cmd: &TransduceCmd, global: &GlobalArgs) -> CmdResult {
    let cfg = device::resolve(global)?;
    match cmd {
        TransduceCmd::Vpi { input } => {
            let (p, delta) = read_power_sweep_csv(open_input(input)?, global.cable_loss_db)?;
            let fit = fit_vpi(&PowerSweep::new(p, delta, cfg.impedance)?)?;
            let v = fit.params[0];
            let s = fit.sigmas()[0];
            let report = FitReport::new(
                "vpi",
                Some(cfg.name.clone()),
                fit,
                vec![Derived::new("v_pi_mv", v * 1e3, Some(s * 1e3), "mV")],
            );
            match global.format.unwrap_or(Format::Text) {
                Format::Text => emit(global.out.as_deref(), |w| {
                    writeln!(w, "V_pi = {:.1} mV (± {:.1} mV)", v * 1e3, s * 1e3)?;
                    for warning in &report.warnings {
                        writeln!(w, "warning: {warning}")?;
                    }
                    Ok(())
                }),
                format => report.emit(global.out.as_deref(), format),
            }
        }
        TransduceCmd::Report {
            power_dbm,
            power_w,
            g0_hz,
            count_rate,
            qi,
            qe,
            off_detuning_hz,
            impedance_multiplier,
        } => {
            let (_, rates) = device::cavity_rates(&cfg, *qi, *qe)?;
            let p = device::input_power(*power_dbm, *power_w, global)?;
            let r = transduction_report(p, &cfg, &rates, *g0_hz, *count_rate)?;
            let enhancement =
                off_detuning_hz.map(|d| vpi_enhancement(&rates, cfg.f_m, d, *impedance_multiplier)).transpose()?;
            let report = Report {
                device: cfg.name.clone(),
                p_micro_w: r.p_micro,
                voltage_v: r.voltage,
                n_phonon: r.n_phonon,
                delta: r.delta,
                g0_over_2pi_hz: r.g0_over_2pi,
                v_pi_v: r.v_pi,
                eta: r.eta,
                off_detuning_hz: *off_detuning_hz,
                vpi_enhancement: enhancement,
            };
            emit(global.out.as_deref(), |w| match global.format.unwrap_or(Format::Text) {
                Format::Json => write_json(w, &report),
                Format::Csv => {
                    writeln!(w, "quantity,value")?;
                    let mut rows = vec![
                        ("p_micro_w", report.p_micro_w),
                        ("voltage_v", report.voltage_v),
                        ("n_phonon", report.n_phonon),
                        ("delta", report.delta),
                        ("g0_over_2pi_hz", report.g0_over_2pi_hz),
                        ("v_pi_v", report.v_pi_v),
                    ];
                    if let Some(e) = report.eta {
                        rows.push(("eta", e));
                    }
                    if let Some(e) = report.vpi_enhancement {
                        rows.push(("vpi_enhancement", e));
                    }
                    for (k, v) in rows {
                        writeln!(w, "{k},{v}")?;
                    }
                    Ok(())
                }
                Format::Text => {
                    let mut rows = vec![
                        ("device", report.device.clone(), ""),
                        ("P_micro", format!("{:.4e}", report.p_micro_w), "W"),
                        ("V", format!("{:.4e}", report.voltage_v), "V"),
                        ("n", format!("{:.4e}", report.n_phonon), ""),
                        ("delta", format!("{:.4}", report.delta), ""),
                        ("g0/2pi", format!("{:.4}", report.g0_over_2pi_hz / 1e3), "kHz"),
                        ("V_pi", format!("{:.2}", report.v_pi_v * 1e3), "mV"),
                    ];
                    if let Some(e) = report.eta {
                        rows.push(("eta", format!("{e:.3e}"), ""));
                    }
                    if let Some(e) = report.vpi_enhancement {
                        rows.push(("V_pi(off)/V_pi(on)", format!("{e:.3}"), ""));
                    }
                    write_text_rows(w, &rows)
                }
            })
        }
    }
}
