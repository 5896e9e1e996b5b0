use std::path::PathBuf;

use clap::{Subcommand, ValueEnum};
use serde::Serialize;

use sawqd::acoustic_mode::{g0_at, g0_from_measurement, mode_volume, G0Options, G0Projection};
use sawqd::cavity::phonon_number;
use sawqd::io::{read_power_sweep_csv, write_g0_csv};

use crate::device;
use crate::output::{emit, open_input, write_json, write_text_rows, CmdResult, Failure, Format};
use crate::GlobalArgs;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Projection {
    Envelope,
    InPhase,
}

#[derive(Debug, Subcommand)]
pub enum G0Cmd {
    /// g₀/2π along the cavity axis at the emitter depth.
    Map {
        /// Start of the x range, µm; defaults to −L/2.
        #[arg(long, allow_hyphen_values = true)]
        x_min_um: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        x_max_um: Option<f64>,
        #[arg(long, default_value_t = 401)]
        samples: usize,
        #[arg(long, value_enum, default_value = "envelope")]
        projection: Projection,
        /// Transverse emitter offset, µm.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        y_offset_um: f64,
    },
    /// g₀/2π from measured modulation indices and drive powers.
    FromData {
        /// Sweep CSV `p_dbm,delta` or `p_watt,delta`.
        #[arg(long, conflicts_with_all = ["delta", "power_dbm", "power_w"])]
        input: Option<PathBuf>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        power_dbm: Option<f64>,
        #[arg(long)]
        power_w: Option<f64>,
        #[arg(long)]
        qi: Option<f64>,
        #[arg(long)]
        qe: Option<f64>,
    },
}

#[derive(Debug, Serialize)]
struct G0Map<'a> {
    device: &'a str,
    z_qd_m: f64,
    mode_volume_m3: f64,
    u0_zpm_m: f64,
    max_g0_hz: f64,
    x_at_max_m: f64,
    x_m: &'a [f64],
    g0_hz: &'a [f64],
}

#[derive(Debug, Serialize)]
struct G0Point {
    p_watt: f64,
    delta: f64,
    n_phonon: f64,
    g0_hz: f64,
}

#[derive(Debug, Serialize)]
struct G0FromData {
    device: String,
    f_m_hz: f64,
    q_internal: f64,
    q_external: f64,
    cable_loss_db: f64,
    g0_hz: f64,
    g0_sigma_hz: Option<f64>,
    points: Vec<G0Point>,
}

pub fn run(cmd: &G0Cmd, global: &GlobalArgs) -> CmdResult {
    let cfg = device::resolve(global)?;
    match cmd {
        G0Cmd::Map { x_min_um, x_max_um, samples, projection, y_offset_um } => {
            let half = 0.5 * cfg.l_eff;
            let lo = x_min_um.map_or(-half, |v| v * 1e-6);
            let hi = x_max_um.map_or(half, |v| v * 1e-6);
            if *samples < 2 || !(lo < hi) {
                return Err(Failure::Input("need x_min < x_max and at least two samples".into()));
            }
            let opts = G0Options {
                projection: match projection {
                    Projection::Envelope => G0Projection::Envelope,
                    Projection::InPhase => G0Projection::InPhase,
                },
                y_offset: y_offset_um * 1e-6,
            };
            let mv = mode_volume(&cfg)?;
            let x: Vec<f64> = (0..*samples).map(|i| lo + (hi - lo) * i as f64 / (*samples - 1) as f64).collect();
            let g0: Vec<f64> = x.iter().map(|&xi| g0_at(xi, &cfg, &mv, &opts)).collect();
            if g0.iter().any(|v| !v.is_finite()) {
                return Err(Failure::Numerical("non-finite coupling rate".into()));
            }
            let (imax, max) =
                g0.iter().copied().enumerate().fold((0, 0.0), |a, (i, v)| if v > a.1 { (i, v) } else { a });
            let report = G0Map {
                device: &cfg.name,
                z_qd_m: cfg.z_qd,
                mode_volume_m3: mv.volume,
                u0_zpm_m: mv.u0_zpm,
                max_g0_hz: max,
                x_at_max_m: x[imax],
                x_m: &x,
                g0_hz: &g0,
            };
            emit(global.out.as_deref(), |w| match global.format.unwrap_or(Format::Csv) {
                Format::Json => write_json(w, &report),
                Format::Csv => Ok(write_g0_csv(w, &x, &g0)?),
                Format::Text => write_text_rows(
                    w,
                    &[
                        ("device", cfg.name.clone(), ""),
                        ("mode volume", format!("{:.4e}", mv.volume), "m^3"),
                        ("u0_zpm", format!("{:.4e}", mv.u0_zpm), "m"),
                        ("max g0/2pi", format!("{:.2}", max / 1e3), "kHz"),
                        ("at x", format!("{:.3}", x[imax] * 1e6), "um"),
                    ],
                ),
            })
        }
        G0Cmd::FromData { input, delta, power_dbm, power_w, qi, qe } => {
            let (p, rates) = device::cavity_rates(&cfg, *qi, *qe)?;
            let (powers, deltas) = match input {
                Some(path) => read_power_sweep_csv(open_input(path)?, global.cable_loss_db)?,
                None => {
                    let d = delta.ok_or_else(|| Failure::Input("pass --input or --delta with a power".into()))?;
                    (vec![device::input_power(*power_dbm, *power_w, global)?], vec![d])
                }
            };
            let points = powers
                .iter()
                .zip(&deltas)
                .map(|(&pw, &d)| {
                    let n = phonon_number(pw, cfg.f_m, &rates)?;
                    Ok(G0Point { p_watt: pw, delta: d, n_phonon: n, g0_hz: g0_from_measurement(d, n, cfg.f_m)? })
                })
                .collect::<Result<Vec<_>, sawqd::Error>>()?;
            let m = points.len() as f64;
            let mean = points.iter().map(|q| q.g0_hz).sum::<f64>() / m;
            let sigma = (points.len() > 1)
                .then(|| (points.iter().map(|q| (q.g0_hz - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt());
            let report = G0FromData {
                device: cfg.name.clone(),
                f_m_hz: cfg.f_m,
                q_internal: p.q_internal,
                q_external: p.q_external,
                cable_loss_db: global.cable_loss_db,
                g0_hz: mean,
                g0_sigma_hz: sigma,
                points,
            };
            emit(global.out.as_deref(), |w| match global.format.unwrap_or(Format::Json) {
                Format::Json => write_json(w, &report),
                Format::Csv => {
                    writeln!(w, "p_watt,delta,n_phonon,g0_hz")?;
                    for q in &report.points {
                        writeln!(w, "{},{},{},{}", q.p_watt, q.delta, q.n_phonon, q.g0_hz)?;
                    }
                    Ok(())
                }
                Format::Text => {
                    let sigma = report.g0_sigma_hz.map(|s| format!(" ± {:.3}", s / 1e3)).unwrap_or_default();
                    write_text_rows(
                        w,
                        &[
                            ("device", report.device.clone(), ""),
                            ("points", report.points.len().to_string(), ""),
                            ("g0/2pi", format!("{:.3}{sigma}", mean / 1e3), "kHz"),
                        ],
                    )
                }
            })
        }
    }
}
