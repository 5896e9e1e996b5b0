use std::path::PathBuf;

use clap::{Subcommand, ValueEnum};
use serde::Serialize;

use sawqd::cavity::{phonon_number, s11_db, CavityParams, CavityRates};
use sawqd::constants::TWO_PI;
use sawqd::fitting::{fit_s11, CouplingBranch};
use sawqd::io::read_s11_csv;

use crate::device;
use crate::output::{emit, open_input, write_json, write_text_rows, CmdResult, Derived, FitReport, Format};
use crate::GlobalArgs;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Branch {
    Under,
    Over,
}

#[derive(Debug, Subcommand)]
pub enum CavityCmd {
    /// Decay rates, free spectral range, finesse and reflection dip.
    Report {
        #[arg(long)]
        qi: Option<f64>,
        #[arg(long)]
        qe: Option<f64>,
    },
    /// Fits quality factors to a `freq_hz,s11_db` or `freq_hz,re,im` trace.
    FitS11 {
        #[arg(long)]
        input: PathBuf,
        /// Starting internal quality factor.
        #[arg(long, default_value_t = 5000.0)]
        qi_guess: f64,
        #[arg(long, default_value_t = 5000.0)]
        qe_guess: f64,
        /// Coupling branch reported for magnitude-only data.
        #[arg(long, value_enum, default_value = "under")]
        branch: Branch,
    },
}

#[derive(Debug, Serialize)]
struct CavityReport {
    device: String,
    f_m_hz: f64,
    q_internal: f64,
    q_external: f64,
    kappa_over_2pi_hz: f64,
    kappa_ext_over_2pi_hz: f64,
    kappa_int_over_2pi_hz: f64,
    fsr_hz: f64,
    finesse: f64,
    dip_db: f64,
    coupling: &'static str,
    phonons_per_microwatt: f64,
}

impl CavityReport {
    fn new(name: &str, p: &CavityParams, rates: &CavityRates) -> Result<Self, crate::output::Failure> {
        let coupling = if (p.q_internal - p.q_external).abs() <= 1e-9 * p.q_internal {
            "critical"
        } else if p.q_internal < p.q_external {
            "under"
        } else {
            "over"
        };
        Ok(Self {
            device: name.to_string(),
            f_m_hz: p.f_m,
            q_internal: p.q_internal,
            q_external: p.q_external,
            kappa_over_2pi_hz: rates.kappa_loss / TWO_PI,
            kappa_ext_over_2pi_hz: rates.kappa_ext / TWO_PI,
            kappa_int_over_2pi_hz: rates.kappa_int() / TWO_PI,
            fsr_hz: rates.fsr,
            finesse: rates.finesse,
            dip_db: s11_db(0.0, rates),
            coupling,
            phonons_per_microwatt: phonon_number(1e-6, p.f_m, rates)?,
        })
    }
}

pub fn run(cmd: &CavityCmd, global: &GlobalArgs) -> CmdResult {
    let cfg = device::resolve(global)?;
    match cmd {
        CavityCmd::Report { qi, qe } => {
            let (p, rates) = device::cavity_rates(&cfg, *qi, *qe)?;
            let r = CavityReport::new(&cfg.name, &p, &rates)?;
            emit(global.out.as_deref(), |w| match global.format.unwrap_or(Format::Text) {
                Format::Json => write_json(w, &r),
                Format::Csv => {
                    writeln!(w, "quantity,value")?;
                    for (k, v) in [
                        ("f_m_hz", r.f_m_hz),
                        ("q_internal", r.q_internal),
                        ("q_external", r.q_external),
                        ("kappa_over_2pi_hz", r.kappa_over_2pi_hz),
                        ("kappa_ext_over_2pi_hz", r.kappa_ext_over_2pi_hz),
                        ("kappa_int_over_2pi_hz", r.kappa_int_over_2pi_hz),
                        ("fsr_hz", r.fsr_hz),
                        ("finesse", r.finesse),
                        ("dip_db", r.dip_db),
                        ("phonons_per_microwatt", r.phonons_per_microwatt),
                    ] {
                        writeln!(w, "{k},{v}")?;
                    }
                    Ok(())
                }
                Format::Text => write_text_rows(
                    w,
                    &[
                        ("device", r.device.clone(), ""),
                        ("f_m", format!("{:.6}", r.f_m_hz / 1e9), "GHz"),
                        ("Q_i", format!("{:.0}", r.q_internal), ""),
                        ("Q_e", format!("{:.0}", r.q_external), ""),
                        ("kappa/2pi", format!("{:.4}", r.kappa_over_2pi_hz / 1e3), "kHz"),
                        ("kappa_ext/2pi", format!("{:.4}", r.kappa_ext_over_2pi_hz / 1e3), "kHz"),
                        ("FSR", format!("{:.4}", r.fsr_hz / 1e6), "MHz"),
                        ("finesse", format!("{:.2}", r.finesse), ""),
                        ("S11 dip", format!("{:.2}", r.dip_db), "dB"),
                        ("coupling", r.coupling.to_string(), ""),
                        ("n per uW", format!("{:.4e}", r.phonons_per_microwatt), ""),
                    ],
                ),
            })
        }
        CavityCmd::FitS11 { input, qi_guess, qe_guess, branch } => {
            let trace = read_s11_csv(open_input(input)?)?;
            let init = CavityParams::new(cfg.f_m, *qi_guess, *qe_guess)?;
            let branch = match branch {
                Branch::Under => CouplingBranch::UnderCoupled,
                Branch::Over => CouplingBranch::OverCoupled,
            };
            let fit = fit_s11(&trace, &init, branch)?;
            let mut derived = Vec::new();
            if let (Some(f), Some(qi), Some(qe)) = (fit.param("f_m"), fit.param("q_internal"), fit.param("q_external"))
            {
                if let Ok(p) = CavityParams::new(f, qi, qe) {
                    if let Ok(rates) = CavityRates::from_q(&p) {
                        derived.push(Derived::new("dip_db", s11_db(0.0, &rates), None, "dB"));
                        derived.push(Derived::new("kappa_over_2pi_hz", rates.kappa_loss / TWO_PI, None, "Hz"));
                    }
                }
            }
            FitReport::new("s11", Some(cfg.name.clone()), fit, derived)
                .emit(global.out.as_deref(), global.format.unwrap_or(Format::Json))
        }
    }
}
