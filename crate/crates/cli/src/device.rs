use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use sawqd::acoustic_mode::DeviceConfig;
use sawqd::cavity::{rates_from_params, CavityParams, CavityRates};
use sawqd::constants::{attenuate, dbm_to_watt};

use crate::output::Failure;
use crate::GlobalArgs;

/// Directory list searched for `<name>.json` device files.
pub const DEVICE_PATH_VAR: &str = "SAWQD_DEVICE_PATH";

fn load_file(path: &Path) -> Result<DeviceConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    DeviceConfig::from_json(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// `--config` wins; otherwise a built-in name, then `<name>.json` on the
/// search path.
pub fn resolve(global: &GlobalArgs) -> Result<DeviceConfig, Failure> {
    if let Some(path) = &global.config {
        return load_file(path);
    }
    if let Ok(cfg) = DeviceConfig::builtin(&global.device) {
        return Ok(cfg);
    }
    if let Some(dirs) = env::var_os(DEVICE_PATH_VAR) {
        for dir in env::split_paths(&dirs) {
            let candidate: PathBuf = dir.join(format!("{}.json", global.device));
            if candidate.is_file() {
                return load_file(&candidate);
            }
        }
    }
    Err(Failure::Input(format!(
        "unknown device `{}` (built-ins: {}; or a JSON file on {DEVICE_PATH_VAR})",
        global.device,
        DeviceConfig::builtin_names().join(", ")
    )))
}

/// Measured quality factors shipped with the built-in devices.
fn builtin_q(name: &str) -> Option<(f64, f64)> {
    match name.to_ascii_lowercase().as_str() {
        "dev1" | "dev1-750nm" => Some((7600.0, 15300.0)),
        _ => None,
    }
}

/// Quality factors from flags, falling back to the device's measured values.
pub fn cavity_params(cfg: &DeviceConfig, qi: Option<f64>, qe: Option<f64>) -> Result<CavityParams, Failure> {
    let known = builtin_q(&cfg.name);
    let qi = qi.or(known.map(|k| k.0));
    let qe = qe.or(known.map(|k| k.1));
    match (qi, qe) {
        (Some(qi), Some(qe)) => Ok(CavityParams::new(cfg.f_m, qi, qe)?),
        _ => Err(Failure::Input(format!("device `{}` has no measured quality factors; pass --qi and --qe", cfg.name))),
    }
}

pub fn cavity_rates(
    cfg: &DeviceConfig,
    qi: Option<f64>,
    qe: Option<f64>,
) -> Result<(CavityParams, CavityRates), Failure> {
    let p = cavity_params(cfg, qi, qe)?;
    let rates = rates_from_params(&p, cfg.v_saw(), cfg.l_eff)?;
    Ok((p, rates))
}

/// Power at the device from a dBm or watt flag, after the cable loss.
pub fn input_power(dbm: Option<f64>, watt: Option<f64>, global: &GlobalArgs) -> Result<f64, Failure> {
    let raw = match (dbm, watt) {
        (Some(d), None) => dbm_to_watt(d),
        (None, Some(w)) => w,
        (Some(_), Some(_)) => return Err(Failure::Input("give either a dBm or a watt power, not both".into())),
        (None, None) => return Err(Failure::Input("a drive power is required".into())),
    };
    if !(raw >= 0.0) || !raw.is_finite() {
        return Err(Failure::Input(format!("power must be finite and non-negative, got {raw}")));
    }
    Ok(attenuate(raw, global.cable_loss_db))
}
