use std::f64::consts::PI;

use proptest::prelude::*;

use sawqd::acoustic_mode::{g0_from_measurement, DeviceConfig};
use sawqd::cavity::{phonon_number, rates_from_params, CavityParams, CavityRates};
use sawqd::constants::TWO_PI;
use sawqd::fitting::{fit_vpi, PowerSweep};
use sawqd::transduction::{
    delta_from_drive, delta_from_drive_detuned, resonant_rate_scaling, synth_rate_sweep, transduction_report,
    v_pi_from_chain, voltage_from_power, vpi_enhancement, RateSweep,
};

fn dev1() -> (DeviceConfig, CavityRates) {
    let cfg = DeviceConfig::builtin("dev1").unwrap();
    let p = CavityParams::new(cfg.f_m, 7600.0, 15300.0).unwrap();
    let rates = rates_from_params(&p, cfg.v_saw(), cfg.l_eff).unwrap();
    (cfg, rates)
}

/// Dev1 geometry with the total loss set by a finesse of 14.
fn finesse_14() -> (DeviceConfig, CavityRates) {
    let (cfg, base) = dev1();
    let kappa = TWO_PI * base.fsr / 14.0;
    let rates = CavityRates { kappa_loss: kappa, kappa_ext: kappa / 3.0, fsr: base.fsr, finesse: 14.0 };
    (cfg, rates)
}

proptest! {
    #[test]
    fn chain_returns_the_coupling_rate(log_p in -9.0f64..-2.0, g0 in 100.0f64..1e5) {
        let (cfg, rates) = dev1();
        let p = 10f64.powf(log_p);
        let delta = delta_from_drive(p, &cfg, &rates, g0).unwrap();
        let n = phonon_number(p, cfg.f_m, &rates).unwrap();
        let back = g0_from_measurement(delta, n, cfg.f_m).unwrap();
        prop_assert!((back / g0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn index_over_root_power_is_constant(log_p in -9.0f64..-1.0, scale in 1.0f64..100.0) {
        let (cfg, rates) = dev1();
        let p = 10f64.powf(log_p);
        let a = delta_from_drive(p, &cfg, &rates, 1.4e3).unwrap() / p.sqrt();
        let b = delta_from_drive(p * scale, &cfg, &rates, 1.4e3).unwrap() / (p * scale).sqrt();
        prop_assert!((a / b - 1.0).abs() < 1e-12);
    }
}

#[test]
fn vpi_fit_of_chain_sweep_is_exact() {
    let (cfg, rates) = dev1();
    let powers: Vec<f64> = (0..8).map(|i| 1e-7 * 2f64.powi(i)).collect();
    let delta: Vec<f64> = powers.iter().map(|&p| delta_from_drive(p, &cfg, &rates, 1.4e3).unwrap()).collect();
    let fit = fit_vpi(&PowerSweep::new(powers.clone(), delta.clone(), cfg.impedance).unwrap()).unwrap();
    let v_pi = fit.param("v_pi").unwrap();
    for (p, d) in powers.iter().zip(&delta) {
        let v = voltage_from_power(*p, cfg.impedance).unwrap();
        assert!((PI * v / v_pi / d - 1.0).abs() < 1e-12);
    }
    let chain = v_pi_from_chain(&cfg, &rates, 1.4e3, 0.0).unwrap();
    assert!((chain / v_pi - 1.0).abs() < 1e-12);
}

#[test]
fn off_resonant_enhancement_from_finesse() {
    let (cfg, rates) = finesse_14();
    let detuning = 2e6;
    let kappa_hz = rates.kappa_loss / TWO_PI;
    let oracle = (1.0 + (2.0 * detuning / kappa_hz).powi(2)).sqrt();
    let ratio = vpi_enhancement(&rates, cfg.f_m, detuning, 1.0).unwrap();
    assert!((ratio / oracle - 1.0).abs() < 1e-12);
    println!("V_pi(off)/V_pi(on) at finesse 14, 2 MHz: {ratio:.3}");
    assert!((ratio / 5.0 - 1.0).abs() < 0.15, "{ratio}");
    // Same ratio from the full chain.
    let on = v_pi_from_chain(&cfg, &rates, 1.4e3, 0.0).unwrap();
    let off = v_pi_from_chain(&cfg, &rates, 1.4e3, detuning).unwrap();
    assert!((off / on / ratio - 1.0).abs() < 1e-12);
    // The multiplier enters the power ratio.
    let boosted = vpi_enhancement(&rates, cfg.f_m, detuning, 25.0 / 14.0).unwrap();
    assert!((boosted * boosted / (ratio * ratio) - 25.0 / 14.0).abs() < 1e-12);
    assert!((vpi_enhancement(&rates, cfg.f_m, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn detuned_drive_never_exceeds_resonant() {
    let (cfg, rates) = dev1();
    let on = delta_from_drive(1e-4, &cfg, &rates, 1e3).unwrap();
    let mut prev = on;
    for k in 1..20 {
        let d = delta_from_drive_detuned(1e-4, &cfg, &rates, 1e3, k as f64 * 1e5).unwrap();
        let mirrored = delta_from_drive_detuned(1e-4, &cfg, &rates, 1e3, -(k as f64) * 1e5).unwrap();
        assert!(d < prev && (d - mirrored).abs() < 1e-15 * on);
        prev = d;
    }
}

#[test]
fn single_phonon_slope() {
    let p: Vec<f64> = (0..12).map(|i| 1e-7 * 1.8f64.powi(i)).collect();
    // δ reaches 0.25 at the top of the sweep.
    let k = 0.25 / p[11].sqrt();
    let sweep = synth_rate_sweep(&p, k, 5e4, 40.0).unwrap();
    let s = resonant_rate_scaling(&sweep).unwrap();
    assert!((s.slope - 1.0).abs() < 0.02, "{}", s.slope);
    assert!(!s.flagged);
    // Without δ the slope check alone decides.
    let blind = RateSweep::new(sweep.p_micro.clone(), sweep.counts.clone(), 40.0, None).unwrap();
    assert!(!resonant_rate_scaling(&blind).unwrap().flagged);
}

#[test]
fn saturated_sweep_is_flagged() {
    let p: Vec<f64> = (0..12).map(|i| 1e-6 * 1.5f64.powi(i)).collect();
    let k = 2.0 / p[11].sqrt();
    let sweep = synth_rate_sweep(&p, k, 5e4, 40.0).unwrap();
    let s = resonant_rate_scaling(&sweep).unwrap();
    assert!(s.slope < 1.0 && s.flagged, "{s:?}");
    let blind = RateSweep::new(sweep.p_micro.clone(), sweep.counts.clone(), 40.0, None).unwrap();
    assert!(resonant_rate_scaling(&blind).unwrap().flagged);
}

#[test]
fn counts_approach_background_at_low_power() {
    let sweep = synth_rate_sweep(&[1e-15, 1e-12, 1e-9], 10.0, 5e4, 40.0).unwrap();
    // J₁(δ) ≈ δ/2 for small δ.
    let excess = 5e4 * (10.0 * 1e-15f64.sqrt() / 2.0).powi(2);
    assert!(((sweep.counts[0] - 40.0) / excess - 1.0).abs() < 1e-3);
    assert!(sweep.counts[0] - 40.0 < 1e-8);
    assert!(sweep.counts.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn report_matches_components() {
    let (cfg, rates) = dev1();
    let r = transduction_report(2e-4, &cfg, &rates, 1.4e3, Some(120.0)).unwrap();
    assert_eq!(r.voltage, voltage_from_power(2e-4, 50.0).unwrap());
    assert_eq!(r.n_phonon, phonon_number(2e-4, cfg.f_m, &rates).unwrap());
    assert!((PI * r.voltage / r.v_pi / r.delta - 1.0).abs() < 1e-9);
    assert!((g0_from_measurement(r.delta, r.n_phonon, cfg.f_m).unwrap() / r.g0_over_2pi - 1.0).abs() < 1e-9);
    assert!(transduction_report(2e-4, &cfg, &rates, 1.4e3, None).unwrap().eta.is_none());
}
