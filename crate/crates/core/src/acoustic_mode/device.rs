use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{DEFORMATION_POTENTIAL_HZ, KAPPA_DEPTH, LAMBDA_SAW, LINE_IMPEDANCE, RHO_GAAS, TWO_PI};
use crate::error::{domain, require_non_negative, require_positive, Error, Result};

/// Geometry and material constants of one SAW cavity device (SI units).
///
/// The JSON form uses exactly these field names; `kappa_depth` is `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub name: String,
    /// Focal waist w₀, m.
    pub w0: f64,
    /// Effective cavity length, m.
    pub l_eff: f64,
    /// SAW wavelength, m.
    pub lambda_saw: f64,
    /// Mode frequency, Hz.
    pub f_m: f64,
    /// Emitter depth below the surface, m.
    pub z_qd: f64,
    /// Mass density, kg/m³.
    pub rho: f64,
    /// Deformation potential G, Hz per unit strain.
    pub deformation_potential: f64,
    /// Complex depth-decay constant κ as `[re, im]`.
    pub kappa_depth: [f64; 2],
    /// Line impedance Z, Ω.
    pub impedance: f64,
    pub idt_periods: u32,
}

const BUILTIN_NAMES: [&str; 5] = ["dev1", "dev1-750nm", "dev2", "dev3", "dev4"];

impl DeviceConfig {
    /// Names accepted by [`DeviceConfig::builtin`].
    pub fn builtin_names() -> &'static [&'static str] {
        &BUILTIN_NAMES
    }

    /// Built-in device by name (case-insensitive).
    ///
    /// `dev1` uses the 500 nm emitter depth of its wafer; `dev1-750nm` carries
    /// the alternative 750 nm depth. `dev2` holds the 5.6 µm focal waist; its
    /// emitters sit where the beam has widened to about 15 µm.
    pub fn builtin(name: &str) -> Result<Self> {
        let (w0, l_eff, z_qd, idt_periods) = match name.to_ascii_lowercase().as_str() {
            "dev1" => (4.6e-6, 146e-6, 500e-9, 50),
            "dev1-750nm" => (4.6e-6, 146e-6, 750e-9, 50),
            "dev2" => (5.6e-6, 229e-6, 150e-9, 100),
            "dev3" => (2.4e-6, 123e-6, 500e-9, 25),
            "dev4" => (25e-6, 39e-6, 500e-9, 10),
            other => return domain(format!("unknown device '{other}' (built-ins: {})", BUILTIN_NAMES.join(", "))),
        };
        Ok(Self {
            name: name.to_ascii_lowercase(),
            w0,
            l_eff,
            lambda_saw: LAMBDA_SAW,
            f_m: 3.6e9,
            z_qd,
            rho: RHO_GAAS,
            deformation_potential: DEFORMATION_POTENTIAL_HZ,
            kappa_depth: [KAPPA_DEPTH.0, KAPPA_DEPTH.1],
            impedance: LINE_IMPEDANCE,
            idt_periods,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("w0", self.w0),
            ("l_eff", self.l_eff),
            ("lambda_saw", self.lambda_saw),
            ("f_m", self.f_m),
            ("rho", self.rho),
            ("impedance", self.impedance),
        ] {
            require_positive(name, v)?;
            if !v.is_finite() {
                return domain(format!("{name} must be finite"));
            }
        }
        require_non_negative("z_qd", self.z_qd)?;
        require_non_negative("deformation_potential", self.deformation_potential)?;
        if self.w0 >= self.l_eff {
            return domain(format!("w0 ({}) must be smaller than l_eff ({})", self.w0, self.l_eff));
        }
        if !(self.kappa_depth[1] < 0.0) || !self.kappa_depth[0].is_finite() {
            return Err(Error::Domain(format!(
                "kappa_depth imaginary part must be negative for a bound mode, got {:?}",
                self.kappa_depth
            )));
        }
        Ok(())
    }

    pub fn wavenumber(&self) -> f64 {
        TWO_PI / self.lambda_saw
    }

    pub fn kappa(&self) -> Complex64 {
        Complex64::new(self.kappa_depth[0], self.kappa_depth[1])
    }

    /// Rayleigh range πw₀²/λ.
    pub fn rayleigh_range(&self) -> f64 {
        std::f64::consts::PI * self.w0 * self.w0 / self.lambda_saw
    }

    /// Beam radius w(x).
    pub fn waist_at(&self, x: f64) -> f64 {
        let r = x / self.rayleigh_range();
        self.w0 * (1.0 + r * r).sqrt()
    }

    /// SAW phase velocity λ·f_m.
    pub fn v_saw(&self) -> f64 {
        self.lambda_saw * self.f_m
    }

    pub fn omega_m(&self) -> f64 {
        TWO_PI * self.f_m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_valid() {
        for name in DeviceConfig::builtin_names() {
            DeviceConfig::builtin(name).unwrap().validate().unwrap();
        }
        assert!(DeviceConfig::builtin("dev9").is_err());
        assert_eq!(DeviceConfig::builtin("DEV3").unwrap().w0, 2.4e-6);
    }

    #[test]
    fn json_round_trip_uses_field_names() {
        let cfg = DeviceConfig::builtin("dev4").unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        for key in [
            "name",
            "w0",
            "l_eff",
            "lambda_saw",
            "f_m",
            "z_qd",
            "rho",
            "deformation_potential",
            "kappa_depth",
            "impedance",
            "idt_periods",
        ] {
            assert!(text.contains(&format!("\"{key}\"")), "{key}");
        }
        assert_eq!(DeviceConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn invalid_configs() {
        let mut c = DeviceConfig::builtin("dev1").unwrap();
        c.w0 = 200e-6;
        assert!(c.validate().is_err());
        let mut c = DeviceConfig::builtin("dev1").unwrap();
        c.kappa_depth = [0.483, 0.489];
        assert!(c.validate().is_err());
        let mut c = DeviceConfig::builtin("dev1").unwrap();
        c.rho = 0.0;
        assert!(c.validate().is_err());
        assert!(DeviceConfig::from_json("{\"name\":\"x\"}").is_err());
    }

    #[test]
    fn derived_geometry() {
        let c = DeviceConfig::builtin("dev1").unwrap();
        assert!((c.v_saw() - 2988.0).abs() < 1e-9);
        let xr = c.rayleigh_range();
        assert!((c.waist_at(xr) / c.w0 - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(c.waist_at(0.0), c.w0);
    }
}
