use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;

use sawqd::fitting::FitResult;
use sawqd::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    /// Aligned human-readable text.
    Text,
}

/// Why a command did not succeed; each maps to one exit code.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    /// The result was written but the fit did not converge.
    NotConverged(String),
    Degenerate(String),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::NotConverged(_) | Failure::Degenerate(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "input error: {m}"),
            Failure::NotConverged(m) => write!(f, "fit did not converge: {m}"),
            Failure::Degenerate(m) => write!(f, "degenerate input: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Degenerate(_) => Failure::Degenerate(e.to_string()),
            Error::Numerical { ref diagnostics, .. } => Failure::Numerical(format!("{e}; {}", diagnostics.join("; "))),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

pub type CmdResult = Result<(), Failure>;

/// Opens `path` for reading with the file name in any error.
pub fn open_input(path: &Path) -> Result<File, Failure> {
    File::open(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Runs `f` against the `--out` file or standard output.
pub fn emit(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<(), Failure>) -> CmdResult {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

pub fn write_json(w: &mut dyn Write, value: &impl Serialize) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Failure::Input(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

/// Column-major table used for the JSON form of CSV outputs.
#[derive(Debug, Serialize)]
pub struct TableJson<'a> {
    pub columns: Vec<&'a str>,
    pub data: Vec<&'a [f64]>,
}

/// Aligned `key  value  unit` lines.
pub fn write_text_rows(w: &mut dyn Write, rows: &[(&str, String, &str)]) -> Result<(), Failure> {
    let key_width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    let val_width = rows.iter().map(|r| r.1.chars().count()).max().unwrap_or(0);
    for (k, v, unit) in rows {
        let line = format!("{k:<key_width$}  {v:>val_width$}  {unit}");
        writeln!(w, "{}", line.trim_end())?;
    }
    Ok(())
}

/// Fit outcome as written by every fitting command.
#[derive(Debug, Serialize)]
pub struct FitReport {
    pub kind: &'static str,
    pub device: Option<String>,
    pub names: Vec<String>,
    pub params: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
    pub warnings: Vec<String>,
    /// Quantities computed from the fitted parameters.
    pub derived: Vec<Derived>,
}

#[derive(Debug, Serialize)]
pub struct Derived {
    pub name: String,
    pub value: f64,
    pub sigma: Option<f64>,
    pub unit: String,
}

impl Derived {
    pub fn new(name: &str, value: f64, sigma: Option<f64>, unit: &str) -> Self {
        Self { name: name.into(), value, sigma, unit: unit.into() }
    }
}

impl FitReport {
    pub fn new(kind: &'static str, device: Option<String>, fit: FitResult, derived: Vec<Derived>) -> Self {
        let sigmas = fit.sigmas();
        Self {
            kind,
            device,
            names: fit.names,
            params: fit.params,
            sigmas,
            covariance: fit.covariance,
            residual_norm: fit.residual_norm,
            iterations: fit.iterations,
            converged: fit.converged,
            gradient_norm: fit.gradient_norm,
            warnings: fit.warnings,
            derived,
        }
    }

    /// Writes the report and turns a non-converged fit into exit code 2.
    pub fn emit(&self, out: Option<&Path>, format: Format) -> CmdResult {
        emit(out, |w| match format {
            Format::Json => write_json(w, self),
            Format::Csv => {
                writeln!(w, "name,value,sigma")?;
                for ((n, v), s) in self.names.iter().zip(&self.params).zip(&self.sigmas) {
                    writeln!(w, "{n},{v},{s}")?;
                }
                for d in &self.derived {
                    let s = d.sigma.map(|s| s.to_string()).unwrap_or_default();
                    writeln!(w, "{},{},{s}", d.name, d.value)?;
                }
                Ok(())
            }
            Format::Text => {
                let mut rows: Vec<(&str, String, &str)> = self
                    .names
                    .iter()
                    .zip(&self.params)
                    .zip(&self.sigmas)
                    .map(|((n, v), s)| (n.as_str(), format!("{v:.6e} ± {s:.2e}"), ""))
                    .collect();
                for d in &self.derived {
                    let v = match d.sigma {
                        Some(s) => format!("{:.6} ± {s:.2e}", d.value),
                        None => format!("{:.6}", d.value),
                    };
                    rows.push((d.name.as_str(), v, d.unit.as_str()));
                }
                rows.push(("converged", self.converged.to_string(), ""));
                write_text_rows(w, &rows)?;
                for warning in &self.warnings {
                    writeln!(w, "warning: {warning}")?;
                }
                Ok(())
            }
        })?;
        if self.converged {
            Ok(())
        } else {
            Err(Failure::NotConverged(self.warnings.join("; ")))
        }
    }
}
