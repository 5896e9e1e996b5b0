//! CSV and JSON interchange. Readers accept `#` comment lines, match headers
//! case-insensitively and report malformed input with 1-based line numbers.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::constants::{attenuate, dbm_to_watt};
use crate::error::{Error, Result};
use crate::fitting::{S11Data, S11Trace};
use crate::profiler::{BeamScan, PLSpectrum};
use crate::spectrum::SpectrumTrace;

/// Numeric columns of a CSV table and the index of the header that matched.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: usize,
    pub columns: Vec<Vec<f64>>,
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => parse_error(line, format!("{kind:?}")),
    }
}

/// Reads a numeric table whose header must equal one of `headers`.
pub fn read_table<R: Read>(reader: R, headers: &[&[&str]]) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let first = match records.next() {
        Some(r) => r.map_err(csv_error)?,
        None => return Err(parse_error(1, "empty input: expected a header line")),
    };
    let header_line = first.position().map(|p| p.line() as usize).unwrap_or(1);
    let found: Vec<String> = first.iter().map(|s| s.to_ascii_lowercase()).collect();
    let header = headers
        .iter()
        .position(|h| h.len() == found.len() && h.iter().zip(&found).all(|(a, b)| a.eq_ignore_ascii_case(b)))
        .ok_or_else(|| {
            let expected: Vec<String> = headers.iter().map(|h| h.join(",")).collect();
            parse_error(header_line, format!("header `{}` is not one of: {}", found.join(","), expected.join(" | ")))
        })?;
    let width = headers[header].len();
    let mut columns = vec![Vec::new(); width];
    for record in records {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != width {
            return Err(parse_error(line, format!("expected {width} fields, found {}", record.len())));
        }
        for (col, field) in columns.iter_mut().zip(record.iter()) {
            let v: f64 = field.parse().map_err(|_| parse_error(line, format!("`{field}` is not a number")))?;
            if v.is_nan() {
                return Err(parse_error(line, "NaN is not allowed"));
            }
            col.push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(parse_error(header_line, "no data rows after the header"));
    }
    Ok(Table { header, columns })
}

/// Writes a header and rows column-wise; values use the shortest
/// round-trip representation.
pub fn write_table<W: Write>(writer: W, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(header).map_err(csv_error)?;
    let rows = columns.first().map_or(0, |c| c.len());
    for i in 0..rows {
        wtr.write_record(columns.iter().map(|c| c[i].to_string())).map_err(csv_error)?;
    }
    wtr.flush()?;
    Ok(())
}

/// `detuning_hz,counts`.
pub fn read_spectrum_csv<R: Read>(reader: R) -> Result<SpectrumTrace> {
    let mut t = read_table(reader, &[&["detuning_hz", "counts"]])?;
    let counts = t.columns.pop().unwrap_or_default();
    let detuning = t.columns.pop().unwrap_or_default();
    SpectrumTrace::new(detuning, counts)
}

pub fn write_spectrum_csv<W: Write>(writer: W, trace: &SpectrumTrace) -> Result<()> {
    write_table(writer, &["detuning_hz", "counts"], &[&trace.detuning, &trace.counts])
}

/// `freq_hz,s11_db` (magnitude) or `freq_hz,re,im` (complex).
pub fn read_s11_csv<R: Read>(reader: R) -> Result<S11Trace> {
    let t = read_table(reader, &[&["freq_hz", "s11_db"], &["freq_hz", "re", "im"]])?;
    let freq = t.columns[0].clone();
    let data = if t.header == 0 {
        S11Data::MagnitudeDb(t.columns[1].clone())
    } else {
        S11Data::Complex(t.columns[1].iter().zip(&t.columns[2]).map(|(&re, &im)| Complex64::new(re, im)).collect())
    };
    S11Trace::new(freq, data)
}

pub fn write_s11_csv<W: Write>(writer: W, trace: &S11Trace) -> Result<()> {
    match &trace.data {
        S11Data::MagnitudeDb(db) => write_table(writer, &["freq_hz", "s11_db"], &[&trace.freq, db]),
        S11Data::Complex(z) => {
            let re: Vec<f64> = z.iter().map(|v| v.re).collect();
            let im: Vec<f64> = z.iter().map(|v| v.im).collect();
            write_table(writer, &["freq_hz", "re", "im"], &[&trace.freq, &re, &im])
        }
    }
}

/// `wavelength_nm,counts`.
pub fn read_pl_csv<R: Read>(reader: R) -> Result<PLSpectrum> {
    let t = read_table(reader, &[&["wavelength_nm", "counts"]])?;
    let wl = t.columns[0].iter().map(|w| w * 1e-9).collect();
    PLSpectrum::new(wl, t.columns[1].clone())
}

pub fn write_pl_csv<W: Write>(writer: W, spec: &PLSpectrum) -> Result<()> {
    let nm: Vec<f64> = spec.wavelength.iter().map(|w| w * 1e9).collect();
    write_table(writer, &["wavelength_nm", "counts"], &[&nm, &spec.counts])
}

/// `position_um,D`.
pub fn read_beam_scan_csv<R: Read>(reader: R) -> Result<BeamScan> {
    let t = read_table(reader, &[&["position_um", "D"]])?;
    let pos = t.columns[0].iter().map(|p| p * 1e-6).collect();
    BeamScan::new(pos, t.columns[1].clone(), None)
}

pub fn write_beam_scan_csv<W: Write>(writer: W, scan: &BeamScan) -> Result<()> {
    let um: Vec<f64> = scan.position.iter().map(|p| p * 1e6).collect();
    write_table(writer, &["position_um", "D"], &[&um, &scan.metric])
}

/// `x_m,g0_hz`.
pub fn write_g0_csv<W: Write>(writer: W, x: &[f64], g0_hz: &[f64]) -> Result<()> {
    write_table(writer, &["x_m", "g0_hz"], &[x, g0_hz])
}

/// Power sweep columns `p_dbm,delta` or `p_watt,delta`. Powers are returned
/// in watts at the device after `cable_loss_db` of attenuation.
pub fn read_power_sweep_csv<R: Read>(reader: R, cable_loss_db: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let t = read_table(reader, &[&["p_dbm", "delta"], &["p_watt", "delta"]])?;
    let watts = t.columns[0]
        .iter()
        .map(|&p| attenuate(if t.header == 0 { dbm_to_watt(p) } else { p }, cable_loss_db))
        .collect();
    Ok((watts, t.columns[1].clone()))
}

pub fn write_power_sweep_csv<W: Write>(writer: W, p_watt: &[f64], delta: &[f64]) -> Result<()> {
    write_table(writer, &["p_watt", "delta"], &[p_watt, delta])
}
