//! Forward models and inverse fits for surface-acoustic-wave cavities coupled
//! to quantum dots: phase-modulated fluorescence spectra, microwave cavity
//! response, mode volumes and single-phonon coupling rates, half-wave voltage
//! extraction and beam-waist mapping through spectral smearing.
//!
//! Internal frequencies are angular (rad/s) where a type says so; all file
//! and command-line I/O uses ordinary frequency (Hz).

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acoustic_mode;
pub mod cavity;
pub mod constants;
pub mod error;
pub mod fitting;
pub mod io;
pub mod profiler;
pub mod spectrum;
pub mod transduction;

pub use error::{Error, Result};
