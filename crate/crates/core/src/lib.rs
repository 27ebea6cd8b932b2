//! Shelf weight-change estimation from plate vibration spectra.

pub mod dsp;
pub mod error;
pub mod estimator;
pub mod evaluation;
pub mod io;
pub mod plate;
pub mod seed;
pub mod simulator;

pub use error::{Error, Result};
