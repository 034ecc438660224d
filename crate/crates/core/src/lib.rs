//! Post-processing for multi-band OFDM channel-sounding measurements.
//!
//! The crate takes raw sounder snapshots (or synthesizes them), estimates the
//! time-variant channel transfer function by least squares, partitions it into
//! stationarity regions, denoises in the delay domain against a cross-band
//! common dynamic range, and estimates per region:
//!
//! * the Rician K-factor by the method of moments, and
//! * the RMS delay spread from a multitaper (2D DPSS) local scattering
//!   function,
//!
//! plus band-level statistics: means, standard deviations, empirical CDFs and
//! the correlation between K-factor and delay spread.
//!
//! Region-level work is data-parallel via rayon (feature `parallel`, on by
//! default); disabling the feature falls back to an identical sequential path.

pub mod cmat;
pub mod dispersion;
pub mod error;
pub mod io;
pub mod kfactor;
pub mod model;
pub mod par;
pub mod pipeline;
pub mod preprocess;
pub mod sounding;
pub mod stats;
pub mod synth;

mod spectral;
#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
