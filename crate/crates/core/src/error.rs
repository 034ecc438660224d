//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// One or more sounding-configuration invariants do not hold.
    #[error("invalid sounding configuration:\n  {}", violations.join("\n  "))]
    InvalidConfig { violations: Vec<String> },

    /// A region length must be even to center the Doppler axis.
    #[error("region length {n_stat} is odd; Doppler axis needs an even length")]
    OddRegionLength { n_stat: usize },

    /// A synthetic tap lies outside the representable delay/Doppler range.
    #[error("tap {index}: {reason}")]
    TapOutOfRange { index: usize, reason: String },

    /// The transmit sequence contains a zero-magnitude amplitude.
    #[error("transmit amplitude is zero at subcarrier {index}")]
    ZeroTransmitAmplitude { index: usize },

    /// A snapshot does not contain the expected number of OFDM symbols.
    #[error("snapshot holds {got} symbols, expected at least {min} whole symbols of {subcarriers} subcarriers")]
    WrongSymbolCount {
        got: usize,
        min: usize,
        subcarriers: usize,
    },

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    /// Least-squares divisor |X[k] * H_RF[k]| fell below the safe threshold.
    #[error("near-zero divisor at subcarrier {index} (|X*H_RF| = {magnitude:.3e})")]
    ZeroDivisor { index: usize, magnitude: f64 },

    /// A calibration entry has zero (or non-finite) magnitude.
    #[error("calibration entry at subcarrier {index} has zero or non-finite magnitude")]
    ZeroMagnitudeEntry { index: usize },

    /// A sample that must be finite is not.
    #[error("non-finite sample at {context}")]
    NonFiniteSample { context: String },

    #[error("region is identically zero")]
    AllZeroRegion,

    #[error("requested {requested} tapers but sequence length is {len}")]
    InvalidTaperOrder { requested: usize, len: usize },

    /// The power delay profile has no mass; the delay spread is undefined.
    #[error("power delay profile sums to zero")]
    ZeroPdp,

    /// Correlation input is constant or too short.
    #[error("degenerate correlation input: {context}")]
    DegenerateInput { context: String },

    #[error("band {band}: only {valid} valid regions, need at least {min}")]
    TooFewValidRegions {
        band: String,
        valid: usize,
        min: usize,
    },

    #[error("analysis window [{start} s, {end} s) selects no whole region of {measured} s of data")]
    WindowOutOfRange { start: f64, end: f64, measured: f64 },

    #[error("band mismatch: {context}")]
    BandMismatch { context: String },

    #[error("parse error in {path}: {reason}")]
    ParseError { path: String, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable machine-readable tag for each variant, used by CLI error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidConfig { .. } => "InvalidConfig",
            Error::OddRegionLength { .. } => "OddRegionLength",
            Error::TapOutOfRange { .. } => "TapOutOfRange",
            Error::ZeroTransmitAmplitude { .. } => "ZeroTransmitAmplitude",
            Error::WrongSymbolCount { .. } => "WrongSymbolCount",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::ZeroDivisor { .. } => "ZeroDivisor",
            Error::ZeroMagnitudeEntry { .. } => "ZeroMagnitudeEntry",
            Error::NonFiniteSample { .. } => "NonFiniteSample",
            Error::AllZeroRegion => "AllZeroRegion",
            Error::InvalidTaperOrder { .. } => "InvalidTaperOrder",
            Error::ZeroPdp => "ZeroPdp",
            Error::DegenerateInput { .. } => "DegenerateInput",
            Error::TooFewValidRegions { .. } => "TooFewValidRegions",
            Error::WindowOutOfRange { .. } => "WindowOutOfRange",
            Error::BandMismatch { .. } => "BandMismatch",
            Error::ParseError { .. } => "ParseError",
            Error::Io { .. } => "IoError",
        }
    }
}
