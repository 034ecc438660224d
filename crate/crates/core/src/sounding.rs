//! Channel estimation from raw snapshots: symbol averaging followed by
//! least-squares division through the known transmit sequence and RF
//! calibration.

use std::path::Path;

use num_complex::Complex64;

use crate::cmat::CMat;
use crate::error::{Error, Result};
use crate::io;
use crate::model::{BandId, Ctf, SoundingConfig};

/// Minimum |X[k] * H_RF[k]| accepted by the least-squares divisor. Anything
/// smaller indicates corrupt calibration and is an error rather than a silent
/// near-infinity.
pub const MIN_DIVISOR: f64 = 1e-12;

/// Measured RF-chain response per subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationProfile {
    pub band: BandId,
    pub rf_response: Vec<Complex64>,
}

impl CalibrationProfile {
    pub fn new(band: BandId, rf_response: Vec<Complex64>) -> Result<Self> {
        check_nonzero(&rf_response)?;
        Ok(Self { band, rf_response })
    }
}

/// Known transmit amplitudes per subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitSequence {
    pub amplitudes: Vec<Complex64>,
}

impl TransmitSequence {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        check_nonzero(&amplitudes)?;
        Ok(Self { amplitudes })
    }

    /// All-ones sequence of length `k`.
    pub fn unit(k: usize) -> Self {
        Self {
            amplitudes: vec![Complex64::new(1.0, 0.0); k],
        }
    }
}

fn check_nonzero(seq: &[Complex64]) -> Result<()> {
    for (index, z) in seq.iter().enumerate() {
        let m = z.norm();
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::ZeroMagnitudeEntry { index });
        }
    }
    Ok(())
}

/// Coherent elementwise mean of symbols 1..N_sym-1 of one snapshot; symbol 0
/// is the cyclic-prefix stand-in and is discarded whatever it contains.
///
/// `snapshot` holds the snapshot's symbols back to back, each of
/// `num_subcarriers` values.
pub fn average_symbols(snapshot: &[Complex64], num_subcarriers: usize) -> Result<Vec<Complex64>> {
    let k = num_subcarriers;
    let n_sym = snapshot.len().checked_div(k).unwrap_or(0);
    if k == 0 || !snapshot.len().is_multiple_of(k) || n_sym < 2 {
        return Err(Error::WrongSymbolCount {
            got: n_sym,
            min: 2,
            subcarriers: k,
        });
    }
    let mut out = vec![Complex64::ZERO; k];
    for sym in 1..n_sym {
        let src = &snapshot[sym * k..(sym + 1) * k];
        for (acc, v) in out.iter_mut().zip(src) {
            *acc += v;
        }
    }
    let scale = 1.0 / (n_sym - 1) as f64;
    for acc in out.iter_mut() {
        *acc *= scale;
    }
    Ok(out)
}

/// Precomputed least-squares divisors X[k] * H_RF[k], checked once.
fn divisors(x: &TransmitSequence, cal: &CalibrationProfile) -> Result<Vec<Complex64>> {
    if x.amplitudes.len() != cal.rf_response.len() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "transmit sequence of length {} vs calibration of length {}",
                x.amplitudes.len(),
                cal.rf_response.len()
            ),
        });
    }
    let div: Vec<Complex64> = x
        .amplitudes
        .iter()
        .zip(&cal.rf_response)
        .map(|(a, b)| a * b)
        .collect();
    for (index, d) in div.iter().enumerate() {
        let magnitude = d.norm();
        if magnitude < MIN_DIVISOR {
            return Err(Error::ZeroDivisor { index, magnitude });
        }
    }
    Ok(div)
}

/// Least-squares channel estimate H[k, n] = Y[k, n] / (X[k] * H_RF[k]).
pub fn ls_estimate(
    y: &CMat,
    x: &TransmitSequence,
    cal: &CalibrationProfile,
    config: &SoundingConfig,
) -> Result<Ctf> {
    if y.rows() != config.num_subcarriers {
        return Err(Error::DimensionMismatch {
            context: format!(
                "received matrix has {} rows, config says {} subcarriers",
                y.rows(),
                config.num_subcarriers
            ),
        });
    }
    if y.cols() != config.num_snapshots {
        return Err(Error::DimensionMismatch {
            context: format!(
                "received matrix has {} columns, config says {} snapshots",
                y.cols(),
                config.num_snapshots
            ),
        });
    }
    if y.rows() != x.amplitudes.len() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "received matrix has {} rows, transmit sequence {} entries",
                y.rows(),
                x.amplitudes.len()
            ),
        });
    }
    let div = divisors(x, cal)?;

    let mut h = CMat::zeros(y.rows(), y.cols());
    for n in 0..y.cols() {
        let src = y.col(n);
        let dst = h.col_mut(n);
        for ((out, v), d) in dst.iter_mut().zip(src).zip(&div) {
            *out = v / d;
        }
    }
    Ctf::new(cal.band.clone(), config.clone(), h)
}

/// One column of the least-squares estimate, for streaming use.
pub fn ls_estimate_column(
    y: &[Complex64],
    x: &TransmitSequence,
    cal: &CalibrationProfile,
) -> Result<Vec<Complex64>> {
    if y.len() != x.amplitudes.len() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "received column of length {}, transmit sequence {} entries",
                y.len(),
                x.amplitudes.len()
            ),
        });
    }
    let div = divisors(x, cal)?;
    Ok(y.iter().zip(&div).map(|(v, d)| v / d).collect())
}

/// Reads the RF-chain calibration from a calibration file.
pub fn load_calibration(path: &Path) -> Result<CalibrationProfile> {
    let data = io::read_calibration_file(path)?;
    Ok(data.profile)
}
