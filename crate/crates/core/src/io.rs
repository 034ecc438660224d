//! On-disk formats for raw snapshots, estimated CTFs and calibration data.
//!
//! Every file starts with the 4-byte magic `CSND`, a little-endian u32 header
//! length, and a UTF-8 JSON header, followed by a contiguous little-endian
//! binary payload:
//!
//! * snapshots: header kind `snapshots`, payload `N * N_sym * K` complex
//!   values as f32 pairs, snapshot-major then symbol-major then subcarrier;
//! * ctf: header kind `ctf`, payload `N * K` complex values as f64 pairs,
//!   snapshot-major then subcarrier;
//! * calibration: header kind `calibration`, payload `K` complex f64 pairs of
//!   RF response followed by `K` complex f64 pairs of transmit amplitudes.
//!
//! Headers embed the band and (for matrix files) the full sounding
//! configuration, so files are self-describing. Unknown header keys and
//! version mismatches are rejected.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cmat::CMat;
use crate::error::{Error, Result};
use crate::model::{BandId, Ctf, SoundingConfig};
use crate::sounding::{CalibrationProfile, TransmitSequence};
use crate::synth::RawSnapshots;

const MAGIC: &[u8; 4] = b"CSND";
pub const FORMAT_VERSION: u32 = 1;

const KIND_SNAPSHOTS: &str = "snapshots";
const KIND_CTF: &str = "ctf";
const KIND_CALIBRATION: &str = "calibration";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixHeader {
    kind: String,
    version: u32,
    band: BandId,
    config: SoundingConfig,
    layout: String,
    dtype: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CalibrationHeader {
    kind: String,
    version: u32,
    band: BandId,
    num_subcarriers: usize,
    layout: String,
    dtype: String,
}

/// Contents of a calibration file: RF response and transmit sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationData {
    pub profile: CalibrationProfile,
    pub tx: TransmitSequence,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::ParseError {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

fn write_header<H: Serialize>(w: &mut impl Write, header: &H, path: &Path) -> Result<()> {
    let json = serde_json::to_vec(header).expect("header serialization");
    w.write_all(MAGIC).map_err(|e| io_err(path, e))?;
    w.write_all(&(json.len() as u32).to_le_bytes())
        .map_err(|e| io_err(path, e))?;
    w.write_all(&json).map_err(|e| io_err(path, e))?;
    Ok(())
}

/// Reads the framing and header JSON; returns the header bytes and the byte
/// offset where the payload starts.
fn read_header_bytes(r: &mut impl Read, path: &Path) -> Result<(Vec<u8>, u64)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| parse_err(path, "file too short for magic"))?;
    if &magic != MAGIC {
        return Err(parse_err(path, "bad magic; not a sounder file"));
    }
    let mut len = [0u8; 4];
    r.read_exact(&mut len)
        .map_err(|_| parse_err(path, "file too short for header length"))?;
    let header_len = u32::from_le_bytes(len) as usize;
    let mut header = vec![0u8; header_len];
    r.read_exact(&mut header)
        .map_err(|_| parse_err(path, "file too short for header"))?;
    Ok((header, 8 + header_len as u64))
}

fn decode_header<H: for<'de> Deserialize<'de>>(bytes: &[u8], path: &Path) -> Result<H> {
    serde_json::from_slice(bytes).map_err(|e| parse_err(path, format!("header: {e}")))
}

fn check_kind_version(kind: &str, version: u32, expected_kind: &str, path: &Path) -> Result<()> {
    if kind != expected_kind {
        return Err(parse_err(
            path,
            format!("kind is `{kind}`, expected `{expected_kind}`"),
        ));
    }
    if version != FORMAT_VERSION {
        return Err(parse_err(
            path,
            format!("format version {version}, this build reads {FORMAT_VERSION}"),
        ));
    }
    Ok(())
}

fn check_payload_len(path: &Path, header_end: u64, expected_bytes: u64) -> Result<()> {
    let actual = std::fs::metadata(path)
        .map_err(|e| io_err(path, e))?
        .len()
        .saturating_sub(header_end);
    if actual != expected_bytes {
        return Err(parse_err(
            path,
            format!("payload holds {actual} bytes, expected {expected_bytes}"),
        ));
    }
    Ok(())
}

fn write_cf32(w: &mut impl Write, values: &[Complex64], path: &Path) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 8);
    for z in values {
        buf.extend_from_slice(&(z.re as f32).to_le_bytes());
        buf.extend_from_slice(&(z.im as f32).to_le_bytes());
    }
    w.write_all(&buf).map_err(|e| io_err(path, e))
}

fn write_cf64(w: &mut impl Write, values: &[Complex64], path: &Path) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 16);
    for z in values {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf).map_err(|e| io_err(path, e))
}

fn read_cf32(r: &mut impl Read, count: usize, path: &Path) -> Result<Vec<Complex64>> {
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes)
        .map_err(|_| parse_err(path, format!("payload ended before {count} cf32 values")))?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| {
            Complex64::new(
                f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64,
                f32::from_le_bytes([c[4], c[5], c[6], c[7]]) as f64,
            )
        })
        .collect())
}

fn read_cf64(r: &mut impl Read, count: usize, path: &Path) -> Result<Vec<Complex64>> {
    let mut bytes = vec![0u8; count * 16];
    r.read_exact(&mut bytes)
        .map_err(|_| parse_err(path, format!("payload ended before {count} cf64 values")))?;
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect())
}

// ---------------------------------------------------------------------------
// snapshot files
// ---------------------------------------------------------------------------

pub fn write_snapshot_file(path: &Path, snapshots: &RawSnapshots) -> Result<()> {
    let header = MatrixHeader {
        kind: KIND_SNAPSHOTS.into(),
        version: FORMAT_VERSION,
        band: snapshots.band.clone(),
        config: snapshots.config.clone(),
        layout: "snapshot_symbol_subcarrier".into(),
        dtype: "cf32le".into(),
    };
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    write_header(&mut w, &header, path)?;
    write_cf32(&mut w, &snapshots.data, path)?;
    w.flush().map_err(|e| io_err(path, e))
}

/// Streaming reader over the snapshots of a snapshot file.
#[derive(Debug)]
pub struct SnapshotReader {
    reader: BufReader<File>,
    path: std::path::PathBuf,
    band: BandId,
    config: SoundingConfig,
    next_index: usize,
}

impl SnapshotReader {
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| io_err(path, e))?;
        let mut reader = BufReader::new(file);
        let (bytes, header_end) = read_header_bytes(&mut reader, path)?;
        let header: MatrixHeader = decode_header(&bytes, path)?;
        check_kind_version(&header.kind, header.version, KIND_SNAPSHOTS, path)?;
        header
            .config
            .validate()
            .map_err(|e| parse_err(path, e.to_string()))?;
        let cfg = &header.config;
        let expected = cfg.num_snapshots as u64
            * cfg.symbols_per_snapshot as u64
            * cfg.num_subcarriers as u64
            * 8;
        check_payload_len(path, header_end, expected)?;
        Ok(Self {
            reader,
            path: path.to_path_buf(),
            band: header.band,
            config: header.config,
            next_index: 0,
        })
    }

    pub fn band(&self) -> &BandId {
        &self.band
    }

    pub fn config(&self) -> &SoundingConfig {
        &self.config
    }

    /// Reads the next snapshot (all its symbols); `None` when exhausted.
    pub fn next_snapshot(&mut self) -> Result<Option<Vec<Complex64>>> {
        if self.next_index >= self.config.num_snapshots {
            return Ok(None);
        }
        let count = self.config.symbols_per_snapshot * self.config.num_subcarriers;
        let values = read_cf32(&mut self.reader, count, &self.path)?;
        self.next_index += 1;
        Ok(Some(values))
    }
}

/// Loads a whole snapshot file into memory.
pub fn read_snapshot_file(path: &Path) -> Result<RawSnapshots> {
    let mut reader = SnapshotReader::open(path)?;
    let cfg = reader.config().clone();
    let band = reader.band().clone();
    let mut data =
        Vec::with_capacity(cfg.num_snapshots * cfg.symbols_per_snapshot * cfg.num_subcarriers);
    while let Some(snapshot) = reader.next_snapshot()? {
        data.extend_from_slice(&snapshot);
    }
    Ok(RawSnapshots {
        band,
        config: cfg,
        data,
    })
}

// ---------------------------------------------------------------------------
// ctf files
// ---------------------------------------------------------------------------

pub fn write_ctf_file(path: &Path, ctf: &Ctf) -> Result<()> {
    let mut writer = CtfWriter::create(path, ctf.band.clone(), ctf.config.clone())?;
    for n in 0..ctf.config.num_snapshots {
        writer.write_snapshot(ctf.samples.col(n))?;
    }
    writer.finish()
}

/// Streaming CTF writer: one snapshot column at a time.
pub struct CtfWriter {
    writer: BufWriter<File>,
    path: std::path::PathBuf,
    config: SoundingConfig,
    written: usize,
}

impl CtfWriter {
    pub fn create(path: &Path, band: BandId, config: SoundingConfig) -> Result<Self> {
        let header = MatrixHeader {
            kind: KIND_CTF.into(),
            version: FORMAT_VERSION,
            band,
            config: config.clone(),
            layout: "snapshot_subcarrier".into(),
            dtype: "cf64le".into(),
        };
        let file = File::create(path).map_err(|e| io_err(path, e))?;
        let mut writer = BufWriter::new(file);
        write_header(&mut writer, &header, path)?;
        Ok(Self {
            writer,
            path: path.to_path_buf(),
            config,
            written: 0,
        })
    }

    pub fn write_snapshot(&mut self, column: &[Complex64]) -> Result<()> {
        if column.len() != self.config.num_subcarriers {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "CTF column of {} values, expected {}",
                    column.len(),
                    self.config.num_subcarriers
                ),
            });
        }
        write_cf64(&mut self.writer, column, &self.path)?;
        self.written += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        if self.written != self.config.num_snapshots {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "CTF file got {} snapshots, header promises {}",
                    self.written, self.config.num_snapshots
                ),
            });
        }
        self.writer.flush().map_err(|e| io_err(&self.path, e))
    }
}

pub fn read_ctf_file(path: &Path) -> Result<Ctf> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = BufReader::new(file);
    let (bytes, header_end) = read_header_bytes(&mut reader, path)?;
    let header: MatrixHeader = decode_header(&bytes, path)?;
    check_kind_version(&header.kind, header.version, KIND_CTF, path)?;
    header
        .config
        .validate()
        .map_err(|e| parse_err(path, e.to_string()))?;
    let cfg = header.config;
    let count = cfg.num_snapshots * cfg.num_subcarriers;
    check_payload_len(path, header_end, count as u64 * 16)?;
    let data = read_cf64(&mut reader, count, path)?;
    let samples = CMat::from_data(cfg.num_subcarriers, cfg.num_snapshots, data)?;
    Ctf::new(header.band, cfg, samples)
}

// ---------------------------------------------------------------------------
// calibration files
// ---------------------------------------------------------------------------

pub fn write_calibration_file(
    path: &Path,
    profile: &CalibrationProfile,
    tx: &TransmitSequence,
) -> Result<()> {
    let k = profile.rf_response.len();
    if tx.amplitudes.len() != k {
        return Err(Error::DimensionMismatch {
            context: format!(
                "RF response of {k} entries vs transmit sequence of {}",
                tx.amplitudes.len()
            ),
        });
    }
    let header = CalibrationHeader {
        kind: KIND_CALIBRATION.into(),
        version: FORMAT_VERSION,
        band: profile.band.clone(),
        num_subcarriers: k,
        layout: "rf_response_then_tx".into(),
        dtype: "cf64le".into(),
    };
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    write_header(&mut w, &header, path)?;
    write_cf64(&mut w, &profile.rf_response, path)?;
    write_cf64(&mut w, &tx.amplitudes, path)?;
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_calibration_file(path: &Path) -> Result<CalibrationData> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = BufReader::new(file);
    let (bytes, header_end) = read_header_bytes(&mut reader, path)?;
    let header: CalibrationHeader = decode_header(&bytes, path)?;
    check_kind_version(&header.kind, header.version, KIND_CALIBRATION, path)?;
    let k = header.num_subcarriers;
    check_payload_len(path, header_end, 2 * k as u64 * 16)?;
    let rf = read_cf64(&mut reader, k, path)?;
    let tx = read_cf64(&mut reader, k, path)?;
    Ok(CalibrationData {
        profile: CalibrationProfile::new(header.band, rf)?,
        tx: TransmitSequence::new(tx)?,
    })
}
