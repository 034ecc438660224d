//! `sounder process`: raw snapshots -> time-variant CTF, streaming one
//! snapshot at a time (discard the cyclic-prefix symbol, average the rest,
//! divide through transmit sequence and RF calibration).

use std::path::PathBuf;

use clap::Args;
use sounder_core::error::Error;
use sounder_core::io::{self, CtfWriter, SnapshotReader};
use sounder_core::sounding;

use crate::error::Result;

#[derive(Debug, Args)]
pub struct ProcessArgs {
    /// Input snapshot file.
    #[arg(long)]
    pub snapshots: PathBuf,

    /// Calibration file with the RF response and transmit sequence.
    #[arg(long)]
    pub calibration: PathBuf,

    /// Output CTF file.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &ProcessArgs) -> Result<()> {
    let mut reader = SnapshotReader::open(&args.snapshots)?;
    let cal = io::read_calibration_file(&args.calibration)?;

    let k = reader.config().num_subcarriers;
    if cal.profile.rf_response.len() != k {
        return Err(Error::DimensionMismatch {
            context: format!(
                "snapshots carry {k} subcarriers, calibration {}",
                cal.profile.rf_response.len()
            ),
        }
        .into());
    }
    if cal.profile.band.label != reader.band().label {
        return Err(Error::BandMismatch {
            context: format!(
                "snapshots are band `{}`, calibration is band `{}`",
                reader.band().label,
                cal.profile.band.label
            ),
        }
        .into());
    }

    let mut writer = CtfWriter::create(&args.out, reader.band().clone(), reader.config().clone())?;
    let mut count = 0usize;
    while let Some(snapshot) = reader.next_snapshot()? {
        let averaged = sounding::average_symbols(&snapshot, k)?;
        let column = sounding::ls_estimate_column(&averaged, &cal.tx, &cal.profile)?;
        writer.write_snapshot(&column)?;
        count += 1;
    }
    writer.finish()?;

    println!("estimated CTF for {count} snapshots -> {}", args.out.display());
    Ok(())
}
