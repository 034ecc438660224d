//! `sounder simulate`: synthesize a measurement into a snapshot file plus its
//! calibration file and ground-truth CSV.

use std::path::{Path, PathBuf};

use clap::Args;
use num_complex::Complex64;
use sounder_core::model::{BandId, SoundingConfig};
use sounder_core::sounding::{CalibrationProfile, TransmitSequence};
use sounder_core::synth::{
    self, delay_profile_spread, DrivebyScenario, GroundTruth,
};
use sounder_core::{io, synth::gen_driveby};

use crate::error::{CliError, Result};
use crate::presets;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Built-in scenario: `driveby-default` or `rician-10db`.
    #[arg(long, conflicts_with = "scenario", default_value = "driveby-default")]
    pub preset: String,

    /// JSON drive-by scenario file (overrides --preset).
    #[arg(long)]
    pub scenario: Option<PathBuf>,

    /// JSON sounding configuration; defaults to the built-in desk-scale setup.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Band label written into all output headers.
    #[arg(long, default_value = "3.2GHz")]
    pub band_label: String,

    /// Carrier frequency in Hz.
    #[arg(long, default_value_t = 3.2e9)]
    pub carrier_hz: f64,

    /// Per-symbol signal-to-noise ratio of the synthesized receiver, in dB.
    #[arg(long, default_value_t = 30.0)]
    pub snr_db: f64,

    /// Seed for channel and noise generation (overrides the scenario seed).
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output snapshot file.
    #[arg(long)]
    pub out: PathBuf,

    /// Ground-truth CSV path (default: `<out>.truth.csv`).
    #[arg(long)]
    pub ground_truth: Option<PathBuf>,

    /// Calibration file path (default: `<out>.cal.csnd`).
    #[arg(long)]
    pub calibration_out: Option<PathBuf>,
}

fn load_config(path: &Path) -> Result<SoundingConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let cfg: SoundingConfig =
        serde_json::from_str(&text).map_err(|e| CliError::parse(path, e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn load_scenario(path: &Path) -> Result<DrivebyScenario> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(path, e.to_string()))
}

/// Ground truth of the i.i.d. Rician preset. The channel is white across
/// subcarriers, so its delay profile is a point mass at bin zero (carrying the
/// constant part plus one bin of diffuse power) over a flat floor.
fn rician_ground_truth(cfg: &SoundingConfig, k_db: f64) -> GroundTruth {
    let k_lin = 10f64.powf(k_db / 10.0);
    let constant = k_lin / (1.0 + k_lin);
    let fluctuating = 1.0 - constant;
    let k = cfg.num_subcarriers;
    let bin = 1.0 / cfg.bandwidth_hz;
    let mut profile: Vec<(f64, f64)> = (0..k).map(|l| (l as f64 * bin, fluctuating)).collect();
    profile[0].1 += k as f64 * constant;
    let spread = delay_profile_spread(&profile);
    let regions = cfg.region_count();
    GroundTruth {
        k_db: vec![k_db; regions],
        rms_delay_spread_s: vec![spread; regions],
    }
}

pub fn run(args: &SimulateArgs) -> Result<()> {
    let cfg = match &args.config {
        Some(path) => load_config(path)?,
        None => presets::desk_config(args.carrier_hz).validated()?,
    };
    let band = BandId::new(args.band_label.clone(), args.carrier_hz);

    let scenario = match (&args.scenario, args.preset.as_str()) {
        (Some(path), _) => {
            let mut scenario = load_scenario(path)?;
            if let Some(seed) = args.seed {
                scenario.seed = seed;
            }
            Some(scenario)
        }
        (None, "driveby-default") => {
            Some(presets::driveby_default_scenario(args.seed.unwrap_or(42)))
        }
        (None, "rician-10db") => None,
        (None, other) => {
            return Err(CliError::BadArgs(format!(
                "unknown preset `{other}` (expected `driveby-default` or `rician-10db`)"
            )));
        }
    };

    let (mut ctf, truth) = match scenario {
        Some(scenario) => {
            if scenario.duration_s < cfg.measurement_duration_s {
                return Err(CliError::BadArgs(format!(
                    "scenario covers {} s but the measurement lasts {} s",
                    scenario.duration_s, cfg.measurement_duration_s
                )));
            }
            gen_driveby(&cfg, &scenario)?
        }
        None => {
            let ctf = synth::gen_rician_iid(&cfg, 10.0, 1.0, args.seed.unwrap_or(42))?;
            let truth = rician_ground_truth(&cfg, 10.0);
            (ctf, truth)
        }
    };
    ctf.band = band.clone();

    let k = cfg.num_subcarriers;
    let tx = TransmitSequence::unit(k);
    let cal = CalibrationProfile::new(band, vec![Complex64::new(1.0, 0.0); k])?;

    // the receiver noise stream is seeded independently of the channel
    let noise_seed = args.seed.unwrap_or(42).wrapping_add(0x9e37_79b9_7f4a_7c15);
    let rx = synth::synth_received(&ctf, &tx.amplitudes, &cal.rf_response, args.snr_db, noise_seed)?;

    io::write_snapshot_file(&args.out, &rx)?;

    let cal_path = args
        .calibration_out
        .clone()
        .unwrap_or_else(|| args.out.with_extension("cal.csnd"));
    io::write_calibration_file(&cal_path, &cal, &tx)?;

    let truth_path = args
        .ground_truth
        .clone()
        .unwrap_or_else(|| args.out.with_extension("truth.csv"));
    crate::csvio::write_ground_truth(&truth_path, &truth, cfg.region_duration_s())?;

    println!(
        "wrote {} snapshots of {} symbols x {} subcarriers to {}",
        cfg.num_snapshots,
        cfg.symbols_per_snapshot,
        k,
        args.out.display()
    );
    println!("calibration: {}", cal_path.display());
    println!("ground truth: {}", truth_path.display());
    Ok(())
}
