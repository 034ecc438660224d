//! Domain types shared by every processing stage: sounding configuration,
//! band identity, channel matrices and per-region results.

use serde::{Deserialize, Serialize};

use crate::cmat::CMat;
use crate::error::{Error, Result};

/// Relative tolerance for derived-quantity consistency checks
/// (bandwidth vs. K * subcarrier spacing, duration vs. N * snapshot interval).
const CONSISTENCY_RTOL: f64 = 0.005;

/// Full parameterization of one sounding measurement.
///
/// `max_relative_velocity_mps`, `snapshot_duration_s` and
/// `measurement_duration_s` are carried as metadata; no computation consumes
/// them beyond validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoundingConfig {
    pub carrier_frequency_hz: f64,
    /// K, the number of OFDM subcarriers.
    pub num_subcarriers: usize,
    pub subcarrier_spacing_hz: f64,
    pub bandwidth_hz: f64,
    pub symbol_duration_s: f64,
    /// Symbols per snapshot; the first symbol is discarded as a cyclic prefix.
    pub symbols_per_snapshot: usize,
    /// Repetition interval between snapshots.
    pub snapshot_interval_s: f64,
    pub snapshot_duration_s: f64,
    /// N, the number of snapshots in the measurement.
    pub num_snapshots: usize,
    pub measurement_duration_s: f64,
    pub max_relative_velocity_mps: f64,
    /// Window over which the channel statistics are assumed constant.
    pub stationarity_window_s: f64,
    /// N_stat = round(stationarity_window_s / snapshot_interval_s).
    pub snapshots_per_region: usize,
    /// Number of time-domain tapers for the local scattering function.
    pub time_tapers: usize,
    /// Number of frequency-domain tapers.
    pub freq_tapers: usize,
}

impl SoundingConfig {
    /// Checks every configuration invariant, reporting all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        let k = self.num_subcarriers;
        let n = self.num_snapshots;
        let n_stat = self.snapshots_per_region;

        if k < 2 {
            violations.push(format!("num_subcarriers = {k}, need at least 2"));
        }
        for (name, v) in [
            ("subcarrier_spacing_hz", self.subcarrier_spacing_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("symbol_duration_s", self.symbol_duration_s),
            ("snapshot_interval_s", self.snapshot_interval_s),
            ("stationarity_window_s", self.stationarity_window_s),
        ] {
            if !(v.is_finite() && v > 0.0) {
                violations.push(format!("{name} = {v}, must be finite and positive"));
            }
        }

        let expected_b = k as f64 * self.subcarrier_spacing_hz;
        if expected_b > 0.0
            && ((self.bandwidth_hz - expected_b) / expected_b).abs() > CONSISTENCY_RTOL
        {
            violations.push(format!(
                "bandwidth_hz = {} but num_subcarriers * subcarrier_spacing_hz = {expected_b}",
                self.bandwidth_hz
            ));
        }

        if self.snapshot_interval_s > 0.0 {
            let expected_n_stat =
                (self.stationarity_window_s / self.snapshot_interval_s).round() as usize;
            if n_stat != expected_n_stat {
                violations.push(format!(
                    "snapshots_per_region = {n_stat} but round(stationarity_window_s / snapshot_interval_s) = {expected_n_stat}"
                ));
            }
            let expected_tm = n as f64 * self.snapshot_interval_s;
            if ((self.measurement_duration_s - expected_tm) / expected_tm).abs() > CONSISTENCY_RTOL
            {
                violations.push(format!(
                    "measurement_duration_s = {} but num_snapshots * snapshot_interval_s = {expected_tm}",
                    self.measurement_duration_s
                ));
            }
        }

        if self.time_tapers < 1 {
            violations.push("time_tapers must be at least 1".into());
        }
        if self.freq_tapers < 1 {
            violations.push("freq_tapers must be at least 1".into());
        }
        let min_region = self.time_tapers * self.freq_tapers;
        if n_stat < min_region.max(1) {
            violations.push(format!(
                "snapshots_per_region = {n_stat}, need at least time_tapers * freq_tapers = {min_region}"
            ));
        }
        if n < n_stat {
            violations.push(format!(
                "num_snapshots = {n} is smaller than snapshots_per_region = {n_stat}"
            ));
        }
        if self.symbols_per_snapshot < 2 {
            violations.push(format!(
                "symbols_per_snapshot = {}, need at least 2 (first symbol is discarded)",
                self.symbols_per_snapshot
            ));
        }

        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig { violations })
        }
    }

    /// Validating constructor form: returns the config unchanged if it is valid.
    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Number of whole stationarity regions; a trailing partial region is
    /// discarded.
    pub fn region_count(&self) -> usize {
        self.num_snapshots / self.snapshots_per_region
    }

    /// Snapshots that do not fill a whole region and are dropped.
    pub fn dropped_snapshots(&self) -> usize {
        self.num_snapshots % self.snapshots_per_region
    }

    /// Duration of one stationarity region in seconds.
    pub fn region_duration_s(&self) -> f64 {
        self.snapshots_per_region as f64 * self.snapshot_interval_s
    }

    /// Delay-domain axis in seconds: bin l sits at l / bandwidth, resolution
    /// 1/B, K bins.
    pub fn delay_axis(&self) -> Vec<f64> {
        (0..self.num_subcarriers)
            .map(|l| l as f64 / self.bandwidth_hz)
            .collect()
    }

    /// Centered Doppler axis in Hz: bin nu sits at nu / (N_stat * t_R) for
    /// nu in -N_stat/2 ..= N_stat/2 - 1. Requires an even region length.
    pub fn doppler_axis(&self) -> Result<Vec<f64>> {
        let n_stat = self.snapshots_per_region;
        if !n_stat.is_multiple_of(2) {
            return Err(Error::OddRegionLength { n_stat });
        }
        let span = n_stat as f64 * self.snapshot_interval_s;
        let half = n_stat as i64 / 2;
        Ok((-half..half).map(|nu| nu as f64 / span).collect())
    }
}

/// Identity of one frequency band within a multi-band dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandId {
    pub label: String,
    pub carrier_frequency_hz: f64,
}

impl BandId {
    pub fn new(label: impl Into<String>, carrier_frequency_hz: f64) -> Self {
        Self {
            label: label.into(),
            carrier_frequency_hz,
        }
    }
}

/// Time-variant channel transfer function H[k, n] of one band:
/// K subcarriers x N snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct Ctf {
    pub band: BandId,
    pub config: SoundingConfig,
    pub samples: CMat,
}

impl Ctf {
    /// Wraps a sample matrix, enforcing the K x N shape and finiteness.
    pub fn new(band: BandId, config: SoundingConfig, samples: CMat) -> Result<Self> {
        if samples.rows() != config.num_subcarriers || samples.cols() != config.num_snapshots {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "CTF for band {} is {}x{}, config says {}x{}",
                    band.label,
                    samples.rows(),
                    samples.cols(),
                    config.num_subcarriers,
                    config.num_snapshots
                ),
            });
        }
        if !samples.is_finite() {
            return Err(Error::NonFiniteSample {
                context: format!("CTF of band {}", band.label),
            });
        }
        Ok(Self {
            band,
            config,
            samples,
        })
    }
}

/// One stationarity region of a CTF: K subcarriers x N_stat snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionCtf {
    pub band: BandId,
    pub config: SoundingConfig,
    pub region_index: usize,
    pub samples: CMat,
}

/// Delay-domain counterpart of a region: K delay bins x N_stat snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionCir {
    pub band: BandId,
    pub config: SoundingConfig,
    pub region_index: usize,
    pub samples: CMat,
}

/// Per-region estimates. The K-factor fields are `None` when the
/// method-of-moments system has no valid solution for the region; such
/// regions are excluded from band statistics and counted.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMetrics {
    pub region_index: usize,
    pub k_factor_linear: Option<f64>,
    pub k_factor_db: Option<f64>,
    /// |V|^2, power of the constant channel term (meaningful when `valid`).
    pub constant_power: f64,
    /// sigma^2, power of the fluctuating channel term (meaningful when `valid`).
    pub fluctuating_power: f64,
    /// Mean channel power over the region.
    pub mean_power: f64,
    pub rms_delay_spread_s: f64,
    pub valid: bool,
}
