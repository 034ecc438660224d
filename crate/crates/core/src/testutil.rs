//! Shared constructors for unit tests.

use crate::cmat::CMat;
use crate::model::{BandId, RegionCtf, SoundingConfig};

/// The full-scale measurement parameterization (311 subcarriers, 960k
/// snapshots, 100 ms stationarity window).
pub(crate) fn full_scale_config() -> SoundingConfig {
    SoundingConfig {
        carrier_frequency_hz: 3.2e9,
        num_subcarriers: 311,
        subcarrier_spacing_hz: 500e3,
        bandwidth_hz: 155.5e6,
        symbol_duration_s: 2e-6,
        symbols_per_snapshot: 5,
        snapshot_interval_s: 31.25e-6,
        snapshot_duration_s: 10e-6,
        num_snapshots: 960_000,
        measurement_duration_s: 30.0,
        max_relative_velocity_mps: 1500.0,
        stationarity_window_s: 0.1,
        snapshots_per_region: 3200,
        time_tapers: 2,
        freq_tapers: 1,
    }
}

/// Valid desk-scale config with the requested shape: `k` subcarriers, `n`
/// snapshots at 1 ms spacing, `n_stat` snapshots per region.
pub(crate) fn small_config(k: usize, n: usize, n_stat: usize) -> SoundingConfig {
    SoundingConfig {
        carrier_frequency_hz: 3.2e9,
        num_subcarriers: k,
        subcarrier_spacing_hz: 500e3,
        bandwidth_hz: k as f64 * 500e3,
        symbol_duration_s: 2e-6,
        symbols_per_snapshot: 5,
        snapshot_interval_s: 1e-3,
        snapshot_duration_s: 10e-6,
        num_snapshots: n,
        measurement_duration_s: n as f64 * 1e-3,
        max_relative_velocity_mps: 10.0,
        stationarity_window_s: n_stat as f64 * 1e-3,
        snapshots_per_region: n_stat,
        time_tapers: 2,
        freq_tapers: 1,
    }
}

/// 16 subcarriers, 128 snapshots, 2 regions of 64; everything fast.
pub(crate) fn tiny_config() -> SoundingConfig {
    small_config(16, 128, 64)
}

/// Wraps a matrix as a single stationarity region with a shape-matching
/// config.
pub(crate) fn region_from_cmat(samples: CMat) -> RegionCtf {
    let config = small_config(samples.rows(), samples.cols(), samples.cols());
    RegionCtf {
        band: BandId::new("test", 1e9),
        config,
        region_index: 0,
        samples,
    }
}
