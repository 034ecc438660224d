//! Built-in configuration and scenario presets for the simulator.

use sounder_core::model::SoundingConfig;
use sounder_core::synth::DrivebyScenario;

/// Desk-scale default sounding configuration: the full-scale subcarrier grid
/// (311 x 500 kHz = 155.5 MHz) over 30 s, but with a 1 ms snapshot interval so
/// a whole measurement stays a few hundred megabytes. 100 snapshots per 0.1 s
/// stationarity region, 300 regions.
pub fn desk_config(carrier_frequency_hz: f64) -> SoundingConfig {
    SoundingConfig {
        carrier_frequency_hz,
        num_subcarriers: 311,
        subcarrier_spacing_hz: 500e3,
        bandwidth_hz: 155.5e6,
        symbol_duration_s: 2e-6,
        symbols_per_snapshot: 5,
        snapshot_interval_s: 1e-3,
        snapshot_duration_s: 10e-6,
        num_snapshots: 30_000,
        measurement_duration_s: 30.0,
        max_relative_velocity_mps: 10.0,
        stationarity_window_s: 0.1,
        snapshots_per_region: 100,
        time_tapers: 2,
        freq_tapers: 1,
    }
}

/// Default urban drive-by: negligible line of sight while the transmitter is
/// behind the receiver (0-12 s), a sharp rise to ~15 dB above the diffuse
/// floor as it crosses the antenna main lobe (12-13 s), then a decay towards
/// 0-1 dB as it recedes (13-20 s) and a static tail (20-30 s).
pub fn driveby_default_scenario(seed: u64) -> DrivebyScenario {
    DrivebyScenario {
        duration_s: 30.0,
        los_power_db_trace: vec![
            (0.0, -28.0),
            (11.8, -28.0),
            (12.0, -10.0),
            (12.6, 10.0),
            (13.2, 8.0),
            (20.0, -4.0),
            (30.0, -4.0),
        ],
        diffuse_power_db_trace: vec![(0.0, -5.0), (30.0, -5.0)],
        diffuse_delay_decay_s: 1.3e-7,
        seed,
    }
}
