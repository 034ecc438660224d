//! Region-processing throughput: rayon data-parallel path vs. the sequential
//! fallback, plus the synthetic generator feeding them.
//!
//! Run with `cargo bench -p sounder-core`.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sounder_core::dispersion::{make_tapers, DEFAULT_NW_FREQ, DEFAULT_NW_TIME};
use sounder_core::model::{Ctf, SoundingConfig};
use sounder_core::pipeline::{process_band_regions, process_band_regions_serial};
use sounder_core::synth::{gen_tdl, TapKind, TapSpec};

fn bench_config(regions: usize) -> SoundingConfig {
    let n_stat = 200;
    let n = regions * n_stat;
    SoundingConfig {
        carrier_frequency_hz: 3.2e9,
        num_subcarriers: 311,
        subcarrier_spacing_hz: 500e3,
        bandwidth_hz: 155.5e6,
        symbol_duration_s: 2e-6,
        symbols_per_snapshot: 5,
        snapshot_interval_s: 0.5e-3,
        snapshot_duration_s: 10e-6,
        num_snapshots: n,
        measurement_duration_s: n as f64 * 0.5e-3,
        max_relative_velocity_mps: 10.0,
        stationarity_window_s: 0.1,
        snapshots_per_region: n_stat,
        time_tapers: 2,
        freq_tapers: 1,
    }
}

fn bench_ctf(cfg: &SoundingConfig) -> Ctf {
    let bin = 1.0 / cfg.bandwidth_hz;
    let taps = [
        TapSpec {
            delay_s: 0.0,
            power: 1.0,
            doppler_hz: 0.0,
            kind: TapKind::Deterministic,
        },
        TapSpec {
            delay_s: 4.0 * bin,
            power: 0.5,
            doppler_hz: 25.0,
            kind: TapKind::Rayleigh,
        },
        TapSpec {
            delay_s: 11.0 * bin,
            power: 0.2,
            doppler_hz: -60.0,
            kind: TapKind::Rayleigh,
        },
    ];
    gen_tdl(cfg, &taps, 7).unwrap()
}

fn region_processing(c: &mut Criterion) {
    let mut group = c.benchmark_group("process_band_regions");
    group.sample_size(10);
    for regions in [4usize, 16] {
        let cfg = bench_config(regions);
        let ctf = bench_ctf(&cfg);
        let tapers = make_tapers(&cfg, DEFAULT_NW_TIME, DEFAULT_NW_FREQ).unwrap();

        group.bench_with_input(
            BenchmarkId::new("parallel", regions),
            &regions,
            |b, &regions| {
                b.iter(|| {
                    let out =
                        process_band_regions(&ctf, 0, regions, &tapers, Some(40.0)).unwrap();
                    black_box(out)
                })
            },
        );
        group.bench_with_input(
            BenchmarkId::new("serial", regions),
            &regions,
            |b, &regions| {
                b.iter(|| {
                    let out =
                        process_band_regions_serial(&ctf, 0, regions, &tapers, Some(40.0))
                            .unwrap();
                    black_box(out)
                })
            },
        );
    }
    group.finish();
}

fn generator(c: &mut Criterion) {
    let cfg = bench_config(4);
    c.bench_function("gen_tdl/4_regions", |b| {
        b.iter(|| black_box(bench_ctf(&cfg)))
    });
}

criterion_group!(benches, region_processing, generator);
criterion_main!(benches);
