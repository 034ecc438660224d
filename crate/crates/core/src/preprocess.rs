//! Stationarity-region partitioning and delay-domain denoising: median noise
//! floor, per-region dynamic range, cross-band common dynamic range, and
//! threshold-to-zero.

use crate::cmat::CMat;
use crate::error::{Error, Result};
use crate::model::{Ctf, RegionCir, RegionCtf};
use crate::spectral;

/// Margin above the noise floor that bounds the usable dynamic range, in dB.
pub const NOISE_MARGIN_DB: f64 = 6.0;

/// Noise floor, peak power and resulting dynamic range of one region, all in
/// dB: `dynamic_range_db = peak_power_db - (noise_floor_db + 6)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicRangeReport {
    pub noise_floor_db: f64,
    pub peak_power_db: f64,
    pub dynamic_range_db: f64,
}

/// Extracts stationarity region `i`: snapshots `i * N_stat .. (i+1) * N_stat`.
pub fn region(ctf: &Ctf, index: usize) -> RegionCtf {
    let n_stat = ctf.config.snapshots_per_region;
    let k = ctf.config.num_subcarriers;
    let start = index * n_stat;
    assert!(
        start + n_stat <= ctf.config.num_snapshots,
        "region {index} out of range"
    );
    let data = ctf.samples.data()[start * k..(start + n_stat) * k].to_vec();
    RegionCtf {
        band: ctf.band.clone(),
        config: ctf.config.clone(),
        region_index: index,
        samples: CMat::from_data(k, n_stat, data).expect("region slice shape"),
    }
}

/// Splits a CTF into its whole stationarity regions; a trailing partial region
/// is discarded.
pub fn partition_regions(ctf: &Ctf) -> Vec<RegionCtf> {
    (0..ctf.config.region_count())
        .map(|i| region(ctf, i))
        .collect()
}

/// Column-wise unitary inverse DFT over the subcarrier axis, turning the
/// frequency response of each snapshot into its impulse response.
pub fn to_delay_domain(region: &RegionCtf) -> RegionCir {
    let k = region.samples.rows();
    let mut samples = region.samples.clone();
    let fft = spectral::plan_inverse(k);
    spectral::process_chunks(&fft, samples.data_mut());
    spectral::scale(samples.data_mut(), 1.0 / (k as f64).sqrt());
    RegionCir {
        band: region.band.clone(),
        config: region.config.clone(),
        region_index: region.region_index,
        samples,
    }
}

/// Column-wise unitary forward DFT back to the frequency domain; inverse of
/// [`to_delay_domain`].
pub fn to_frequency_domain(cir: &RegionCir) -> RegionCtf {
    let k = cir.samples.rows();
    let mut samples = cir.samples.clone();
    let fft = spectral::plan_forward(k);
    spectral::process_chunks(&fft, samples.data_mut());
    spectral::scale(samples.data_mut(), 1.0 / (k as f64).sqrt());
    RegionCtf {
        band: cir.band.clone(),
        config: cir.config.clone(),
        region_index: cir.region_index,
        samples,
    }
}

/// Median of a set of powers. Even-length inputs average the two central
/// order statistics.
pub(crate) fn median_power(powers: &mut [f64]) -> f64 {
    assert!(!powers.is_empty());
    let n = powers.len();
    let mid = n / 2;
    let (_, upper_mid, _) = powers.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper_mid;
    if n % 2 == 1 {
        upper
    } else {
        let lower = powers[..mid]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// Median-based noise floor of a delay-domain region in dB:
/// `10 log10(median |H[tau, n]|^2)`.
pub fn noise_floor(cir: &RegionCir) -> f64 {
    let mut powers: Vec<f64> = cir.samples.data().iter().map(|z| z.norm_sqr()).collect();
    10.0 * median_power(&mut powers).log10()
}

pub(crate) fn peak_power_db(cir: &RegionCir) -> Result<f64> {
    let peak = cir
        .samples
        .data()
        .iter()
        .map(|z| z.norm_sqr())
        .fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::AllZeroRegion);
    }
    Ok(10.0 * peak.log10())
}

/// Dynamic range of one region: gap between the peak power and a level 6 dB
/// above the median noise floor.
pub fn dynamic_range(cir: &RegionCir) -> Result<DynamicRangeReport> {
    let noise_floor_db = noise_floor(cir);
    dynamic_range_with_floor(cir, noise_floor_db)
}

/// Same as [`dynamic_range`] but against an externally supplied noise floor
/// (e.g. one estimated over the whole measurement).
pub fn dynamic_range_with_floor(
    cir: &RegionCir,
    noise_floor_db: f64,
) -> Result<DynamicRangeReport> {
    let peak_power_db = peak_power_db(cir)?;
    Ok(DynamicRangeReport {
        noise_floor_db,
        peak_power_db,
        dynamic_range_db: peak_power_db - (noise_floor_db + NOISE_MARGIN_DB),
    })
}

/// The dynamic range shared by all bands: the smallest per-band value.
pub fn common_dynamic_range(band_dr_db: &[f64]) -> f64 {
    assert!(!band_dr_db.is_empty(), "need at least one band");
    band_dr_db.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Zeroes every sample whose power lies more than `dr_db` below the region's
/// own peak; all other samples are untouched.
pub fn apply_threshold(cir: &RegionCir, dr_db: f64) -> RegionCir {
    assert!(!dr_db.is_nan(), "dynamic range must not be NaN");
    let mut out = cir.clone();
    let peak = cir
        .samples
        .data()
        .iter()
        .map(|z| z.norm_sqr())
        .fold(0.0, f64::max);
    if peak == 0.0 || dr_db == f64::INFINITY {
        return out;
    }
    // power threshold: peak_db - dr_db, compared in the linear domain
    let cutoff = peak * 10f64.powf(-dr_db / 10.0);
    for z in out.samples.data_mut().iter_mut() {
        if z.norm_sqr() < cutoff {
            *z = num_complex::Complex64::ZERO;
        }
    }
    out
}
