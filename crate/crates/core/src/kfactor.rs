//! Method-of-moments Rician K-factor estimation per stationarity region.
//!
//! From the first moment of the channel power and the RMS fluctuation about
//! it, the power splits into a constant term |V|^2 and a fluctuating term
//! sigma^2; their ratio is the K-factor. Regions where the moment system has
//! no valid solution (fluctuation exceeding the mean, or a vanishing
//! fluctuating term) are marked invalid rather than clamped, so downstream
//! statistics can exclude and count them.

use crate::model::{RegionCtf, RegionMetrics};

/// First moment and RMS fluctuation of the channel power over one region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSummary {
    /// Mean power over all K * N_stat samples.
    pub mean_power: f64,
    /// Root-mean-square deviation of the power about its mean
    /// (population form, divisor K * N_stat).
    pub power_rms_fluctuation: f64,
    pub sample_count: usize,
}

/// Elementwise channel power |H[k, n]|^2, flattened in storage order
/// (snapshot-major).
pub fn channel_power(region: &RegionCtf) -> Vec<f64> {
    region.samples.data().iter().map(|z| z.norm_sqr()).collect()
}

/// Mean and RMS fluctuation of a power matrix, pooling subcarriers and time.
pub fn moments(power: &[f64]) -> MomentSummary {
    assert!(!power.is_empty(), "moments of an empty matrix");
    let n = power.len() as f64;
    let mean: f64 = power.iter().sum::<f64>() / n;
    let var: f64 = power.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / n;
    MomentSummary {
        mean_power: mean,
        power_rms_fluctuation: var.max(0.0).sqrt(),
        sample_count: power.len(),
    }
}

/// Solves the moment system for (|V|^2, sigma^2). `None` when the radicand is
/// negative, i.e. the fluctuation exceeds the mean and no Rician split exists.
pub fn power_split(mean_power: f64, rms_fluctuation: f64) -> Option<(f64, f64)> {
    let radicand = mean_power * mean_power - rms_fluctuation * rms_fluctuation;
    if radicand < 0.0 {
        return None;
    }
    let constant = radicand.sqrt();
    Some((constant, mean_power - constant))
}

/// K-factor (linear) from the two moments, when defined.
pub fn kfactor_from_moments(mean_power: f64, rms_fluctuation: f64) -> Option<f64> {
    let (constant, fluctuating) = power_split(mean_power, rms_fluctuation)?;
    if fluctuating <= 0.0 {
        return None;
    }
    Some(constant / fluctuating)
}

/// Method-of-moments K-factor estimate for one region. The delay-spread field
/// is left at zero; the analysis pipeline fills it from the dispersion stage.
pub fn estimate_kfactor(region: &RegionCtf) -> RegionMetrics {
    let m = moments(&channel_power(region));
    metrics_from_moments(region.region_index, &m)
}

/// Builds the per-region metrics from precomputed moments.
pub fn metrics_from_moments(region_index: usize, m: &MomentSummary) -> RegionMetrics {
    let split = power_split(m.mean_power, m.power_rms_fluctuation);
    match split {
        Some((constant, fluctuating)) if fluctuating > 0.0 => {
            let k = constant / fluctuating;
            RegionMetrics {
                region_index,
                k_factor_linear: Some(k),
                k_factor_db: Some(10.0 * k.log10()),
                constant_power: constant,
                fluctuating_power: fluctuating,
                mean_power: m.mean_power,
                rms_delay_spread_s: 0.0,
                valid: true,
            }
        }
        Some((constant, fluctuating)) => RegionMetrics {
            // vanishing fluctuating term: constant channel, K undefined
            region_index,
            k_factor_linear: None,
            k_factor_db: None,
            constant_power: constant,
            fluctuating_power: fluctuating.max(0.0),
            mean_power: m.mean_power,
            rms_delay_spread_s: 0.0,
            valid: false,
        },
        None => RegionMetrics {
            // fluctuation above mean: no real solution
            region_index,
            k_factor_linear: None,
            k_factor_db: None,
            constant_power: 0.0,
            fluctuating_power: 0.0,
            mean_power: m.mean_power,
            rms_delay_spread_s: 0.0,
            valid: false,
        },
    }
}
