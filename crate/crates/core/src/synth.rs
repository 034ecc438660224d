//! Synthetic channel and raw-snapshot generation with analytically known
//! ground truth.
//!
//! Everything here is seeded and draws random values in a fixed documented
//! order, so identical inputs produce bit-identical output. Random number
//! generation is kept sequential; only the deterministic mixing work after the
//! draws is parallelized.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cmat::CMat;
use crate::error::{Error, Result};
use crate::model::{BandId, Ctf, SoundingConfig};
use crate::par;

const TWO_PI: f64 = std::f64::consts::TAU;

/// One tap of a tapped-delay-line channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TapSpec {
    pub delay_s: f64,
    /// Linear tap power.
    pub power: f64,
    pub doppler_hz: f64,
    pub kind: TapKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TapKind {
    /// Constant amplitude sqrt(power), rotating at `doppler_hz`.
    Deterministic,
    /// Per-snapshot i.i.d. complex Gaussian gain of mean power `power`,
    /// optionally rotated by the deterministic Doppler phasor.
    Rayleigh,
}

/// Drive-by scenario: a line-of-sight tap whose power follows a
/// piecewise-linear dB trace over time, plus a diffuse tail of Rayleigh taps
/// with an exponential delay profile whose total power follows a second trace.
///
/// The first arrival is placed a few bins into the delay axis so that window
/// mainlobes around it stay clear of the circular delay boundary; the RMS
/// delay spread is invariant to that constant offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivebyScenario {
    pub duration_s: f64,
    /// (time s, LOS power dB) vertices, sorted by time.
    pub los_power_db_trace: Vec<(f64, f64)>,
    /// (time s, total diffuse power dB) vertices, sorted by time.
    pub diffuse_power_db_trace: Vec<(f64, f64)>,
    /// Exponential decay constant of the diffuse delay profile, in seconds.
    pub diffuse_delay_decay_s: f64,
    pub seed: u64,
}

/// True per-region K-factor and RMS delay spread of a generated measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub k_db: Vec<f64>,
    pub rms_delay_spread_s: Vec<f64>,
}

/// Raw received snapshots before channel estimation. Layout is snapshot-major,
/// then symbol-major, then subcarrier: `data[(n * n_sym + s) * k + subcarrier]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSnapshots {
    pub band: BandId,
    pub config: SoundingConfig,
    pub data: Vec<Complex64>,
}

impl RawSnapshots {
    /// All symbols of snapshot `n` as one contiguous slice.
    pub fn snapshot(&self, n: usize) -> &[Complex64] {
        let k = self.config.num_subcarriers;
        let n_sym = self.config.symbols_per_snapshot;
        let start = n * n_sym * k;
        &self.data[start..start + n_sym * k]
    }

    pub fn symbol(&self, n: usize, s: usize) -> &[Complex64] {
        let k = self.config.num_subcarriers;
        let snap = self.snapshot(n);
        &snap[s * k..(s + 1) * k]
    }
}

fn complex_gaussian(rng: &mut ChaCha8Rng, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Splits `mean_power` into constant and fluctuating parts for a K-factor
/// given in dB. An infinite K-factor yields a purely constant channel.
fn rician_split(k_true_db: f64, mean_power: f64) -> (f64, f64) {
    if k_true_db == f64::INFINITY {
        return (mean_power, 0.0);
    }
    let k_lin = 10f64.powf(k_true_db / 10.0);
    let constant = mean_power * k_lin / (1.0 + k_lin);
    (constant, mean_power - constant)
}

/// Generates a CTF whose samples are i.i.d. Rician: a real constant V plus
/// circularly-symmetric complex Gaussian noise, with |V|^2 / sigma^2 equal to
/// the requested K-factor and |V|^2 + sigma^2 = `mean_power`.
///
/// Draw order: snapshot-major, then subcarrier.
pub fn gen_rician_iid(
    cfg: &SoundingConfig,
    k_true_db: f64,
    mean_power: f64,
    seed: u64,
) -> Result<Ctf> {
    cfg.validate()?;
    assert!(mean_power > 0.0, "mean_power must be positive");
    let (constant, fluctuating) = rician_split(k_true_db, mean_power);
    let v = Complex64::new(constant.sqrt(), 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = cfg.num_subcarriers * cfg.num_snapshots;
    let mut data = Vec::with_capacity(total);
    for _ in 0..total {
        let z = if fluctuating > 0.0 {
            complex_gaussian(&mut rng, fluctuating)
        } else {
            Complex64::ZERO
        };
        data.push(v + z);
    }

    let samples = CMat::from_data(cfg.num_subcarriers, cfg.num_snapshots, data)?;
    Ctf::new(
        BandId::new("synthetic", cfg.carrier_frequency_hz),
        cfg.clone(),
        samples,
    )
}

fn validate_taps(cfg: &SoundingConfig, taps: &[TapSpec]) -> Result<()> {
    assert!(!taps.is_empty(), "tap list must be nonempty");
    let max_delay = cfg.num_subcarriers as f64 / cfg.bandwidth_hz;
    let nyquist = 1.0 / (2.0 * cfg.snapshot_interval_s);
    for (index, tap) in taps.iter().enumerate() {
        if !(tap.delay_s >= 0.0 && tap.delay_s < max_delay) {
            return Err(Error::TapOutOfRange {
                index,
                reason: format!(
                    "delay {} s outside [0, {max_delay} s)",
                    tap.delay_s
                ),
            });
        }
        if tap.doppler_hz.abs() >= nyquist {
            return Err(Error::TapOutOfRange {
                index,
                reason: format!(
                    "Doppler {} Hz at or beyond the +/-{nyquist} Hz limit",
                    tap.doppler_hz
                ),
            });
        }
        if !(tap.power > 0.0 && tap.power.is_finite()) {
            return Err(Error::TapOutOfRange {
                index,
                reason: format!("power {} must be positive and finite", tap.power),
            });
        }
    }
    Ok(())
}

/// Generates a tapped-delay-line CTF:
/// H[k, n] = sum_l a_l[n] * exp(-j 2 pi k df tau_l) * exp(+j 2 pi nu_l n t_R).
///
/// Deterministic taps have constant gain sqrt(power); Rayleigh taps draw an
/// i.i.d. unit-power complex Gaussian sequence scaled by sqrt(power).
/// Draw order: tap-major, then snapshot.
pub fn gen_tdl(cfg: &SoundingConfig, taps: &[TapSpec], seed: u64) -> Result<Ctf> {
    cfg.validate()?;
    validate_taps(cfg, taps)?;

    let k = cfg.num_subcarriers;
    let n = cfg.num_snapshots;
    let df = cfg.subcarrier_spacing_hz;
    let t_r = cfg.snapshot_interval_s;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Per-tap, per-snapshot gains including the Doppler rotation.
    let mut gains: Vec<Vec<Complex64>> = Vec::with_capacity(taps.len());
    for tap in taps {
        let amp = tap.power.sqrt();
        let mut seq = Vec::with_capacity(n);
        for snap in 0..n {
            let base = match tap.kind {
                TapKind::Deterministic => Complex64::new(amp, 0.0),
                TapKind::Rayleigh => complex_gaussian(&mut rng, 1.0) * amp,
            };
            let phase = TWO_PI * tap.doppler_hz * snap as f64 * t_r;
            seq.push(base * Complex64::from_polar(1.0, phase));
        }
        gains.push(seq);
    }

    // Frequency response of each tap across subcarriers.
    let phasors: Vec<Vec<Complex64>> = taps
        .iter()
        .map(|tap| {
            (0..k)
                .map(|sub| Complex64::from_polar(1.0, -TWO_PI * sub as f64 * df * tap.delay_s))
                .collect()
        })
        .collect();

    let columns = par::map_indexed(n, |snap| {
        let mut col = vec![Complex64::ZERO; k];
        for (tap_idx, phasor) in phasors.iter().enumerate() {
            let g = gains[tap_idx][snap];
            for (dst, ph) in col.iter_mut().zip(phasor) {
                *dst += g * ph;
            }
        }
        col
    });

    let mut data = Vec::with_capacity(k * n);
    for col in columns {
        data.extend_from_slice(&col);
    }
    let samples = CMat::from_data(k, n, data)?;
    Ctf::new(
        BandId::new("synthetic", cfg.carrier_frequency_hz),
        cfg.clone(),
        samples,
    )
}

/// Linear interpolation on a piecewise-linear (t, value) trace, clamped to the
/// first/last vertex outside the covered range.
pub fn eval_trace(trace: &[(f64, f64)], t: f64) -> f64 {
    assert!(!trace.is_empty(), "trace must have at least one vertex");
    if t <= trace[0].0 {
        return trace[0].1;
    }
    if t >= trace[trace.len() - 1].0 {
        return trace[trace.len() - 1].1;
    }
    let hi = trace.partition_point(|&(tt, _)| tt <= t);
    let (t0, v0) = trace[hi - 1];
    let (t1, v1) = trace[hi];
    if t1 == t0 {
        return v1;
    }
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

/// RMS width of a discrete delay profile given as (delay s, linear power)
/// pairs.
pub fn delay_profile_spread(profile: &[(f64, f64)]) -> f64 {
    let total: f64 = profile.iter().map(|&(_, p)| p).sum();
    assert!(total > 0.0, "profile must carry power");
    let mean: f64 = profile.iter().map(|&(tau, p)| tau * p).sum::<f64>() / total;
    let var: f64 = profile
        .iter()
        .map(|&(tau, p)| (tau - mean) * (tau - mean) * p)
        .sum::<f64>()
        / total;
    var.max(0.0).sqrt()
}

/// Delay bins between zero and the first arrival of a drive-by channel.
const DRIVEBY_DELAY_OFFSET_BINS: usize = 4;

impl DrivebyScenario {
    /// Diffuse tap grid for a config: on-grid delays with exponentially
    /// decaying weights that sum to one, starting at the first-arrival offset.
    /// Covers six decay constants, capped to the usable delay span.
    fn diffuse_profile(&self, cfg: &SoundingConfig) -> Vec<(f64, f64)> {
        let bin = 1.0 / cfg.bandwidth_hz;
        let offset = DRIVEBY_DELAY_OFFSET_BINS.min(cfg.num_subcarriers / 4);
        let max_count = cfg.num_subcarriers - 1 - offset;
        let count = ((6.0 * self.diffuse_delay_decay_s / bin).ceil() as usize)
            .clamp(2, max_count.max(2));
        let raw: Vec<f64> = (0..count)
            .map(|l| (-(l as f64) * bin / self.diffuse_delay_decay_s).exp())
            .collect();
        let total: f64 = raw.iter().sum();
        (0..count)
            .map(|l| ((offset + l) as f64 * bin, raw[l] / total))
            .collect()
    }

    fn los_power(&self, t: f64) -> f64 {
        10f64.powf(eval_trace(&self.los_power_db_trace, t) / 10.0)
    }

    fn diffuse_power(&self, t: f64) -> f64 {
        10f64.powf(eval_trace(&self.diffuse_power_db_trace, t) / 10.0)
    }
}

/// Generates a drive-by measurement: one deterministic line-of-sight tap at
/// delay zero whose power follows the LOS trace, plus Rayleigh taps with an
/// exponential delay profile following the diffuse trace. Ground truth is
/// computed analytically from the traces at each region center.
///
/// Draw order: tap-major, then snapshot.
pub fn gen_driveby(cfg: &SoundingConfig, scenario: &DrivebyScenario) -> Result<(Ctf, GroundTruth)> {
    cfg.validate()?;
    assert!(
        scenario.duration_s >= cfg.measurement_duration_s,
        "scenario shorter than the measurement"
    );

    let k = cfg.num_subcarriers;
    let n = cfg.num_snapshots;
    let df = cfg.subcarrier_spacing_hz;
    let t_r = cfg.snapshot_interval_s;
    let weights = scenario.diffuse_profile(cfg);

    // Unit-power Rayleigh gain sequences, one per diffuse tap.
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let gains: Vec<Vec<Complex64>> = (0..weights.len())
        .map(|_| (0..n).map(|_| complex_gaussian(&mut rng, 1.0)).collect())
        .collect();

    let phasors: Vec<Vec<Complex64>> = weights
        .iter()
        .map(|&(delay, _)| {
            (0..k)
                .map(|sub| Complex64::from_polar(1.0, -TWO_PI * sub as f64 * df * delay))
                .collect()
        })
        .collect();

    // the line of sight arrives together with the first diffuse tap
    let los_phasor = &phasors[0];
    let columns = par::map_indexed(n, |snap| {
        let t = snap as f64 * t_r;
        let los_amp = scenario.los_power(t).sqrt();
        let diffuse_total = scenario.diffuse_power(t);
        let mut col: Vec<Complex64> = los_phasor.iter().map(|ph| ph * los_amp).collect();
        for (tap_idx, &(_, weight)) in weights.iter().enumerate() {
            let g = gains[tap_idx][snap] * (diffuse_total * weight).sqrt();
            for (dst, ph) in col.iter_mut().zip(&phasors[tap_idx]) {
                *dst += g * ph;
            }
        }
        col
    });

    let mut data = Vec::with_capacity(k * n);
    for col in columns {
        data.extend_from_slice(&col);
    }
    let samples = CMat::from_data(k, n, data)?;
    let ctf = Ctf::new(
        BandId::new("synthetic", cfg.carrier_frequency_hz),
        cfg.clone(),
        samples,
    )?;

    let truth = driveby_ground_truth(cfg, scenario);
    Ok((ctf, truth))
}

/// Analytic per-region ground truth of a drive-by scenario, evaluated at each
/// region's center time.
pub fn driveby_ground_truth(cfg: &SoundingConfig, scenario: &DrivebyScenario) -> GroundTruth {
    let weights = scenario.diffuse_profile(cfg);
    let region_len = cfg.region_duration_s();
    let regions = cfg.region_count();
    let mut k_db = Vec::with_capacity(regions);
    let mut spread = Vec::with_capacity(regions);
    for i in 0..regions {
        let t = (i as f64 + 0.5) * region_len;
        let los = scenario.los_power(t);
        let diffuse = scenario.diffuse_power(t);
        k_db.push(10.0 * (los / diffuse).log10());

        let mut profile: Vec<(f64, f64)> = weights
            .iter()
            .map(|&(delay, w)| (delay, diffuse * w))
            .collect();
        profile[0].1 += los;
        spread.push(delay_profile_spread(&profile));
    }
    GroundTruth {
        k_db,
        rms_delay_spread_s: spread,
    }
}

/// Turns a CTF into raw received snapshots: each snapshot holds
/// `symbols_per_snapshot` symbols where symbol 0 duplicates symbol 1 as a
/// cyclic-prefix stand-in, and symbols 1.. carry X[k] * H_RF[k] * H[k, n] plus
/// complex Gaussian noise at `snr_db` per symbol (relative to the noiseless
/// symbol power averaged over subcarriers).
///
/// Draw order: snapshot-major, then symbols 1.., then subcarrier.
pub fn synth_received(
    ctf: &Ctf,
    tx_sequence: &[Complex64],
    rf_calibration: &[Complex64],
    snr_db: f64,
    seed: u64,
) -> Result<RawSnapshots> {
    ctf.config.validate()?;
    let k = ctf.config.num_subcarriers;
    let n = ctf.config.num_snapshots;
    let n_sym = ctf.config.symbols_per_snapshot;
    if tx_sequence.len() != k || rf_calibration.len() != k {
        return Err(Error::DimensionMismatch {
            context: format!(
                "transmit/calibration sequences of length {}/{}, expected {k}",
                tx_sequence.len(),
                rf_calibration.len()
            ),
        });
    }
    for (index, x) in tx_sequence.iter().enumerate() {
        if x.norm() == 0.0 || x.norm().is_nan() {
            return Err(Error::ZeroTransmitAmplitude { index });
        }
    }
    for (index, h) in rf_calibration.iter().enumerate() {
        if !(h.norm() > 0.0 && h.norm().is_finite()) {
            return Err(Error::ZeroMagnitudeEntry { index });
        }
    }

    let noise_factor = if snr_db == f64::INFINITY {
        0.0
    } else {
        10f64.powf(-snr_db / 10.0)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![Complex64::ZERO; n * n_sym * k];
    let mut base = vec![Complex64::ZERO; k];
    for snap in 0..n {
        let col = ctf.samples.col(snap);
        let mut power = 0.0;
        for sub in 0..k {
            base[sub] = tx_sequence[sub] * rf_calibration[sub] * col[sub];
            power += base[sub].norm_sqr();
        }
        let noise_var = power / k as f64 * noise_factor;

        let start = snap * n_sym * k;
        for sym in 1..n_sym {
            let dst = &mut data[start + sym * k..start + (sym + 1) * k];
            for (sub, out) in dst.iter_mut().enumerate() {
                let noise = if noise_var > 0.0 {
                    complex_gaussian(&mut rng, noise_var)
                } else {
                    Complex64::ZERO
                };
                *out = base[sub] + noise;
            }
        }
        // cyclic-prefix stand-in
        let (head, rest) = data[start..start + 2 * k].split_at_mut(k);
        head.copy_from_slice(rest);
    }

    Ok(RawSnapshots {
        band: ctf.band.clone(),
        config: ctf.config.clone(),
        data,
    })
}
