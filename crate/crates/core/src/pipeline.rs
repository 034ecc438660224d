//! Full analysis pipeline over one or more bands: stationarity-region
//! partitioning, delay-domain denoising with a cross-band common dynamic
//! range, method-of-moments K-factor, multitaper delay spread, and band
//! summaries.

use crate::dispersion::{self, TaperSet};
use crate::error::{Error, Result};
use crate::kfactor;
use crate::model::{Ctf, RegionMetrics, SoundingConfig};
use crate::par;
use crate::preprocess::{self, DynamicRangeReport};
use crate::stats::{self, BandSummary, KUnits};

/// Where the noise floor entering the dynamic range is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseFloorScope {
    /// Median over each region separately.
    Region,
    /// Median over all analyzed regions of the band.
    Global,
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    /// Analysis window [start, end) in seconds; `None` analyzes everything.
    /// Only regions lying entirely inside the window are used.
    pub window: Option<(f64, f64)>,
    /// Apply the delay-domain threshold before estimation.
    pub thresholding: bool,
    /// Units of the K-factor series entering the correlation.
    pub k_units: KUnits,
    pub noise_floor_scope: NoiseFloorScope,
    /// Time-halfbandwidth product of the time taper family.
    pub nw_time: f64,
    /// Time-halfbandwidth product of the frequency taper family.
    pub nw_freq: f64,
    /// Reference correlation for reporting.
    pub reference_rho: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            window: None,
            thresholding: true,
            k_units: KUnits::Db,
            noise_floor_scope: NoiseFloorScope::Region,
            nw_time: dispersion::DEFAULT_NW_TIME,
            nw_freq: dispersion::DEFAULT_NW_FREQ,
            reference_rho: stats::REFERENCE_RHO_3GPP,
        }
    }
}

/// Everything the analysis produces for one band.
#[derive(Debug, Clone)]
pub struct BandAnalysis {
    pub band: crate::model::BandId,
    /// Per-region estimates, `region_index` holding the absolute index.
    pub metrics: Vec<RegionMetrics>,
    /// Center time of each analyzed region, in seconds.
    pub t_centers_s: Vec<f64>,
    pub summary: BandSummary,
    pub region_dynamic_ranges: Vec<DynamicRangeReport>,
    /// Median of the per-region dynamic ranges, in dB.
    pub band_dynamic_range_db: f64,
    /// The cross-band minimum actually applied as the threshold.
    pub common_dynamic_range_db: f64,
    pub dropped_snapshots: usize,
}

/// Absolute region index range [lo, hi) selected by the window.
pub fn window_region_range(
    cfg: &SoundingConfig,
    window: Option<(f64, f64)>,
) -> Result<(usize, usize)> {
    let total = cfg.region_count();
    let duration = cfg.region_duration_s();
    match window {
        None => Ok((0, total)),
        Some((start, end)) => {
            let lo = ((start / duration) - 1e-9).ceil().max(0.0) as usize;
            let hi_f = ((end / duration) + 1e-9).floor();
            let hi = if hi_f <= 0.0 { 0 } else { (hi_f as usize).min(total) };
            if lo >= hi {
                Err(Error::WindowOutOfRange {
                    start,
                    end,
                    measured: total as f64 * duration,
                })
            } else {
                Ok((lo, hi))
            }
        }
    }
}

fn check_bands(ctfs: &[Ctf]) -> Result<()> {
    if ctfs.is_empty() {
        return Err(Error::BandMismatch {
            context: "no bands given".into(),
        });
    }
    for ctf in ctfs {
        ctf.config.validate()?;
    }
    let first = &ctfs[0].config;
    for ctf in &ctfs[1..] {
        if ctf.config.num_snapshots != first.num_snapshots
            || ctf.config.snapshots_per_region != first.snapshots_per_region
        {
            return Err(Error::BandMismatch {
                context: format!(
                    "band {} has {} snapshots / {} per region, band {} has {} / {}",
                    ctfs[0].band.label,
                    first.num_snapshots,
                    first.snapshots_per_region,
                    ctf.band.label,
                    ctf.config.num_snapshots,
                    ctf.config.snapshots_per_region
                ),
            });
        }
    }
    for (i, a) in ctfs.iter().enumerate() {
        for b in &ctfs[i + 1..] {
            if a.band.label == b.band.label {
                return Err(Error::BandMismatch {
                    context: format!("duplicate band label `{}`", a.band.label),
                });
            }
        }
    }
    Ok(())
}

/// Per-region dynamic-range reports over [lo, hi).
fn band_dynamic_ranges(
    ctf: &Ctf,
    lo: usize,
    hi: usize,
    scope: NoiseFloorScope,
) -> Result<Vec<DynamicRangeReport>> {
    let floor_override = match scope {
        NoiseFloorScope::Region => None,
        NoiseFloorScope::Global => {
            let mut powers: Vec<f64> = Vec::new();
            for i in lo..hi {
                let cir = preprocess::to_delay_domain(&preprocess::region(ctf, i));
                powers.extend(cir.samples.data().iter().map(|z| z.norm_sqr()));
            }
            Some(10.0 * preprocess::median_power(&mut powers).log10())
        }
    };
    par::map_indexed(hi - lo, |offset| {
        let cir = preprocess::to_delay_domain(&preprocess::region(ctf, lo + offset));
        match floor_override {
            Some(floor) => preprocess::dynamic_range_with_floor(&cir, floor),
            None => preprocess::dynamic_range(&cir),
        }
    })
    .into_iter()
    .collect()
}

/// One region after the delay-domain denoising step (or the raw region when
/// no threshold is given), as fed to both estimators.
pub fn denoised_region(
    ctf: &Ctf,
    index: usize,
    threshold_dr_db: Option<f64>,
) -> crate::model::RegionCtf {
    let raw = preprocess::region(ctf, index);
    match threshold_dr_db {
        Some(dr) => {
            let cir = preprocess::apply_threshold(&preprocess::to_delay_domain(&raw), dr);
            preprocess::to_frequency_domain(&cir)
        }
        None => raw,
    }
}

fn region_metrics(
    ctf: &Ctf,
    index: usize,
    tapers: &TaperSet,
    threshold_dr_db: Option<f64>,
) -> Result<RegionMetrics> {
    let denoised = denoised_region(ctf, index, threshold_dr_db);

    let mut metrics = kfactor::estimate_kfactor(&denoised);
    let lsf = dispersion::lsf(&denoised, tapers)?;
    match dispersion::rms_delay_spread(&dispersion::pdp(&lsf)) {
        Ok(spread) => metrics.rms_delay_spread_s = spread,
        Err(Error::ZeroPdp) => {
            metrics.rms_delay_spread_s = 0.0;
            metrics.valid = false;
        }
        Err(e) => return Err(e),
    }
    Ok(metrics)
}

/// Estimates all regions of one band in [lo, hi), in parallel when the
/// `parallel` feature is enabled.
pub fn process_band_regions(
    ctf: &Ctf,
    lo: usize,
    hi: usize,
    tapers: &TaperSet,
    threshold_dr_db: Option<f64>,
) -> Result<Vec<RegionMetrics>> {
    par::map_indexed(hi - lo, |offset| {
        region_metrics(ctf, lo + offset, tapers, threshold_dr_db)
    })
    .into_iter()
    .collect()
}

/// Sequential twin of [`process_band_regions`], kept for benchmarking both
/// execution paths against each other.
pub fn process_band_regions_serial(
    ctf: &Ctf,
    lo: usize,
    hi: usize,
    tapers: &TaperSet,
    threshold_dr_db: Option<f64>,
) -> Result<Vec<RegionMetrics>> {
    par::map_indexed_serial(hi - lo, |offset| {
        region_metrics(ctf, lo + offset, tapers, threshold_dr_db)
    })
    .into_iter()
    .collect()
}

/// Runs the full multi-band analysis. With two or more bands the delay-domain
/// threshold uses the smallest per-band dynamic range (each band's value being
/// the median of its per-region dynamic ranges).
pub fn analyze(ctfs: &[Ctf], opts: &AnalysisOptions) -> Result<Vec<BandAnalysis>> {
    check_bands(ctfs)?;
    let (lo, hi) = window_region_range(&ctfs[0].config, opts.window)?;

    let mut all_reports = Vec::with_capacity(ctfs.len());
    let mut band_drs = Vec::with_capacity(ctfs.len());
    for ctf in ctfs {
        let reports = band_dynamic_ranges(ctf, lo, hi, opts.noise_floor_scope)?;
        let mut drs: Vec<f64> = reports.iter().map(|r| r.dynamic_range_db).collect();
        band_drs.push(preprocess::median_power(&mut drs));
        all_reports.push(reports);
    }
    let common_dr = preprocess::common_dynamic_range(&band_drs);

    let mut out = Vec::with_capacity(ctfs.len());
    for (band_idx, ctf) in ctfs.iter().enumerate() {
        let tapers = dispersion::make_tapers(&ctf.config, opts.nw_time, opts.nw_freq)?;
        let threshold = opts.thresholding.then_some(common_dr);
        let metrics = process_band_regions(ctf, lo, hi, &tapers, threshold)?;
        let summary =
            stats::summarize_band(&metrics, &ctf.band, opts.reference_rho, opts.k_units)?;
        let duration = ctf.config.region_duration_s();
        let t_centers_s = (lo..hi).map(|i| (i as f64 + 0.5) * duration).collect();
        out.push(BandAnalysis {
            band: ctf.band.clone(),
            metrics,
            t_centers_s,
            summary,
            region_dynamic_ranges: std::mem::take(&mut all_reports[band_idx]),
            band_dynamic_range_db: band_drs[band_idx],
            common_dynamic_range_db: common_dr,
            dropped_snapshots: ctf.config.dropped_snapshots(),
        });
    }
    Ok(out)
}
