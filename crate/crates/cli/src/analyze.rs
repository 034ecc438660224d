//! `sounder analyze`: the full per-band pipeline over one or more CTF files.
//! Emits per-region metrics, band summaries, empirical CDF tables and optional
//! SVG plots.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use sounder_core::io::read_ctf_file;
use sounder_core::pipeline::{self, AnalysisOptions, BandAnalysis, NoiseFloorScope};
use sounder_core::stats::{self, KUnits};

use crate::csvio::{self, SummaryRow};
use crate::error::{CliError, Result};
use crate::plot::{self, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KUnitsArg {
    Db,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FloorScopeArg {
    Region,
    Global,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Input CTF file; repeat for a multi-band analysis.
    #[arg(long = "ctf", required = true)]
    pub ctfs: Vec<PathBuf>,

    /// Analysis window start, seconds.
    #[arg(long, default_value_t = 12.0)]
    pub t_start: f64,

    /// Analysis window end, seconds (exclusive).
    #[arg(long, default_value_t = 20.0)]
    pub t_end: f64,

    /// Analyze the whole measurement instead of [--t-start, --t-end).
    #[arg(long)]
    pub full: bool,

    /// Skip the delay-domain dynamic-range thresholding.
    #[arg(long)]
    pub no_threshold: bool,

    /// Units of the K-factor series entering the correlation.
    #[arg(long, value_enum, default_value = "db")]
    pub k_units: KUnitsArg,

    /// Estimate the noise floor per region or once over the whole band.
    #[arg(long, value_enum, default_value = "region")]
    pub noise_floor_scope: FloorScopeArg,

    /// Time-halfbandwidth product of the time taper family.
    #[arg(long, default_value_t = sounder_core::dispersion::DEFAULT_NW_TIME)]
    pub nw_time: f64,

    /// Time-halfbandwidth product of the frequency taper family.
    #[arg(long, default_value_t = sounder_core::dispersion::DEFAULT_NW_FREQ)]
    pub nw_freq: f64,

    /// Output directory for all tables and plots.
    #[arg(long)]
    pub out_dir: PathBuf,

    /// Also render SVG plots of the time series and CDFs.
    #[arg(long)]
    pub plot: bool,

    /// Also export every analyzed region's power delay profile as CSV.
    #[arg(long)]
    pub dump_pdp: bool,

    /// Export the full local scattering function of one region (absolute
    /// region index) as CSV.
    #[arg(long, value_name = "REGION")]
    pub dump_lsf: Option<usize>,
}

/// Band labels become file-name fragments.
fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn run(args: &AnalyzeArgs) -> Result<()> {
    let mut ctfs = Vec::with_capacity(args.ctfs.len());
    for path in &args.ctfs {
        ctfs.push(read_ctf_file(path)?);
    }
    ctfs.sort_by(|a, b| a.band.label.cmp(&b.band.label));

    let opts = AnalysisOptions {
        window: if args.full {
            None
        } else {
            Some((args.t_start, args.t_end))
        },
        thresholding: !args.no_threshold,
        k_units: match args.k_units {
            KUnitsArg::Db => KUnits::Db,
            KUnitsArg::Linear => KUnits::Linear,
        },
        noise_floor_scope: match args.noise_floor_scope {
            FloorScopeArg::Region => NoiseFloorScope::Region,
            FloorScopeArg::Global => NoiseFloorScope::Global,
        },
        nw_time: args.nw_time,
        nw_freq: args.nw_freq,
        reference_rho: stats::REFERENCE_RHO_3GPP,
    };

    let analyses = pipeline::analyze(&ctfs, &opts)?;

    std::fs::create_dir_all(&args.out_dir).map_err(|e| CliError::io(&args.out_dir, e))?;
    let mut summary_rows: Vec<SummaryRow> = Vec::new();
    for band in &analyses {
        let tag = sanitize(&band.band.label);
        csvio::write_metrics(
            &args.out_dir.join(format!("metrics_{tag}.csv")),
            &band.metrics,
            &band.t_centers_s,
        )?;

        let k_values: Vec<f64> = band
            .metrics
            .iter()
            .filter_map(stats::kfactor_db)
            .collect();
        let ds_values: Vec<f64> = band
            .metrics
            .iter()
            .filter(|m| m.valid)
            .map(|m| m.rms_delay_spread_s * 1e9)
            .collect();
        if !k_values.is_empty() {
            csvio::write_ecdf(
                &args.out_dir.join(format!("ecdf_k_{tag}.csv")),
                "k_db",
                &stats::ecdf(&k_values),
            )?;
            csvio::write_ecdf(
                &args.out_dir.join(format!("ecdf_ds_{tag}.csv")),
                "sigma_tau_ns",
                &stats::ecdf(&ds_values),
            )?;
        }
        summary_rows.push(SummaryRow::from(&band.summary));
    }
    csvio::write_summaries(&args.out_dir.join("summary.csv"), &summary_rows)?;

    if args.plot {
        render_plots(&args.out_dir, &analyses)?;
    }
    if args.dump_pdp || args.dump_lsf.is_some() {
        dump_profiles(args, &ctfs, &analyses)?;
    }

    print_notes(args, &analyses);
    Ok(())
}

/// Re-derives per-region delay-Doppler products for export, with the same
/// thresholding and tapers the pipeline applied.
fn dump_profiles(
    args: &AnalyzeArgs,
    ctfs: &[sounder_core::model::Ctf],
    analyses: &[BandAnalysis],
) -> Result<()> {
    use sounder_core::dispersion;

    for (ctf, band) in ctfs.iter().zip(analyses) {
        let tag = sanitize(&band.band.label);
        let tapers = dispersion::make_tapers(&ctf.config, args.nw_time, args.nw_freq)?;
        let threshold = (!args.no_threshold).then_some(band.common_dynamic_range_db);
        let indices: Vec<usize> = band.metrics.iter().map(|m| m.region_index).collect();

        if args.dump_pdp {
            let path = args.out_dir.join(format!("pdp_{tag}.csv"));
            let file = std::fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
            let mut w = csv::Writer::from_writer(file);
            w.write_record(["region_index", "delay_ns", "power"])
                .map_err(|e| CliError::parse(&path, e.to_string()))?;
            for &index in &indices {
                let region = pipeline::denoised_region(ctf, index, threshold);
                let pdp = dispersion::pdp(&dispersion::lsf(&region, &tapers)?);
                for (tau, p) in pdp.delay_axis_s.iter().zip(&pdp.values) {
                    w.write_record([index.to_string(), format!("{}", tau * 1e9), format!("{p}")])
                        .map_err(|e| CliError::parse(&path, e.to_string()))?;
                }
            }
            w.flush().map_err(|e| CliError::io(&path, e))?;
        }

        if let Some(index) = args.dump_lsf {
            if !indices.contains(&index) {
                return Err(CliError::BadArgs(format!(
                    "--dump-lsf {index}: region not in the analyzed window"
                )));
            }
            let region = pipeline::denoised_region(ctf, index, threshold);
            let lsf = dispersion::lsf(&region, &tapers)?;
            let delay_axis = ctf.config.delay_axis();
            let doppler_axis = ctf.config.doppler_axis()?;
            let path = args.out_dir.join(format!("lsf_{tag}_region{index}.csv"));
            let file = std::fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
            let mut w = csv::Writer::from_writer(file);
            w.write_record(["delay_ns", "doppler_hz", "value"])
                .map_err(|e| CliError::parse(&path, e.to_string()))?;
            for (j, nu) in doppler_axis.iter().enumerate() {
                for (tau_bin, tau) in delay_axis.iter().enumerate() {
                    w.write_record([
                        format!("{}", tau * 1e9),
                        format!("{nu}"),
                        format!("{}", lsf.value(tau_bin, j)),
                    ])
                    .map_err(|e| CliError::parse(&path, e.to_string()))?;
                }
            }
            w.flush().map_err(|e| CliError::io(&path, e))?;
        }
    }
    Ok(())
}

fn render_plots(out_dir: &Path, analyses: &[BandAnalysis]) -> Result<()> {
    let k_time: Vec<Series> = analyses
        .iter()
        .map(|b| Series {
            label: b.band.label.clone(),
            points: b
                .metrics
                .iter()
                .zip(&b.t_centers_s)
                .filter_map(|(m, t)| stats::kfactor_db(m).map(|k| (*t, k)))
                .collect(),
        })
        .collect();
    write_text(
        &out_dir.join("kfactor_time.svg"),
        &plot::line_chart("K-factor over time", "time [s]", "K [dB]", &k_time),
    )?;

    let ds_time: Vec<Series> = analyses
        .iter()
        .map(|b| Series {
            label: b.band.label.clone(),
            points: b
                .metrics
                .iter()
                .zip(&b.t_centers_s)
                .filter(|(m, _)| m.valid)
                .map(|(m, t)| (*t, m.rms_delay_spread_s * 1e9))
                .collect(),
        })
        .collect();
    write_text(
        &out_dir.join("delay_spread_time.svg"),
        &plot::line_chart(
            "RMS delay spread over time",
            "time [s]",
            "delay spread [ns]",
            &ds_time,
        ),
    )?;

    let k_cdf: Vec<Series> = analyses
        .iter()
        .map(|b| Series {
            label: b.band.label.clone(),
            points: {
                let v: Vec<f64> = b.metrics.iter().filter_map(stats::kfactor_db).collect();
                stats::ecdf(&v)
            },
        })
        .collect();
    write_text(
        &out_dir.join("kfactor_cdf.svg"),
        &plot::line_chart("K-factor CDF", "K [dB]", "P(K <= x)", &k_cdf),
    )?;

    let ds_cdf: Vec<Series> = analyses
        .iter()
        .map(|b| Series {
            label: b.band.label.clone(),
            points: {
                let v: Vec<f64> = b
                    .metrics
                    .iter()
                    .filter(|m| m.valid)
                    .map(|m| m.rms_delay_spread_s * 1e9)
                    .collect();
                stats::ecdf(&v)
            },
        })
        .collect();
    write_text(
        &out_dir.join("delay_spread_cdf.svg"),
        &plot::line_chart(
            "RMS delay spread CDF",
            "delay spread [ns]",
            "P(DS <= x)",
            &ds_cdf,
        ),
    )?;
    Ok(())
}

fn print_notes(args: &AnalyzeArgs, analyses: &[BandAnalysis]) {
    if analyses.len() == 1 {
        println!("single band: dynamic-range equalization is a no-op (band's own value)");
    }
    for band in analyses {
        println!(
            "band {}: {} regions analyzed, {} without a valid moment solution, dynamic range {:.1} dB (applied: {:.1} dB)",
            band.band.label,
            band.metrics.len(),
            band.summary.invalid_region_count,
            band.band_dynamic_range_db,
            band.common_dynamic_range_db,
        );
        if band.dropped_snapshots > 0 {
            println!(
                "band {}: {} trailing snapshots did not fill a region and were dropped",
                band.band.label, band.dropped_snapshots
            );
        }
    }
    println!(
        "tapers: nw_time = {}, nw_freq = {} (assumed bandwidth products, tune with --nw-time/--nw-freq)",
        args.nw_time, args.nw_freq
    );
    if args.no_threshold {
        println!("thresholding disabled (--no-threshold)");
    }
}
