//! CSV emission and parsing. All numbers are written with Rust's shortest
//! round-trip float formatting, so files parse back to bit-identical values.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sounder_core::model::RegionMetrics;
use sounder_core::stats::BandSummary;
use sounder_core::synth::GroundTruth;

use crate::error::{CliError, Result};

fn open_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

/// Per-region metrics table: one row per analyzed region.
pub fn write_metrics(path: &Path, metrics: &[RegionMetrics], t_centers: &[f64]) -> Result<()> {
    let mut w = open_writer(path)?;
    w.write_record(["region_index", "t_center_s", "k_db", "valid", "sigma_tau_ns"])
        .map_err(|e| CliError::parse(path, e.to_string()))?;
    for (m, t) in metrics.iter().zip(t_centers) {
        w.write_record([
            m.region_index.to_string(),
            fmt(*t),
            fmt_opt(m.k_factor_db),
            m.valid.to_string(),
            fmt(m.rms_delay_spread_s * 1e9),
        ])
        .map_err(|e| CliError::parse(path, e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub region_index: usize,
    pub t_center_s: f64,
    pub k_db: Option<f64>,
    pub valid: bool,
    pub sigma_tau_ns: f64,
}

#[cfg(test)]
pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::parse(path, e.to_string()))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<MetricsRow>, _>>()
        .map_err(|e| CliError::parse(path, e.to_string()))
}

/// One row of the cross-band summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub band: String,
    pub k_mean_db: f64,
    pub k_std_db: f64,
    pub ds_mean_ns: f64,
    pub ds_std_ns: f64,
    pub rho: Option<f64>,
    pub reference_rho: f64,
    pub invalid_regions: usize,
}

impl From<&BandSummary> for SummaryRow {
    fn from(s: &BandSummary) -> Self {
        SummaryRow {
            band: s.band.label.clone(),
            k_mean_db: s.k_mean_db,
            k_std_db: s.k_std_db,
            ds_mean_ns: s.ds_mean_s * 1e9,
            ds_std_ns: s.ds_std_s * 1e9,
            rho: s.rho,
            reference_rho: s.reference_rho,
            invalid_regions: s.invalid_region_count,
        }
    }
}

pub fn write_summaries(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = open_writer(path)?;
    for row in rows {
        w.serialize(row)
            .map_err(|e| CliError::parse(path, e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_summaries(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::parse(path, e.to_string()))?;
    let rows = r
        .deserialize()
        .collect::<std::result::Result<Vec<SummaryRow>, _>>()
        .map_err(|e| CliError::parse(path, e.to_string()))?;
    if rows.is_empty() {
        return Err(CliError::parse(path, "no summary rows"));
    }
    Ok(rows)
}

/// Empirical CDF table with a named value column.
pub fn write_ecdf(path: &Path, value_column: &str, steps: &[(f64, f64)]) -> Result<()> {
    let mut w = open_writer(path)?;
    w.write_record([value_column, "probability"])
        .map_err(|e| CliError::parse(path, e.to_string()))?;
    for (v, p) in steps {
        w.write_record([fmt(*v), fmt(*p)])
            .map_err(|e| CliError::parse(path, e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Ground-truth table emitted by the simulator.
pub fn write_ground_truth(path: &Path, truth: &GroundTruth, region_duration_s: f64) -> Result<()> {
    let mut w = open_writer(path)?;
    w.write_record(["region_index", "t_center_s", "k_true_db", "sigma_tau_true_ns"])
        .map_err(|e| CliError::parse(path, e.to_string()))?;
    for (i, (k, s)) in truth.k_db.iter().zip(&truth.rms_delay_spread_s).enumerate() {
        w.write_record([
            i.to_string(),
            fmt((i as f64 + 0.5) * region_duration_s),
            fmt(*k),
            fmt(*s * 1e9),
        ])
        .map_err(|e| CliError::parse(path, e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("sounder-csv-tests-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn metrics_round_trip_losslessly() {
        let metrics = vec![
            RegionMetrics {
                region_index: 120,
                k_factor_linear: Some(3.1622776601683795),
                k_factor_db: Some(5.0 + 1e-13),
                constant_power: 0.7,
                fluctuating_power: 0.3,
                mean_power: 1.0,
                rms_delay_spread_s: 123.456e-9,
                valid: true,
            },
            RegionMetrics {
                region_index: 121,
                k_factor_linear: None,
                k_factor_db: None,
                constant_power: 0.0,
                fluctuating_power: 0.0,
                mean_power: 1.0,
                rms_delay_spread_s: 0.0,
                valid: false,
            },
        ];
        let t = vec![12.05, 12.15];
        let path = tmp("metrics.csv");
        write_metrics(&path, &metrics, &t).unwrap();
        let rows = read_metrics(&path).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].region_index, 120);
        assert_eq!(rows[0].k_db, Some(5.0 + 1e-13));
        assert_eq!(rows[0].sigma_tau_ns, 123.456e-9 * 1e9);
        assert_eq!(rows[1].k_db, None);
        assert!(!rows[1].valid);
    }

    #[test]
    fn summaries_round_trip_losslessly() {
        let rows = vec![SummaryRow {
            band: "3.2GHz".into(),
            k_mean_db: 4.93,
            k_std_db: 3.98,
            ds_mean_ns: 123.66,
            ds_std_ns: 49.87,
            rho: Some(-0.498),
            reference_rho: -0.7,
            invalid_regions: 3,
        }];
        let path = tmp("summary.csv");
        write_summaries(&path, &rows).unwrap();
        let back = read_summaries(&path).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn empty_summary_is_a_parse_error() {
        let path = tmp("empty.csv");
        std::fs::write(&path, "").unwrap();
        assert_eq!(read_summaries(&path).unwrap_err().kind(), "ParseError");
    }
}
