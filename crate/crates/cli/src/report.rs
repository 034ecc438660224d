//! `sounder report`: render one or more summary CSVs as a markdown comparison
//! table against the 3GPP reference correlation.

use std::path::PathBuf;

use clap::Args;

use crate::csvio::{self, SummaryRow};
use crate::error::Result;

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Summary CSV produced by `sounder analyze`; repeatable.
    #[arg(long = "summary", required = true)]
    pub summaries: Vec<PathBuf>,
}

fn fmt_rho(rho: Option<f64>) -> String {
    match rho {
        Some(r) => format!("{r:.3}"),
        None => "undefined".into(),
    }
}

pub fn render(rows: &[SummaryRow]) -> String {
    let mut sorted = rows.to_vec();
    sorted.sort_by(|a, b| a.band.cmp(&b.band));

    let mut out = String::new();
    out.push_str(
        "| Band | K mean [dB] | K std [dB] | DS mean [ns] | DS std [ns] | rho | 3GPP rho | |rho - ref| | invalid regions |\n",
    );
    out.push_str("|---|---|---|---|---|---|---|---|---|\n");
    for row in &sorted {
        let deviation = row
            .rho
            .map(|r| format!("{:.3}", (r - row.reference_rho).abs()))
            .unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "| {} | {:.2} | {:.2} | {:.2} | {:.2} | {} | {:.1} | {} | {} |\n",
            row.band,
            row.k_mean_db,
            row.k_std_db,
            row.ds_mean_ns,
            row.ds_std_ns,
            fmt_rho(row.rho),
            row.reference_rho,
            deviation,
            row.invalid_regions,
        ));
    }
    out
}

pub fn run(args: &ReportArgs) -> Result<()> {
    let mut rows = Vec::new();
    for path in &args.summaries {
        rows.extend(csvio::read_summaries(path)?);
    }
    print!("{}", render(&rows));
    Ok(())
}
