//! Experiment harness and command-line front end for the semipit link
//! simulator: scenario configs, SNR parameter sweeps, full pipeline replays
//! and power/battery reports, with CSV/NDJSON tables and SVG plots.

pub mod harness;
pub mod plot;
pub mod scenario;

pub use harness::{
    link_for_target_snr, run_pipeline, run_power_report, run_snr_sweep, symbol_round_trip_accuracy,
    PipelineReport, PowerReport, SnrTable,
};
pub use scenario::{NoiseProfile, Scenario, SweepAxis};

use anyhow::{Context, Result};
use std::path::Path;

/// Table output format selected by `--format`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Ndjson,
}

pub fn write_output(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Writes the SNR table (and its companion plot) into `out_dir`, returning
/// the paths written.
pub fn emit_snr_sweep(
    table: &SnrTable,
    out_dir: &Path,
    format: OutputFormat,
) -> Result<Vec<std::path::PathBuf>> {
    let stem = match table.axis {
        SweepAxis::Distance => "snr_distance",
        SweepAxis::Angle => "snr_angle",
        SweepAxis::Power => "snr_power",
    };
    let mut written = Vec::new();
    let table_path = match format {
        OutputFormat::Csv => {
            let p = out_dir.join(format!("{stem}.csv"));
            write_output(&p, &table.to_csv())?;
            p
        }
        OutputFormat::Ndjson => {
            let p = out_dir.join(format!("{stem}.ndjson"));
            write_output(&p, &table.to_ndjson())?;
            p
        }
    };
    written.push(table_path);

    let xs = table.axis_values();
    let series: Vec<(String, Vec<f64>)> = table
        .series
        .iter()
        .map(|name| (name.clone(), table.column(name).unwrap()))
        .collect();
    let svg = plot::line_chart(stem, &table.axis_label, "snr (a.u.)", &xs, &series);
    let svg_path = out_dir.join(format!("{stem}.svg"));
    write_output(&svg_path, &svg)?;
    written.push(svg_path);
    Ok(written)
}

/// Writes pipeline outputs: decoded events, host actions, the confusion
/// matrix and a one-line summary.
pub fn emit_pipeline(report: &PipelineReport, out_dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    use semipit_core::decoder::{actions_to_ndjson, events_to_ndjson};
    let events = out_dir.join("events.ndjson");
    write_output(&events, &events_to_ndjson(&report.events))?;
    let actions = out_dir.join("actions.ndjson");
    write_output(&actions, &actions_to_ndjson(&report.actions))?;
    let confusion = out_dir.join("confusion.csv");
    write_output(&confusion, &report.confusion_csv())?;
    let summary = out_dir.join("report.txt");
    write_output(&summary, &(report.summary() + "\n"))?;
    Ok(vec![events, actions, confusion, summary])
}

/// Writes the component power table and the battery-lifespan matrix.
pub fn emit_power_report(
    report: &PowerReport,
    out_dir: &Path,
    format: OutputFormat,
) -> Result<Vec<std::path::PathBuf>> {
    let mut written = Vec::new();
    match format {
        OutputFormat::Csv => {
            let components = out_dir.join("power_components.csv");
            write_output(&components, &report.component_table_csv())?;
            let lifespan = out_dir.join("battery_lifespan.csv");
            write_output(&lifespan, &report.lifespan_table_csv())?;
            written.push(components);
            written.push(lifespan);
        }
        OutputFormat::Ndjson => {
            let lifespan = out_dir.join("battery_lifespan.ndjson");
            let mut nd = String::new();
            for (hours, row) in &report.lifespans {
                for (capacity, value) in row {
                    nd.push_str(
                        &serde_json::json!({
                            "active_hours_per_day": hours,
                            "capacity_mah": capacity,
                            "lifespan_h": value,
                        })
                        .to_string(),
                    );
                    nd.push('\n');
                }
            }
            write_output(&lifespan, &nd)?;
            written.push(lifespan);
        }
    }

    // Lifespan vs daily use, one line per capacity.
    let duties: Vec<f64> = report.lifespans.iter().map(|(h, _)| *h).collect();
    let capacities: Vec<f64> = report
        .lifespans
        .first()
        .map(|(_, row)| row.iter().map(|(c, _)| *c).collect())
        .unwrap_or_default();
    let series: Vec<(String, Vec<f64>)> = capacities
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            (
                format!("{c} mAh"),
                report.lifespans.iter().map(|(_, row)| row[ci].1).collect(),
            )
        })
        .collect();
    let svg = plot::line_chart(
        "battery_lifespan",
        "active_hours_per_day",
        "lifespan (h)",
        &duties,
        &series,
    );
    let svg_path = out_dir.join("battery_lifespan.svg");
    write_output(&svg_path, &svg)?;
    written.push(svg_path);
    Ok(written)
}
