//! CSV and JSON writers.
//!
//! CSV numbers use `{:.16e}` (17 significant digits), so identical runs give
//! byte-identical files. JSON numbers use the shortest representation that
//! parses back to the same `f64`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Format;
use crate::error::{ReportError, Result};
use crate::result::{ArrayOutput, RunResult, SweepResult};

pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

fn write(path: PathBuf, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::write(&path, contents).map_err(|e| ReportError::io(&path, e))?;
    written.push(path);
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| ReportError::io(dir, e))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("results serialize");
    s.push('\n');
    s
}

pub fn array_csv(array: &ArrayOutput) -> String {
    let mut out = array.columns.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(",");
    out.push('\n');
    for i in 0..array.rows() {
        let row: Vec<String> = array.columns.iter().map(|c| format_number(c.values[i])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn summary_csv(result: &RunResult) -> String {
    let mut out = String::from("name,value\n");
    for (k, v) in &result.summary {
        let _ = writeln!(out, "{k},{}", format_number(*v));
    }
    out
}

fn margins_csv(result: &RunResult) -> String {
    let mut out = String::from("name,value,threshold,good\n");
    for m in &result.margins {
        let _ = writeln!(out, "{},{},{},{}", m.name, format_number(m.value), format_number(m.threshold), m.good);
    }
    out
}

fn events_csv(result: &RunResult) -> String {
    let mut out = String::from("kind,param,at,direction\n");
    for e in &result.events {
        let at = e.at.map(format_number).unwrap_or_default();
        let dir = e.direction.map(|d| d.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{at},{dir}", e.kind, format_number(e.param));
    }
    out
}

/// Column units and provenance that accompany the CSV tables.
#[derive(Serialize)]
struct Meta<'a> {
    id: &'a str,
    files: Vec<String>,
    columns: Vec<ColumnMeta<'a>>,
    margins: &'a [crate::result::MarginRecord],
    provenance: &'a crate::result::Provenance,
}

#[derive(Serialize)]
struct ColumnMeta<'a> {
    array: &'a str,
    name: &'a str,
    unit: &'a str,
}

/// Writes one run into `dir`, returning the files in write order.
pub fn export_run(result: &RunResult, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    match format {
        Format::Json => write(dir.join(format!("{}.json", result.id)), &json(result), &mut written)?,
        Format::Csv => {
            write(dir.join(format!("{}_summary.csv", result.id)), &summary_csv(result), &mut written)?;
            if !result.margins.is_empty() {
                write(dir.join(format!("{}_margins.csv", result.id)), &margins_csv(result), &mut written)?;
            }
            for array in &result.arrays {
                write(dir.join(format!("{}_{}.csv", result.id, array.name)), &array_csv(array), &mut written)?;
                if array.name == "trajectory" {
                    let path = dir.join(format!("{}_{}_events.csv", result.id, array.name));
                    write(path, &events_csv(result), &mut written)?;
                }
            }
            let meta = Meta {
                id: &result.id,
                files: written
                    .iter()
                    .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
                    .collect(),
                columns: result
                    .arrays
                    .iter()
                    .flat_map(|a| a.columns.iter().map(move |c| ColumnMeta { array: &a.name, name: &c.name, unit: &c.unit }))
                    .collect(),
                margins: &result.margins,
                provenance: &result.provenance,
            };
            write(dir.join(format!("{}_meta.json", result.id)), &json(&meta), &mut written)?;
        }
    }
    Ok(written)
}

pub fn sweep_table_csv(sweep: &SweepResult) -> String {
    let mut out = sweep.table.columns.join(",");
    out.push('\n');
    for row in &sweep.table.rows {
        let cells: Vec<String> = row.iter().map(|v| v.map(format_number).unwrap_or_default()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Writes the combined table and every member run.
pub fn export_sweep(sweep: &SweepResult, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    match format {
        Format::Json => write(dir.join(format!("{}.json", sweep.id)), &json(sweep), &mut written)?,
        Format::Csv => {
            write(dir.join(format!("{}_table.csv", sweep.id)), &sweep_table_csv(sweep), &mut written)?;
            for run in &sweep.runs {
                written.extend(export_run(run, dir, format)?);
            }
        }
    }
    Ok(written)
}
