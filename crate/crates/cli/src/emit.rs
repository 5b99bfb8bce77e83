use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use crate::runner::RunReport;

pub const CSV_HEADER: [&str; 13] = [
    "scenario_id",
    "kind",
    "status",
    "n",
    "prelimit",
    "limit",
    "gap",
    "lhs",
    "rhs",
    "slack",
    "grid_dx",
    "clip",
    "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn file_name(&self) -> &'static str {
        match self {
            Format::Csv => "report.csv",
            Format::Json => "report.json",
        }
    }
}

fn num<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One line per report row; a report without rows (an error) still gets a
/// line. Wall time is not written.
pub fn write_csv<W: Write>(reports: &[RunReport], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in reports {
        let p = &r.provenance;
        let base = |row: Option<&crate::runner::ReportRow>| -> Vec<String> {
            vec![
                r.scenario_id.clone(),
                r.kind.clone(),
                r.status.as_str().to_string(),
                num(row.and_then(|x| x.n)),
                num(row.and_then(|x| x.prelimit)),
                num(row.and_then(|x| x.limit)),
                num(row.and_then(|x| x.gap)),
                num(row.and_then(|x| x.lhs)),
                num(row.and_then(|x| x.rhs)),
                num(row.and_then(|x| x.slack)),
                num(row.and_then(|x| x.grid_dx).or(p.grid_dx)),
                num(p.clip),
                num(p.seed),
            ]
        };
        if r.rows.is_empty() {
            w.write_record(base(None))?;
        }
        for row in &r.rows {
            w.write_record(base(Some(row)))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(reports: &[RunReport], mut out: W) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut out, reports)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Writes the report file into `dir`, creating it if needed, and returns
/// its path.
pub fn emit(reports: &[RunReport], format: Format, dir: &Path) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(format.file_name());
    let file = std::fs::File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
    let buf = std::io::BufWriter::new(file);
    match format {
        Format::Csv => write_csv(reports, buf)?,
        Format::Json => write_json(reports, buf)?,
    }
    Ok(path)
}
