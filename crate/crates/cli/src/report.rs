//! Report emission: CSV tables plus a human-readable summary.
//!
//! Numbers are already formatted to 12 significant digits in the tables,
//! so identical configurations produce byte-identical CSVs. Timing lives
//! only in the summary file. Files are written atomically (temp + rename).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::run::ReportBundle;

/// Write every table as `<name>.csv` and a `summary.txt`; returns the paths.
pub fn emit_reports(bundle: &ReportBundle, out_dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for table in &bundle.tables {
        let mut csv = String::new();
        csv.push_str(&table.columns.join(","));
        csv.push('\n');
        for row in &table.rows {
            csv.push_str(&row.join(","));
            csv.push('\n');
        }
        let path = out_dir.join(format!("{}.csv", table.name));
        write_atomic(&path, csv.as_bytes())?;
        written.push(path);
    }
    let mut summary = String::new();
    summary.push_str(&format!("task: {}\n", bundle.task.name()));
    summary.push_str(&format!("version: {}\n", bundle.version));
    summary.push_str(&format!("seed: {}\n", bundle.seed));
    if bundle.tables.is_empty() {
        summary.push_str("no tasks produced tables\n");
    }
    for table in &bundle.tables {
        summary.push_str(&format!(
            "table {}: {} rows\n",
            table.name,
            table.rows.len()
        ));
    }
    for line in &bundle.summary_lines {
        summary.push_str(line);
        summary.push('\n');
    }
    summary.push_str("config:\n");
    for line in bundle.config_echo.lines() {
        summary.push_str("    ");
        summary.push_str(line);
        summary.push('\n');
    }
    summary.push_str(&format!("elapsed_ms: {}\n", bundle.elapsed_ms));
    let path = out_dir.join("summary.txt");
    write_atomic(&path, summary.as_bytes())?;
    written.push(path);
    Ok(written)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
