//! Verdict rows, CSV tables and the JSON summary.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// One pass/fail line. `pass` holds exactly when `value <= band`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictRow {
    pub check: String,
    pub anchor: String,
    pub value: f64,
    pub band: f64,
    pub pass: bool,
    pub seconds: f64,
}

impl VerdictRow {
    pub fn new(check: impl Into<String>, anchor: impl Into<String>, value: f64, band: f64) -> Self {
        let band = if band > 0.0 { band } else { f64::MIN_POSITIVE };
        Self {
            check: check.into(),
            anchor: anchor.into(),
            value,
            band,
            pass: value <= band,
            seconds: 0.0,
        }
    }

    pub fn timed(mut self, seconds: f64) -> Self {
        self.seconds = seconds;
        self
    }
}

/// `max(3 · se, rel · |scale|)`.
pub fn band(se: f64, rel: f64, scale: f64) -> f64 {
    (3.0 * se).max(rel * scale.abs())
}

/// The pair `(violation, band)` with the largest `violation - band`; the
/// whole set passes iff this one does.
pub fn worst(pairs: impl IntoIterator<Item = (f64, f64)>) -> (f64, f64) {
    pairs
        .into_iter()
        .fold((f64::NEG_INFINITY, 1.0), |acc, (v, b)| {
            if v - b > acc.0 - acc.1 {
                (v, b)
            } else {
                acc
            }
        })
}

/// A CSV table held in memory so it can be written or compared byte for byte.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_header(header: Vec<String>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().context("flushing CSV")
    }
}

/// Shortest round-trip formatting, so reruns are byte-identical.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// The verdict rows as CSV. Runtimes are left out so the file is reproducible;
/// they appear in the JSON summary only.
pub fn verdict_table(rows: &[VerdictRow]) -> Table {
    let mut t = Table::new(&["check", "anchor", "value", "band", "pass"]);
    for r in rows {
        t.push(vec![
            r.check.clone(),
            r.anchor.clone(),
            num(r.value),
            num(r.band),
            r.pass.to_string(),
        ]);
    }
    t
}

pub fn summary_json(rows: &[VerdictRow]) -> Result<String> {
    Ok(serde_json::to_string_pretty(rows)?)
}

/// What a command produced.
#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    /// The command's main CSV (support table, round log or verdicts).
    pub table: Table,
    pub verdicts: Vec<VerdictRow>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path
        .file_stem()
        .map(|s| s.to_os_string())
        .unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

/// Writes the report: the main CSV at `out` (stdout when `None`), the
/// verdict CSV next to it as `<stem>.verdicts.csv` when the main table is not
/// already the verdict table, and the JSON summary as `<stem>.summary.json`
/// (stderr when writing to stdout).
pub fn write_report(
    report: &SuiteReport,
    out: Option<&Path>,
    main_is_verdicts: bool,
) -> Result<()> {
    let csv = report.table.to_csv()?;
    let json = summary_json(&report.verdicts)?;
    match out {
        Some(path) => {
            if let Some(dir) = path.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)?;
                }
            }
            std::fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
            if !main_is_verdicts {
                std::fs::write(
                    sibling(path, ".verdicts.csv"),
                    verdict_table(&report.verdicts).to_csv()?,
                )?;
            }
            std::fs::write(sibling(path, ".summary.json"), json.as_bytes())?;
        }
        None => {
            std::io::stdout().write_all(&csv)?;
            if !main_is_verdicts {
                std::io::stdout().write_all(b"\n")?;
                std::io::stdout().write_all(&verdict_table(&report.verdicts).to_csv()?)?;
            }
            eprintln!("{json}");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_pass_rule() {
        assert!(VerdictRow::new("a", "b", 0.01, 0.02).pass);
        assert!(!VerdictRow::new("a", "b", 0.03, 0.02).pass);
        let r = VerdictRow::new("a", "b", -1.0, 0.0);
        assert!(r.band > 0.0 && r.pass);
    }

    #[test]
    fn worst_pair() {
        assert_eq!(worst([(0.1, 0.2), (0.3, 0.25), (0.0, 0.01)]), (0.3, 0.25));
        assert_eq!(band(0.01, 0.02, 1.0), 0.03);
        assert_eq!(band(0.001, 0.02, 1.0), 0.02);
    }

    #[test]
    fn csv_is_stable() {
        let rows = vec![VerdictRow::new("x", "y", 1.0 / 3.0, 0.5).timed(1.5)];
        let a = verdict_table(&rows).to_csv().unwrap();
        assert_eq!(
            String::from_utf8(a).unwrap(),
            "check,anchor,value,band,pass\nx,y,0.3333333333333333,0.5,true\n"
        );
        assert!(summary_json(&rows).unwrap().contains("\"seconds\": 1.5"));
    }

    #[test]
    fn sibling_names() {
        assert_eq!(
            sibling(Path::new("out/run.csv"), ".summary.json"),
            PathBuf::from("out/run.summary.json")
        );
    }
}
