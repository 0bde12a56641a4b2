use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use tabhash::{Result, TabError};

/// One emitted statistic. Every row carries the seed that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment: String,
    pub scheme: String,
    /// Compact JSON of the run parameters.
    pub params: String,
    pub seed: u64,
    pub statistic: String,
    pub value: f64,
    /// The idealized-hasher value from the same seed, when requested.
    pub baseline: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Writes rows to `path`. Output is byte-stable given identical rows. CSV
/// header: `experiment,scheme,params,seed,statistic,value,baseline`.
pub fn emit_report(rows: &[ReportRow], format: ReportFormat, path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(TabError::Input("no rows to emit".into()));
    }
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_report(rows, format, &mut w)
}

/// As [`emit_report`] but to any writer (the CLI uses stdout).
pub fn write_report(rows: &[ReportRow], format: ReportFormat, w: &mut dyn Write) -> Result<()> {
    match format {
        ReportFormat::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            for row in rows {
                csv.serialize(row)
                    .map_err(|e| TabError::Io(std::io::Error::other(e)))?;
            }
            csv.flush()?;
        }
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut *w, rows)
                .map_err(|e| TabError::Io(std::io::Error::other(e)))?;
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Writes rows to stdout.
pub fn write_report_stdout(rows: &[ReportRow], format: ReportFormat) -> Result<()> {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    write_report(rows, format, &mut lock)
}

/// Parses a JSON report back into rows; the schema check used in tests.
pub fn read_json_report(text: &str) -> Result<Vec<ReportRow>> {
    serde_json::from_str(text).map_err(|e| TabError::Input(format!("report schema: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ReportRow {
        ReportRow {
            experiment: "bins".into(),
            scheme: "simple".into(),
            params: r#"{"n":16,"m":16}"#.into(),
            seed: 7,
            statistic: "max_load".into(),
            value: 3.0,
            baseline: Some(4.0),
        }
    }

    #[test]
    fn csv_header_and_single_row() {
        let mut buf = Vec::new();
        write_report(&[row()], ReportFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "experiment,scheme,params,seed,statistic,value,baseline"
        );
        assert_eq!(lines.next().unwrap(), r#"bins,simple,"{""n"":16,""m"":16}",7,max_load,3.0,4.0"#);
        assert!(lines.next().is_none());
    }

    #[test]
    fn byte_identical_across_emissions() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![row(), row()];
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        emit_report(&rows, ReportFormat::Csv, &a).unwrap();
        emit_report(&rows, ReportFormat::Csv, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn json_round_trips_through_schema() {
        let rows = vec![row()];
        let mut buf = Vec::new();
        write_report(&rows, ReportFormat::Json, &mut buf).unwrap();
        let back = read_json_report(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn empty_report_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            emit_report(&[], ReportFormat::Csv, &dir.path().join("x.csv")).unwrap_err(),
            TabError::Input(_)
        ));
    }
}
