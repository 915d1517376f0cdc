//! Report files.
//!
//! Every CSV starts with two comment lines: `# schema: <name>/v<k>: <columns>`
//! and `# params: <json>`, the second holding everything needed to rerun the
//! job. Floats use the shortest round-trip representation, so identical
//! inputs give byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

pub struct CsvReport {
    name: &'static str,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvReport {
    pub fn new(name: &'static str, columns: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            name,
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn schema(&self) -> String {
        format!("{}/v{SCHEMA_VERSION}: {}", self.name, self.columns.join(","))
    }

    pub fn write(&self, dir: &Path, file: &str, params: &Value) -> CliResult<PathBuf> {
        let path = dir.join(file);
        let io = |e| CliError::io(&path, e);
        let mut out = BufWriter::new(File::create(&path).map_err(io)?);
        writeln!(out, "# schema: {}", self.schema()).map_err(io)?;
        writeln!(out, "# params: {params}").map_err(io)?;
        let mut csv = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| CliError::io(&path, e.into());
        csv.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            csv.write_record(row).map_err(csv_err)?;
        }
        csv.flush().map_err(io)?;
        Ok(path)
    }
}

pub fn write_json(dir: &Path, file: &str, value: &Value) -> CliResult<PathBuf> {
    let path = dir.join(file);
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Reads back the rows of a report written by [`CsvReport::write`].
pub fn read_csv_rows(path: &Path) -> CliResult<Vec<csv::StringRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::io(path, e.into()))?;
    reader
        .records()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::io(path, e.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn header_lines_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = CsvReport::new("demo", ["id", "value"]);
        r.push(vec!["a,b".into(), num(0.1)]);
        r.push(vec!["c".into(), num(1e-300)]);
        let path = r.write(dir.path(), "demo.csv", &json!({"seed": 3})).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# schema: demo/v1: id,value"));
        assert_eq!(lines.next(), Some(r#"# params: {"seed":3}"#));
        let rows = read_csv_rows(&path).unwrap();
        assert_eq!(&rows[0][0], "a,b");
        assert_eq!(rows[1][1].parse::<f64>().unwrap(), 1e-300);
    }
}
