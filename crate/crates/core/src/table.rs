//! Rectangular result tables and their CSV / JSON serializations.
//!
//! CSV output uses the same dialect as the ingest files: `#` comment lines
//! (here carrying the metadata), one header line, `.` decimals. Numeric
//! columns come first, text columns last; the `# text_columns=` comment
//! records how many trailing columns are text so the file loads back.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool_version: String,
    pub timestamp: u64,
    /// Ordered key/value description of the run.
    pub parameters: Vec<(String, String)>,
}

impl Metadata {
    /// Stamps the current time, or `SOURCE_DATE_EPOCH` when set.
    pub fn now(parameters: Vec<(String, String)>) -> Self {
        let timestamp = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or_else(|| {
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            });
        Metadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
            parameters,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub columns: Vec<String>,
    pub text_columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub text: Vec<Vec<String>>,
    pub metadata: Metadata,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonColumn<T> {
    name: String,
    values: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct JsonTable {
    metadata: Metadata,
    columns: Vec<JsonColumn<Option<f64>>>,
    text_columns: Vec<JsonColumn<String>>,
}

impl SweepTable {
    pub fn new(columns: Vec<String>, text_columns: Vec<String>, metadata: Metadata) -> Self {
        SweepTable {
            columns,
            text_columns,
            rows: Vec::new(),
            text: Vec::new(),
            metadata,
        }
    }

    pub fn push(&mut self, values: Vec<f64>, text: Vec<String>) -> Result<()> {
        if values.len() != self.columns.len() || text.len() != self.text_columns.len() {
            return Err(Error::InvalidParameter(format!(
                "row shape {}+{} does not match table {}+{}",
                values.len(),
                text.len(),
                self.columns.len(),
                self.text_columns.len()
            )));
        }
        self.rows.push(values);
        self.text.push(text);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn text_column(&self, name: &str) -> Option<Vec<&str>> {
        let idx = self.text_columns.iter().position(|c| c == name)?;
        Some(self.text.iter().map(|r| r[idx].as_str()).collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# tool_version={}", self.metadata.tool_version)?;
        writeln!(out, "# timestamp={}", self.metadata.timestamp)?;
        for (k, v) in &self.metadata.parameters {
            writeln!(out, "# param {k}={v}")?;
        }
        writeln!(out, "# text_columns={}", self.text_columns.len())?;
        let header: Vec<&str> = self
            .columns
            .iter()
            .chain(&self.text_columns)
            .map(String::as_str)
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for (values, text) in self.rows.iter().zip(&self.text) {
            let mut fields: Vec<String> = values.iter().map(|v| format_number(*v)).collect();
            fields.extend(text.iter().cloned());
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        let columns = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, name)| JsonColumn {
                name: name.clone(),
                values: self.rows.iter().map(|r| r[i].is_finite().then_some(r[i])).collect(),
            })
            .collect();
        let text_columns = self
            .text_columns
            .iter()
            .enumerate()
            .map(|(i, name)| JsonColumn {
                name: name.clone(),
                values: self.text.iter().map(|r| r[i].clone()).collect(),
            })
            .collect();
        let doc = JsonTable {
            metadata: self.metadata.clone(),
            columns,
            text_columns,
        };
        serde_json::to_writer_pretty(out, &doc)?;
        Ok(())
    }

    pub fn to_string(&self, format: Format) -> Result<String> {
        let mut buf = Vec::new();
        match format {
            Format::Csv => self.write_csv(&mut buf).expect("writing to a Vec cannot fail"),
            Format::Json => self.write_json(&mut buf)?,
        }
        Ok(String::from_utf8(buf).expect("table output is UTF-8"))
    }

    /// Reads a table written by [`SweepTable::write_csv`].
    pub fn read_csv<R: Read>(input: R, source: &str) -> Result<SweepTable> {
        let mut metadata = Metadata {
            tool_version: String::new(),
            timestamp: 0,
            parameters: Vec::new(),
        };
        let mut n_text = 0usize;
        let mut header: Option<Vec<String>> = None;
        let mut table: Option<SweepTable> = None;

        for (lineno, line) in BufReader::new(input).lines().enumerate() {
            let line = line.map_err(|e| Error::parse(source, format!("line {}: {e}", lineno + 1)))?;
            let line = line.trim_end_matches('\r');
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                if let Some(v) = comment.strip_prefix("tool_version=") {
                    metadata.tool_version = v.to_string();
                } else if let Some(v) = comment.strip_prefix("timestamp=") {
                    metadata.timestamp = v.parse().unwrap_or(0);
                } else if let Some(v) = comment.strip_prefix("text_columns=") {
                    n_text = v
                        .parse()
                        .map_err(|_| Error::parse(source, format!("line {}: bad text_columns", lineno + 1)))?;
                } else if let Some((k, v)) = comment.strip_prefix("param ").and_then(|kv| kv.split_once('=')) {
                    metadata.parameters.push((k.to_string(), v.to_string()));
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            match (&header, &mut table) {
                (None, _) => {
                    if n_text > fields.len() {
                        return Err(Error::parse(source, "more text columns than columns"));
                    }
                    let names: Vec<String> = fields.iter().map(|s| s.to_string()).collect();
                    let split = names.len() - n_text;
                    table = Some(SweepTable::new(
                        names[..split].to_vec(),
                        names[split..].to_vec(),
                        metadata.clone(),
                    ));
                    header = Some(names);
                }
                (Some(names), Some(t)) => {
                    if fields.len() != names.len() {
                        return Err(Error::parse(
                            source,
                            format!(
                                "line {}: expected {} fields, found {}",
                                lineno + 1,
                                names.len(),
                                fields.len()
                            ),
                        ));
                    }
                    let split = names.len() - n_text;
                    let values = fields[..split]
                        .iter()
                        .map(|f| {
                            f.trim()
                                .parse::<f64>()
                                .map_err(|_| Error::parse(source, format!("line {}: bad number {f:?}", lineno + 1)))
                        })
                        .collect::<Result<Vec<f64>>>()?;
                    let text = fields[split..].iter().map(|s| s.to_string()).collect();
                    t.push(values, text)?;
                }
                (Some(_), None) => unreachable!("header sets the table"),
            }
        }
        let mut table = table.ok_or_else(|| Error::parse(source, "missing header"))?;
        table.metadata = metadata;
        Ok(table)
    }

    pub fn load_csv(path: &Path) -> Result<SweepTable> {
        let file = fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        SweepTable::read_csv(file, &path.display().to_string())
    }
}

/// Shortest round-trip representation, switching to exponent form for
/// very small or very large magnitudes.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Writes `table` to `path` in the requested format.
pub fn emit(table: &SweepTable, format: Format, path: &Path) -> Result<()> {
    let body = table.to_string(format)?;
    fs::write(path, body).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
