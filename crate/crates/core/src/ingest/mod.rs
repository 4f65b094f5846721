//! Loading tabular event logs into a column-oriented table.

mod timestamp;

use std::collections::HashSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use timestamp::{parse_timestamp_column, TimestampFormat, TimestampParse};

/// Number of leading lines inspected when sniffing the delimiter.
const SNIFF_LINES: usize = 10;
const DELIMITERS: [u8; 3] = *b",;\t";

#[derive(Debug, Error)]
pub enum LogError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("log has no header columns")]
    NoColumns,
    #[error("log has no data rows")]
    NoDataRows,
    #[error("column {name:?} has {got} cells, expected {expected}")]
    ColumnLength { name: String, got: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub cells: Vec<String>,
}

/// Column-oriented table of raw string cells. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventLog {
    columns: Vec<Column>,
    n_rows: usize,
    source: String,
    ragged_rows: usize,
}

impl EventLog {
    /// Build a log from named columns. Duplicate names receive `#2`, `#3`, ... suffixes.
    pub fn from_columns(columns: Vec<(String, Vec<String>)>, source: impl Into<String>) -> Result<Self, LogError> {
        if columns.is_empty() {
            return Err(LogError::NoColumns);
        }
        let n_rows = columns[0].1.len();
        if n_rows == 0 {
            return Err(LogError::NoDataRows);
        }
        let names = dedup_names(columns.iter().map(|(n, _)| n.clone()).collect());
        let mut out = Vec::with_capacity(columns.len());
        for (name, (_, cells)) in names.into_iter().zip(columns) {
            if cells.len() != n_rows {
                return Err(LogError::ColumnLength {
                    name,
                    got: cells.len(),
                    expected: n_rows,
                });
            }
            out.push(Column { name, cells });
        }
        Ok(Self {
            columns: out,
            n_rows,
            source: source.into(),
            ragged_rows: 0,
        })
    }

    /// Build a log from a header and data rows. Short rows are padded with
    /// empty cells, long rows are cut; both count as ragged.
    pub fn from_rows(header: Vec<String>, rows: Vec<Vec<String>>, source: impl Into<String>) -> Result<Self, LogError> {
        if header.is_empty() {
            return Err(LogError::NoColumns);
        }
        if rows.is_empty() {
            return Err(LogError::NoDataRows);
        }
        let width = header.len();
        let mut cells: Vec<Vec<String>> = vec![Vec::with_capacity(rows.len()); width];
        let mut ragged = 0;
        for row in rows {
            if row.len() != width {
                ragged += 1;
            }
            let mut it = row.into_iter();
            for col in cells.iter_mut() {
                col.push(it.next().unwrap_or_default());
            }
        }
        let mut log = Self::from_columns(header.into_iter().zip(cells).collect(), source)?;
        log.ragged_rows = ragged;
        Ok(log)
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Rows that had a different field count than the header at load time.
    pub fn ragged_rows(&self) -> usize {
        self.ragged_rows
    }

    /// Keep at most the first `max_rows` rows.
    pub fn truncated(&self, max_rows: usize) -> Self {
        if max_rows >= self.n_rows || max_rows == 0 {
            return self.clone();
        }
        Self {
            columns: self
                .columns
                .iter()
                .map(|c| Column {
                    name: c.name.clone(),
                    cells: c.cells[..max_rows].to_vec(),
                })
                .collect(),
            n_rows: max_rows,
            source: self.source.clone(),
            ragged_rows: self.ragged_rows,
        }
    }

    /// Write the log as comma-separated CSV with a header row.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), LogError> {
        let mut w = csv::WriterBuilder::new().from_writer(writer);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for row in 0..self.n_rows {
            w.write_record(self.columns.iter().map(|c| c.cells[row].as_str()))?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn dedup_names(names: Vec<String>) -> Vec<String> {
    let originals: HashSet<String> = names.iter().cloned().collect();
    let mut seen: HashSet<String> = HashSet::new();
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        if seen.insert(name.clone()) {
            out.push(name);
            continue;
        }
        let mut suffix = 2;
        loop {
            let candidate = format!("{name}#{suffix}");
            if !seen.contains(&candidate) && !originals.contains(&candidate) {
                seen.insert(candidate.clone());
                out.push(candidate);
                break;
            }
            suffix += 1;
        }
    }
    out
}

/// Pick the delimiter whose field counts are most consistent over the first lines.
pub fn sniff_delimiter(text: &str) -> u8 {
    let sample: String = text.lines().take(SNIFF_LINES).collect::<Vec<_>>().join("\n");
    let mut best = (b',', 0usize, 0usize);
    for &delim in &DELIMITERS {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .delimiter(delim)
            .from_reader(sample.as_bytes());
        let counts: Vec<usize> = reader.records().filter_map(Result::ok).map(|r| r.len()).collect();
        let Some(&first) = counts.first() else {
            continue;
        };
        if first < 2 {
            continue;
        }
        let consistent = counts.iter().filter(|&&c| c == first).count();
        if (consistent, first) > (best.1, best.2) {
            best = (delim, consistent, first);
        }
    }
    best.0
}

/// Load a CSV event log, keeping at most `max_rows` data rows.
pub fn load_csv(path: impl AsRef<Path>, max_rows: usize) -> Result<EventLog, LogError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| LogError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let text = String::from_utf8(bytes).map_err(|e| LogError::Io {
        path: path.to_path_buf(),
        source: io::Error::new(io::ErrorKind::InvalidData, e),
    })?;
    let source = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    parse_csv(&text, source, max_rows)
}

/// Parse CSV text already in memory.
pub fn parse_csv(text: &str, source: impl Into<String>, max_rows: usize) -> Result<EventLog, LogError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let delimiter = sniff_delimiter(text);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .delimiter(delimiter)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        if rows.len() >= max_rows {
            break;
        }
        let record = record?;
        rows.push(record.iter().map(str::to_owned).collect());
    }
    let log = EventLog::from_rows(header, rows, source)?;
    if log.ragged_rows() > 0 {
        log::warn!("{}: padded {} ragged rows", log.source(), log.ragged_rows());
    }
    Ok(log)
}
