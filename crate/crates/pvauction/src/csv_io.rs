//! Header-checked CSV reading with per-row diagnostics.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: PathBuf, column: &'static str },
    #[error("{} rejected row(s); first: {}", .0.len(), .0[0])]
    Rejected(Vec<RowError>),
}

/// A row that failed to parse or violated an invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowError {
    pub path: PathBuf,
    /// 1-based line in the file, header included.
    pub line: u64,
    pub field: String,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.path.display(), self.line, self.field, self.message)
    }
}

/// Accepted rows and rejected rows with diagnostics; every input row
/// lands in exactly one of the two.
#[derive(Clone, Debug, PartialEq)]
pub struct Loaded<T> {
    pub rows: Vec<T>,
    pub rejected: Vec<RowError>,
}

impl<T> Loaded<T> {
    pub fn into_result(self) -> Result<Vec<T>, LoadError> {
        if self.rejected.is_empty() {
            Ok(self.rows)
        } else {
            Err(LoadError::Rejected(self.rejected))
        }
    }

    pub fn total(&self) -> usize {
        self.rows.len() + self.rejected.len()
    }
}

/// Reads `path` into `R` rows, after checking that every `required` column
/// is present, then maps each row through `convert`, which also receives
/// the row's line number.
pub fn read_rows<R, T, F>(path: &Path, required: &[&'static str], mut convert: F) -> Result<Loaded<T>, LoadError>
where
    R: DeserializeOwned,
    F: FnMut(R, u64) -> Result<T, (String, String)>,
{
    let file = File::open(path).map_err(|source| LoadError::Io { path: path.into(), source })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers().map_err(|source| LoadError::Csv { path: path.into(), source })?.clone();
    let index: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    for column in required {
        if !index.contains_key(column) {
            return Err(LoadError::MissingColumn { path: path.into(), column });
        }
    }

    let mut loaded = Loaded { rows: Vec::new(), rejected: Vec::new() };
    for record in reader.records() {
        let record = record.map_err(|source| LoadError::Csv { path: path.into(), source })?;
        let line = record.position().map_or(0, |p| p.line());
        let reject = |field: String, message: String| RowError { path: path.into(), line, field, message };
        match record.deserialize::<R>(Some(&headers)) {
            Ok(raw) => match convert(raw, line) {
                Ok(row) => loaded.rows.push(row),
                Err((field, message)) => loaded.rejected.push(reject(field, message)),
            },
            Err(e) => {
                let (field, message) = describe(&e, &headers);
                loaded.rejected.push(reject(field, message));
            }
        }
    }
    Ok(loaded)
}

fn describe(e: &csv::Error, headers: &csv::StringRecord) -> (String, String) {
    if let csv::ErrorKind::Deserialize { err, .. } = e.kind() {
        let field = err.field().and_then(|i| headers.get(i as usize)).unwrap_or("row").to_string();
        return (field, err.kind().to_string());
    }
    ("row".into(), e.to_string())
}

/// Reads one of this crate's own output files; any bad row is an error.
pub fn read_all<R: DeserializeOwned>(path: &Path) -> anyhow::Result<Vec<R>> {
    let loaded = read_rows::<R, R, _>(path, &[], |r, _| Ok(r))?;
    Ok(loaded.into_result()?)
}

pub fn write_rows<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a header-only file when there are no rows, so every output
/// file exists with its documented columns.
pub fn write_rows_with_header<R: Serialize>(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = R>,
) -> anyhow::Result<()> {
    let mut rows = rows.into_iter().peekable();
    if rows.peek().is_some() {
        return write_rows(path, rows);
    }
    let mut f = File::create(path)?;
    writeln!(f, "{}", header.join(","))?;
    Ok(())
}
