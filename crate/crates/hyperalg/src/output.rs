//! JSON and CSV writers.

use std::fs;
use std::path::Path;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot serialise {path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("cannot write {path}: {source}")]
    Csv { path: String, source: csv::Error },
}

fn ensure_parent(path: &Path) -> Result<(), OutputError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| OutputError::Io { path: dir.display().to_string(), source })?;
    }
    Ok(())
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), OutputError> {
    ensure_parent(path)?;
    let shown = || path.display().to_string();
    let mut text = serde_json::to_string_pretty(value).map_err(|source| OutputError::Json { path: shown(), source })?;
    text.push('\n');
    fs::write(path, text).map_err(|source| OutputError::Io { path: shown(), source })
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<(), OutputError>
where
    I: Iterator<Item = Vec<String>>,
{
    ensure_parent(path)?;
    let wrap = |source| OutputError::Csv { path: path.display().to_string(), source };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(&row).map_err(wrap)?;
    }
    w.flush().map_err(|source| OutputError::Io { path: path.display().to_string(), source })
}
