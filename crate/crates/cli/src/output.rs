use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::CliError;

/// A named output file held in memory until every artifact of a run is ready.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn json<T: Serialize>(name: &str, value: &T) -> Result<Self, CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        bytes.push(b'\n');
        Ok(Artifact { name: name.to_string(), bytes })
    }

    pub fn csv(series: &str, columns: &[(&str, &[f64])]) -> Result<Self, CliError> {
        Ok(Artifact { name: format!("{series}.csv"), bytes: emit_plotdata(columns)? })
    }
}

/// Shortest decimal that reads back to the same `f64`; integral values
/// print without a fractional part.
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.is_finite() && v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

/// Contents of `series.csv`: a header row and `\n` line endings. Columns must have equal length.
pub fn emit_plotdata(columns: &[(&str, &[f64])]) -> Result<Vec<u8>, CliError> {
    let rows = columns.first().map_or(0, |c| c.1.len());
    if let Some((name, col)) = columns.iter().find(|c| c.1.len() != rows) {
        return Err(CliError::Validation(format!("column `{name}` has {} rows, expected {rows}", col.len())));
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(columns.iter().map(|c| c.0)).map_err(io)?;
    for i in 0..rows {
        w.write_record(columns.iter().map(|c| format_float(c.1[i]))).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(dir: &Path, artifact: &Artifact) -> Result<PathBuf, CliError> {
    let target = dir.join(&artifact.name);
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(&artifact.bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&target).map_err(|e| CliError::Io(format!("{}: {}", target.display(), e.error)))?;
    Ok(target)
}

pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    artifacts.iter().map(|a| write_atomic(dir, a)).collect()
}
