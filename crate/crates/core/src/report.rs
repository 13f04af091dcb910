//! Report files: `<experiment>-<params-hash>.{json,csv}`, written atomically.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// First 12 hex digits of the SHA-256 of the compact JSON encoding of `params`.
pub fn params_hash(params: &impl Serialize) -> Result<String> {
    let bytes = serde_json::to_vec(params)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().take(6).map(|b| format!("{b:02x}")).collect())
}

pub fn report_stem(experiment: &str, params: &impl Serialize) -> Result<String> {
    Ok(format!("{experiment}-{}", params_hash(params)?))
}

/// Writes `bytes` to `path` through a temporary file in the same directory and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn json_bytes(value: &impl Serialize) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

/// CSV with a header row, `.` decimals and LF line endings.
pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// Paths of a written report pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportPaths {
    pub json: PathBuf,
    pub csv: Option<PathBuf>,
}

/// Writes `report` as JSON and, when `rows` is given, the rows as CSV, both named
/// after `experiment` and the hash of `params`.
pub fn write_report<T: Serialize>(
    dir: &Path,
    experiment: &str,
    params: &impl Serialize,
    report: &impl Serialize,
    rows: Option<&[T]>,
) -> Result<ReportPaths> {
    let stem = report_stem(experiment, params)?;
    let json = dir.join(format!("{stem}.json"));
    write_atomic(&json, &json_bytes(report)?)?;
    let csv = match rows {
        Some(rows) => {
            let p = dir.join(format!("{stem}.csv"));
            write_atomic(&p, &csv_bytes(rows)?)?;
            Some(p)
        }
        None => None,
    };
    Ok(ReportPaths { json, csv })
}
