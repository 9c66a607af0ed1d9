use std::collections::HashSet;
use std::path::{Path, PathBuf};

use super::RunConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    /// Path as written in the manifest; doubles as the recording id.
    pub recording_id: String,
    /// Path resolved against the manifest's directory.
    pub wav_path: PathBuf,
    pub patient_id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub source: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

const HEADER: [&str; 3] = ["wav_path", "patient_id", "label"];

/// Reads a `wav_path,patient_id,label` CSV. Rows with an excluded label are
/// dropped, repeated paths keep their first row, and every retained path
/// must exist.
pub fn ingest_manifest(path: &Path, config: &RunConfig) -> Result<Manifest> {
    let ingest = |msg: String| Error::Ingest {
        path: path.to_path_buf(),
        msg,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| ingest(e.to_string()))?;
    let header = reader.headers().map_err(|e| ingest(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::Schema(format!(
            "{}: header must be {}, found {}",
            path.display(),
            HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    let mut excluded = 0usize;
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| ingest(format!("row {row}: {e}")))?;
        if record.len() != 3 {
            return Err(ingest(format!(
                "row {row}: expected 3 fields, found {}",
                record.len()
            )));
        }
        let (wav, patient, label) = (&record[0], &record[1], &record[2]);
        if wav.is_empty() || patient.is_empty() || label.is_empty() {
            return Err(ingest(format!("row {row}: empty field")));
        }
        if config.excluded.iter().any(|l| l == label) {
            excluded += 1;
            continue;
        }
        if !config.classes.iter().any(|l| l == label) {
            return Err(ingest(format!("row {row}: unknown label {label:?}")));
        }
        if !seen.insert(wav.to_string()) {
            log::warn!(
                "{}: row {row} repeats {wav}; keeping the first",
                path.display()
            );
            continue;
        }
        let wav_path = base.join(wav);
        if !wav_path.is_file() {
            return Err(Error::Ingest {
                path: wav_path,
                msg: format!("audio file not found (manifest row {row})"),
            });
        }
        entries.push(ManifestEntry {
            recording_id: wav.to_string(),
            wav_path,
            patient_id: patient.to_string(),
            label: label.to_string(),
        });
    }
    if excluded > 0 {
        log::info!(
            "{}: dropped {excluded} row(s) with excluded labels",
            path.display()
        );
    }
    Ok(Manifest {
        source: path.to_path_buf(),
        entries,
    })
}
