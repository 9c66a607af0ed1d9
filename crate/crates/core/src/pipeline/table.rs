use std::io::Write;
use std::path::Path;

use crate::classify::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::util::fmt_g9;

/// Leading comment line carrying the run configuration hash.
pub const HASH_PREFIX: &str = "# run_config_sha256=";

/// Per-recording feature rows as stored in the feature CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub feature_names: Vec<String>,
    pub rows: Vec<Sample>,
}

impl FeatureTable {
    pub fn write_csv<W: Write>(&self, out: W, config_hash: &str) -> Result<()> {
        let mut out = out;
        writeln!(out, "{HASH_PREFIX}{config_hash}")?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let mut header = vec!["recording_id", "patient_id", "label"];
        header.extend(self.feature_names.iter().map(String::as_str));
        w.write_record(&header).map_err(csv_error)?;
        for r in &self.rows {
            let mut rec = vec![
                r.recording_id.clone(),
                r.patient_id.clone(),
                r.label.clone(),
            ];
            rec.extend(r.features.iter().map(|&v| fmt_g9(v)));
            w.write_record(&rec).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parses a feature CSV; returns the table and its embedded config hash.
    pub fn read_csv(path: &Path) -> Result<(Self, Option<String>)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Ingest {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        let hash = text
            .lines()
            .next()
            .and_then(|l| l.strip_prefix(HASH_PREFIX))
            .map(str::to_string);
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header = reader.headers().map_err(csv_error)?.clone();
        if header.len() < 4
            || header.iter().take(3).collect::<Vec<_>>() != ["recording_id", "patient_id", "label"]
        {
            return Err(Error::Schema(format!(
                "{}: expected recording_id,patient_id,label followed by features",
                path.display()
            )));
        }
        let feature_names: Vec<String> = header.iter().skip(3).map(String::from).collect();
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(csv_error)?;
            if rec.len() != header.len() {
                return Err(Error::Schema(format!(
                    "{}: row {} has {} fields",
                    path.display(),
                    i + 1,
                    rec.len()
                )));
            }
            let features = rec
                .iter()
                .skip(3)
                .map(|s| {
                    s.parse::<f64>().map_err(|_| {
                        Error::Schema(format!(
                            "{}: row {}: bad number {s:?}",
                            path.display(),
                            i + 1
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(Sample {
                recording_id: rec[0].to_string(),
                patient_id: rec[1].to_string(),
                label: rec[2].to_string(),
                features,
            });
        }
        Ok((
            Self {
                feature_names,
                rows,
            },
            hash,
        ))
    }

    /// Rows whose label is in `labels`, as a dataset with that label order.
    pub fn to_dataset(&self, labels: &[String]) -> Result<Dataset> {
        let rows = self
            .rows
            .iter()
            .filter(|r| labels.contains(&r.label))
            .cloned()
            .collect();
        Dataset::with_labels(self.feature_names.clone(), rows, labels.to_vec())
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Schema(e.to_string())
}
