//! Generates a small labeled corpus, extracts features and trains a
//! logistic regression on it.
//!
//! cargo run --release --example synthetic_pipeline -- [out_dir]

use lung_distortion::classify::ModelKind;
use lung_distortion::pipeline::{self, RunConfig, SynthSpec, Task};

fn main() -> lung_distortion::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "synthetic_out".into());
    let out = std::path::Path::new(&out);
    let manifest_path =
        pipeline::write_synthetic_corpus(&out.join("corpus"), &SynthSpec::default())?;

    let mut config = RunConfig::default();
    config.distortion.grid_n = 32;
    let manifest = pipeline::ingest_manifest(&manifest_path, &config)?;
    let extracted = pipeline::extract(&manifest, &config)?;
    pipeline::write_extract_outputs(out, &extracted, &config)?;
    println!(
        "{} recordings, {} features",
        extracted.table.rows.len(),
        extracted.table.feature_names.len()
    );

    let trained = pipeline::train_and_evaluate(
        &extracted.table,
        &Task::Multiclass,
        &[ModelKind::Lr],
        &config,
    )?;
    pipeline::write_train_outputs(out, &trained, &config)?;
    for r in &trained.results {
        println!("{}: test accuracy {:.3}", r.model.kind, r.report.accuracy);
    }
    Ok(())
}
