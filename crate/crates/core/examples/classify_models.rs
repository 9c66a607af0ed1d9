//! Grid-searched LR, KNN, RF and AdaBoost on a noisy three-class toy table,
//! with patient-stratified splitting.

use lung_distortion::classify::{
    class_weights, default_grid, evaluate, grid_search_cv, split_train_test, train, Dataset,
    ModelKind, Sample,
};
use rand::{Rng, SeedableRng};

fn main() -> lung_distortion::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let labels = ["Healthy", "COPD", "URTI"];
    let mut rows = Vec::new();
    for (c, label) in labels.iter().enumerate() {
        for i in 0..40 {
            let mut features: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            features[c] += 1.5;
            rows.push(Sample {
                recording_id: format!("{label}-{i}"),
                patient_id: format!("{label}-p{}", i / 4),
                label: label.to_string(),
                features,
            });
        }
    }
    let names = (0..6).map(|i| format!("f{i}")).collect();
    let data = Dataset::with_labels(names, rows, labels.map(String::from).to_vec())?;
    let (train_set, test_set) = split_train_test(&data, 0.25, 0)?;
    println!(
        "{} train rows, {} test rows",
        train_set.len(),
        test_set.len()
    );
    for kind in [
        ModelKind::Lr,
        ModelKind::Knn,
        ModelKind::Rf,
        ModelKind::AdaBoost,
    ] {
        let search = grid_search_cv(&train_set, &default_grid(kind), 5, 0)?;
        let model = train(&train_set, &search.best, &class_weights(&train_set)?, 0)?;
        let report = evaluate(&model, &test_set)?;
        println!(
            "{:<9} accuracy {:.3}  recall {:.3}  jaccard {:.3}  auroc {:.3}",
            kind.to_string(),
            report.accuracy,
            report.recall,
            report.jaccard,
            report.auroc.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
