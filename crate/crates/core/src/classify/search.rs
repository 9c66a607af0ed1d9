use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    class_weights, evaluate, stratified_folds, train, BoostParams, Dataset, ForestParams,
    Hyperparameters, KnnWeights, MaxFeatures, ModelKind, TreeParams,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMetric {
    Accuracy,
    Auroc,
}

impl SelectionMetric {
    /// AUROC for two classes, accuracy otherwise.
    pub fn for_classes(n_classes: usize) -> Self {
        if n_classes == 2 {
            Self::Auroc
        } else {
            Self::Accuracy
        }
    }
}

/// Outcome of a cross-validated grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearch {
    pub best: Hyperparameters,
    pub metric: SelectionMetric,
    /// Mean validation score of each grid point, in grid order.
    pub scores: Vec<(Hyperparameters, f64)>,
}

/// The reduced default grid of each model kind.
pub fn default_grid(kind: ModelKind) -> Vec<Hyperparameters> {
    match kind {
        ModelKind::Lr => (-3..=3)
            .map(|e| Hyperparameters::Lr { c: 10f64.powi(e) })
            .collect(),
        ModelKind::Knn => {
            let mut g = Vec::new();
            for k in [3, 5, 7, 11, 41] {
                for weights in [KnnWeights::Uniform, KnnWeights::Distance] {
                    for p in [1, 2] {
                        g.push(Hyperparameters::Knn { k, weights, p });
                    }
                }
            }
            g
        }
        ModelKind::Rf => {
            let mut g = Vec::new();
            for n_estimators in [100, 150, 200, 300] {
                for max_depth in [Some(10), Some(30), None] {
                    for min_samples_split in [2, 5, 10] {
                        for bootstrap in [true, false] {
                            g.push(Hyperparameters::Rf(ForestParams {
                                n_estimators,
                                tree: TreeParams {
                                    max_depth,
                                    min_samples_split,
                                    max_features: MaxFeatures::Sqrt,
                                },
                                bootstrap,
                            }));
                        }
                    }
                }
            }
            g
        }
        ModelKind::AdaBoost => {
            let mut g = Vec::new();
            for n_estimators in [50, 100, 150, 200] {
                for e in -3..=0 {
                    g.push(Hyperparameters::AdaBoost(BoostParams {
                        n_estimators,
                        learning_rate: 10f64.powi(e),
                        max_depth: 1,
                    }));
                }
            }
            g
        }
    }
}

/// Picks the grid point with the best mean validation score over
/// patient-stratified folds; ties go to the earlier grid point.
pub fn grid_search_cv(
    data: &Dataset,
    grid: &[Hyperparameters],
    folds: usize,
    seed: u64,
) -> Result<GridSearch> {
    if grid.is_empty() {
        return Err(Error::Parameter("empty hyperparameter grid".into()));
    }
    let metric = SelectionMetric::for_classes(data.n_classes());
    let fold_rows = stratified_folds(data, folds, seed)?;
    let splits: Vec<(Dataset, Dataset)> = (0..folds)
        .map(|f| {
            let train_rows: Vec<usize> = fold_rows
                .iter()
                .enumerate()
                .filter(|&(g, _)| g != f)
                .flat_map(|(_, r)| r.iter().copied())
                .collect();
            let mut sorted = train_rows;
            sorted.sort_unstable();
            (data.subset(&sorted), data.subset(&fold_rows[f]))
        })
        .collect();
    let scores = grid
        .par_iter()
        .map(|h| {
            let mut total = 0.0;
            for (train_set, valid) in &splits {
                let weights = class_weights(train_set)?;
                let model = train(train_set, h, &weights, seed)?;
                let report = evaluate(&model, valid)?;
                total += match metric {
                    SelectionMetric::Accuracy => report.accuracy,
                    SelectionMetric::Auroc => report.auroc.unwrap_or(0.5),
                };
            }
            Ok((h.clone(), total / folds as f64))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, (_, s)) in scores.iter().enumerate() {
        if *s > scores[best].1 {
            best = i;
        }
    }
    Ok(GridSearch {
        best: scores[best].0.clone(),
        metric,
        scores,
    })
}
