//! Classifiers, patient-level splitting, hyperparameter search and metrics.

mod dataset;
mod knn;
mod logistic;
mod metrics;
mod search;
mod split;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use dataset::{class_weights, Dataset, Sample};
pub use knn::{KnnModel, KnnWeights};
pub use logistic::LogisticModel;
pub use metrics::{auroc, BinaryCounts, MetricsReport};
pub use search::{default_grid, grid_search_cv, GridSearch, SelectionMetric};
pub use split::{split_train_test, stratified_folds};
pub use tree::{
    AdaBoost, BoostParams, DecisionTree, ForestParams, MaxFeatures, Node, RandomForest, TreeParams,
};

use crate::error::{Error, Result};

/// Per-feature mean and standard deviation; constant columns get unit scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[&[f64]]) -> Self {
        let d = x.first().map_or(0, |r| r.len());
        let n = x.len().max(1) as f64;
        let mut mean = vec![0.0; d];
        for r in x {
            for (m, v) in mean.iter_mut().zip(*r) {
                *m += v / n;
            }
        }
        let mut scale = vec![0.0; d];
        for r in x {
            for ((s, v), m) in scale.iter_mut().zip(*r).zip(&mean) {
                *s += (v - m).powi(2) / n;
            }
        }
        for s in &mut scale {
            *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
        }
        Self { mean, scale }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lr,
    Knn,
    Rf,
    AdaBoost,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Lr,
        ModelKind::Knn,
        ModelKind::Rf,
        ModelKind::AdaBoost,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Lr => "lr",
            Self::Knn => "knn",
            Self::Rf => "rf",
            Self::AdaBoost => "adaboost",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parameter(format!("unknown model kind {s:?}")))
    }
}

/// One grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Hyperparameters {
    Lr {
        /// Inverse L2 penalty strength.
        c: f64,
    },
    Knn {
        k: usize,
        weights: KnnWeights,
        p: u32,
    },
    Rf(ForestParams),
    #[serde(rename = "adaboost")]
    AdaBoost(BoostParams),
}

impl Hyperparameters {
    pub fn kind(&self) -> ModelKind {
        match self {
            Self::Lr { .. } => ModelKind::Lr,
            Self::Knn { .. } => ModelKind::Knn,
            Self::Rf(_) => ModelKind::Rf,
            Self::AdaBoost(_) => ModelKind::AdaBoost,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::Lr { c } => *c > 0.0 && c.is_finite(),
            Self::Knn { k, p, .. } => *k >= 1 && (*p == 1 || *p == 2),
            Self::Rf(f) => f.n_estimators >= 1 && f.tree.max_depth != Some(0),
            Self::AdaBoost(b) => {
                b.n_estimators >= 1 && b.learning_rate > 0.0 && (1..=3).contains(&b.max_depth)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "invalid hyperparameters {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ModelParams {
    Lr(LogisticModel),
    Knn(KnnModel),
    Rf(RandomForest),
    #[serde(rename = "adaboost")]
    AdaBoost(AdaBoost),
}

/// A fitted classifier with everything needed to score new rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub hyperparameters: Hyperparameters,
    pub labels: Vec<String>,
    pub feature_names: Vec<String>,
    pub class_weights: Vec<f64>,
    pub params: ModelParams,
}

impl TrainedModel {
    /// Class probabilities in `labels` order.
    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.feature_names.len() {
            return Err(Error::Schema(format!(
                "model expects {} features, got {}",
                self.feature_names.len(),
                x.len()
            )));
        }
        Ok(match &self.params {
            ModelParams::Lr(m) => m.predict_proba(x),
            ModelParams::Knn(m) => m.predict_proba(x),
            ModelParams::Rf(m) => m.predict_proba(x),
            ModelParams::AdaBoost(m) => m.predict_proba(x),
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(tree::argmax(&self.predict_proba(x)?))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Fits one model. Training rows of every class must be present.
pub fn train(
    data: &Dataset,
    hyperparameters: &Hyperparameters,
    class_weights: &[f64],
    seed: u64,
) -> Result<TrainedModel> {
    hyperparameters.validate()?;
    if class_weights.len() != data.n_classes() {
        return Err(Error::Parameter(
            "one class weight per class is required".into(),
        ));
    }
    let counts = data.class_counts();
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::Training(
            "training data has fewer than two classes".into(),
        ));
    }
    let x = data.features();
    let y = data.targets();
    let k = data.n_classes();
    let params = match hyperparameters {
        Hyperparameters::Lr { c } => {
            ModelParams::Lr(LogisticModel::fit(&x, y, k, class_weights, *c).0)
        }
        Hyperparameters::Knn { k: nn, weights, p } => {
            ModelParams::Knn(KnnModel::fit(&x, y, k, class_weights, *nn, *weights, *p))
        }
        Hyperparameters::Rf(f) => {
            ModelParams::Rf(RandomForest::fit(&x, y, k, class_weights, *f, seed))
        }
        Hyperparameters::AdaBoost(b) => {
            ModelParams::AdaBoost(AdaBoost::fit(&x, y, k, class_weights, *b, seed))
        }
    };
    Ok(TrainedModel {
        kind: hyperparameters.kind(),
        hyperparameters: hyperparameters.clone(),
        labels: data.labels().to_vec(),
        feature_names: data.feature_names().to_vec(),
        class_weights: class_weights.to_vec(),
        params,
    })
}

/// Scores `model` on `test`, whose label set must match the model's.
pub fn evaluate(model: &TrainedModel, test: &Dataset) -> Result<MetricsReport> {
    if test.labels() != model.labels.as_slice() {
        return Err(Error::Label(format!(
            "test labels {:?} differ from model labels {:?}",
            test.labels(),
            model.labels
        )));
    }
    if test.feature_names() != model.feature_names.as_slice() {
        return Err(Error::Schema(
            "test features differ from the model's".into(),
        ));
    }
    let proba = test
        .rows()
        .iter()
        .map(|r| model.predict_proba(&r.features))
        .collect::<Result<Vec<_>>>()?;
    MetricsReport::from_probabilities(&model.labels, test.targets(), &proba)
}

/// Features by descending random-forest importance, ties by column index.
pub fn feature_importance(model: &TrainedModel) -> Result<Vec<(String, f64)>> {
    let ModelParams::Rf(forest) = &model.params else {
        return Err(Error::Kind(format!(
            "feature importance needs a random forest, got {}",
            model.kind
        )));
    };
    let imp = forest.feature_importance();
    let mut order: Vec<usize> = (0..imp.len()).collect();
    order.sort_by(|&a, &b| imp[b].total_cmp(&imp[a]).then(a.cmp(&b)));
    Ok(order
        .into_iter()
        .map(|i| (model.feature_names[i].clone(), imp[i]))
        .collect())
}

/// Keeps the first `k` features of `ranking`, in ranking order.
pub fn select_top_k(data: &Dataset, ranking: &[String], k: usize) -> Result<Dataset> {
    if k == 0 || k > ranking.len() || k > data.n_features() {
        return Err(Error::Parameter(format!(
            "k = {k} outside 1..={}",
            ranking.len().min(data.n_features())
        )));
    }
    data.select_columns(&ranking[..k])
}
