//! Corpus-level orchestration: manifest ingest, feature extraction, model
//! training and evaluation, feature ranking and feature-count curves.

mod config;
mod manifest;
mod synth;
mod table;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{Grids, RunConfig};
pub use manifest::{ingest_manifest, Manifest, ManifestEntry};
pub use synth::{synthetic_samples, write_synthetic_corpus, SynthSpec};
pub use table::{FeatureTable, HASH_PREFIX};

use crate::classify::{
    class_weights, evaluate, feature_importance, grid_search_cv, select_top_k, split_train_test,
    train, Dataset, ForestParams, GridSearch, Hyperparameters, MaxFeatures, MetricsReport,
    ModelKind, Sample, TrainedModel, TreeParams,
};
use crate::distortion::surface_distortion_features;
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::signal::{
    compute_mfcc, compute_spectrogram, mfcc_statistics, read_wav, savgol_filter, AudioRecording,
};

/// Classification target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// All configured classes present in the data.
    Multiclass,
    /// One class against the healthy label.
    Binary(String),
}

impl Task {
    /// File-name friendly form.
    pub fn slug(&self) -> String {
        match self {
            Self::Multiclass => "multiclass".into(),
            Self::Binary(c) => format!("binary-{c}"),
        }
    }

    /// Dataset of the task: configured class order restricted to labels that
    /// occur, or `[healthy, target]` for a binary task.
    pub fn dataset(&self, table: &FeatureTable, config: &RunConfig) -> Result<Dataset> {
        if let Some(r) = table
            .rows
            .iter()
            .find(|r| !config.classes.contains(&r.label))
        {
            return Err(Error::Label(format!(
                "row {} has label {:?} outside the class list",
                r.recording_id, r.label
            )));
        }
        match self {
            Self::Multiclass => {
                let labels: Vec<String> = config
                    .classes
                    .iter()
                    .filter(|c| table.rows.iter().any(|r| &r.label == *c))
                    .cloned()
                    .collect();
                table.to_dataset(&labels)
            }
            Self::Binary(target) => {
                if target == &config.healthy_label || !config.classes.contains(target) {
                    return Err(Error::Config(format!("invalid binary target {target:?}")));
                }
                table.to_dataset(&[config.healthy_label.clone(), target.clone()])
            }
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Multiclass => f.write_str("multiclass"),
            Self::Binary(c) => write!(f, "binary:{c}"),
        }
    }
}

impl FromStr for Task {
    type Err = Error;

    /// `multiclass` or `binary:<class>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().split_once(':') {
            None if s.trim() == "multiclass" => Ok(Self::Multiclass),
            Some(("binary", c)) if !c.trim().is_empty() => Ok(Self::Binary(c.trim().to_string())),
            _ => Err(Error::Config(format!(
                "task must be `multiclass` or `binary:<class>`, got {s:?}"
            ))),
        }
    }
}

/// The 16 distortion features followed by the 72 MFCC statistics.
pub fn recording_features(recording: &AudioRecording, config: &RunConfig) -> Result<FeatureVector> {
    let d = &config.distortion;
    let smoothed = recording.with_samples(savgol_filter(
        recording.samples(),
        d.savgol_half_width,
        d.savgol_degree,
    )?)?;
    let surface = compute_spectrogram(&smoothed, &d.spectrogram)?;
    let distortion = surface_distortion_features(&surface, d)?;
    let mfcc = mfcc_statistics(&compute_mfcc(&smoothed, &config.mfcc)?)?;
    distortion.concat(&mfcc)
}

pub fn entry_features(entry: &ManifestEntry, config: &RunConfig) -> Result<FeatureVector> {
    let (samples, rate) = read_wav(&entry.wav_path)?;
    let rec = AudioRecording::new(
        samples,
        rate,
        entry.patient_id.as_str(),
        entry.label.as_str(),
    )?;
    recording_features(&rec, config)
}

#[derive(Debug, Clone)]
pub struct ExtractOutcome {
    pub table: FeatureTable,
    /// `(recording_id, error)` of each recording that failed.
    pub failures: Vec<(String, String)>,
}

/// Extracts every manifest entry on `config.workers` threads. Rows keep
/// manifest order; failing recordings are logged and skipped.
pub fn extract(manifest: &Manifest, config: &RunConfig) -> Result<ExtractOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let results: Vec<Result<FeatureVector>> = pool.install(|| {
        manifest
            .entries
            .par_iter()
            .map(|e| entry_features(e, config))
            .collect()
    });
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut names: Option<Vec<String>> = None;
    for (entry, result) in manifest.entries.iter().zip(results) {
        match result {
            Ok(f) => {
                names.get_or_insert_with(|| f.names().to_vec());
                rows.push(Sample {
                    recording_id: entry.recording_id.clone(),
                    patient_id: entry.patient_id.clone(),
                    label: entry.label.clone(),
                    features: f.values().to_vec(),
                });
            }
            Err(e) => {
                log::error!("{}: {e}", entry.recording_id);
                failures.push((entry.recording_id.clone(), e.to_string()));
            }
        }
    }
    let feature_names = match names {
        Some(n) => n,
        None => {
            let mut n = crate::distortion::distortion_feature_names();
            n.extend(crate::signal::mfcc_feature_names());
            n
        }
    };
    Ok(ExtractOutcome {
        table: FeatureTable {
            feature_names,
            rows,
        },
        failures,
    })
}

/// Writes `features.csv` (and `extract_errors.csv` when anything failed).
pub fn write_extract_outputs(
    out_dir: &Path,
    outcome: &ExtractOutcome,
    config: &RunConfig,
) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join("features.csv");
    outcome.table.write_csv(
        std::io::BufWriter::new(std::fs::File::create(&path)?),
        &config.hash(),
    )?;
    if !outcome.failures.is_empty() {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(out_dir.join("extract_errors.csv"))
            .map_err(|e| Error::Schema(e.to_string()))?;
        w.write_record(["recording_id", "error"])
            .map_err(|e| Error::Schema(e.to_string()))?;
        for (id, msg) in &outcome.failures {
            w.write_record([id, msg])
                .map_err(|e| Error::Schema(e.to_string()))?;
        }
        w.flush()?;
    }
    Ok(path)
}

/// Features ranked by a random forest fit on `train_set` alone.
pub fn rank_features(train_set: &Dataset, config: &RunConfig) -> Result<Vec<(String, f64)>> {
    let forest = Hyperparameters::Rf(ForestParams {
        n_estimators: config.ranking_trees,
        tree: TreeParams {
            max_depth: None,
            min_samples_split: 2,
            max_features: MaxFeatures::Sqrt,
        },
        bootstrap: true,
    });
    let model = train(train_set, &forest, &class_weights(train_set)?, config.seed)?;
    feature_importance(&model)
}

/// Recording ids on each side of the train/test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub run_config_sha256: String,
    pub task: String,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ModelResult {
    pub search: GridSearch,
    pub model: TrainedModel,
    pub report: MetricsReport,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub task: Task,
    pub split: SplitRecord,
    /// Present when selection kept fewer than all features.
    pub ranking: Option<Vec<(String, f64)>>,
    pub results: Vec<ModelResult>,
}

type Prepared = (Dataset, Dataset, Option<Vec<(String, f64)>>, SplitRecord);

/// Train/test datasets of a task, reduced to the top `config.select_k`
/// features when that is fewer than all of them.
fn prepared(table: &FeatureTable, task: &Task, config: &RunConfig) -> Result<Prepared> {
    let data = task.dataset(table, config)?;
    let (train_set, test_set) = split_train_test(&data, config.test_fraction, config.seed)?;
    let split = SplitRecord {
        run_config_sha256: config.hash(),
        task: task.to_string(),
        train: train_set
            .rows()
            .iter()
            .map(|r| r.recording_id.clone())
            .collect(),
        test: test_set
            .rows()
            .iter()
            .map(|r| r.recording_id.clone())
            .collect(),
    };
    if config.select_k >= data.n_features() {
        return Ok((train_set, test_set, None, split));
    }
    let ranking = rank_features(&train_set, config)?;
    let names: Vec<String> = ranking.iter().map(|(n, _)| n.clone()).collect();
    let train_sel = select_top_k(&train_set, &names, config.select_k)?;
    let test_sel = select_top_k(&test_set, &names, config.select_k)?;
    Ok((train_sel, test_sel, Some(ranking), split))
}

fn fit_and_score(
    train_set: &Dataset,
    test_set: &Dataset,
    kind: ModelKind,
    config: &RunConfig,
) -> Result<ModelResult> {
    let search = grid_search_cv(
        train_set,
        &config.grids.grid(kind),
        config.cv_folds,
        config.seed,
    )?;
    let model = train(
        train_set,
        &search.best,
        &class_weights(train_set)?,
        config.seed,
    )?;
    let report = evaluate(&model, test_set)?;
    Ok(ModelResult {
        search,
        model,
        report,
    })
}

/// Split, optional feature selection, grid search, final fit and test-set
/// evaluation for each model kind.
pub fn train_and_evaluate(
    table: &FeatureTable,
    task: &Task,
    kinds: &[ModelKind],
    config: &RunConfig,
) -> Result<TrainOutcome> {
    let (train_set, test_set, ranking, split) = prepared(table, task, config)?;
    let results = kinds
        .iter()
        .map(|&k| fit_and_score(&train_set, &test_set, k, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrainOutcome {
        task: task.clone(),
        split,
        ranking,
        results,
    })
}

/// Model document written next to its report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub run_config_sha256: String,
    pub task: String,
    pub model: TrainedModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub run_config_sha256: String,
    pub task: String,
    pub model: ModelKind,
    pub hyperparameters: Hyperparameters,
    pub cv_metric: crate::classify::SelectionMetric,
    pub cv_scores: Vec<(Hyperparameters, f64)>,
    pub features: Vec<String>,
    /// How multiclass AUROC is averaged.
    pub auroc_averaging: String,
    pub metrics: MetricsReport,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn write_ranking(path: &Path, ranking: &[(String, f64)], hash: &str) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{HASH_PREFIX}{hash}")?;
    writeln!(out, "rank,feature,importance")?;
    for (i, (name, v)) in ranking.iter().enumerate() {
        writeln!(out, "{},{name},{}", i + 1, crate::fmt_g9(*v))?;
    }
    out.flush()?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(crate::fmt_g9).unwrap_or_default()
}

/// Writes per-model JSON models and reports, the split, the selection ranking
/// and a summary CSV into `out_dir`.
pub fn write_train_outputs(
    out_dir: &Path,
    outcome: &TrainOutcome,
    config: &RunConfig,
) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let hash = config.hash();
    let slug = outcome.task.slug();
    write_json(&out_dir.join(format!("split_{slug}.json")), &outcome.split)?;
    if let Some(r) = &outcome.ranking {
        write_ranking(&out_dir.join(format!("ranking_{slug}.csv")), r, &hash)?;
    }
    let mut summary = std::io::BufWriter::new(std::fs::File::create(
        out_dir.join(format!("summary_{slug}.csv")),
    )?);
    writeln!(summary, "{HASH_PREFIX}{hash}")?;
    writeln!(
        summary,
        "model,accuracy,recall,recall_macro,jaccard,jaccard_standard,auroc"
    )?;
    for r in &outcome.results {
        let kind = r.model.kind;
        write_json(
            &out_dir.join(format!("model_{slug}_{kind}.json")),
            &ModelFile {
                run_config_sha256: hash.clone(),
                task: outcome.task.to_string(),
                model: r.model.clone(),
            },
        )?;
        write_json(
            &out_dir.join(format!("report_{slug}_{kind}.json")),
            &model_report(r, &outcome.task, &hash),
        )?;
        let m = &r.report;
        writeln!(
            summary,
            "{kind},{},{},{},{},{},{}",
            crate::fmt_g9(m.accuracy),
            crate::fmt_g9(m.recall),
            crate::fmt_g9(m.recall_macro),
            crate::fmt_g9(m.jaccard),
            crate::fmt_g9(m.jaccard_standard),
            opt(m.auroc)
        )?;
    }
    summary.flush()?;
    Ok(())
}

fn model_report(r: &ModelResult, task: &Task, hash: &str) -> ModelReport {
    ModelReport {
        run_config_sha256: hash.to_string(),
        task: task.to_string(),
        model: r.model.kind,
        hyperparameters: r.search.best.clone(),
        cv_metric: r.search.metric,
        cv_scores: r.search.scores.clone(),
        features: r.model.feature_names.clone(),
        auroc_averaging: if r.model.labels.len() == 2 {
            "positive class".into()
        } else {
            "one-vs-rest, support-weighted".into()
        },
        metrics: r.report.clone(),
    }
}

/// Scores a saved model on every row of `table` carrying one of its labels.
pub fn evaluate_saved(
    model_path: &Path,
    table: &FeatureTable,
) -> Result<(ModelFile, MetricsReport)> {
    let text = std::fs::read_to_string(model_path).map_err(|e| Error::Ingest {
        path: model_path.to_path_buf(),
        msg: e.to_string(),
    })?;
    let file: ModelFile = serde_json::from_str(&text)?;
    let data = table.to_dataset(&file.model.labels)?;
    let data = data.select_columns(&file.model.feature_names)?;
    let report = evaluate(&file.model, &data)?;
    Ok((file, report))
}

pub fn write_eval_output(
    out_dir: &Path,
    file: &ModelFile,
    report: &MetricsReport,
    config: &RunConfig,
) -> Result<PathBuf> {
    #[derive(Serialize)]
    struct EvalReport<'a> {
        run_config_sha256: String,
        model_run_config_sha256: &'a str,
        task: &'a str,
        model: ModelKind,
        metrics: &'a MetricsReport,
    }
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("eval_{}.json", file.model.kind));
    write_json(
        &path,
        &EvalReport {
            run_config_sha256: config.hash(),
            model_run_config_sha256: &file.run_config_sha256,
            task: &file.task,
            model: file.model.kind,
            metrics: report,
        },
    )?;
    Ok(path)
}

/// Ranking on the training side of the task's split, written to
/// `ranking_<task>.csv`.
pub fn rank(
    table: &FeatureTable,
    task: &Task,
    config: &RunConfig,
    out_dir: &Path,
) -> Result<Vec<(String, f64)>> {
    let data = task.dataset(table, config)?;
    let (train_set, _) = split_train_test(&data, config.test_fraction, config.seed)?;
    let ranking = rank_features(&train_set, config)?;
    std::fs::create_dir_all(out_dir)?;
    write_ranking(
        &out_dir.join(format!("ranking_{}.csv", task.slug())),
        &ranking,
        &config.hash(),
    )?;
    Ok(ranking)
}

/// Test accuracy of `kind` retrained on the top-k training-ranked features,
/// for `k = step, 2 step, ...` and finally all features.
pub fn feature_curve(
    table: &FeatureTable,
    task: &Task,
    kind: ModelKind,
    config: &RunConfig,
) -> Result<Vec<(usize, f64)>> {
    let data = task.dataset(table, config)?;
    let (train_set, test_set) = split_train_test(&data, config.test_fraction, config.seed)?;
    let ranking: Vec<String> = rank_features(&train_set, config)?
        .into_iter()
        .map(|(n, _)| n)
        .collect();
    let n = data.n_features();
    let mut ks: Vec<usize> = (1..)
        .map(|i| i * config.curve_step)
        .take_while(|&k| k < n)
        .collect();
    ks.push(n);
    ks.into_iter()
        .map(|k| {
            let (tr, te) = if k == n {
                (train_set.clone(), test_set.clone())
            } else {
                (
                    select_top_k(&train_set, &ranking, k)?,
                    select_top_k(&test_set, &ranking, k)?,
                )
            };
            Ok((k, fit_and_score(&tr, &te, kind, config)?.report.accuracy))
        })
        .collect()
}

pub fn write_feature_curve(
    out_dir: &Path,
    task: &Task,
    kind: ModelKind,
    curve: &[(usize, f64)],
    config: &RunConfig,
) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("feature_curve_{}_{kind}.csv", task.slug()));
    let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
    writeln!(out, "{HASH_PREFIX}{}", config.hash())?;
    writeln!(out, "k,accuracy")?;
    for (k, a) in curve {
        writeln!(out, "{k},{}", crate::fmt_g9(*a))?;
    }
    out.flush()?;
    Ok(path)
}
