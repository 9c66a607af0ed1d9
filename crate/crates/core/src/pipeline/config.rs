use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::classify::{
    BoostParams, ForestParams, Hyperparameters, KnnWeights, MaxFeatures, ModelKind, TreeParams,
};
use crate::distortion::{DistortionConfig, DistortionMeasure};
use crate::error::{Error, Result};
use crate::flatten::{BlockStrategy, BoundaryMode};
use crate::signal::{MfccConfig, PowerScale, WindowKind};

/// Hyperparameter value lists; each kind's grid is their cross product.
#[derive(Debug, Clone, PartialEq)]
pub struct Grids {
    pub lr_c: Vec<f64>,
    pub knn_k: Vec<usize>,
    pub knn_weights: Vec<KnnWeights>,
    pub knn_p: Vec<u32>,
    pub rf_n_estimators: Vec<usize>,
    pub rf_max_depth: Vec<Option<usize>>,
    pub rf_min_samples_split: Vec<usize>,
    pub rf_bootstrap: Vec<bool>,
    pub ada_n_estimators: Vec<usize>,
    pub ada_learning_rate: Vec<f64>,
    pub ada_max_depth: Vec<usize>,
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            lr_c: (-3..=3).map(|e| 10f64.powi(e)).collect(),
            knn_k: vec![3, 5, 7, 11, 41],
            knn_weights: vec![KnnWeights::Uniform, KnnWeights::Distance],
            knn_p: vec![1, 2],
            rf_n_estimators: vec![100, 150, 200, 300],
            rf_max_depth: vec![Some(10), Some(30), None],
            rf_min_samples_split: vec![2, 5, 10],
            rf_bootstrap: vec![true, false],
            ada_n_estimators: vec![50, 100, 150, 200],
            ada_learning_rate: (-3..=0).map(|e| 10f64.powi(e)).collect(),
            ada_max_depth: vec![1],
        }
    }
}

impl Grids {
    pub fn grid(&self, kind: ModelKind) -> Vec<Hyperparameters> {
        let mut g = Vec::new();
        match kind {
            ModelKind::Lr => g.extend(self.lr_c.iter().map(|&c| Hyperparameters::Lr { c })),
            ModelKind::Knn => {
                for &k in &self.knn_k {
                    for &weights in &self.knn_weights {
                        for &p in &self.knn_p {
                            g.push(Hyperparameters::Knn { k, weights, p });
                        }
                    }
                }
            }
            ModelKind::Rf => {
                for &n_estimators in &self.rf_n_estimators {
                    for &max_depth in &self.rf_max_depth {
                        for &min_samples_split in &self.rf_min_samples_split {
                            for &bootstrap in &self.rf_bootstrap {
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
            }
            ModelKind::AdaBoost => {
                for &n_estimators in &self.ada_n_estimators {
                    for &learning_rate in &self.ada_learning_rate {
                        for &max_depth in &self.ada_max_depth {
                            g.push(Hyperparameters::AdaBoost(BoostParams {
                                n_estimators,
                                learning_rate,
                                max_depth,
                            }));
                        }
                    }
                }
            }
        }
        g
    }
}

/// Every tunable of a run. Serialized as flat `key = value` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    /// Extraction threads; 0 uses all cores. Not part of the hash.
    pub workers: usize,
    pub distortion: DistortionConfig,
    pub mfcc: MfccConfig,
    pub classes: Vec<String>,
    pub excluded: Vec<String>,
    pub healthy_label: String,
    pub test_fraction: f64,
    pub cv_folds: usize,
    pub select_k: usize,
    /// Trees in the forest used to rank features for selection.
    pub ranking_trees: usize,
    pub curve_step: usize,
    pub grids: Grids,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            workers: 0,
            distortion: DistortionConfig::default(),
            mfcc: MfccConfig::default(),
            classes: [
                "Healthy",
                "COPD",
                "URTI",
                "Bronchiectasis",
                "Pneumonia",
                "Bronchiolitis",
            ]
            .map(String::from)
            .to_vec(),
            excluded: vec!["Asthma".into(), "LRTI".into()],
            healthy_label: "Healthy".into(),
            test_fraction: 0.2,
            cv_folds: 5,
            select_k: 45,
            ranking_trees: 300,
            curve_step: 5,
            grids: Grids::default(),
        }
    }
}

fn list<T: Display>(v: &[T]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_list<T>(key: &str, value: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect::<Result<Vec<_>>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("{key}: empty list")));
    }
    Ok(items)
}

fn window_name(w: WindowKind) -> &'static str {
    match w {
        WindowKind::Hann => "hann",
        WindowKind::Rectangular => "rectangular",
    }
}

fn scale_name(s: PowerScale) -> &'static str {
    match s {
        PowerScale::Decibel => "decibel",
        PowerScale::Linear => "linear",
    }
}

fn knn_weights_name(w: KnnWeights) -> &'static str {
    match w {
        KnnWeights::Uniform => "uniform",
        KnnWeights::Distance => "distance",
    }
}

fn depth_name(d: Option<usize>) -> String {
    d.map_or_else(|| "none".into(), |d| d.to_string())
}

impl RunConfig {
    /// `(key, value)` pairs of every hashed setting, in file order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let d = &self.distortion;
        let s = &d.solver;
        let g = &self.grids;
        vec![
            ("seed", self.seed.to_string()),
            ("savgol.half_width", d.savgol_half_width.to_string()),
            ("savgol.degree", d.savgol_degree.to_string()),
            ("stft.window_len", d.spectrogram.window_len.to_string()),
            ("stft.hop", d.spectrogram.hop.to_string()),
            ("stft.db_floor", d.spectrogram.db_floor.to_string()),
            ("stft.window", window_name(d.spectrogram.window).into()),
            ("stft.scale", scale_name(d.spectrogram.scale).into()),
            ("mesh.grid_n", d.grid_n.to_string()),
            ("solver.energy", s.energy.to_string()),
            ("solver.max_iters", s.max_iters.to_string()),
            ("solver.tol", s.tol.to_string()),
            (
                "solver.boundary",
                match s.boundary {
                    BoundaryMode::Free => "free",
                    BoundaryMode::Fixed => "fixed",
                }
                .into(),
            ),
            (
                "solver.strategy",
                match s.strategy {
                    BlockStrategy::Global => "global",
                    BlockStrategy::SingleVertex => "vertex",
                }
                .into(),
            ),
            ("solver.step_fraction", s.step_fraction.to_string()),
            ("mfcc.n_mels", self.mfcc.n_mels.to_string()),
            ("mfcc.window_len", self.mfcc.window_len.to_string()),
            ("mfcc.hop", self.mfcc.hop.to_string()),
            ("classes", list(&self.classes)),
            ("exclude", list(&self.excluded)),
            ("healthy_label", self.healthy_label.clone()),
            ("split.test_fraction", self.test_fraction.to_string()),
            ("cv.folds", self.cv_folds.to_string()),
            ("select.k", self.select_k.to_string()),
            ("select.ranking_trees", self.ranking_trees.to_string()),
            ("curve.step", self.curve_step.to_string()),
            ("grid.lr.c", list(&g.lr_c)),
            ("grid.knn.k", list(&g.knn_k)),
            (
                "grid.knn.weights",
                g.knn_weights
                    .iter()
                    .map(|&w| knn_weights_name(w))
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("grid.knn.p", list(&g.knn_p)),
            ("grid.rf.n_estimators", list(&g.rf_n_estimators)),
            (
                "grid.rf.max_depth",
                g.rf_max_depth
                    .iter()
                    .map(|&d| depth_name(d))
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("grid.rf.min_samples_split", list(&g.rf_min_samples_split)),
            ("grid.rf.bootstrap", list(&g.rf_bootstrap)),
            ("grid.ada.n_estimators", list(&g.ada_n_estimators)),
            ("grid.ada.learning_rate", list(&g.ada_learning_rate)),
            ("grid.ada.max_depth", list(&g.ada_max_depth)),
        ]
    }

    /// Canonical text form; `workers` is appended after the hashed settings.
    pub fn to_text(&self) -> String {
        let mut out = self.hashed_text();
        out.push_str(&format!("workers = {}\n", self.workers));
        out
    }

    fn hashed_text(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// SHA-256 of the canonical text of every hashed setting, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.hashed_text().as_bytes()))
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let d = &mut self.distortion;
        let g = &mut self.grids;
        let v = value.trim();
        match key {
            "seed" => self.seed = parse(key, v)?,
            "workers" => self.workers = parse(key, v)?,
            "savgol.half_width" => d.savgol_half_width = parse(key, v)?,
            "savgol.degree" => d.savgol_degree = parse(key, v)?,
            "stft.window_len" => d.spectrogram.window_len = parse(key, v)?,
            "stft.hop" => d.spectrogram.hop = parse(key, v)?,
            "stft.db_floor" => d.spectrogram.db_floor = parse(key, v)?,
            "stft.window" => {
                d.spectrogram.window = match v {
                    "hann" => WindowKind::Hann,
                    "rectangular" => WindowKind::Rectangular,
                    _ => return Err(Error::Config(format!("{key}: unknown window {v:?}"))),
                }
            }
            "stft.scale" => {
                d.spectrogram.scale = match v {
                    "decibel" => PowerScale::Decibel,
                    "linear" => PowerScale::Linear,
                    _ => return Err(Error::Config(format!("{key}: unknown scale {v:?}"))),
                }
            }
            "mesh.grid_n" => d.grid_n = parse(key, v)?,
            "solver.energy" => {
                d.solver.energy = v
                    .parse::<DistortionMeasure>()
                    .map_err(|e| Error::Config(format!("{key}: {e}")))?
            }
            "solver.max_iters" => d.solver.max_iters = parse(key, v)?,
            "solver.tol" => d.solver.tol = parse(key, v)?,
            "solver.boundary" => {
                d.solver.boundary = match v {
                    "free" => BoundaryMode::Free,
                    "fixed" => BoundaryMode::Fixed,
                    _ => return Err(Error::Config(format!("{key}: unknown mode {v:?}"))),
                }
            }
            "solver.strategy" => {
                d.solver.strategy = match v {
                    "global" => BlockStrategy::Global,
                    "vertex" => BlockStrategy::SingleVertex,
                    _ => return Err(Error::Config(format!("{key}: unknown strategy {v:?}"))),
                }
            }
            "solver.step_fraction" => d.solver.step_fraction = parse(key, v)?,
            "mfcc.n_mels" => self.mfcc.n_mels = parse(key, v)?,
            "mfcc.window_len" => self.mfcc.window_len = parse(key, v)?,
            "mfcc.hop" => self.mfcc.hop = parse(key, v)?,
            "classes" => self.classes = parse_list(key, v, |s| Ok(s.to_string()))?,
            "exclude" => {
                self.excluded = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            }
            "healthy_label" => self.healthy_label = v.to_string(),
            "split.test_fraction" => self.test_fraction = parse(key, v)?,
            "cv.folds" => self.cv_folds = parse(key, v)?,
            "select.k" => self.select_k = parse(key, v)?,
            "select.ranking_trees" => self.ranking_trees = parse(key, v)?,
            "curve.step" => self.curve_step = parse(key, v)?,
            "grid.lr.c" => g.lr_c = parse_list(key, v, |s| parse(key, s))?,
            "grid.knn.k" => g.knn_k = parse_list(key, v, |s| parse(key, s))?,
            "grid.knn.weights" => {
                g.knn_weights = parse_list(key, v, |s| match s {
                    "uniform" => Ok(KnnWeights::Uniform),
                    "distance" => Ok(KnnWeights::Distance),
                    _ => Err(Error::Config(format!("{key}: unknown weighting {s:?}"))),
                })?
            }
            "grid.knn.p" => g.knn_p = parse_list(key, v, |s| parse(key, s))?,
            "grid.rf.n_estimators" => g.rf_n_estimators = parse_list(key, v, |s| parse(key, s))?,
            "grid.rf.max_depth" => {
                g.rf_max_depth = parse_list(key, v, |s| {
                    if s == "none" {
                        Ok(None)
                    } else {
                        parse(key, s).map(Some)
                    }
                })?
            }
            "grid.rf.min_samples_split" => {
                g.rf_min_samples_split = parse_list(key, v, |s| parse(key, s))?
            }
            "grid.rf.bootstrap" => g.rf_bootstrap = parse_list(key, v, |s| parse(key, s))?,
            "grid.ada.n_estimators" => g.ada_n_estimators = parse_list(key, v, |s| parse(key, s))?,
            "grid.ada.learning_rate" => {
                g.ada_learning_rate = parse_list(key, v, |s| parse(key, s))?
            }
            "grid.ada.max_depth" => g.ada_max_depth = parse_list(key, v, |s| parse(key, s))?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Defaults overridden by the `key = value` lines of `text`. Blank lines
    /// and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!(
                    "line {}: duplicate key {key:?}",
                    n + 1
                )));
            }
            config.set(key, value).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("line {}: {m}", n + 1)),
                e => Error::Config(format!("line {}: {e}", n + 1)),
            })?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.distortion;
        let s = &d.solver;
        let checks: [(bool, &str); 14] = [
            (
                d.savgol_degree < 2 * d.savgol_half_width + 1,
                "savgol.degree must be below the window width",
            ),
            (
                d.spectrogram.window_len >= 2,
                "stft.window_len must be at least 2",
            ),
            (d.spectrogram.hop >= 1, "stft.hop must be positive"),
            (
                d.spectrogram.db_floor < 0.0,
                "stft.db_floor must be negative",
            ),
            (d.grid_n >= 2, "mesh.grid_n must be at least 2"),
            (
                s.tol >= 0.0 && s.tol.is_finite(),
                "solver.tol must be non-negative",
            ),
            (
                s.step_fraction > 0.0 && s.step_fraction < 1.0,
                "solver.step_fraction must lie in (0, 1)",
            ),
            (
                self.mfcc.hop >= 1 && self.mfcc.window_len >= 2,
                "mfcc window and hop must be positive",
            ),
            (self.classes.len() >= 2, "classes needs at least two labels"),
            (
                self.classes.contains(&self.healthy_label),
                "healthy_label must be one of classes",
            ),
            (
                self.test_fraction > 0.0 && self.test_fraction < 1.0,
                "split.test_fraction must lie in (0, 1)",
            ),
            (self.cv_folds >= 2, "cv.folds must be at least 2"),
            (
                self.select_k >= 1 && self.ranking_trees >= 1,
                "select.k and select.ranking_trees must be positive",
            ),
            (self.curve_step >= 1, "curve.step must be positive"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::Config(msg.into()));
            }
        }
        if self.classes.iter().any(|c| self.excluded.contains(c)) {
            return Err(Error::Config("a label is both a class and excluded".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::default_grid;

    #[test]
    fn text_round_trip_and_hash() {
        let mut c = RunConfig::default();
        c.seed = 7;
        c.grids.rf_max_depth = vec![None, Some(4)];
        c.distortion.solver.tol = 1e-9;
        let back = RunConfig::parse(&c.to_text()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        let mut w = c.clone();
        w.workers = 3;
        assert_eq!(w.hash(), c.hash());
        assert_ne!(RunConfig::default().hash(), c.hash());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn bad_lines_are_config_errors() {
        for text in [
            "nonsense",
            "bogus = 1",
            "seed = x",
            "seed = 1\nseed = 2",
            "cv.folds = 1",
        ] {
            assert!(
                matches!(RunConfig::parse(text), Err(Error::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn default_grids_match_classifier_defaults() {
        let g = Grids::default();
        for kind in ModelKind::ALL {
            assert_eq!(g.grid(kind), default_grid(kind));
        }
    }
}
