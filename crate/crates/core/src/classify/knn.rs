use serde::{Deserialize, Serialize};

use super::Standardizer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KnnWeights {
    Uniform,
    /// Votes scaled by inverse distance; exact matches take all the weight.
    Distance,
}

/// Nearest-neighbor store over standardized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub scaler: Standardizer,
    pub points: Vec<Vec<f64>>,
    pub targets: Vec<usize>,
    pub n_classes: usize,
    pub class_weights: Vec<f64>,
    pub k: usize,
    pub weights: KnnWeights,
    /// Minkowski exponent, 1 or 2.
    pub p: u32,
}

impl KnnModel {
    pub fn fit(
        x: &[&[f64]],
        y: &[usize],
        n_classes: usize,
        class_weights: &[f64],
        k: usize,
        weights: KnnWeights,
        p: u32,
    ) -> Self {
        let scaler = Standardizer::fit(x);
        Self {
            points: x.iter().map(|r| scaler.transform(r)).collect(),
            scaler,
            targets: y.to_vec(),
            n_classes,
            class_weights: class_weights.to_vec(),
            k,
            weights,
            p,
        }
    }

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        if self.p == 1 {
            diffs.sum()
        } else {
            diffs.map(|d| d * d).sum::<f64>().sqrt()
        }
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let q = self.scaler.transform(x);
        let mut order: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (self.distance(&q, p), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let nearest = &order[..self.k.min(order.len())];
        let exact = nearest.iter().any(|&(d, _)| d == 0.0);
        let mut votes = vec![0.0; self.n_classes];
        for &(d, i) in nearest {
            let w = match self.weights {
                KnnWeights::Uniform => 1.0,
                KnnWeights::Distance if exact => f64::from(u8::from(d == 0.0)),
                KnnWeights::Distance => 1.0 / d,
            };
            let t = self.targets[i];
            votes[t] += w * self.class_weights[t];
        }
        let s: f64 = votes.iter().sum();
        if s > 0.0 {
            votes.iter_mut().for_each(|v| *v /= s);
        } else {
            votes
                .iter_mut()
                .for_each(|v| *v = 1.0 / self.n_classes as f64);
        }
        votes
    }
}
