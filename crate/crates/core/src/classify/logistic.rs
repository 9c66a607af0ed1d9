use serde::{Deserialize, Serialize};

use super::Standardizer;

const MAX_EPOCHS: usize = 2000;
const PLATEAU: f64 = 1e-8;

/// Multinomial logistic regression on standardized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub scaler: Standardizer,
    /// One row per class: intercept followed by feature coefficients.
    pub weights: Vec<Vec<f64>>,
}

fn softmax(z: &mut [f64]) {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for v in z.iter_mut() {
        *v = (*v - m).exp();
        s += *v;
    }
    z.iter_mut().for_each(|v| *v /= s);
}

fn scores(weights: &[Vec<f64>], x: &[f64], out: &mut [f64]) {
    for (o, w) in out.iter_mut().zip(weights) {
        *o = w[0] + w[1..].iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

struct Objective<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    sample_weight: Vec<f64>,
    /// Coefficient of `|W|^2 / 2` (intercepts excluded).
    penalty: f64,
}

impl Objective<'_> {
    fn loss(&self, w: &[Vec<f64>]) -> f64 {
        let mut z = vec![0.0; w.len()];
        let mut total = 0.0;
        for ((x, &y), &sw) in self.x.iter().zip(self.y).zip(&self.sample_weight) {
            scores(w, x, &mut z);
            let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
            total += sw * (lse - z[y]);
        }
        total + 0.5 * self.penalty * w.iter().flat_map(|r| &r[1..]).map(|v| v * v).sum::<f64>()
    }

    fn gradient(&self, w: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut g: Vec<Vec<f64>> = w
            .iter()
            .map(|r| {
                let mut row = vec![0.0];
                row.extend(r[1..].iter().map(|v| self.penalty * v));
                row
            })
            .collect();
        let mut p = vec![0.0; w.len()];
        for ((x, &y), &sw) in self.x.iter().zip(self.y).zip(&self.sample_weight) {
            scores(w, x, &mut p);
            softmax(&mut p);
            for (c, row) in g.iter_mut().enumerate() {
                let r = sw * (p[c] - if c == y { 1.0 } else { 0.0 });
                row[0] += r;
                for (gj, xj) in row[1..].iter_mut().zip(x) {
                    *gj += r * xj;
                }
            }
        }
        g
    }
}

impl LogisticModel {
    /// Full-batch gradient descent on the class-weighted mean cross entropy
    /// plus `|W|^2 / (2 C sum_w)`. The step halves whenever a trial step would
    /// raise the loss, so the returned loss history is non-increasing.
    pub fn fit(
        x: &[&[f64]],
        y: &[usize],
        n_classes: usize,
        class_weights: &[f64],
        c: f64,
    ) -> (Self, Vec<f64>) {
        let scaler = Standardizer::fit(x);
        let xs: Vec<Vec<f64>> = x.iter().map(|r| scaler.transform(r)).collect();
        let total: f64 = y.iter().map(|&t| class_weights[t]).sum();
        let objective = Objective {
            x: &xs,
            y,
            sample_weight: y.iter().map(|&t| class_weights[t] / total).collect(),
            penalty: 1.0 / (c * total),
        };
        let d = scaler.mean.len();
        let mut w = vec![vec![0.0; d + 1]; n_classes];
        let mut loss = objective.loss(&w);
        let mut history = vec![loss];
        let mut step = 1.0;
        for _ in 0..MAX_EPOCHS {
            let g = objective.gradient(&w);
            let mut accepted = None;
            for _ in 0..40 {
                let trial: Vec<Vec<f64>> = w
                    .iter()
                    .zip(&g)
                    .map(|(r, gr)| r.iter().zip(gr).map(|(a, b)| a - step * b).collect())
                    .collect();
                let l = objective.loss(&trial);
                if l <= loss {
                    accepted = Some((trial, l));
                    break;
                }
                step *= 0.5;
            }
            let Some((trial, l)) = accepted else { break };
            let decrease = loss - l;
            w = trial;
            loss = l;
            history.push(loss);
            step *= 1.25;
            if decrease < PLATEAU {
                break;
            }
        }
        (Self { scaler, weights: w }, history)
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let xs = self.scaler.transform(x);
        let mut p = vec![0.0; self.weights.len()];
        scores(&self.weights, &xs, &mut p);
        softmax(&mut p);
        p
    }
}
