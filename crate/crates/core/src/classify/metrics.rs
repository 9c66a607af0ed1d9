use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary confusion counts for one positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryCounts {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl BinaryCounts {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    /// `TP / (TP + FN)`; zero when there are no positives.
    pub fn recall(&self) -> f64 {
        let p = self.tp + self.fn_;
        if p == 0 {
            0.0
        } else {
            self.tp as f64 / p as f64
        }
    }

    /// `(TP + TN) / (2 (P + N) - (TP + TN))`.
    pub fn agreement_jaccard(&self) -> f64 {
        let hits = (self.tp + self.tn) as f64;
        hits / (2.0 * self.total() as f64 - hits)
    }

    /// `TP / (TP + FP + FN)`; zero when all three are zero.
    pub fn standard_jaccard(&self) -> f64 {
        let d = self.tp + self.fp + self.fn_;
        if d == 0 {
            0.0
        } else {
            self.tp as f64 / d as f64
        }
    }
}

/// Area under the ROC curve from average ranks; tied scores count one half.
/// `None` unless both classes are present.
pub fn auroc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1..=j+1 averaged.
        let avg = (i + j + 2) as f64 / 2.0;
        rank_sum += avg * order[i..=j].iter().filter(|&&k| positive[k]).count() as f64;
        i = j + 1;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub labels: Vec<String>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub accuracy: f64,
    /// Binary: recall of the positive class. Multiclass: support-weighted.
    pub recall: f64,
    pub recall_macro: f64,
    /// Binary: printed formula. Multiclass: one-vs-rest, support-weighted.
    pub jaccard: f64,
    pub jaccard_standard: f64,
    /// Binary: positive-class score. Multiclass: one-vs-rest, support-weighted.
    pub auroc: Option<f64>,
}

impl MetricsReport {
    pub fn n(&self) -> usize {
        self.confusion.iter().flatten().sum()
    }

    /// One-vs-rest counts for class `c`.
    pub fn counts(&self, c: usize) -> BinaryCounts {
        let k = self.labels.len();
        let tp = self.confusion[c][c];
        let fn_: usize = (0..k)
            .filter(|&j| j != c)
            .map(|j| self.confusion[c][j])
            .sum();
        let fp: usize = (0..k)
            .filter(|&i| i != c)
            .map(|i| self.confusion[i][c])
            .sum();
        BinaryCounts {
            tp,
            tn: self.n() - tp - fn_ - fp,
            fp,
            fn_,
        }
    }

    /// Reports from true classes and per-row class probabilities.
    pub fn from_probabilities(
        labels: &[String],
        truth: &[usize],
        proba: &[Vec<f64>],
    ) -> Result<Self> {
        let k = labels.len();
        if truth.len() != proba.len() || truth.is_empty() {
            return Err(Error::Parameter(
                "need one probability row per true label".into(),
            ));
        }
        let mut confusion = vec![vec![0usize; k]; k];
        for (&t, p) in truth.iter().zip(proba) {
            if t >= k || p.len() != k {
                return Err(Error::Label(format!("class index {t} outside {k} classes")));
            }
            confusion[t][super::tree::argmax(p)] += 1;
        }
        let mut report = Self {
            labels: labels.to_vec(),
            confusion,
            accuracy: 0.0,
            recall: 0.0,
            recall_macro: 0.0,
            jaccard: 0.0,
            jaccard_standard: 0.0,
            auroc: None,
        };
        let n = truth.len() as f64;
        report.accuracy = (0..k).map(|c| report.confusion[c][c]).sum::<usize>() as f64 / n;
        if k == 2 {
            let c = report.counts(1);
            report.recall = c.recall();
            report.recall_macro = (c.recall() + report.counts(0).recall()) / 2.0;
            report.jaccard = c.agreement_jaccard();
            report.jaccard_standard = c.standard_jaccard();
            let scores: Vec<f64> = proba.iter().map(|p| p[1]).collect();
            let pos: Vec<bool> = truth.iter().map(|&t| t == 1).collect();
            report.auroc = auroc(&scores, &pos);
        } else {
            let support: Vec<f64> = (0..k)
                .map(|c| report.confusion[c].iter().sum::<usize>() as f64)
                .collect();
            let present = support.iter().filter(|&&s| s > 0.0).count() as f64;
            let mut auc_num = 0.0;
            let mut auc_den = 0.0;
            for c in 0..k {
                let counts = report.counts(c);
                let w = support[c] / n;
                report.recall += w * counts.recall();
                if support[c] > 0.0 {
                    report.recall_macro += counts.recall() / present;
                }
                report.jaccard += w * counts.agreement_jaccard();
                report.jaccard_standard += w * counts.standard_jaccard();
                let scores: Vec<f64> = proba.iter().map(|p| p[c]).collect();
                let pos: Vec<bool> = truth.iter().map(|&t| t == c).collect();
                if let Some(a) = auroc(&scores, &pos) {
                    auc_num += support[c] * a;
                    auc_den += support[c];
                }
            }
            report.auroc = (auc_den > 0.0).then(|| auc_num / auc_den);
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_example() {
        let c = BinaryCounts {
            tp: 8,
            tn: 2,
            fp: 1,
            fn_: 1,
        };
        assert_eq!(c.accuracy(), 10.0 / 12.0);
        assert_eq!(c.recall(), 8.0 / 9.0);
        assert_eq!(c.agreement_jaccard(), 10.0 / 14.0);
        assert_eq!(c.standard_jaccard(), 0.8);
    }

    #[test]
    fn perfect_and_tied_ranking() {
        assert_eq!(auroc(&[0.9, 0.8, 0.3], &[true, true, false]), Some(1.0));
        assert_eq!(auroc(&[0.5, 0.5], &[true, false]), Some(0.5));
        assert_eq!(auroc(&[0.5, 0.2], &[true, true]), None);
    }
}
