use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One labeled recording's feature row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub recording_id: String,
    pub patient_id: String,
    pub label: String,
    pub features: Vec<f64>,
}

/// Feature rows sharing one column layout and an ordered label set.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    labels: Vec<String>,
    rows: Vec<Sample>,
    targets: Vec<usize>,
}

impl Dataset {
    /// Label set is the sorted set of labels present.
    pub fn new(feature_names: Vec<String>, rows: Vec<Sample>) -> Result<Self> {
        let labels: Vec<String> = rows
            .iter()
            .map(|r| r.label.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Self::with_labels(feature_names, rows, labels)
    }

    pub fn with_labels(
        feature_names: Vec<String>,
        rows: Vec<Sample>,
        labels: Vec<String>,
    ) -> Result<Self> {
        if labels.iter().collect::<BTreeSet<_>>().len() != labels.len() {
            return Err(Error::Parameter("duplicate class label".into()));
        }
        let index: HashMap<&str, usize> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let mut targets = Vec::with_capacity(rows.len());
        for r in &rows {
            if r.features.len() != feature_names.len() {
                return Err(Error::Schema(format!(
                    "row {} has {} features, expected {}",
                    r.recording_id,
                    r.features.len(),
                    feature_names.len()
                )));
            }
            if r.features.iter().any(|x| !x.is_finite()) {
                return Err(Error::Data(format!(
                    "row {} has a non-finite feature",
                    r.recording_id
                )));
            }
            targets.push(*index.get(r.label.as_str()).ok_or_else(|| {
                Error::Label(format!("label {:?} not in the class list", r.label))
            })?);
        }
        let present: BTreeSet<usize> = targets.iter().copied().collect();
        if present.len() < 2 {
            return Err(Error::Training("dataset needs at least two classes".into()));
        }
        Ok(Self {
            feature_names,
            labels,
            rows,
            targets,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Ordered class list; class `i` is `labels()[i]`.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rows(&self) -> &[Sample] {
        &self.rows
    }

    /// Class index of each row.
    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn features(&self) -> Vec<&[f64]> {
        self.rows.iter().map(|r| r.features.as_slice()).collect()
    }

    /// Rows at `indices`, keeping the label set. Does not require two classes.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            feature_names: self.feature_names.clone(),
            labels: self.labels.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            targets: indices.iter().map(|&i| self.targets[i]).collect(),
        }
    }

    /// Keeps `negative` and `positive` rows, relabeled so the positive class is index 1.
    pub fn binary(&self, positive: &str, negative: &str) -> Result<Self> {
        let rows: Vec<Sample> = self
            .rows
            .iter()
            .filter(|r| r.label == positive || r.label == negative)
            .cloned()
            .collect();
        Self::with_labels(
            self.feature_names.clone(),
            rows,
            vec![negative.to_string(), positive.to_string()],
        )
    }

    /// Columns reordered and restricted to `names`.
    pub fn select_columns(&self, names: &[String]) -> Result<Self> {
        let position: HashMap<&str, usize> = self
            .feature_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let cols: Vec<usize> = names
            .iter()
            .map(|n| {
                position
                    .get(n.as_str())
                    .copied()
                    .ok_or_else(|| Error::Parameter(format!("unknown feature {n:?}")))
            })
            .collect::<Result<_>>()?;
        let rows = self
            .rows
            .iter()
            .map(|r| Sample {
                features: cols.iter().map(|&c| r.features[c]).collect(),
                ..r.clone()
            })
            .collect();
        Ok(Self {
            feature_names: names.to_vec(),
            labels: self.labels.clone(),
            rows,
            targets: self.targets.clone(),
        })
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &t in &self.targets {
            counts[t] += 1;
        }
        counts
    }

    /// Each patient's most frequent class, ties going to the lower class
    /// index, with the row indices of that patient. Sorted by patient id.
    pub fn patients(&self) -> BTreeMap<String, (usize, Vec<usize>)> {
        let mut rows_of: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, r) in self.rows.iter().enumerate() {
            rows_of.entry(r.patient_id.clone()).or_default().push(i);
        }
        rows_of
            .into_iter()
            .map(|(p, idx)| {
                let mut counts = vec![0usize; self.n_classes()];
                for &i in &idx {
                    counts[self.targets[i]] += 1;
                }
                let best = (0..counts.len())
                    .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
                    .expect("non-empty label set");
                (p, (best, idx))
            })
            .collect()
    }
}

/// `total / (n_classes * count_c)` for each class.
pub fn class_weights(train: &Dataset) -> Result<Vec<f64>> {
    let counts = train.class_counts();
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::Parameter(format!(
            "class {:?} has no training rows",
            train.labels()[c]
        )));
    }
    let total = train.len() as f64;
    let k = counts.len() as f64;
    Ok(counts.iter().map(|&n| total / (k * n as f64)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(labels: &[&str]) -> Dataset {
        let rows = labels
            .iter()
            .enumerate()
            .map(|(i, l)| Sample {
                recording_id: format!("r{i}"),
                patient_id: format!("p{}", i / 2),
                label: l.to_string(),
                features: vec![i as f64],
            })
            .collect();
        Dataset::new(vec!["x".into()], rows).unwrap()
    }

    #[test]
    fn weights_follow_formula() {
        let mut labels = vec!["A"; 75];
        labels.extend(vec!["B"; 25]);
        let w = class_weights(&toy(&labels)).unwrap();
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(w[1], 2.0);
        let balanced = class_weights(&toy(&["A", "B", "A", "B"])).unwrap();
        assert_eq!(balanced, vec![1.0, 1.0]);
    }

    #[test]
    fn single_class_is_rejected() {
        let rows = vec![Sample {
            recording_id: "r".into(),
            patient_id: "p".into(),
            label: "A".into(),
            features: vec![1.0],
        }];
        assert!(Dataset::new(vec!["x".into()], rows).is_err());
    }

    #[test]
    fn binary_relabels_positive_as_one() {
        let d = toy(&["Healthy", "COPD", "URTI", "Healthy"]);
        let b = d.binary("COPD", "Healthy").unwrap();
        assert_eq!(b.labels(), ["Healthy", "COPD"]);
        assert_eq!(b.targets(), [0, 1, 0]);
    }
}
