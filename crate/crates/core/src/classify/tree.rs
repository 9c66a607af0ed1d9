use rand::seq::index::sample;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    All,
    /// `floor(sqrt(d))` candidate features per node, at least one.
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            max_features: MaxFeatures::All,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Node {
    Leaf {
        proba: Vec<f64>,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// CART classifier with weighted Gini impurity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    /// Total weighted impurity decrease per feature.
    pub importance: Vec<f64>,
}

fn gini(class_w: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - class_w.iter().map(|w| (w / total).powi(2)).sum::<f64>()
}

struct Builder<'a> {
    x: &'a [&'a [f64]],
    y: &'a [usize],
    w: &'a [f64],
    n_classes: usize,
    params: TreeParams,
    nodes: Vec<Node>,
    importance: Vec<f64>,
}

impl Builder<'_> {
    fn class_weights(&self, idx: &[usize]) -> Vec<f64> {
        let mut cw = vec![0.0; self.n_classes];
        for &i in idx {
            cw[self.y[i]] += self.w[i];
        }
        cw
    }

    fn build(&mut self, idx: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let cw = self.class_weights(&idx);
        let total: f64 = cw.iter().sum();
        let impurity = gini(&cw, total);
        let id = self.nodes.len();
        let leaf = Node::Leaf {
            proba: if total > 0.0 {
                cw.iter().map(|w| w / total).collect()
            } else {
                vec![1.0 / self.n_classes as f64; self.n_classes]
            },
        };
        self.nodes.push(leaf);
        if impurity <= 0.0
            || idx.len() < self.params.min_samples_split.max(2)
            || self.params.max_depth.is_some_and(|d| depth >= d)
        {
            return id;
        }
        let Some((feature, threshold, decrease)) = self.best_split(&idx, &cw, total, impurity, rng)
        else {
            return id;
        };
        self.importance[feature] += decrease;
        let (l, r): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| self.x[i][feature] <= threshold);
        let left = self.build(l, depth + 1, rng);
        let right = self.build(r, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }

    fn best_split(
        &self,
        idx: &[usize],
        cw: &[f64],
        total: f64,
        impurity: f64,
        rng: &mut ChaCha8Rng,
    ) -> Option<(usize, f64, f64)> {
        let d = self.importance.len();
        let candidates: Vec<usize> = match self.params.max_features {
            MaxFeatures::All => (0..d).collect(),
            MaxFeatures::Sqrt => {
                let m = ((d as f64).sqrt().floor() as usize).clamp(1, d);
                let mut c = sample(rng, d, m).into_vec();
                c.sort_unstable();
                c
            }
        };
        let parent = total * impurity;
        let mut best: Option<(usize, f64, f64)> = None;
        let mut order = idx.to_vec();
        for f in candidates {
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let mut left = vec![0.0; self.n_classes];
            let mut left_total = 0.0;
            for k in 0..order.len() - 1 {
                let i = order[k];
                left[self.y[i]] += self.w[i];
                left_total += self.w[i];
                let (a, b) = (self.x[i][f], self.x[order[k + 1]][f]);
                if a == b {
                    continue;
                }
                let right: Vec<f64> = cw.iter().zip(&left).map(|(c, l)| c - l).collect();
                let right_total = total - left_total;
                let decrease = parent
                    - left_total * gini(&left, left_total)
                    - right_total * gini(&right, right_total);
                if decrease > 1e-12 * parent && best.is_none_or(|(_, _, d)| decrease > d) {
                    let mid = a + (b - a) / 2.0;
                    let threshold = if mid < b { mid } else { a };
                    best = Some((f, threshold, decrease));
                }
            }
        }
        best
    }
}

impl DecisionTree {
    /// Rows with zero weight are ignored.
    pub fn fit(
        x: &[&[f64]],
        y: &[usize],
        sample_weight: &[f64],
        n_classes: usize,
        params: TreeParams,
        seed: u64,
    ) -> Self {
        let d = x.first().map_or(0, |r| r.len());
        let mut builder = Builder {
            x,
            y,
            w: sample_weight,
            n_classes,
            params,
            nodes: Vec::new(),
            importance: vec![0.0; d],
        };
        let idx: Vec<usize> = (0..x.len()).filter(|&i| sample_weight[i] > 0.0).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        builder.build(idx, 0, &mut rng);
        Self {
            nodes: builder.nodes,
            importance: builder.importance,
        }
    }

    pub fn predict_proba(&self, x: &[f64]) -> &[f64] {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { proba } => return proba,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    id = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(self.predict_proba(x))
    }
}

pub(crate) fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub tree: TreeParams,
    pub bootstrap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
    pub n_classes: usize,
}

impl RandomForest {
    pub fn fit(
        x: &[&[f64]],
        y: &[usize],
        n_classes: usize,
        class_weights: &[f64],
        params: ForestParams,
        seed: u64,
    ) -> Self {
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let seeds: Vec<u64> = (0..params.n_estimators)
            .map(|_| master.next_u64())
            .collect();
        let n = x.len();
        let trees = seeds
            .into_par_iter()
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let mut weight: Vec<f64> = y.iter().map(|&t| class_weights[t]).collect();
                if params.bootstrap {
                    let mut count = vec![0u32; n];
                    for _ in 0..n {
                        count[rng.gen_range(0..n)] += 1;
                    }
                    weight
                        .iter_mut()
                        .zip(&count)
                        .for_each(|(w, &c)| *w *= f64::from(c));
                }
                DecisionTree::fit(x, y, &weight, n_classes, params.tree, rng.next_u64())
            })
            .collect();
        Self { trees, n_classes }
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.n_classes];
        for t in &self.trees {
            for (a, b) in p.iter_mut().zip(t.predict_proba(x)) {
                *a += b;
            }
        }
        let n = self.trees.len() as f64;
        p.iter_mut().for_each(|v| *v /= n);
        p
    }

    /// Mean per-tree normalized impurity decrease, normalized to sum to one.
    pub fn feature_importance(&self) -> Vec<f64> {
        let d = self.trees.first().map_or(0, |t| t.importance.len());
        let mut imp = vec![0.0; d];
        for t in &self.trees {
            let s: f64 = t.importance.iter().sum();
            if s > 0.0 {
                for (a, b) in imp.iter_mut().zip(&t.importance) {
                    *a += b / s;
                }
            }
        }
        let s: f64 = imp.iter().sum();
        if s > 0.0 {
            imp.iter_mut().for_each(|v| *v /= s);
        }
        imp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
}

/// Multiclass AdaBoost (SAMME) over shallow trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    pub trees: Vec<DecisionTree>,
    pub alphas: Vec<f64>,
    pub n_classes: usize,
}

impl AdaBoost {
    pub fn fit(
        x: &[&[f64]],
        y: &[usize],
        n_classes: usize,
        class_weights: &[f64],
        params: BoostParams,
        seed: u64,
    ) -> Self {
        let k = n_classes as f64;
        let mut w: Vec<f64> = y.iter().map(|&t| class_weights[t]).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        let tree_params = TreeParams {
            max_depth: Some(params.max_depth.max(1)),
            ..TreeParams::default()
        };
        let mut trees = Vec::new();
        let mut alphas = Vec::new();
        for m in 0..params.n_estimators {
            let tree = DecisionTree::fit(
                x,
                y,
                &w,
                n_classes,
                tree_params,
                seed.wrapping_add(m as u64),
            );
            let wrong: Vec<bool> = x
                .iter()
                .zip(y)
                .map(|(r, &t)| tree.predict(r) != t)
                .collect();
            let err: f64 = w
                .iter()
                .zip(&wrong)
                .filter(|(_, &b)| b)
                .map(|(v, _)| v)
                .sum::<f64>()
                / w.iter().sum::<f64>();
            if err <= 0.0 {
                trees.push(tree);
                alphas.push(1.0);
                break;
            }
            if err >= 1.0 - 1.0 / k {
                if trees.is_empty() {
                    trees.push(tree);
                    alphas.push(1.0);
                }
                break;
            }
            let alpha = params.learning_rate * (((1.0 - err) / err).ln() + (k - 1.0).ln());
            for (v, &b) in w.iter_mut().zip(&wrong) {
                if b {
                    *v *= alpha.exp();
                }
            }
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
            trees.push(tree);
            alphas.push(alpha);
        }
        Self {
            trees,
            alphas,
            n_classes,
        }
    }

    /// Softmax of the alpha-normalized vote margins scaled by `1 / (K - 1)`.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.n_classes];
        let total: f64 = self.alphas.iter().sum();
        for (t, a) in self.trees.iter().zip(&self.alphas) {
            z[t.predict(x)] += a / total;
        }
        let scale = 1.0 / (self.n_classes as f64 - 1.0).max(1.0);
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut s = 0.0;
        for v in z.iter_mut() {
            *v = ((*v - m) * scale).exp();
            s += *v;
        }
        z.iter_mut().for_each(|v| *v /= s);
        z
    }
}
