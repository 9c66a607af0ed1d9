use std::collections::HashSet;

use lung_distortion::classify::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gaussian-ish blobs: class `c` centered at `(3c, -3c)`, `per_patient`
/// recordings per patient.
fn blobs(
    n_per_class: usize,
    classes: usize,
    spread: f64,
    per_patient: usize,
    seed: u64,
) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for c in 0..classes {
        for i in 0..n_per_class {
            rows.push(Sample {
                recording_id: format!("c{c}r{i}"),
                patient_id: format!("c{c}p{}", i / per_patient),
                label: format!("class{c}"),
                features: vec![
                    3.0 * c as f64 + rng.gen_range(-spread..spread),
                    -3.0 * c as f64 + rng.gen_range(-spread..spread),
                ],
            });
        }
    }
    Dataset::new(vec!["x".into(), "y".into()], rows).unwrap()
}

fn training_accuracy(model: &TrainedModel, data: &Dataset) -> f64 {
    let hits = data
        .rows()
        .iter()
        .zip(data.targets())
        .filter(|(r, &t)| model.predict(&r.features).unwrap() == t)
        .count();
    hits as f64 / data.len() as f64
}

fn sample_grid() -> Vec<Hyperparameters> {
    vec![
        Hyperparameters::Lr { c: 1.0 },
        Hyperparameters::Knn {
            k: 3,
            weights: KnnWeights::Distance,
            p: 1,
        },
        Hyperparameters::Rf(ForestParams {
            n_estimators: 15,
            tree: TreeParams {
                max_depth: Some(5),
                min_samples_split: 2,
                max_features: MaxFeatures::Sqrt,
            },
            bootstrap: true,
        }),
        Hyperparameters::AdaBoost(BoostParams {
            n_estimators: 20,
            learning_rate: 0.5,
            max_depth: 2,
        }),
    ]
}

#[test]
fn logistic_separates_blobs_with_monotone_loss() {
    let data = blobs(30, 2, 1.0, 1, 1);
    let w = class_weights(&data).unwrap();
    let model = train(&data, &Hyperparameters::Lr { c: 100.0 }, &w, 0).unwrap();
    assert_eq!(training_accuracy(&model, &data), 1.0);
    let x = data.features();
    let (_, losses) = LogisticModel::fit(&x, data.targets(), 2, &w, 100.0);
    assert!(losses.len() > 2);
    for pair in losses.windows(2) {
        assert!(pair[1] <= pair[0]);
    }
}

#[test]
fn one_nearest_neighbor_on_duplicated_points() {
    let base = blobs(10, 3, 4.0, 1, 2);
    let mut rows = base.rows().to_vec();
    rows.extend(base.rows().iter().map(|r| Sample {
        recording_id: format!("{}dup", r.recording_id),
        ..r.clone()
    }));
    let data = Dataset::new(base.feature_names().to_vec(), rows).unwrap();
    let w = class_weights(&data).unwrap();
    for p in [1, 2] {
        let model = train(
            &data,
            &Hyperparameters::Knn {
                k: 1,
                weights: KnnWeights::Uniform,
                p,
            },
            &w,
            0,
        )
        .unwrap();
        assert_eq!(training_accuracy(&model, &data), 1.0);
    }
}

#[test]
fn forest_importance_prefers_label_copy() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rows = (0..80)
        .map(|i| {
            let label = i % 2;
            Sample {
                recording_id: format!("r{i}"),
                patient_id: format!("p{i}"),
                label: format!("L{label}"),
                features: vec![label as f64, rng.gen_range(0.0..1.0), 7.0],
            }
        })
        .collect();
    let data = Dataset::new(vec!["copy".into(), "noise".into(), "constant".into()], rows).unwrap();
    let w = class_weights(&data).unwrap();
    let model = train(
        &data,
        &Hyperparameters::Rf(ForestParams {
            n_estimators: 50,
            tree: TreeParams {
                max_depth: None,
                min_samples_split: 2,
                max_features: MaxFeatures::Sqrt,
            },
            bootstrap: true,
        }),
        &w,
        9,
    )
    .unwrap();
    let ranking = feature_importance(&model).unwrap();
    assert_eq!(ranking[0].0, "copy");
    assert!(ranking[0].1 > ranking[1].1);
    let constant = ranking.iter().find(|(n, _)| n == "constant").unwrap();
    assert_eq!(constant.1, 0.0);
    let total: f64 = ranking.iter().map(|(_, v)| v).sum();
    assert!((total - 1.0).abs() < 1e-9);
    let lr = train(&data, &Hyperparameters::Lr { c: 1.0 }, &w, 0).unwrap();
    assert!(feature_importance(&lr).is_err());
}

#[test]
fn single_full_tree_forest_equals_plain_tree() {
    let data = blobs(25, 3, 2.5, 1, 4);
    let w = class_weights(&data).unwrap();
    let tree_params = TreeParams {
        max_depth: None,
        min_samples_split: 2,
        max_features: MaxFeatures::All,
    };
    let forest = train(
        &data,
        &Hyperparameters::Rf(ForestParams {
            n_estimators: 1,
            tree: tree_params,
            bootstrap: false,
        }),
        &w,
        5,
    )
    .unwrap();
    let x = data.features();
    let weights: Vec<f64> = data.targets().iter().map(|&t| w[t]).collect();
    let tree = DecisionTree::fit(&x, data.targets(), &weights, 3, tree_params, 123);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        let q = [rng.gen_range(-3.0..9.0), rng.gen_range(-9.0..3.0)];
        assert_eq!(
            forest.predict_proba(&q).unwrap(),
            tree.predict_proba(&q).to_vec()
        );
    }
}

#[test]
fn probabilities_sum_to_one_for_every_kind() {
    let data = blobs(20, 3, 3.0, 2, 7);
    let w = class_weights(&data).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for h in sample_grid() {
        let model = train(&data, &h, &w, 1).unwrap();
        for _ in 0..50 {
            let q = [rng.gen_range(-5.0..10.0), rng.gen_range(-10.0..5.0)];
            let p = model.predict_proba(&q).unwrap();
            assert_eq!(p.len(), 3);
            assert!(
                (p.iter().sum::<f64>() - 1.0).abs() < 1e-9,
                "{:?}",
                model.kind
            );
            assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        assert!(model.predict_proba(&[1.0]).is_err());
    }
}

#[test]
fn models_round_trip_through_json_and_are_deterministic() {
    let data = blobs(20, 3, 3.0, 2, 10);
    let w = class_weights(&data).unwrap();
    for h in sample_grid() {
        let a = train(&data, &h, &w, 42).unwrap();
        let b = train(&data, &h, &w, 42).unwrap();
        let json = a.to_json().unwrap();
        assert_eq!(json, b.to_json().unwrap());
        let back = TrainedModel::from_json(&json).unwrap();
        assert_eq!(back.kind, a.kind);
        for r in data.rows() {
            assert_eq!(
                back.predict_proba(&r.features).unwrap(),
                a.predict_proba(&r.features).unwrap()
            );
        }
    }
}

fn pair_count_auroc(scores: &[f64], pos: &[bool]) -> f64 {
    let mut num = 0.0;
    let mut pairs = 0.0;
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if pos[i] && !pos[j] {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    num += 1.0;
                } else if scores[i] == scores[j] {
                    num += 0.5;
                }
            }
        }
    }
    num / pairs
}

#[test]
fn auroc_matches_pair_counting_with_ties() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let n = rng.gen_range(2..60);
        let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..8) as f64 / 8.0).collect();
        let mut pos: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        pos[0] = true;
        pos[1] = false;
        assert_eq!(
            auroc(&scores, &pos).unwrap(),
            pair_count_auroc(&scores, &pos)
        );
        let transformed: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
        assert_eq!(auroc(&transformed, &pos), auroc(&scores, &pos));
    }
}

#[test]
fn report_scalars_follow_from_confusion() {
    let data = blobs(15, 3, 4.0, 1, 13);
    let w = class_weights(&data).unwrap();
    let model = train(
        &data,
        &Hyperparameters::Knn {
            k: 5,
            weights: KnnWeights::Uniform,
            p: 2,
        },
        &w,
        0,
    )
    .unwrap();
    let r = evaluate(&model, &data).unwrap();
    assert_eq!(r.n(), data.len());
    let n = r.n() as f64;
    let diag: usize = (0..3).map(|c| r.confusion[c][c]).sum();
    assert_eq!(r.accuracy, diag as f64 / n);
    let mut recall = 0.0;
    let mut jac = 0.0;
    for c in 0..3 {
        let support: usize = r.confusion[c].iter().sum();
        let counts = r.counts(c);
        recall += support as f64 / n * counts.recall();
        jac += support as f64 / n * counts.agreement_jaccard();
    }
    assert_eq!(r.recall, recall);
    assert_eq!(r.jaccard, jac);
    let binary = data.binary("class1", "class0").unwrap();
    let bw = class_weights(&binary).unwrap();
    let bm = train(&binary, &Hyperparameters::Lr { c: 1.0 }, &bw, 0).unwrap();
    let br = evaluate(&bm, &binary).unwrap();
    let c = br.counts(1);
    assert_eq!(br.accuracy, c.accuracy());
    assert_eq!(br.recall, c.recall());
    assert_eq!(br.jaccard, c.agreement_jaccard());
    assert!(br.auroc.is_some());
    assert!(evaluate(&bm, &data).is_err());
}

fn patient_ids(d: &Dataset) -> HashSet<String> {
    d.rows().iter().map(|r| r.patient_id.clone()).collect()
}

#[test]
fn split_keeps_patients_together() {
    let data = blobs(15, 2, 2.0, 3, 14);
    let (train_set, test_set) = split_train_test(&data, 0.2, 0).unwrap();
    assert_eq!(patient_ids(&test_set).len(), 2);
    assert!(patient_ids(&train_set).is_disjoint(&patient_ids(&test_set)));
    assert_eq!(train_set.len() + test_set.len(), data.len());
    let again = split_train_test(&data, 0.2, 0).unwrap();
    assert_eq!(again.1, test_set);
    let differs = (1..20).any(|s| split_train_test(&data, 0.2, s).unwrap().1 != test_set);
    assert!(differs);
    assert!(split_train_test(&data, 0.0, 0).is_err());
    let tiny = blobs(3, 2, 1.0, 3, 1);
    assert!(split_train_test(&tiny, 0.2, 0).is_err());
}

#[test]
fn folds_never_share_patients() {
    let data = blobs(30, 3, 2.0, 2, 15);
    let folds = stratified_folds(&data, 5, 3).unwrap();
    let mut seen = HashSet::new();
    let mut total = 0;
    for f in &folds {
        let ids: HashSet<String> = f
            .iter()
            .map(|&i| data.rows()[i].patient_id.clone())
            .collect();
        assert!(seen.is_disjoint(&ids));
        seen.extend(ids);
        total += f.len();
    }
    assert_eq!(total, data.len());
    assert!(stratified_folds(&blobs(4, 2, 1.0, 1, 0), 5, 0).is_err());
}

#[test]
fn grid_search_choices() {
    let data = blobs(25, 2, 1.5, 1, 16);
    let single = vec![Hyperparameters::Lr { c: 0.5 }];
    assert_eq!(
        grid_search_cv(&data, &single, 5, 0).unwrap().best,
        single[0]
    );
    let grid = vec![
        Hyperparameters::Knn {
            k: 1,
            weights: KnnWeights::Uniform,
            p: 2,
        },
        Hyperparameters::Knn {
            k: 35,
            weights: KnnWeights::Uniform,
            p: 2,
        },
    ];
    let result = grid_search_cv(&data, &grid, 5, 0).unwrap();
    assert_eq!(result.metric, SelectionMetric::Auroc);
    let best = result
        .scores
        .iter()
        .find(|(h, _)| *h == result.best)
        .unwrap()
        .1;
    assert!(result.scores.iter().all(|(_, s)| best >= *s));
    assert!(grid_search_cv(&data, &[], 5, 0).is_err());
}

#[test]
fn default_grid_sizes() {
    assert_eq!(default_grid(ModelKind::Lr).len(), 7);
    assert_eq!(default_grid(ModelKind::Knn).len(), 20);
    assert_eq!(default_grid(ModelKind::Rf).len(), 72);
    assert_eq!(default_grid(ModelKind::AdaBoost).len(), 16);
}

#[test]
fn top_k_selection() {
    let data = blobs(10, 2, 1.0, 1, 17);
    let ranking = vec!["y".to_string(), "x".to_string()];
    let all = select_top_k(&data, &ranking, 2).unwrap();
    assert_eq!(all.feature_names(), ["y", "x"]);
    assert_eq!(
        all.rows()[0].features,
        vec![data.rows()[0].features[1], data.rows()[0].features[0]]
    );
    assert_eq!(
        select_top_k(&data, &ranking, 1).unwrap().feature_names(),
        ["y"]
    );
    assert!(select_top_k(&data, &ranking, 3).is_err());
    assert!(select_top_k(&data, &ranking, 0).is_err());
}

proptest! {
    #[test]
    fn class_weights_recover_total(counts in prop::collection::vec(1usize..40, 2..6)) {
        let rows: Vec<Sample> = counts
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| (0..n).map(move |i| Sample {
                recording_id: format!("{c}-{i}"),
                patient_id: format!("{c}-{i}"),
                label: format!("c{c}"),
                features: vec![0.0],
            }))
            .collect();
        let data = Dataset::new(vec!["f".into()], rows).unwrap();
        let w = class_weights(&data).unwrap();
        let weighted: f64 = data.class_counts().iter().zip(&w).map(|(&n, w)| n as f64 * w).sum();
        prop_assert!((weighted - data.len() as f64).abs() < 1e-9);
    }
}
