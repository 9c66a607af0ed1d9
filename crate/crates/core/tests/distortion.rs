mod common;

use common::{bump_surface, oracle_global, random_disc_mesh};
use lung_distortion::distortion::{
    distortion_feature_names, distortion_features, extract_distortion_features,
    frequency_median_split, global_distortion, local_distortion, surface_distortion_features,
    DistortionConfig, DistortionMeasure,
};
use lung_distortion::flatten::{minimize_distortion, tutte_embed, PlanarEmbedding, SolverConfig};
use lung_distortion::mesh::TriangleMesh;
use lung_distortion::signal::AudioRecording;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use DistortionMeasure::*;

#[test]
fn identity_values() {
    let expected = [0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 1.0];
    for (m, e) in DistortionMeasure::ALL.iter().zip(expected) {
        assert_eq!(local_distortion(*m, 1.0, 1.0).unwrap(), e, "{m}");
    }
}

#[test]
fn substitution_examples() {
    assert_eq!(local_distortion(Mips, 2.0, 1.0).unwrap(), 2.5);
    assert_eq!(local_distortion(QuasiConformal, 2.0, 1.0).unwrap(), 2.0);
    assert_eq!(local_distortion(Dirichlet, 2.0, 1.0).unwrap(), 2.5);
    assert_eq!(local_distortion(ConformalFactor, 2.0, 1.0).unwrap(), 1.5);
    assert_eq!(local_distortion(AreaDistortion, 2.0, 0.5).unwrap(), 1.0);
    assert_eq!(local_distortion(QuasiIsometric, 2.0, 0.5).unwrap(), 2.0);
    assert_eq!(local_distortion(Arap, 2.0, 0.5).unwrap(), 9.5625);
    assert!(local_distortion(Arap, 0.0, 1.0).is_err());
    assert!(local_distortion(Mips, 1.0, -1.0).is_err());
}

#[test]
fn symmetry_and_minimum_on_a_grid() {
    let steps = 61;
    let grid: Vec<f64> = (0..steps)
        .map(|i| 0.25 * 16f64.powf(i as f64 / (steps - 1) as f64))
        .collect();
    for &a in &grid {
        for &b in &grid {
            for m in DistortionMeasure::ALL {
                let v = local_distortion(m, a, b).unwrap();
                if m == QuasiIsometric {
                    assert_eq!(v, a.max(1.0 / b));
                } else {
                    assert!(
                        (v - local_distortion(m, b, a).unwrap()).abs() <= 1e-12 * v.abs().max(1.0)
                    );
                }
                if a >= b && m != Dirichlet && m != ConformalFactor {
                    assert!(v >= m.identity_value() - 1e-15, "{m} at ({a}, {b})");
                }
            }
        }
    }
}

#[test]
fn median_split_partitions_mesh() {
    let mesh = random_disc_mesh(2, 80);
    let (low, high) = frequency_median_split(&mesh);
    assert_eq!(low.len() + high.len(), mesh.n_triangles());
    let freqs = mesh.triangle_frequencies();
    let max_low = low
        .iter()
        .map(|&t| freqs[t])
        .fold(f64::NEG_INFINITY, f64::max);
    let min_high = high.iter().map(|&t| freqs[t]).fold(f64::INFINITY, f64::min);
    assert!(max_low < min_high);
}

fn two_triangle_mesh() -> TriangleMesh {
    // Areas 1 and 3 in the plane.
    TriangleMesh::new(
        vec![
            [0.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [2.0, 3.0, 0.0],
        ],
        vec![[0, 1, 2], [1, 3, 2]],
    )
    .unwrap()
}

#[test]
fn weighted_mean_arithmetic() {
    let mesh = two_triangle_mesh();
    assert_eq!(mesh.triangle_area(0).unwrap(), 1.0);
    assert!((mesh.triangle_area(1).unwrap() - 3.0).abs() < 1e-15);
    // Scale x by 1 on the first triangle and the whole map by 1: AD = 1; use a
    // uniform scale of s so every triangle has the same distortion.
    let emb = PlanarEmbedding::new(
        mesh.vertices()
            .iter()
            .map(|v| [1.5 * v[0], 1.5 * v[1]])
            .collect(),
    )
    .unwrap();
    let d = global_distortion(&mesh, &emb, Dirichlet, &[0, 1]).unwrap();
    assert!((d - 2.25).abs() < 1e-12);
    assert!(global_distortion(&mesh, &emb, Dirichlet, &[]).is_err());
}

#[test]
fn two_triangles_with_distinct_distortions() {
    // Move only vertex 3 so triangle 0 stays isometric (Dirichlet 1) while
    // triangle 1 is stretched.
    let mesh = two_triangle_mesh();
    let mut pos: Vec<[f64; 2]> = mesh.vertices().iter().map(|v| [v[0], v[1]]).collect();
    pos[3] = [4.0, 5.0];
    let emb = PlanarEmbedding::new(pos).unwrap();
    let d0 = global_distortion(&mesh, &emb, Dirichlet, &[0]).unwrap();
    let d1 = global_distortion(&mesh, &emb, Dirichlet, &[1]).unwrap();
    let both = global_distortion(&mesh, &emb, Dirichlet, &[0, 1]).unwrap();
    assert!((d0 - 1.0).abs() < 1e-12);
    assert!((both - (d0 * 1.0 + d1 * 3.0) / 4.0).abs() < 1e-12);
}

#[test]
fn global_distortion_matches_oracle_and_band_identity() {
    for seed in 0..6 {
        let mesh = random_disc_mesh(100 + seed, 70);
        let init = tutte_embed(&mesh).unwrap();
        let emb = minimize_distortion(
            &mesh,
            &init,
            &SolverConfig {
                max_iters: 5,
                ..SolverConfig::default()
            },
        )
        .unwrap()
        .embedding;
        let (low, high) = frequency_median_split(&mesh);
        let all: Vec<usize> = (0..mesh.n_triangles()).collect();
        let area = |s: &[usize]| {
            s.iter()
                .map(|&t| mesh.triangle_area(t).unwrap())
                .sum::<f64>()
        };
        for m in DistortionMeasure::ALL {
            let g = global_distortion(&mesh, &emb, m, &all).unwrap();
            let o = oracle_global(&mesh, emb.positions(), m, &all);
            assert!((g - o).abs() < 1e-9 * o.abs().max(1.0), "{m}: {g} vs {o}");
            let lo = global_distortion(&mesh, &emb, m, &low).unwrap();
            let hi = global_distortion(&mesh, &emb, m, &high).unwrap();
            let combined = lo * area(&low) + hi * area(&high);
            assert!((combined - g * area(&all)).abs() < 1e-9 * combined.abs().max(1.0));
        }
    }
}

#[test]
fn features_have_names_bounds_and_rigid_invariance() {
    let mesh = random_disc_mesh(9, 90);
    let init = tutte_embed(&mesh).unwrap();
    let emb = minimize_distortion(&mesh, &init, &SolverConfig::default())
        .unwrap()
        .embedding;
    let f = distortion_features(&mesh, &emb).unwrap();
    assert_eq!(f.names(), distortion_feature_names().as_slice());
    for (i, m) in DistortionMeasure::ALL.iter().enumerate() {
        for v in &f.values()[2 * i..2 * i + 2] {
            if *m != Dirichlet && *m != ConformalFactor {
                assert!(*v >= m.identity_value() - 1e-12, "{m}: {v}");
            }
        }
    }
    let g = distortion_features(&mesh, &emb.rigid_motion(-2.3, [7.0, 0.5])).unwrap();
    for (a, b) in f.values().iter().zip(g.values()) {
        assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
    }
}

#[test]
fn surface_features_are_deterministic() {
    let config = DistortionConfig {
        grid_n: 12,
        ..DistortionConfig::default()
    };
    let s = bump_surface(24, 0.4, 0.3, 0.1, 0.5);
    let a = surface_distortion_features(&s, &config).unwrap();
    let b = surface_distortion_features(&s, &config).unwrap();
    assert_eq!(a, b);
}

#[test]
fn recording_pipeline_produces_sixteen_finite_features() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sr = 4000;
    let samples: Vec<f64> = (0..4000)
        .map(|i| {
            let t = i as f64 / sr as f64;
            (2.0 * std::f64::consts::PI * 440.0 * t).sin() * 0.5 + rng.gen_range(-0.05..0.05)
        })
        .collect();
    let rec = AudioRecording::new(samples, sr, "p1", "Healthy").unwrap();
    let config = DistortionConfig {
        grid_n: 12,
        ..DistortionConfig::default()
    };
    let f = extract_distortion_features(&rec, &config).unwrap();
    assert_eq!(f.len(), 16);
    assert!(f.values().iter().all(|v| v.is_finite()));
    assert!(f.get("mips_low").unwrap() >= 2.0 - 1e-12);
}
