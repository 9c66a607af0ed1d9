use std::collections::HashSet;

use lung_distortion::mesh::{
    delaunay, interpolate, sample_surface, triangulate, triangulate_points,
};
use lung_distortion::signal::SpectrogramSurface;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
        .collect()
}

/// Circumcircle from the perpendicular-bisector formula in plain floating point.
fn circumcircle(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> ([f64; 2], f64) {
    let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
    let sq = |p: [f64; 2]| p[0] * p[0] + p[1] * p[1];
    let ux = (sq(a) * (b[1] - c[1]) + sq(b) * (c[1] - a[1]) + sq(c) * (a[1] - b[1])) / d;
    let uy = (sq(a) * (c[0] - b[0]) + sq(b) * (a[0] - c[0]) + sq(c) * (b[0] - a[0])) / d;
    let r2 = (a[0] - ux).powi(2) + (a[1] - uy).powi(2);
    ([ux, uy], r2)
}

#[test]
fn random_sets_have_empty_circumcircles() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let n = rng.gen_range(3..=200);
        let pts = random_points(&mut rng, n);
        let d = delaunay(&pts).unwrap();
        for t in &d.triangles {
            let (c, r2) = circumcircle(pts[t[0]], pts[t[1]], pts[t[2]]);
            for (i, p) in pts.iter().enumerate() {
                if t.contains(&i) {
                    continue;
                }
                let dist2 = (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2);
                assert!(
                    dist2 >= r2 * (1.0 - 1e-9),
                    "point {i} inside circle of {t:?}"
                );
            }
        }
        // Euler: T = 2n - h - 2 for a triangulated point set.
        assert_eq!(d.triangles.len(), 2 * n - d.hull.len() - 2);
    }
}

#[test]
fn grid_triangle_counts_and_boundary() {
    let surf = SpectrogramSurface::from_grid(vec![vec![0.3; 4]; 4]).unwrap();
    for n in [2, 4, 8, 16, 32] {
        let mesh = triangulate(&sample_surface(&surf, n).unwrap()).unwrap();
        assert_eq!(mesh.n_triangles(), 2 * (n - 1) * (n - 1));
        assert_eq!(mesh.boundary().len(), 4 * (n - 1));
        assert_eq!(mesh.euler_characteristic(), 1);
        let edges: HashSet<(usize, usize)> = mesh
            .triangles()
            .iter()
            .flat_map(|t| (0..3).map(move |i| (t[i].min(t[(i + 1) % 3]), t[i].max(t[(i + 1) % 3]))))
            .collect();
        assert_eq!(
            mesh.n_vertices() as i64 - edges.len() as i64 + mesh.n_triangles() as i64,
            1
        );
    }
}

#[test]
fn grid_quads_share_one_diagonal_direction() {
    let surf = SpectrogramSurface::from_grid(vec![vec![0.0; 3]; 3]).unwrap();
    let n = 9;
    let mesh = triangulate(&sample_surface(&surf, n).unwrap()).unwrap();
    for t in mesh.triangles() {
        let ij: Vec<(usize, usize)> = t.iter().map(|&v| (v % n, v / n)).collect();
        // Every triangle's longest edge runs from (i+1, j) to (i, j+1).
        let diag = (0..3).any(|a| (0..3).any(|b| ij[a].0 == ij[b].0 + 1 && ij[b].1 == ij[a].1 + 1));
        assert!(diag, "{ij:?}");
    }
}

#[test]
fn triangulation_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pts: Vec<[f64; 3]> = (0..150)
        .map(|_| {
            [
                rng.gen_range(0.0..1.0),
                rng.gen_range(0.0..1.0),
                rng.gen_range(0.0..1.0),
            ]
        })
        .collect();
    let a = triangulate_points(pts.clone()).unwrap();
    let b = triangulate_points(pts).unwrap();
    assert_eq!(a, b);
    for t in 0..a.n_triangles() {
        assert!(a.projected_det(t) > 0.0);
    }
}

#[test]
fn bilinear_matches_two_axis_interpolation() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let power: Vec<Vec<f64>> = (0..7)
        .map(|_| (0..5).map(|_| rng.gen_range(0.0..1.0)).collect())
        .collect();
    let surf = SpectrogramSurface::from_grid(power.clone()).unwrap();
    for _ in 0..200 {
        let (x, y): (f64, f64) = (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0));
        let tx = x * 6.0;
        let fy = y * 4.0;
        let (i0, j0) = ((tx.floor() as usize).min(5), (fy.floor() as usize).min(3));
        let (u, v) = (tx - i0 as f64, fy - j0 as f64);
        let z0 = power[i0][j0] + (power[i0 + 1][j0] - power[i0][j0]) * u;
        let z1 = power[i0][j0 + 1] + (power[i0 + 1][j0 + 1] - power[i0][j0 + 1]) * u;
        let want = z0 + (z1 - z0) * v;
        assert!((interpolate(&surf, x, y) - want).abs() < 1e-12);
    }
    let grid = sample_surface(&surf, 2).unwrap();
    assert_eq!(grid.at(0, 0)[2], power[0][0]);
    assert_eq!(grid.at(1, 1)[2], power[6][4]);
}

#[test]
fn random_triangle_area_matches_half_cross_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let pts: Vec<[f64; 3]> = (0..40)
        .map(|_| {
            [
                rng.gen_range(0.0..1.0),
                rng.gen_range(0.0..1.0),
                rng.gen_range(-1.0..1.0),
            ]
        })
        .collect();
    let mesh = triangulate_points(pts.clone()).unwrap();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let (a, b, c) = (pts[tri[0]], pts[tri[1]], pts[tri[2]]);
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let cx = u[1] * v[2] - u[2] * v[1];
        let cy = u[2] * v[0] - u[0] * v[2];
        let cz = u[0] * v[1] - u[1] * v[0];
        let want = 0.5 * (cx * cx + cy * cy + cz * cz).sqrt();
        assert!((mesh.triangle_area(t).unwrap() - want).abs() < 1e-12);
        let f = (a[1] + b[1] + c[1]) / 3.0;
        assert_eq!(mesh.triangle_frequency(t).unwrap(), f);
    }
}

#[test]
fn default_resolution_grid_builds() {
    let surf = SpectrogramSurface::from_grid(vec![vec![0.5; 10]; 10]).unwrap();
    let mesh = triangulate(&sample_surface(&surf, 150).unwrap()).unwrap();
    assert_eq!(mesh.n_triangles(), 2 * 149 * 149);
}
