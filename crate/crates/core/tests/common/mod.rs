#![allow(dead_code)]

use lung_distortion::distortion::DistortionMeasure;
use lung_distortion::mesh::{sample_surface, triangulate, triangulate_points, TriangleMesh};
use lung_distortion::signal::SpectrogramSurface;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Delaunay mesh of `n` random points in the unit square with random heights.
pub fn random_disc_mesh(seed: u64, n: usize) -> TriangleMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..n)
        .map(|_| {
            [
                rng.gen_range(0.0..1.0),
                rng.gen_range(0.0..1.0),
                rng.gen_range(0.0..0.3),
            ]
        })
        .collect();
    triangulate_points(pts).unwrap()
}

/// Spectrogram grid with a Gaussian bump of height `amp` at `(cx, cy)`.
pub fn bump_surface(g: usize, cx: f64, cy: f64, width: f64, amp: f64) -> SpectrogramSurface {
    let power = (0..g)
        .map(|i| {
            (0..g)
                .map(|j| {
                    let x = i as f64 / (g - 1) as f64;
                    let y = j as f64 / (g - 1) as f64;
                    0.2 + amp
                        * (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * width * width)).exp()
                })
                .collect()
        })
        .collect();
    SpectrogramSurface::from_grid(power).unwrap()
}

pub fn bump_mesh(n: usize, cx: f64, cy: f64, width: f64, amp: f64) -> TriangleMesh {
    triangulate(&sample_surface(&bump_surface(64, cx, cy, width, amp), n).unwrap()).unwrap()
}

/// Whether the interiors of two planar triangles intersect, by separating axes.
/// Triangles that only touch along an edge or at a vertex do not overlap.
pub fn triangles_overlap(a: [[f64; 2]; 3], b: [[f64; 2]; 3]) -> bool {
    let scale = a
        .iter()
        .chain(&b)
        .flatten()
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(1.0);
    let eps = 1e-12 * scale * scale;
    for tri in [&a, &b] {
        for k in 0..3 {
            let (p, q) = (tri[k], tri[(k + 1) % 3]);
            let normal = [q[1] - p[1], p[0] - q[0]];
            let project = |t: &[[f64; 2]; 3]| {
                let vals = t.map(|v| normal[0] * v[0] + normal[1] * v[1]);
                (
                    vals.iter().cloned().fold(f64::INFINITY, f64::min),
                    vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                )
            };
            let (amin, amax) = project(&a);
            let (bmin, bmax) = project(&b);
            if amax <= bmin + eps || bmax <= amin + eps {
                return false;
            }
        }
    }
    true
}

/// Number of overlapping triangle pairs in a planar layout.
pub fn count_overlaps(triangles: &[[usize; 3]], pos: &[[f64; 2]]) -> usize {
    let tris: Vec<[[f64; 2]; 3]> = triangles.iter().map(|t| t.map(|v| pos[v])).collect();
    let boxes: Vec<[f64; 4]> = tris
        .iter()
        .map(|t| {
            let xs = t.map(|p| p[0]);
            let ys = t.map(|p| p[1]);
            [
                xs.iter().cloned().fold(f64::INFINITY, f64::min),
                xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                ys.iter().cloned().fold(f64::INFINITY, f64::min),
                ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            ]
        })
        .collect();
    let mut count = 0;
    for i in 0..tris.len() {
        for j in i + 1..tris.len() {
            let (p, q) = (boxes[i], boxes[j]);
            if p[1] < q[0] || q[1] < p[0] || p[3] < q[2] || q[3] < p[2] {
                continue;
            }
            if triangles_overlap(tris[i], tris[j]) {
                count += 1;
            }
        }
    }
    count
}

/// Least-squares polynomial fit over one window by Gaussian elimination on the
/// raw-offset normal equations, evaluated at `at` (offset from window start).
pub fn lsq_window_value(window: &[f64], degree: usize, at: usize) -> f64 {
    let k = degree + 1;
    let center = (window.len() / 2) as f64;
    let mut a = vec![vec![0.0; k + 1]; k];
    for (n, &x) in window.iter().enumerate() {
        let t = n as f64 - center;
        for r in 0..k {
            for c in 0..k {
                a[r][c] += t.powi((r + c) as i32);
            }
            a[r][k] += t.powi(r as i32) * x;
        }
    }
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        for r in 0..k {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=k {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let coef: Vec<f64> = (0..k).map(|r| a[r][k] / a[r][r]).collect();
    let t = at as f64 - center;
    coef.iter()
        .enumerate()
        .map(|(p, c)| c * t.powi(p as i32))
        .sum()
}

pub fn savgol_oracle(x: &[f64], m: usize, degree: usize) -> Vec<f64> {
    let w = 2 * m + 1;
    let n = x.len();
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(m).min(n - w);
            lsq_window_value(&x[start..start + w], degree, i - start)
        })
        .collect()
}

/// Brute-force: Heron areas and singular values from the Gram matrices of
/// the source and image edges.
pub fn oracle_global(
    mesh: &TriangleMesh,
    pos: &[[f64; 2]],
    m: DistortionMeasure,
    subset: &[usize],
) -> f64 {
    let v = mesh.vertices();
    let mut num = 0.0;
    let mut den = 0.0;
    for &t in subset {
        let [a, b, c] = mesh.triangles()[t];
        let d = |p: [f64; 3], q: [f64; 3]| {
            ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
        };
        let (la, lb, lc) = (d(v[b], v[c]), d(v[a], v[c]), d(v[a], v[b]));
        let s = (la + lb + lc) / 2.0;
        let area = (s * (s - la) * (s - lb) * (s - lc)).sqrt();
        // Source Gram matrix G and image Gram matrix H of edges (b-a, c-a);
        // the squared singular values are the eigenvalues of G^-1 H.
        let e = |p: [f64; 3], q: [f64; 3]| [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
        let dot3 = |x: [f64; 3], y: [f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
        let (u, w) = (e(v[a], v[b]), e(v[a], v[c]));
        let g = [[dot3(u, u), dot3(u, w)], [dot3(u, w), dot3(w, w)]];
        let (p, q) = (
            [pos[b][0] - pos[a][0], pos[b][1] - pos[a][1]],
            [pos[c][0] - pos[a][0], pos[c][1] - pos[a][1]],
        );
        let h = [
            [p[0] * p[0] + p[1] * p[1], p[0] * q[0] + p[1] * q[1]],
            [p[0] * q[0] + p[1] * q[1], q[0] * q[0] + q[1] * q[1]],
        ];
        let det_g = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        let ginv = [
            [g[1][1] / det_g, -g[0][1] / det_g],
            [-g[1][0] / det_g, g[0][0] / det_g],
        ];
        let mut k = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                k[i][j] = ginv[i][0] * h[0][j] + ginv[i][1] * h[1][j];
            }
        }
        let tr = k[0][0] + k[1][1];
        let det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        let (s1, s2) = ((tr / 2.0 + disc).sqrt(), (tr / 2.0 - disc).max(0.0).sqrt());
        num += area * m.eval(s1, s2);
        den += area;
    }
    num / den
}
