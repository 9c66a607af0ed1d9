//! Tutte embedding of a Delaunay mesh over random points, checked for folds.

use lung_distortion::flatten::tutte_embed;
use lung_distortion::mesh::triangulate_points;
use rand::{Rng, SeedableRng};

fn main() -> lung_distortion::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let points: Vec<[f64; 3]> = (0..300)
        .map(|_| {
            let (x, y): (f64, f64) = (rng.gen(), rng.gen());
            [x, y, 0.2 * (6.0 * x).sin() * (4.0 * y).cos()]
        })
        .collect();
    let mesh = triangulate_points(points)?;
    let emb = tutte_embed(&mesh)?;
    let radius = emb
        .positions()
        .iter()
        .map(|p| p[0].hypot(p[1]))
        .fold(0.0, f64::max);
    println!(
        "{} triangles embedded in the unit disc (max radius {radius:.6})",
        mesh.n_triangles()
    );
    println!("smallest triangle determinant {:.3e}", emb.min_det(&mesh));
    Ok(())
}
