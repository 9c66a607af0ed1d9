use std::f64::consts::TAU;

use super::sparse::{conjugate_gradient, BlockCsr};
use super::PlanarEmbedding;
use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;

const CG_TOL: f64 = 1e-10;

/// Convex-combination (Tutte) embedding onto the unit disc.
///
/// Boundary vertices go to the unit circle in loop order, spaced by the 3D
/// length of the boundary edges. Each interior vertex is the uniform average
/// of its neighbors.
pub fn tutte_embed(mesh: &TriangleMesh) -> Result<PlanarEmbedding> {
    let n = mesh.n_vertices();
    let verts = mesh.vertices();
    let boundary = mesh.boundary();
    if boundary.len() < 3 {
        return Err(Error::Topology(
            "boundary loop has fewer than 3 vertices".into(),
        ));
    }
    let mut positions = vec![[0.0; 2]; n];
    let edge_len = |a: usize, b: usize| -> f64 {
        let (p, q) = (verts[a], verts[b]);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
    };
    let lengths: Vec<f64> = (0..boundary.len())
        .map(|k| edge_len(boundary[k], boundary[(k + 1) % boundary.len()]))
        .collect();
    let perimeter: f64 = lengths.iter().sum();
    let mut arc = 0.0;
    for (k, &v) in boundary.iter().enumerate() {
        let angle = TAU * arc / perimeter;
        positions[v] = [angle.cos(), angle.sin()];
        arc += lengths[k];
    }

    let on_boundary = mesh.is_boundary_vertex();
    let mut local = vec![usize::MAX; n];
    let mut interior = Vec::new();
    for v in 0..n {
        if !on_boundary[v] {
            local[v] = interior.len();
            interior.push(v);
        }
    }
    if !interior.is_empty() {
        let neighbors = mesh.vertex_neighbors();
        let pattern: Vec<Vec<usize>> = interior
            .iter()
            .map(|&v| {
                let mut row: Vec<usize> = neighbors[v]
                    .iter()
                    .filter(|&&w| local[w] != usize::MAX)
                    .map(|&w| local[w])
                    .collect();
                row.push(local[v]);
                row.sort_unstable();
                row
            })
            .collect();
        let mut a = BlockCsr::with_pattern(&pattern);
        let mut rhs = vec![[0.0; 2]; interior.len()];
        for (i, &v) in interior.iter().enumerate() {
            let deg = neighbors[v].len() as f64;
            a.add(i, i, &[[deg, 0.0], [0.0, deg]]);
            for &w in &neighbors[v] {
                if on_boundary[w] {
                    rhs[i][0] += positions[w][0];
                    rhs[i][1] += positions[w][1];
                } else {
                    a.add(i, local[w], &[[-1.0, 0.0], [0.0, -1.0]]);
                }
            }
        }
        let mut x = vec![[0.0; 2]; interior.len()];
        let outcome = conjugate_gradient(&a, 0.0, &rhs, &mut x, CG_TOL, 20 * interior.len() + 100);
        if !outcome.converged {
            return Err(Error::Internal(format!(
                "convex-combination system did not converge in {} iterations",
                outcome.iterations
            )));
        }
        for (i, &v) in interior.iter().enumerate() {
            positions[v] = x[i];
        }
    }
    let embedding = PlanarEmbedding::new(positions)?;
    let min_det = embedding.min_det(mesh);
    if !(min_det > 0.0) {
        return Err(Error::Internal(format!(
            "convex-combination map folds a triangle (min det {min_det:e})"
        )));
    }
    Ok(embedding)
}
