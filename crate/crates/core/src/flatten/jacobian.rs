use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;

use super::PlanarEmbedding;

/// Linear part of one triangle's affine map, expressed in an isometric local
/// frame of the source triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleJacobian {
    /// Row-major 2x2 matrix.
    pub matrix: [[f64; 2]; 2],
    pub sigma1: f64,
    pub sigma2: f64,
    /// Signed determinant; negative for an inverted triangle.
    pub det: f64,
}

/// Source edge vectors `p1 - p0` and `p2 - p0` unfolded isometrically into the
/// plane: the first edge lies on the +x axis, the second in the upper half plane.
pub fn unfold_triangle(p0: [f64; 3], p1: [f64; 3], p2: [f64; 3]) -> Result<[[f64; 2]; 2]> {
    let e1 = [p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]];
    let e2 = [p2[0] - p0[0], p2[1] - p0[1], p2[2] - p0[2]];
    let l1 = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    let l2 = (e2[0] * e2[0] + e2[1] * e2[1] + e2[2] * e2[2]).sqrt();
    let cross = [
        e1[1] * e2[2] - e1[2] * e2[1],
        e1[2] * e2[0] - e1[0] * e2[2],
        e1[0] * e2[1] - e1[1] * e2[0],
    ];
    let twice_area = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    if !(twice_area > 1e-14 * l1 * l2) {
        return Err(Error::Geometry("degenerate source triangle".into()));
    }
    let dot = e1[0] * e2[0] + e1[1] * e2[1] + e1[2] * e2[2];
    Ok([[l1, 0.0], [dot / l1, twice_area / l1]])
}

/// Singular values `(s1, s2)` with `s1 >= s2 >= 0` of a 2x2 matrix, in closed form.
pub fn singular_values(m: [[f64; 2]; 2]) -> (f64, f64) {
    let e = (m[0][0] + m[1][1]) / 2.0;
    let f = (m[0][0] - m[1][1]) / 2.0;
    let g = (m[1][0] + m[0][1]) / 2.0;
    let h = (m[1][0] - m[0][1]) / 2.0;
    let q = e.hypot(h);
    let r = f.hypot(g);
    (q + r, (q - r).abs())
}

/// The unique linear map taking source edges `src` to target edges `dst`.
pub fn edge_map(src: [[f64; 2]; 2], dst: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    // Columns of S are the source edges; J = T S^-1.
    let [s1, s2] = src;
    let [t1, t2] = dst;
    let det_s = s1[0] * s2[1] - s2[0] * s1[1];
    let inv = [
        [s2[1] / det_s, -s2[0] / det_s],
        [-s1[1] / det_s, s1[0] / det_s],
    ];
    let mut j = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            j[r][c] = t1[r] * inv[0][c] + t2[r] * inv[1][c];
        }
    }
    j
}

pub fn jacobian_of(matrix: [[f64; 2]; 2]) -> TriangleJacobian {
    let (sigma1, sigma2) = singular_values(matrix);
    TriangleJacobian {
        matrix,
        sigma1,
        sigma2,
        det: matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0],
    }
}

/// Jacobian of the embedding restricted to triangle `t`.
pub fn local_jacobian(
    mesh: &TriangleMesh,
    embedding: &PlanarEmbedding,
    t: usize,
) -> Result<TriangleJacobian> {
    embedding.check_matches(mesh)?;
    let tri = *mesh
        .triangles()
        .get(t)
        .ok_or_else(|| Error::Parameter(format!("triangle index {t} out of range")))?;
    let v = mesh.vertices();
    let src = unfold_triangle(v[tri[0]], v[tri[1]], v[tri[2]])?;
    let q = embedding.positions();
    let (q0, q1, q2) = (q[tri[0]], q[tri[1]], q[tri[2]]);
    let dst = [
        [q1[0] - q0[0], q1[1] - q0[1]],
        [q2[0] - q0[0], q2[1] - q0[1]],
    ];
    Ok(jacobian_of(edge_map(src, dst)))
}
