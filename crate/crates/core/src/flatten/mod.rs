//! Planar embeddings of disc meshes: Tutte initialization, per-triangle
//! Jacobians, and injectivity-preserving distortion minimization.

mod energy;
mod jacobian;
mod solver;
mod sparse;
mod tutte;

pub use jacobian::{
    edge_map, jacobian_of, local_jacobian, singular_values, unfold_triangle, TriangleJacobian,
};
pub use solver::{
    minimize_distortion, total_energy, BlockStrategy, BoundaryMode, Minimization, SolverConfig,
    TraceRow,
};
pub use tutte::tutte_embed;

use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;

/// One planar position per mesh vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarEmbedding {
    positions: Vec<[f64; 2]>,
}

impl PlanarEmbedding {
    pub fn new(positions: Vec<[f64; 2]>) -> Result<Self> {
        if positions.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Data("non-finite planar position".into()));
        }
        Ok(Self { positions })
    }

    /// The (x, y) projection of the mesh, an isometric unfold when the mesh is flat.
    pub fn projection(mesh: &TriangleMesh) -> Self {
        Self {
            positions: mesh.vertices().iter().map(|v| [v[0], v[1]]).collect(),
        }
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn into_positions(self) -> Vec<[f64; 2]> {
        self.positions
    }

    pub(crate) fn check_matches(&self, mesh: &TriangleMesh) -> Result<()> {
        if self.positions.len() != mesh.n_vertices() {
            return Err(Error::Parameter(format!(
                "embedding has {} positions for a mesh of {} vertices",
                self.positions.len(),
                mesh.n_vertices()
            )));
        }
        Ok(())
    }

    /// Twice the signed area of triangle `t`'s image.
    pub fn det(&self, tri: [usize; 3]) -> f64 {
        let (a, b, c) = (
            self.positions[tri[0]],
            self.positions[tri[1]],
            self.positions[tri[2]],
        );
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    }

    /// Smallest image determinant over all triangles.
    pub fn min_det(&self, mesh: &TriangleMesh) -> f64 {
        mesh.triangles()
            .iter()
            .map(|&t| self.det(t))
            .fold(f64::INFINITY, f64::min)
    }

    /// Applies `p -> R p + offset` with `R` the rotation by `angle`.
    pub fn rigid_motion(&self, angle: f64, offset: [f64; 2]) -> Self {
        let (c, s) = (angle.cos(), angle.sin());
        Self {
            positions: self
                .positions
                .iter()
                .map(|p| {
                    [
                        c * p[0] - s * p[1] + offset[0],
                        s * p[0] + c * p[1] + offset[1],
                    ]
                })
                .collect(),
        }
    }
}
