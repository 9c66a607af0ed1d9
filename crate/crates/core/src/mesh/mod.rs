//! Triangle meshes of spectrogram surfaces.

mod delaunay;

use std::collections::{HashMap, HashSet};
use std::io::Write;

pub use delaunay::{delaunay, Delaunay};

use crate::error::{Error, Result};
use crate::signal::SpectrogramSurface;
use crate::util::fmt_g9;

/// Triangle mesh with disc topology.
///
/// Triangles are consistently oriented; `boundary` lists the boundary vertices in
/// the order that keeps the mesh interior on the left.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<[f64; 3]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<usize>,
}

impl TriangleMesh {
    /// Validates a disc-topology mesh and extracts its boundary loop.
    pub fn new(vertices: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::Topology("mesh has no triangles".into()));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Data("non-finite vertex coordinate".into()));
        }
        let nv = vertices.len();
        let mut used = vec![false; nv];
        let mut directed: HashSet<(usize, usize)> = HashSet::with_capacity(3 * triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::Topology(format!(
                    "triangle {t} references a missing vertex"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Topology(format!("triangle {t} repeats a vertex")));
            }
            for i in 0..3 {
                used[tri[i]] = true;
                if !directed.insert((tri[i], tri[(i + 1) % 3])) {
                    return Err(Error::Topology(format!(
                        "edge ({}, {}) is used twice with the same orientation",
                        tri[i],
                        tri[(i + 1) % 3]
                    )));
                }
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::Topology(format!(
                "vertex {v} belongs to no triangle"
            )));
        }
        let mut next: HashMap<usize, usize> = HashMap::new();
        for &(a, b) in &directed {
            if !directed.contains(&(b, a)) && next.insert(a, b).is_some() {
                return Err(Error::Topology(format!("boundary pinches at vertex {a}")));
            }
        }
        let start = *next
            .keys()
            .min()
            .ok_or_else(|| Error::Topology("closed surface has no boundary".into()))?;
        let mut boundary = vec![start];
        let mut cur = next[&start];
        while cur != start {
            boundary.push(cur);
            cur = *next
                .get(&cur)
                .ok_or_else(|| Error::Topology("boundary loop does not close".into()))?;
            if boundary.len() > next.len() {
                return Err(Error::Topology("boundary loop does not close".into()));
            }
        }
        if boundary.len() != next.len() {
            return Err(Error::Topology(format!(
                "mesh has {} boundary edges outside the main loop",
                next.len() - boundary.len()
            )));
        }
        let mesh = Self {
            vertices,
            triangles,
            boundary,
        };
        if !mesh.is_connected() {
            return Err(Error::Topology("mesh is not connected".into()));
        }
        let edges = (directed.len() - mesh.boundary.len()) / 2 + mesh.boundary.len();
        let euler = nv as i64 - edges as i64 + mesh.triangles.len() as i64;
        if euler != 1 {
            return Err(Error::Topology(format!(
                "Euler characteristic {euler}, expected 1"
            )));
        }
        Ok(mesh)
    }

    fn is_connected(&self) -> bool {
        let adj = self.vertex_neighbors();
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Number of undirected edges.
    pub fn n_edges(&self) -> usize {
        (3 * self.triangles.len() + self.boundary.len()) / 2
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.n_edges() as i64 + self.n_triangles() as i64
    }

    /// Sorted, deduplicated one-ring of every vertex.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for tri in &self.triangles {
            for i in 0..3 {
                adj[tri[i]].push(tri[(i + 1) % 3]);
                adj[tri[i]].push(tri[(i + 2) % 3]);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Indices of the triangles incident to every vertex.
    pub fn vertex_triangles(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                inc[v].push(t);
            }
        }
        inc
    }

    pub fn is_boundary_vertex(&self) -> Vec<bool> {
        let mut flags = vec![false; self.vertices.len()];
        for &b in &self.boundary {
            flags[b] = true;
        }
        flags
    }

    fn check_index(&self, t: usize) -> Result<&[usize; 3]> {
        self.triangles
            .get(t)
            .ok_or_else(|| Error::Parameter(format!("triangle index {t} out of range")))
    }

    /// Area of triangle `t` as embedded in 3-space.
    pub fn triangle_area(&self, t: usize) -> Result<f64> {
        let tri = self.check_index(t)?;
        Ok(area3(
            self.vertices[tri[0]],
            self.vertices[tri[1]],
            self.vertices[tri[2]],
        ))
    }

    pub fn triangle_areas(&self) -> Vec<f64> {
        self.triangles
            .iter()
            .map(|t| {
                area3(
                    self.vertices[t[0]],
                    self.vertices[t[1]],
                    self.vertices[t[2]],
                )
            })
            .collect()
    }

    /// Normalized frequency (y) of the centroid of triangle `t`.
    pub fn triangle_frequency(&self, t: usize) -> Result<f64> {
        let tri = self.check_index(t)?;
        Ok(tri.iter().map(|&v| self.vertices[v][1]).sum::<f64>() / 3.0)
    }

    pub fn triangle_frequencies(&self) -> Vec<f64> {
        (0..self.triangles.len())
            .map(|t| self.triangle_frequency(t).expect("index in range"))
            .collect()
    }

    /// Twice the signed area of the (x, y) projection of triangle `t`.
    pub fn projected_det(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0])
    }

    /// Writes `v x y z` and 1-based `f i j k` records.
    pub fn write_obj<W: Write>(&self, mut out: W) -> Result<()> {
        for v in &self.vertices {
            writeln!(out, "v {} {} {}", fmt_g9(v[0]), fmt_g9(v[1]), fmt_g9(v[2]))?;
        }
        for t in &self.triangles {
            writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        Ok(())
    }
}

pub(crate) fn area3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let cross = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    0.5 * (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt()
}

/// Vertices sampled on an `n x n` uniform grid over `[0, 1]^2`.
///
/// Vertex `(i, j)` (time index `i`, frequency index `j`) is stored at `j * n + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexGrid {
    n: usize,
    positions: Vec<[f64; 3]>,
}

impl VertexGrid {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn at(&self, i: usize, j: usize) -> [f64; 3] {
        self.positions[j * self.n + i]
    }
}

fn locate_on_axis(axis: &[f64], x: f64) -> (usize, f64) {
    let last = axis.len() - 2;
    let k = axis
        .partition_point(|&a| a <= x)
        .saturating_sub(1)
        .min(last);
    let frac = ((x - axis[k]) / (axis[k + 1] - axis[k])).clamp(0.0, 1.0);
    (k, frac)
}

/// Bilinear interpolation of the surface's z value at normalized `(x, y)`.
pub fn interpolate(surface: &SpectrogramSurface, x: f64, y: f64) -> f64 {
    let (ti, tf) = locate_on_axis(surface.time_axis(), x);
    let (fi, ff) = locate_on_axis(surface.freq_axis(), y);
    let p = surface.power();
    let lo = p[ti][fi] * (1.0 - ff) + p[ti][fi + 1] * ff;
    let hi = p[ti + 1][fi] * (1.0 - ff) + p[ti + 1][fi + 1] * ff;
    lo * (1.0 - tf) + hi * tf
}

/// Samples the surface on a uniform `n x n` grid (default pipeline size 150).
pub fn sample_surface(surface: &SpectrogramSurface, n: usize) -> Result<VertexGrid> {
    if n < 2 {
        return Err(Error::Parameter(format!(
            "grid size must be at least 2, got {n}"
        )));
    }
    let step = 1.0 / (n - 1) as f64;
    let mut positions = Vec::with_capacity(n * n);
    for j in 0..n {
        let y = j as f64 * step;
        for i in 0..n {
            let x = i as f64 * step;
            positions.push([x, y, interpolate(surface, x, y)]);
        }
    }
    Ok(VertexGrid { n, positions })
}

/// Delaunay-triangulates the grid's (x, y) projection; z rides along.
///
/// The predicates run on the integer lattice coordinates `(i, j)`, a uniform
/// scaling of the grid, so the cocircular quads are detected exactly and all
/// receive the same diagonal.
pub fn triangulate(grid: &VertexGrid) -> Result<TriangleMesh> {
    let n = grid.n;
    let lattice: Vec<[f64; 2]> = (0..n * n)
        .map(|k| [(k % n) as f64, (k / n) as f64])
        .collect();
    let d = delaunay(&lattice)?;
    TriangleMesh::new(grid.positions.clone(), d.triangles)
}

/// Delaunay-triangulates arbitrary points by their (x, y) projection.
pub fn triangulate_points(points: Vec<[f64; 3]>) -> Result<TriangleMesh> {
    let xy: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
    let d = delaunay(&xy)?;
    TriangleMesh::new(points, d.triangles)
}
