use std::io::Write;

use serde::{Deserialize, Serialize};

use super::energy::{derivatives, project_psd};
use super::jacobian::{singular_values, unfold_triangle};
use super::sparse::{conjugate_gradient, Block, BlockCsr};
use super::PlanarEmbedding;
use crate::distortion::DistortionMeasure;
use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;

/// Which vertices the optimizer may move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    Free,
    /// Boundary vertices keep their initial positions.
    Fixed,
}

/// How each iteration partitions the free vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockStrategy {
    /// One projected-Newton step on all free vertices at once.
    Global,
    /// A sweep of 2x2 Newton steps, one vertex at a time, in index order.
    SingleVertex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub energy: DistortionMeasure,
    pub max_iters: usize,
    /// Stop once an iteration lowers the energy by less than `tol` relative.
    pub tol: f64,
    pub boundary: BoundaryMode,
    pub strategy: BlockStrategy,
    /// Fraction of the first-fold step length used as the initial step.
    pub step_fraction: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            energy: DistortionMeasure::SymmetricDirichlet,
            max_iters: 200,
            tol: 1e-6,
            boundary: BoundaryMode::Free,
            strategy: BlockStrategy::Global,
            step_fraction: 0.8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub energy: f64,
    pub min_det: f64,
}

#[derive(Debug, Clone)]
pub struct Minimization {
    pub embedding: PlanarEmbedding,
    /// Row 0 is the initial embedding; one row per accepted iterate after that.
    pub trace: Vec<TraceRow>,
    pub converged: bool,
}

impl Minimization {
    pub fn initial_energy(&self) -> f64 {
        self.trace[0].energy
    }

    pub fn final_energy(&self) -> f64 {
        self.trace.last().expect("trace has the initial row").energy
    }

    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iteration,energy,min_det")?;
        for row in &self.trace {
            writeln!(
                out,
                "{},{},{}",
                row.iteration,
                crate::fmt_g9(row.energy),
                crate::fmt_g9(row.min_det)
            )?;
        }
        Ok(())
    }
}

/// Per-triangle data that does not change while the embedding moves.
struct Problem<'a> {
    triangles: &'a [[usize; 3]],
    /// Area weight, normalized to sum to one.
    weight: Vec<f64>,
    /// `J = sum_k q_k g_k^T` for the triangle's corners `q_k`.
    grads: Vec<[[f64; 2]; 3]>,
    measure: DistortionMeasure,
}

impl<'a> Problem<'a> {
    fn new(mesh: &'a TriangleMesh, measure: DistortionMeasure) -> Result<Self> {
        let v = mesh.vertices();
        let mut weight = Vec::with_capacity(mesh.n_triangles());
        let mut grads = Vec::with_capacity(mesh.n_triangles());
        for t in mesh.triangles() {
            let [s1, s2] = unfold_triangle(v[t[0]], v[t[1]], v[t[2]])?;
            let det = s1[0] * s2[1] - s2[0] * s1[1];
            // Rows of S^-1, so g_k = S^-T c_k.
            let inv = [[s2[1] / det, -s2[0] / det], [-s1[1] / det, s1[0] / det]];
            let g1 = inv[0];
            let g2 = inv[1];
            grads.push([[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2]);
            weight.push(det / 2.0);
        }
        let total: f64 = weight.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Geometry("mesh has zero total area".into()));
        }
        weight.iter_mut().for_each(|w| *w /= total);
        Ok(Self {
            triangles: mesh.triangles(),
            weight,
            grads,
            measure,
        })
    }

    fn jacobian(&self, t: usize, q: &[[f64; 2]]) -> [[f64; 2]; 2] {
        let tri = self.triangles[t];
        let mut j = [[0.0; 2]; 2];
        for (k, g) in self.grads[t].iter().enumerate() {
            let p = q[tri[k]];
            for r in 0..2 {
                for c in 0..2 {
                    j[r][c] += p[r] * g[c];
                }
            }
        }
        j
    }

    /// Weighted energy of triangle `t`, or `None` when it is folded.
    fn triangle_energy(&self, t: usize, q: &[[f64; 2]]) -> Option<f64> {
        let tri = self.triangles[t];
        if image_det(q, tri) <= 0.0 {
            return None;
        }
        let (s1, s2) = singular_values(self.jacobian(t, q));
        if !(s2 > 0.0) {
            return None;
        }
        let e = self.weight[t] * self.measure.eval(s1, s2);
        e.is_finite().then_some(e)
    }

    fn energy(&self, q: &[[f64; 2]]) -> Option<f64> {
        let mut total = 0.0;
        for t in 0..self.triangles.len() {
            total += self.triangle_energy(t, q)?;
        }
        Some(total)
    }

    /// Weighted gradient and PSD-projected Hessian blocks of triangle `t`
    /// with respect to its three corners.
    fn local_system(&self, t: usize, q: &[[f64; 2]]) -> ([[f64; 2]; 3], [[Block; 3]; 3]) {
        let der = derivatives(self.measure, self.jacobian(t, q));
        let w = self.weight[t];
        let h = project_psd(der.hessian);
        let g = &self.grads[t];
        let mut grad = [[0.0; 2]; 3];
        let mut hess = [[[[0.0; 2]; 2]; 3]; 3];
        for k in 0..3 {
            for r in 0..2 {
                grad[k][r] =
                    w * (der.gradient[2 * r] * g[k][0] + der.gradient[2 * r + 1] * g[k][1]);
            }
            for l in 0..3 {
                for r in 0..2 {
                    for rr in 0..2 {
                        let mut acc = 0.0;
                        for c in 0..2 {
                            for cc in 0..2 {
                                acc += h[2 * r + c][2 * rr + cc] * g[k][c] * g[l][cc];
                            }
                        }
                        hess[k][l][r][rr] = w * acc;
                    }
                }
            }
        }
        (grad, hess)
    }
}

fn image_det(q: &[[f64; 2]], tri: [usize; 3]) -> f64 {
    let (a, b, c) = (q[tri[0]], q[tri[1]], q[tri[2]]);
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn min_det(q: &[[f64; 2]], triangles: &[[usize; 3]]) -> f64 {
    triangles
        .iter()
        .map(|&t| image_det(q, t))
        .fold(f64::INFINITY, f64::min)
}

/// Smallest positive step at which triangle `tri` would fold when its corners
/// move along `dir`; infinite if it never does.
fn first_fold(q: &[[f64; 2]], dir: &[[f64; 2]], tri: [usize; 3]) -> f64 {
    let sub = |v: &[[f64; 2]], i: usize| [v[tri[i]][0] - v[tri[0]][0], v[tri[i]][1] - v[tri[0]][1]];
    let cross = |a: [f64; 2], b: [f64; 2]| a[0] * b[1] - a[1] * b[0];
    let (t1, t2) = (sub(q, 1), sub(q, 2));
    let (p1, p2) = (sub(dir, 1), sub(dir, 2));
    let c = cross(t1, t2);
    let b = cross(t1, p2) + cross(p1, t2);
    let a = cross(p1, p2);
    smallest_positive_root(a, b, c)
}

fn smallest_positive_root(a: f64, b: f64, c: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return f64::INFINITY;
    }
    if a.abs() <= 1e-14 * scale {
        return if b < 0.0 { -c / b } else { f64::INFINITY };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return f64::INFINITY;
    }
    let s = disc.sqrt();
    let qq = -0.5 * (b + b.signum() * s);
    let mut roots = [qq / a, if qq != 0.0 { c / qq } else { f64::INFINITY }];
    roots.sort_by(f64::total_cmp);
    roots
        .into_iter()
        .find(|&r| r > 0.0)
        .unwrap_or(f64::INFINITY)
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

/// Sum of area-weighted local distortions over all triangles, normalized by
/// total source area.
pub fn total_energy(
    mesh: &TriangleMesh,
    embedding: &PlanarEmbedding,
    measure: DistortionMeasure,
) -> Result<f64> {
    embedding.check_matches(mesh)?;
    let problem = Problem::new(mesh, measure)?;
    problem
        .energy(embedding.positions())
        .ok_or_else(|| Error::Domain("embedding folds a triangle".into()))
}

/// Lowers the configured distortion energy while keeping every triangle
/// positively oriented.
pub fn minimize_distortion(
    mesh: &TriangleMesh,
    init: &PlanarEmbedding,
    config: &SolverConfig,
) -> Result<Minimization> {
    init.check_matches(mesh)?;
    if !(config.tol >= 0.0) || !(config.step_fraction > 0.0 && config.step_fraction < 1.0) {
        return Err(Error::Parameter(
            "solver needs tol >= 0 and 0 < step_fraction < 1".into(),
        ));
    }
    let mut q = init.positions().to_vec();
    let det0 = min_det(&q, mesh.triangles());
    if !(det0 > 0.0) {
        return Err(Error::Precondition(format!(
            "initial embedding has a non-positive triangle determinant ({det0:e})"
        )));
    }
    let problem = Problem::new(mesh, config.energy)?;
    let mut energy = problem
        .energy(&q)
        .ok_or_else(|| Error::Precondition("initial energy is undefined".into()))?;
    let mut trace = vec![TraceRow {
        iteration: 0,
        energy,
        min_det: det0,
    }];
    let on_boundary = mesh.is_boundary_vertex();
    let free: Vec<bool> = on_boundary
        .iter()
        .map(|&b| config.boundary == BoundaryMode::Free || !b)
        .collect();
    let mut converged = false;
    let mut stepper: Box<dyn Stepper> = match config.strategy {
        BlockStrategy::Global => Box::new(GlobalStepper::new(mesh, &free)),
        BlockStrategy::SingleVertex => Box::new(VertexStepper::new(mesh, &free)),
    };
    for iteration in 1..=config.max_iters {
        let mut next = q.clone();
        if !stepper.step(&problem, &mut next, config.step_fraction) {
            converged = true;
            break;
        }
        let next_energy = problem
            .energy(&next)
            .ok_or_else(|| Error::Internal("accepted iterate folds a triangle".into()))?;
        let next_det = min_det(&next, mesh.triangles());
        if !(next_det > 0.0) {
            return Err(Error::Internal(format!(
                "accepted iterate has min det {next_det:e}"
            )));
        }
        if !(next_energy <= energy) {
            converged = true;
            break;
        }
        let decrease = energy - next_energy;
        q = next;
        trace.push(TraceRow {
            iteration,
            energy: next_energy,
            min_det: next_det,
        });
        let reference = energy.abs().max(f64::MIN_POSITIVE);
        energy = next_energy;
        if decrease <= config.tol * reference {
            converged = true;
            break;
        }
    }
    log::debug!(
        "minimized {} over {} iterations: {} -> {}",
        config.energy,
        trace.len() - 1,
        trace[0].energy,
        energy
    );
    Ok(Minimization {
        embedding: PlanarEmbedding::new(q)?,
        trace,
        converged,
    })
}

trait Stepper {
    /// Moves `q` to a lower-energy injective configuration; returns false when
    /// no progress is possible.
    fn step(&mut self, problem: &Problem<'_>, q: &mut [[f64; 2]], fraction: f64) -> bool;
}

struct GlobalStepper {
    /// Dof index per vertex, `usize::MAX` when the vertex is pinned.
    dof: Vec<usize>,
    matrix: BlockCsr,
}

impl GlobalStepper {
    fn new(mesh: &TriangleMesh, free: &[bool]) -> Self {
        let mut dof = vec![usize::MAX; free.len()];
        let mut count = 0;
        for (v, &f) in free.iter().enumerate() {
            if f {
                dof[v] = count;
                count += 1;
            }
        }
        let neighbors = mesh.vertex_neighbors();
        let mut pattern = vec![Vec::new(); count];
        for (v, nbrs) in neighbors.iter().enumerate() {
            if dof[v] == usize::MAX {
                continue;
            }
            let row = &mut pattern[dof[v]];
            row.push(dof[v]);
            row.extend(
                nbrs.iter()
                    .filter(|&&w| dof[w] != usize::MAX)
                    .map(|&w| dof[w]),
            );
            row.sort_unstable();
            row.dedup();
        }
        Self {
            dof,
            matrix: BlockCsr::with_pattern(&pattern),
        }
    }
}

impl Stepper for GlobalStepper {
    fn step(&mut self, problem: &Problem<'_>, q: &mut [[f64; 2]], fraction: f64) -> bool {
        let n = self.matrix.n_rows();
        if n == 0 {
            return false;
        }
        self.matrix.vals.iter_mut().for_each(|b| *b = [[0.0; 2]; 2]);
        let mut grad = vec![[0.0; 2]; n];
        for (t, tri) in problem.triangles.iter().enumerate() {
            let (g, h) = problem.local_system(t, q);
            for k in 0..3 {
                let dk = self.dof[tri[k]];
                if dk == usize::MAX {
                    continue;
                }
                grad[dk][0] += g[k][0];
                grad[dk][1] += g[k][1];
                for l in 0..3 {
                    let dl = self.dof[tri[l]];
                    if dl != usize::MAX {
                        self.matrix.add(dk, dl, &h[k][l]);
                    }
                }
            }
        }
        let g_norm = grad
            .iter()
            .map(|g| g[0] * g[0] + g[1] * g[1])
            .sum::<f64>()
            .sqrt();
        if !(g_norm > 1e-14) {
            return false;
        }
        let mean_diag = (0..n)
            .map(|r| {
                let d = self.matrix.diag(r);
                d[0][0] + d[1][1]
            })
            .sum::<f64>()
            / (2 * n) as f64;
        let shift = 1e-9 * mean_diag.max(f64::MIN_POSITIVE);
        let rhs: Vec<[f64; 2]> = grad.iter().map(|g| [-g[0], -g[1]]).collect();
        let mut step = vec![[0.0; 2]; n];
        let forcing = g_norm.sqrt().clamp(1e-10, 1e-1);
        conjugate_gradient(&self.matrix, shift, &rhs, &mut step, forcing, 20 * n + 200);
        let mut slope: f64 = step
            .iter()
            .zip(&grad)
            .map(|(p, g)| p[0] * g[0] + p[1] * g[1])
            .sum();
        if !(slope < 0.0) {
            step = rhs;
            slope = -g_norm * g_norm;
        }
        let mut dir = vec![[0.0; 2]; q.len()];
        for (v, &d) in self.dof.iter().enumerate() {
            if d != usize::MAX {
                dir[v] = step[d];
            }
        }
        let alpha_max = problem
            .triangles
            .iter()
            .map(|&t| first_fold(q, &dir, t))
            .fold(f64::INFINITY, f64::min);
        let e0 = match problem.energy(q) {
            Some(e) => e,
            None => return false,
        };
        let mut alpha = (fraction * alpha_max).min(1.0);
        let mut trial = q.to_vec();
        for _ in 0..MAX_BACKTRACKS {
            for v in 0..q.len() {
                trial[v] = [q[v][0] + alpha * dir[v][0], q[v][1] + alpha * dir[v][1]];
            }
            if let Some(e) = problem.energy(&trial) {
                if e <= e0 + ARMIJO * alpha * slope && e < e0 {
                    q.copy_from_slice(&trial);
                    return true;
                }
            }
            alpha *= 0.5;
        }
        false
    }
}

struct VertexStepper {
    free: Vec<usize>,
    incident: Vec<Vec<usize>>,
}

impl VertexStepper {
    fn new(mesh: &TriangleMesh, free: &[bool]) -> Self {
        Self {
            free: (0..free.len()).filter(|&v| free[v]).collect(),
            incident: mesh.vertex_triangles(),
        }
    }
}

impl Stepper for VertexStepper {
    fn step(&mut self, problem: &Problem<'_>, q: &mut [[f64; 2]], fraction: f64) -> bool {
        let mut moved = false;
        for &v in &self.free {
            let stencil = &self.incident[v];
            let local_energy = |q: &[[f64; 2]]| -> Option<f64> {
                stencil.iter().map(|&t| problem.triangle_energy(t, q)).sum()
            };
            let mut g = [0.0; 2];
            let mut h = [[0.0; 2]; 2];
            for &t in stencil {
                let k = problem.triangles[t]
                    .iter()
                    .position(|&w| w == v)
                    .expect("incident");
                let (tg, th) = problem.local_system(t, q);
                for r in 0..2 {
                    g[r] += tg[k][r];
                    for c in 0..2 {
                        h[r][c] += th[k][k][r][c];
                    }
                }
            }
            if !(g[0].abs() + g[1].abs() > 1e-16) {
                continue;
            }
            let shift = 1e-9 * (h[0][0] + h[1][1]).max(f64::MIN_POSITIVE);
            h[0][0] += shift;
            h[1][1] += shift;
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            let mut p = [
                -(h[1][1] * g[0] - h[0][1] * g[1]) / det,
                -(-h[1][0] * g[0] + h[0][0] * g[1]) / det,
            ];
            let mut slope = p[0] * g[0] + p[1] * g[1];
            if !(slope < 0.0) {
                p = [-g[0], -g[1]];
                slope = -(g[0] * g[0] + g[1] * g[1]);
            }
            let e0 = match local_energy(q) {
                Some(e) => e,
                None => return moved,
            };
            let alpha_max = stencil
                .iter()
                .map(|&t| {
                    let tri = problem.triangles[t];
                    let k = tri.iter().position(|&w| w == v).expect("incident");
                    // Rotate so the moving corner is first; the fold step only
                    // depends on the orientation-preserving cyclic order.
                    let rot = [tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]];
                    let local = [q[rot[0]], q[rot[1]], q[rot[2]]];
                    let dir = [p, [0.0; 2], [0.0; 2]];
                    first_fold(&local, &dir, [0, 1, 2])
                })
                .fold(f64::INFINITY, f64::min);
            let mut alpha = (fraction * alpha_max).min(1.0);
            let origin = q[v];
            for _ in 0..MAX_BACKTRACKS {
                q[v] = [origin[0] + alpha * p[0], origin[1] + alpha * p[1]];
                match local_energy(q) {
                    Some(e) if e <= e0 + ARMIJO * alpha * slope && e < e0 => {
                        moved = true;
                        break;
                    }
                    _ => {
                        q[v] = origin;
                        alpha *= 0.5;
                    }
                }
            }
        }
        moved
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots() {
        // (1 - a)(2 - a) = 2 - 3a + a^2
        assert!((smallest_positive_root(1.0, -3.0, 2.0) - 1.0).abs() < 1e-15);
        assert_eq!(smallest_positive_root(0.0, 1.0, 1.0), f64::INFINITY);
        assert!((smallest_positive_root(0.0, -2.0, 1.0) - 0.5).abs() < 1e-15);
        assert_eq!(smallest_positive_root(1.0, 0.0, 1.0), f64::INFINITY);
    }

    #[test]
    fn fold_step_of_collapsing_corner() {
        let q = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let dir = [[0.0; 2], [0.0; 2], [0.0, -1.0]];
        assert!((first_fold(&q, &dir, [0, 1, 2]) - 1.0).abs() < 1e-15);
    }
}
