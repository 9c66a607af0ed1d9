//! Minimal symmetric sparse storage with 2x2 blocks and a preconditioned CG.

pub(crate) type Block = [[f64; 2]; 2];

/// Symmetric block-sparse matrix; row `r` stores its blocks at
/// `cols[ptr[r]..ptr[r + 1]]` sorted by column.
#[derive(Debug, Clone)]
pub(crate) struct BlockCsr {
    pub ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<Block>,
}

impl BlockCsr {
    /// Empty matrix with the given sorted column pattern per block row.
    pub fn with_pattern(rows: &[Vec<usize>]) -> Self {
        let mut ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        ptr.push(0);
        for r in rows {
            cols.extend_from_slice(r);
            ptr.push(cols.len());
        }
        let vals = vec![[[0.0; 2]; 2]; cols.len()];
        Self { ptr, cols, vals }
    }

    pub fn n_rows(&self) -> usize {
        self.ptr.len() - 1
    }

    pub fn add(&mut self, r: usize, c: usize, block: &Block) {
        let row = &self.cols[self.ptr[r]..self.ptr[r + 1]];
        let k = self.ptr[r] + row.binary_search(&c).expect("pattern covers block");
        for i in 0..2 {
            for j in 0..2 {
                self.vals[k][i][j] += block[i][j];
            }
        }
    }

    pub fn diag(&self, r: usize) -> Block {
        let row = &self.cols[self.ptr[r]..self.ptr[r + 1]];
        row.binary_search(&r)
            .map(|k| self.vals[self.ptr[r] + k])
            .unwrap_or([[0.0; 2]; 2])
    }

    pub fn mul(&self, x: &[[f64; 2]], y: &mut [[f64; 2]]) {
        for r in 0..self.n_rows() {
            let mut acc = [0.0; 2];
            for k in self.ptr[r]..self.ptr[r + 1] {
                let b = &self.vals[k];
                let v = x[self.cols[k]];
                acc[0] += b[0][0] * v[0] + b[0][1] * v[1];
                acc[1] += b[1][0] * v[0] + b[1][1] * v[1];
            }
            y[r] = acc;
        }
    }
}

fn dot(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| p[0] * q[0] + p[1] * q[1])
        .sum()
}

fn invert(b: &Block) -> Option<Block> {
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    if !(det.abs() > 0.0) || !det.is_finite() {
        return None;
    }
    Some([
        [b[1][1] / det, -b[0][1] / det],
        [-b[1][0] / det, b[0][0] / det],
    ])
}

pub(crate) struct CgOutcome {
    pub iterations: usize,
    pub converged: bool,
}

/// Solves `(A + shift I) x = b` by block-Jacobi preconditioned conjugate
/// gradients, starting from `x`. Stops when `|r| <= tol * |b|`.
pub(crate) fn conjugate_gradient(
    a: &BlockCsr,
    shift: f64,
    b: &[[f64; 2]],
    x: &mut [[f64; 2]],
    tol: f64,
    max_iter: usize,
) -> CgOutcome {
    let n = a.n_rows();
    let precond: Vec<Block> = (0..n)
        .map(|r| {
            let mut d = a.diag(r);
            d[0][0] += shift;
            d[1][1] += shift;
            invert(&d).unwrap_or([[1.0, 0.0], [0.0, 1.0]])
        })
        .collect();
    let apply = |v: &[[f64; 2]], out: &mut [[f64; 2]]| {
        a.mul(v, out);
        for (o, vi) in out.iter_mut().zip(v) {
            o[0] += shift * vi[0];
            o[1] += shift * vi[1];
        }
    };
    let precondition = |r: &[[f64; 2]], z: &mut [[f64; 2]]| {
        for ((zi, ri), m) in z.iter_mut().zip(r).zip(&precond) {
            *zi = [
                m[0][0] * ri[0] + m[0][1] * ri[1],
                m[1][0] * ri[0] + m[1][1] * ri[1],
            ];
        }
    };
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = [0.0; 2]);
        return CgOutcome {
            iterations: 0,
            converged: true,
        };
    }
    let mut ax = vec![[0.0; 2]; n];
    apply(x, &mut ax);
    let mut r: Vec<[f64; 2]> = b
        .iter()
        .zip(&ax)
        .map(|(p, q)| [p[0] - q[0], p[1] - q[1]])
        .collect();
    let mut z = vec![[0.0; 2]; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![[0.0; 2]; n];
    for it in 0..max_iter {
        if dot(&r, &r).sqrt() <= tol * b_norm {
            return CgOutcome {
                iterations: it,
                converged: true,
            };
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return CgOutcome {
                iterations: it,
                converged: false,
            };
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i][0] += alpha * p[i][0];
            x[i][1] += alpha * p[i][1];
            r[i][0] -= alpha * ap[i][0];
            r[i][1] -= alpha * ap[i][1];
        }
        precondition(&r, &mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i][0] = z[i][0] + beta * p[i][0];
            p[i][1] = z[i][1] + beta * p[i][1];
        }
    }
    CgOutcome {
        iterations: max_iter,
        converged: dot(&r, &r).sqrt() <= tol * b_norm,
    }
}
