//! Incremental (Bowyer-Watson) Delaunay triangulation in the plane.
//!
//! Orientation and in-circle tests are exact. Cocircular configurations are
//! resolved by lifting every point to the paraboloid with an infinitesimal extra
//! height whose magnitude decreases with the point's lexicographic `(x, y)` rank,
//! which makes the triangulation unique. On a uniform grid every quad is split by
//! the diagonal that avoids its lexicographically smallest corner.
//!
//! The convex hull is closed off with ghost triangles sharing a vertex at
//! infinity, so points outside the current hull need no bounding triangle.

use std::collections::HashMap;

use robust::{incircle, orient2d, Coord};

use crate::error::{Error, Result};

const GHOST: usize = usize::MAX;
const NONE: usize = usize::MAX;

/// Triangles (counterclockwise) and the counterclockwise hull loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delaunay {
    pub triangles: Vec<[usize; 3]>,
    pub hull: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Tri {
    v: [usize; 3],
    // n[i] is the triangle across the edge opposite v[i].
    n: [usize; 3],
    alive: bool,
}

impl Tri {
    fn ghost_slot(&self) -> Option<usize> {
        self.v.iter().position(|&v| v == GHOST)
    }
}

struct Builder<'a> {
    pts: &'a [[f64; 2]],
    rank: Vec<usize>,
    tris: Vec<Tri>,
    free: Vec<usize>,
    stamp: Vec<u32>,
    epoch: u32,
    last: usize,
}

fn coord(p: [f64; 2]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

impl<'a> Builder<'a> {
    fn orient(&self, a: usize, b: usize, c: usize) -> f64 {
        orient2d(coord(self.pts[a]), coord(self.pts[b]), coord(self.pts[c]))
    }

    /// Is `d` inside the circumcircle of counterclockwise `(a, b, c)`, after perturbation?
    fn in_circle(&self, a: usize, b: usize, c: usize, d: usize) -> bool {
        let s = incircle(
            coord(self.pts[a]),
            coord(self.pts[b]),
            coord(self.pts[c]),
            coord(self.pts[d]),
        );
        if s != 0.0 {
            return s > 0.0;
        }
        // Derivative of the lifted determinant with respect to each point's height.
        let mut order = [
            (self.rank[a], 0),
            (self.rank[b], 1),
            (self.rank[c], 2),
            (self.rank[d], 3),
        ];
        order.sort_unstable();
        for &(_, which) in &order {
            let cofactor = match which {
                0 => self.orient(b, c, d),
                1 => -self.orient(a, c, d),
                2 => self.orient(a, b, d),
                _ => -self.orient(a, b, c),
            };
            if cofactor != 0.0 {
                return cofactor > 0.0;
            }
        }
        false
    }

    fn conflicts(&self, t: usize, p: usize) -> bool {
        let tri = &self.tris[t];
        match tri.ghost_slot() {
            None => self.in_circle(tri.v[0], tri.v[1], tri.v[2], p),
            Some(g) => {
                // Hull edge a->b with the outside on its left.
                let a = tri.v[(g + 1) % 3];
                let b = tri.v[(g + 2) % 3];
                let o = self.orient(a, b, p);
                if o != 0.0 {
                    return o > 0.0;
                }
                let (pa, pb, pp) = (self.pts[a], self.pts[b], self.pts[p]);
                let along_a = (pp[0] - pa[0]) * (pb[0] - pa[0]) + (pp[1] - pa[1]) * (pb[1] - pa[1]);
                let along_b = (pp[0] - pb[0]) * (pa[0] - pb[0]) + (pp[1] - pb[1]) * (pa[1] - pb[1]);
                along_a > 0.0 && along_b > 0.0
            }
        }
    }

    fn alloc(&mut self, tri: Tri) -> usize {
        if let Some(i) = self.free.pop() {
            self.tris[i] = tri;
            self.stamp[i] = 0;
            i
        } else {
            self.tris.push(tri);
            self.stamp.push(0);
            self.tris.len() - 1
        }
    }

    /// Finds a triangle in conflict with `p` by a visibility walk.
    fn locate(&self, p: usize) -> usize {
        let mut t = self.last;
        if let Some(g) = self.tris[t].ghost_slot() {
            t = self.tris[t].n[g];
        }
        let budget = 4 * self.tris.len() + 16;
        for step in 0..budget {
            let tri = &self.tris[t];
            let mut moved = false;
            for k in 0..3 {
                let i = (k + step) % 3;
                let a = tri.v[(i + 1) % 3];
                let b = tri.v[(i + 2) % 3];
                if self.orient(a, b, p) < 0.0 {
                    t = tri.n[i];
                    moved = true;
                    break;
                }
            }
            if !moved || self.tris[t].ghost_slot().is_some() {
                return t;
            }
        }
        // Walk did not settle; fall back to a scan.
        (0..self.tris.len())
            .find(|&i| self.tris[i].alive && self.conflicts(i, p))
            .unwrap_or(self.last)
    }

    fn insert(&mut self, p: usize) -> Result<()> {
        let seed = self.locate(p);
        if !self.conflicts(seed, p) {
            return Err(Error::Internal(format!(
                "point {p} located outside its conflict region"
            )));
        }
        self.epoch += 1;
        let epoch = self.epoch;
        let mut cavity = vec![seed];
        self.stamp[seed] = epoch;
        // (x, y, outer triangle, slot in outer pointing back)
        let mut rim: Vec<(usize, usize, usize, usize)> = Vec::new();
        let mut k = 0;
        while k < cavity.len() {
            let t = cavity[k];
            k += 1;
            for i in 0..3 {
                let nb = self.tris[t].n[i];
                let (x, y) = (self.tris[t].v[(i + 1) % 3], self.tris[t].v[(i + 2) % 3]);
                if self.stamp[nb] == epoch {
                    continue;
                }
                if self.conflicts(nb, p) {
                    self.stamp[nb] = epoch;
                    cavity.push(nb);
                } else {
                    let back = self.tris[nb]
                        .n
                        .iter()
                        .position(|&m| m == t)
                        .ok_or_else(|| Error::Internal("broken adjacency".into()))?;
                    rim.push((x, y, nb, back));
                }
            }
        }
        for &t in &cavity {
            self.tris[t].alive = false;
            self.free.push(t);
        }
        let mut by_start: HashMap<usize, usize> = HashMap::with_capacity(rim.len());
        let mut by_end: HashMap<usize, usize> = HashMap::with_capacity(rim.len());
        let mut created = Vec::with_capacity(rim.len());
        for &(x, y, outer, back) in &rim {
            if x != GHOST && y != GHOST && self.orient(x, y, p) <= 0.0 {
                return Err(Error::Internal(format!(
                    "cavity of point {p} is not star-shaped"
                )));
            }
            let t = self.alloc(Tri {
                v: [x, y, p],
                n: [NONE, NONE, outer],
                alive: true,
            });
            self.tris[outer].n[back] = t;
            by_start.insert(x, t);
            by_end.insert(y, t);
            created.push(t);
        }
        for &t in &created {
            let [x, y, _] = self.tris[t].v;
            let across_yp = *by_start
                .get(&y)
                .ok_or_else(|| Error::Internal("open cavity rim".into()))?;
            let across_px = *by_end
                .get(&x)
                .ok_or_else(|| Error::Internal("open cavity rim".into()))?;
            self.tris[t].n[0] = across_yp;
            self.tris[t].n[1] = across_px;
        }
        self.last = created
            .iter()
            .copied()
            .find(|&t| self.tris[t].ghost_slot().is_none())
            .unwrap_or(created[0]);
        Ok(())
    }
}

/// Delaunay triangulation of distinct planar points (at least three, not all collinear).
pub fn delaunay(points: &[[f64; 2]]) -> Result<Delaunay> {
    if points.len() < 3 {
        return Err(Error::InputSize(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::Data("non-finite point coordinate".into()));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a][0]
            .total_cmp(&points[b][0])
            .then(points[a][1].total_cmp(&points[b][1]))
    });
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            return Err(Error::Data(format!(
                "duplicate point ({}, {}) at indices {} and {}",
                points[w[0]][0], points[w[0]][1], w[0], w[1]
            )));
        }
    }
    let mut rank = vec![0; points.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let mut b = Builder {
        pts: points,
        rank,
        tris: Vec::with_capacity(2 * points.len() + 8),
        free: Vec::new(),
        stamp: Vec::new(),
        epoch: 0,
        last: 0,
    };

    let (p0, p1) = (order[0], order[1]);
    let k = (2..order.len())
        .find(|&k| b.orient(p0, p1, order[k]) != 0.0)
        .ok_or_else(|| Error::Geometry("all points are collinear".into()))?;
    let p2 = order[k];
    let first = if b.orient(p0, p1, p2) > 0.0 {
        [p0, p1, p2]
    } else {
        [p1, p0, p2]
    };
    let solid = b.alloc(Tri {
        v: first,
        n: [NONE; 3],
        alive: true,
    });
    let mut ghosts = [0; 3];
    for i in 0..3 {
        let (u, v) = (first[(i + 1) % 3], first[(i + 2) % 3]);
        ghosts[i] = b.alloc(Tri {
            v: [v, u, GHOST],
            n: [NONE, NONE, solid],
            alive: true,
        });
        b.tris[solid].n[i] = ghosts[i];
    }
    // Ghost [v, u, G]: across u->G is the ghost whose hull edge starts at u.
    for i in 0..3 {
        let g = ghosts[i];
        let [v, u, _] = b.tris[g].v;
        let next = ghosts
            .iter()
            .copied()
            .find(|&h| b.tris[h].v[0] == u)
            .unwrap();
        let prev = ghosts
            .iter()
            .copied()
            .find(|&h| b.tris[h].v[1] == v)
            .unwrap();
        b.tris[g].n[0] = next;
        b.tris[g].n[1] = prev;
    }
    b.last = solid;

    for &p in order
        .iter()
        .filter(|&&p| p != first[0] && p != first[1] && p != first[2])
    {
        b.insert(p)?;
    }

    let mut triangles = Vec::with_capacity(2 * points.len());
    let mut next_on_hull: HashMap<usize, usize> = HashMap::new();
    for tri in b.tris.iter().filter(|t| t.alive) {
        match tri.ghost_slot() {
            None => triangles.push(tri.v),
            Some(g) => {
                let a = tri.v[(g + 1) % 3];
                let c = tri.v[(g + 2) % 3];
                next_on_hull.insert(c, a);
            }
        }
    }
    let start = *next_on_hull
        .keys()
        .min()
        .ok_or_else(|| Error::Internal("empty hull".into()))?;
    let mut hull = vec![start];
    let mut cur = next_on_hull[&start];
    while cur != start {
        hull.push(cur);
        cur = next_on_hull[&cur];
        if hull.len() > next_on_hull.len() {
            return Err(Error::Internal("hull does not close".into()));
        }
    }
    Ok(Delaunay { triangles, hull })
}
