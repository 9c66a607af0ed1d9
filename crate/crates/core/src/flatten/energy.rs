//! Gradient and Hessian of each local distortion measure as a
//! function of the Jacobian entries `(J00, J01, J10, J11)`.

use nalgebra::{Matrix4, SymmetricEigen};

use crate::distortion::DistortionMeasure;

/// Derivatives of one measure at one Jacobian.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EnergyDerivatives {
    pub gradient: [f64; 4],
    pub hessian: [[f64; 4]; 4],
}

/// First and second partials of `f(I, D)` with `I = |J|_F^2`, `D = det J`.
struct Partials {
    f_i: f64,
    f_d: f64,
    f_ii: f64,
    f_id: f64,
    f_dd: f64,
}

fn partials(measure: DistortionMeasure, i: f64, d: f64) -> Partials {
    use DistortionMeasure::*;
    let zero = Partials {
        f_i: 0.0,
        f_d: 0.0,
        f_ii: 0.0,
        f_id: 0.0,
        f_dd: 0.0,
    };
    match measure {
        Arap => Partials {
            f_i: 2.0 * i - 2.0,
            f_d: -4.0 * d,
            f_ii: 2.0,
            f_id: 0.0,
            f_dd: -4.0,
        },
        SymmetricDirichlet => Partials {
            f_i: (1.0 + 1.0 / (d * d)) / 4.0,
            f_d: -i / (2.0 * d.powi(3)),
            f_ii: 0.0,
            f_id: -1.0 / (2.0 * d.powi(3)),
            f_dd: 3.0 * i / (2.0 * d.powi(4)),
        },
        Mips => Partials {
            f_i: 1.0 / d,
            f_d: -i / (d * d),
            f_ii: 0.0,
            f_id: -1.0 / (d * d),
            f_dd: 2.0 * i / d.powi(3),
        },
        Dirichlet => Partials { f_i: 0.5, ..zero },
        ConformalFactor => {
            let u = i + 2.0 * d;
            let f_u = 0.25 / u.sqrt();
            let f_uu = -0.125 / u.powf(1.5);
            Partials {
                f_i: f_u,
                f_d: 2.0 * f_u,
                f_ii: f_uu,
                f_id: 2.0 * f_uu,
                f_dd: 4.0 * f_uu,
            }
        }
        AreaDistortion => {
            if d >= 1.0 {
                Partials { f_d: 1.0, ..zero }
            } else {
                Partials {
                    f_d: -1.0 / (d * d),
                    f_dd: 2.0 / d.powi(3),
                    ..zero
                }
            }
        }
        QuasiIsometric | QuasiConformal => sigma_chain(measure, i, d),
    }
}

/// Partials of a measure given in terms of `(s1, s2)`, routed through
/// `a = s1 + s2 = sqrt(I + 2D)` and `b = s1 - s2 = sqrt(I - 2D)`.
/// `b` is floored away from zero where the singular values coincide.
fn sigma_chain(measure: DistortionMeasure, i: f64, d: f64) -> Partials {
    let a = (i + 2.0 * d).max(0.0).sqrt();
    let b = (i - 2.0 * d).max(0.0).sqrt().max(1e-6 * a);
    let (s1, s2) = ((a + b) / 2.0, (a - b) / 2.0);
    // (g1, g2, g11, g12, g22)
    let (g1, g2, g11, g12, g22) = match measure {
        DistortionMeasure::QuasiConformal => (
            1.0 / s2,
            -s1 / (s2 * s2),
            0.0,
            -1.0 / (s2 * s2),
            2.0 * s1 / s2.powi(3),
        ),
        _ => {
            if s1 >= 1.0 / s2 {
                (1.0, 0.0, 0.0, 0.0, 0.0)
            } else {
                (0.0, -1.0 / (s2 * s2), 0.0, 0.0, 2.0 / s2.powi(3))
            }
        }
    };
    let f_a = (g1 + g2) / 2.0;
    let f_b = (g1 - g2) / 2.0;
    let f_aa = (g11 + 2.0 * g12 + g22) / 4.0;
    let f_ab = (g11 - g22) / 4.0;
    let f_bb = (g11 - 2.0 * g12 + g22) / 4.0;
    let (a_i, a_d) = (0.5 / a, 1.0 / a);
    let (b_i, b_d) = (0.5 / b, -1.0 / b);
    let (a3, b3) = (a.powi(3), b.powi(3));
    let (a_ii, a_id, a_dd) = (-0.25 / a3, -0.5 / a3, -1.0 / a3);
    let (b_ii, b_id, b_dd) = (-0.25 / b3, 0.5 / b3, -1.0 / b3);
    Partials {
        f_i: f_a * a_i + f_b * b_i,
        f_d: f_a * a_d + f_b * b_d,
        f_ii: f_aa * a_i * a_i
            + 2.0 * f_ab * a_i * b_i
            + f_bb * b_i * b_i
            + f_a * a_ii
            + f_b * b_ii,
        f_id: f_aa * a_i * a_d
            + f_ab * (a_i * b_d + a_d * b_i)
            + f_bb * b_i * b_d
            + f_a * a_id
            + f_b * b_id,
        f_dd: f_aa * a_d * a_d
            + 2.0 * f_ab * a_d * b_d
            + f_bb * b_d * b_d
            + f_a * a_dd
            + f_b * b_dd,
    }
}

/// Gradient and Hessian at `j` (row-major). Requires `det j > 0`.
pub(crate) fn derivatives(measure: DistortionMeasure, j: [[f64; 2]; 2]) -> EnergyDerivatives {
    let v = [j[0][0], j[0][1], j[1][0], j[1][1]];
    let i = v.iter().map(|x| x * x).sum::<f64>();
    let d = v[0] * v[3] - v[1] * v[2];
    let p = partials(measure, i, d);
    let gi = [2.0 * v[0], 2.0 * v[1], 2.0 * v[2], 2.0 * v[3]];
    let gd = [v[3], -v[2], -v[1], v[0]];
    let mut gradient = [0.0; 4];
    let mut hessian = [[0.0; 4]; 4];
    for r in 0..4 {
        gradient[r] = p.f_i * gi[r] + p.f_d * gd[r];
        for c in 0..4 {
            hessian[r][c] = p.f_ii * gi[r] * gi[c]
                + p.f_id * (gi[r] * gd[c] + gd[r] * gi[c])
                + p.f_dd * gd[r] * gd[c];
        }
        hessian[r][r] += 2.0 * p.f_i;
    }
    hessian[0][3] += p.f_d;
    hessian[3][0] += p.f_d;
    hessian[1][2] -= p.f_d;
    hessian[2][1] -= p.f_d;
    EnergyDerivatives { gradient, hessian }
}

/// Clamps negative eigenvalues of a symmetric 4x4 matrix to zero.
pub(crate) fn project_psd(h: [[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let m = Matrix4::from_fn(|r, c| h[r][c]);
    let eig = SymmetricEigen::new(m);
    if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
        return h;
    }
    let clamped = eig.eigenvalues.map(|l| l.max(0.0));
    let p = eig.eigenvectors * Matrix4::from_diagonal(&clamped) * eig.eigenvectors.transpose();
    let mut out = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = 0.5 * (p[(r, c)] + p[(c, r)]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flatten::singular_values;

    fn value_at(m: DistortionMeasure, v: [f64; 4]) -> f64 {
        let (s1, s2) = singular_values([[v[0], v[1]], [v[2], v[3]]]);
        m.eval(s1, s2)
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let j = [[1.3, 0.4], [-0.2, 0.9]];
        let v0 = [j[0][0], j[0][1], j[1][0], j[1][1]];
        let h = 1e-5;
        for m in DistortionMeasure::ALL {
            let der = derivatives(m, j);
            for r in 0..4 {
                let mut vp = v0;
                let mut vm = v0;
                vp[r] += h;
                vm[r] -= h;
                let fd = (value_at(m, vp) - value_at(m, vm)) / (2.0 * h);
                assert!(
                    (fd - der.gradient[r]).abs() < 1e-6 * (1.0 + fd.abs()),
                    "{m} grad[{r}]: {fd} vs {}",
                    der.gradient[r]
                );
                let gp = derivatives(m, [[vp[0], vp[1]], [vp[2], vp[3]]]).gradient;
                let gm = derivatives(m, [[vm[0], vm[1]], [vm[2], vm[3]]]).gradient;
                for c in 0..4 {
                    let fd = (gp[c] - gm[c]) / (2.0 * h);
                    assert!(
                        (fd - der.hessian[r][c]).abs() < 1e-5 * (1.0 + fd.abs()),
                        "{m} hess[{r}][{c}]: {fd} vs {}",
                        der.hessian[r][c]
                    );
                }
            }
        }
    }

    #[test]
    fn projection_is_psd_and_idempotent_on_psd() {
        let der = derivatives(DistortionMeasure::Arap, [[0.5, 0.1], [0.0, 0.6]]);
        let p = project_psd(der.hessian);
        let eig = SymmetricEigen::new(Matrix4::from_fn(|r, c| p[r][c]));
        assert!(eig.eigenvalues.iter().all(|&l| l > -1e-12));
        assert_eq!(
            project_psd(p).map(|r| r.map(|x| (x * 1e9).round())),
            p.map(|r| r.map(|x| (x * 1e9).round()))
        );
    }
}
