use super::form::Vec8;
use super::tau::{phi0_eval, tau_eval, TauValue};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub fn dot(a: &Vec8, b: &Vec8) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn axpy(alpha: f64, x: &Vec8, y: &mut Vec8) {
    for k in 0..8 {
        y[k] += alpha * x[k];
    }
}

pub fn norm8(a: &Vec8) -> f64 {
    dot(a, a).sqrt()
}

/// Gram–Schmidt (two passes) of the rows. Returns the orthonormal rows and the
/// upper triangular factor `R` with `rows = Rᵀ·q`, i.e. `rows[j] = Σ_{i≤j} R[i][j] q[i]`.
pub fn gram_schmidt4(rows: &[Vec8; 4]) -> Option<([Vec8; 4], [[f64; 4]; 4])> {
    let mut q = [[0.0; 8]; 4];
    let mut r = [[0.0; 4]; 4];
    for j in 0..4 {
        let mut w = rows[j];
        for _ in 0..2 {
            for i in 0..j {
                let c = dot(&q[i], &w);
                r[i][j] += c;
                axpy(-c, &q[i], &mut w);
            }
        }
        let n = norm8(&w);
        if !(n > 1e-14) {
            return None;
        }
        r[j][j] = n;
        q[j] = w.map(|x| x / n);
    }
    Some((q, r))
}

/// Inverse of an upper triangular 4×4 matrix.
pub fn upper_inverse(r: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    for j in 0..4 {
        m[j][j] = 1.0 / r[j][j];
        for i in (0..j).rev() {
            let s: f64 = (i + 1..=j).map(|k| r[i][k] * m[k][j]).sum();
            m[i][j] = -s / r[i][i];
        }
    }
    m
}

/// Deterministic orthonormal completion of an orthonormal 4-frame to ℝ⁸.
pub fn orthonormal_complement(frame: &[Vec8; 4]) -> [Vec8; 4] {
    let mut basis: Vec<Vec8> = frame.to_vec();
    let mut out = Vec::with_capacity(4);
    // greedily take the standard vectors with the largest residual
    let mut cand: Vec<(usize, f64)> = (0..8)
        .map(|k| {
            let res: f64 = 1.0 - frame.iter().map(|f| f[k] * f[k]).sum::<f64>();
            (k, res)
        })
        .collect();
    cand.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    for (k, _) in cand {
        if out.len() == 4 {
            break;
        }
        let mut w = [0.0; 8];
        w[k] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                axpy(-c, b, &mut w);
            }
        }
        let n = norm8(&w);
        if n > 1e-6 {
            let w = w.map(|x| x / n);
            basis.push(w);
            out.push(w);
        }
    }
    let mut n: [Vec8; 4] = [out[0], out[1], out[2], out[3]];
    if det8(frame, &n) < 0.0 {
        n[3] = n[3].map(|x| -x);
    }
    n
}

/// Determinant of the 8×8 matrix whose rows are `a` followed by `b`.
pub fn det8(a: &[Vec8; 4], b: &[Vec8; 4]) -> f64 {
    let m = nalgebra::DMatrix::from_fn(8, 8, |i, j| if i < 4 { a[i][j] } else { b[i - 4][j] });
    m.determinant()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientedPlane4 {
    pub frame: [Vec8; 4],
}

impl OrientedPlane4 {
    pub fn new(frame: [Vec8; 4]) -> Result<Self> {
        let mut dev: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((dot(&frame[i], &frame[j]) - target).abs());
            }
        }
        if dev > 1e-12 {
            return Err(Error::NotOrthonormal(dev));
        }
        Ok(Self { frame })
    }

    /// Orientation-preserving orthonormalization of four independent vectors.
    pub fn from_vectors(v: &[Vec8; 4]) -> Result<Self> {
        let (q, _) = gram_schmidt4(v).ok_or(Error::NotOrthonormal(f64::INFINITY))?;
        Ok(Self { frame: q })
    }

    pub fn span_of(indices: [usize; 4]) -> Self {
        let frame = indices.map(|i| {
            let mut e = [0.0; 8];
            e[i] = 1.0;
            e
        });
        Self { frame }
    }

    pub fn tau(&self) -> TauValue {
        tau_eval(&self.frame)
    }

    pub fn transformed(&self, g: &nalgebra::DMatrix<f64>) -> Self {
        let frame = self.frame.map(|f| {
            let v = g * nalgebra::DVector::from_column_slice(&f);
            std::array::from_fn(|k| v[k])
        });
        Self { frame }
    }
}

/// Φ₀ on the oriented frame; a plane is α-Cayley iff this is at least α.
pub fn cayley_margin(p: &OrientedPlane4) -> f64 {
    phi0_eval(&p.frame)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins_of_coordinate_planes() {
        assert_eq!(cayley_margin(&OrientedPlane4::span_of([0, 1, 2, 3])), 1.0);
        assert_eq!(cayley_margin(&OrientedPlane4::span_of([0, 1, 4, 5])), -1.0);
        assert_eq!(cayley_margin(&OrientedPlane4::span_of([1, 0, 4, 5])), 1.0);
        assert_eq!(cayley_margin(&OrientedPlane4::span_of([0, 1, 2, 4])), 0.0);
    }

    #[test]
    fn rejects_non_orthonormal_frames() {
        let mut f = OrientedPlane4::span_of([0, 1, 2, 3]).frame;
        f[0][1] = 0.1;
        assert!(matches!(OrientedPlane4::new(f), Err(Error::NotOrthonormal(_))));
    }

    #[test]
    fn complement_is_oriented_and_orthonormal() {
        let p = OrientedPlane4::from_vectors(&[
            [1.0, 0.2, 0.0, 0.0, 0.3, 0.0, 0.0, 0.1],
            [0.0, 1.0, 0.5, 0.0, 0.0, 0.0, 0.2, 0.0],
            [0.0, 0.0, 1.0, 0.1, 0.0, 0.4, 0.0, 0.0],
            [0.3, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.2],
        ])
        .unwrap();
        let n = orthonormal_complement(&p.frame);
        assert!(det8(&p.frame, &n) > 0.999);
        for a in 0..4 {
            for b in 0..4 {
                assert!(dot(&p.frame[a], &n[b]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn upper_inverse_inverts() {
        let r = [
            [2.0, 1.0, 0.5, 0.1],
            [0.0, 1.5, 0.2, 0.3],
            [0.0, 0.0, 3.0, 0.7],
            [0.0, 0.0, 0.0, 0.9],
        ];
        let m = upper_inverse(&r);
        for i in 0..4 {
            for j in 0..4 {
                let s: f64 = (0..4).map(|k| r[i][k] * m[k][j]).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }
}
