//! The rank-4 constraint space E ⊂ Im 𝕆 of a near-Cayley plane, realized as the
//! leading singular subspace of the τ-Jacobian under normal perturbations.

use super::form::Vec8;
use super::plane::{orthonormal_complement, OrientedPlane4};
use super::tau::tau_raw;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, Matrix4, SymmetricEigen};

#[derive(Clone, Debug)]
pub struct EBasis {
    pub plane: OrientedPlane4,
    /// Four orthonormal vectors in Im 𝕆 ≅ ℝ⁷.
    pub basis: [[f64; 7]; 4],
    /// Singular values of the τ-Jacobian, descending.
    pub singular_values: [f64; 7],
}

/// Columns `(slot, a)` hold `τ` with frame vector `slot` replaced by normal `a`.
pub fn tau_jacobian(frame: &[Vec8; 4], normals: &[Vec8; 4]) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(7, 16);
    for slot in 0..4 {
        for a in 0..4 {
            let mut v = *frame;
            v[slot] = normals[a];
            let t = tau_raw(&v);
            for c in 0..7 {
                j[(c, slot * 4 + a)] = t[c];
            }
        }
    }
    j
}

pub fn e_basis(p: &OrientedPlane4) -> Result<EBasis> {
    let n = orthonormal_complement(&p.frame);
    e_basis_with_normals(p, &n)
}

/// Same subspace as [`e_basis`]; the normal frame only fixes which orthonormal
/// basis of it is returned (the Löwdin-orthonormalized projections of the
/// slot-0 Jacobian columns), so smooth normal frames give smooth bases.
pub fn e_basis_with_normals(p: &OrientedPlane4, normals: &[Vec8; 4]) -> Result<EBasis> {
    let j = tau_jacobian(&p.frame, normals);
    let svd = j.clone().svd(true, false);
    let u = svd.u.as_ref().expect("left vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let mut sv = [0.0; 7];
    for (k, &i) in order.iter().enumerate() {
        sv[k] = svd.singular_values[i];
    }
    if !(sv[3] > 1e-6) || sv[4] > 0.5 * sv[3] {
        return Err(Error::RankDeficient(sv.to_vec()));
    }
    let mut u4 = DMatrix::zeros(7, 4);
    for k in 0..4 {
        u4.set_column(k, &u.column(order[k]));
    }
    let w = &u4 * (u4.transpose() * j.columns(0, 4));
    let s: Matrix4<f64> = Matrix4::from_fn(|a, b| w.column(a).dot(&w.column(b)));
    let eig = SymmetricEigen::new(s);
    if eig.eigenvalues.min() < 1e-8 {
        return Err(Error::RankDeficient(sv.to_vec()));
    }
    let inv_sqrt = eig.eigenvectors
        * Matrix4::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt()))
        * eig.eigenvectors.transpose();
    let mut basis = [[0.0; 7]; 4];
    for a in 0..4 {
        for c in 0..7 {
            basis[a][c] = (0..4).map(|b| w[(c, b)] * inv_sqrt[(b, a)]).sum();
        }
    }
    Ok(EBasis {
        plane: p.clone(),
        basis,
        singular_values: sv,
    })
}

impl EBasis {
    /// Coefficients of the orthogonal projection onto E.
    pub fn coefficients(&self, t: &[f64; 7]) -> [f64; 4] {
        self.basis.map(|b| b.iter().zip(t).map(|(x, y)| x * y).sum())
    }

    /// π_E as a map Im 𝕆 → Im 𝕆.
    pub fn project(&self, t: &[f64; 7]) -> [f64; 7] {
        let c = self.coefficients(t);
        std::array::from_fn(|k| (0..4).map(|a| c[a] * self.basis[a][k]).sum())
    }

    /// Rank when the singular values split cleanly into 4 above 1e-6 and 3 below 1e-8.
    pub fn exact_rank(&self) -> Option<usize> {
        let big = self.singular_values.iter().filter(|&&s| s > 1e-6).count();
        let tiny = self.singular_values.iter().filter(|&&s| s < 1e-8).count();
        (big + tiny == 7).then_some(big)
    }

    pub fn rank_gap(&self) -> f64 {
        self.singular_values[3] / self.singular_values[4].max(f64::MIN_POSITIVE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_cayley_plane_has_rank_four() {
        let b = e_basis(&OrientedPlane4::span_of([0, 1, 2, 3])).unwrap();
        assert_eq!(b.exact_rank(), Some(4));
        assert!(b.singular_values[4] <= 1e-10);
        for a in 0..4 {
            for c in 0..4 {
                let d: f64 = (0..7).map(|k| b.basis[a][k] * b.basis[c][k]).sum();
                assert!((d - if a == c { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn projection_is_idempotent() {
        let b = e_basis(&OrientedPlane4::span_of([4, 5, 6, 7])).unwrap();
        let t = [0.3, -0.2, 0.7, 0.1, 0.5, -0.4, 0.9];
        let p = b.project(&t);
        let pp = b.project(&p);
        for k in 0..7 {
            assert!((p[k] - pp[k]).abs() < 1e-12);
        }
    }
}
