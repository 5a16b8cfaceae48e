//! The deformation operator `F` of an almost-Cayley immersion, its
//! linearization `D`, the quadratic remainder `Q`, and the iteration that
//! drives `F` to zero.
//!
//! A normal field `v` moves the immersion to `f + V` with `V = Σ vᵃ Nₐ`. At each
//! node the perturbed tangents `∂ᵢf + ∂ᵢV` (upwind differences of `V`) are
//! combined with the base Gram–Schmidt factor `M` and `F(v)` is the E-component
//! of `τ` on that 4-tuple. Since `τ` is alternating, `τ(A·q) = det A · τ(q)`, so
//! `F(v) = 0` exactly when the perturbed tangent plane is Cayley.

pub mod iterate;
pub mod sparse;
pub mod torus;

pub use iterate::{initial_error_scan, iterate_to_cayley, ErrorScan, IterateParams, IterationReport};
pub use sparse::{lsqr, Csr, LsqrOptions, LsqrResult};

use crate::error::{Error, Result};
use crate::grid::{Scheme, Stencils};
use crate::scenarios::{Frames, ImmersionMap, ParametricPatch};
use crate::spin7::plane::dot;
use crate::spin7::{cayley_margin, e_basis_with_normals, tau_raw, tau_slot_matrix, Vec8};
use crate::weighted::{Field, RadiusFunction};
use rayon::prelude::*;
use std::sync::OnceLock;

/// Normal displacement: coefficients in each node's orthonormal normal frame.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalField {
    pub values: Vec<[f64; 4]>,
}

/// Values in each node's E-basis.
#[derive(Clone, Debug, PartialEq)]
pub struct EField {
    pub values: Vec<[f64; 4]>,
}

macro_rules! field_ops {
    ($t:ident) => {
        impl $t {
            pub fn zeros(n: usize) -> Self {
                $t {
                    values: vec![[0.0; 4]; n],
                }
            }

            pub fn from_flat(x: &[f64]) -> Self {
                $t {
                    values: x.chunks(4).map(|c| [c[0], c[1], c[2], c[3]]).collect(),
                }
            }

            pub fn flat(&self) -> Vec<f64> {
                self.values.iter().flatten().copied().collect()
            }

            pub fn scaled(&self, c: f64) -> Self {
                $t {
                    values: self.values.iter().map(|v| v.map(|x| c * x)).collect(),
                }
            }

            pub fn axpy(&self, c: f64, o: &Self) -> Self {
                $t {
                    values: self
                        .values
                        .iter()
                        .zip(&o.values)
                        .map(|(a, b)| std::array::from_fn(|k| a[k] + c * b[k]))
                        .collect(),
                }
            }

            pub fn sup(&self) -> f64 {
                self.values.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
            }

            pub fn to_field(&self) -> Field {
                Field::from_vec4(&self.values)
            }
        }
    };
}

field_ops!(NormalField);
field_ops!(EField);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TangentMode {
    /// Base tangents from the analytic immersion.
    Analytic,
    /// Base tangents from the same upwind differences used for `V`.
    Differenced,
}

/// `τ`-defect of the 4-tuple `(Σᵢ mᵢⱼ tᵢ)ⱼ` in the given E-basis.
pub fn pointwise_defect(e: &[[f64; 7]; 4], t: &[Vec8; 4], m: &[[f64; 4]; 4]) -> [f64; 4] {
    let frame: [Vec8; 4] = std::array::from_fn(|j| std::array::from_fn(|c| (0..4).map(|i| m[i][j] * t[i][c]).sum()));
    let tau = tau_raw(&frame);
    e.map(|b| b.iter().zip(&tau).map(|(x, y)| x * y).sum())
}

fn normalized_gram_det(v: &[Vec8; 4]) -> f64 {
    let g = nalgebra::Matrix4::from_fn(|a, b| dot(&v[a], &v[b]));
    let scale: f64 = (0..4).map(|a| g[(a, a)]).product();
    g.determinant() / scale
}

/// Everything needed to evaluate `F`, `D` and `Q` on one immersion.
pub struct Deformation {
    pub patch: ParametricPatch,
    pub mode: TangentMode,
    pub tangents: Vec<[Vec8; 4]>,
    pub frames: Vec<Frames>,
    pub ebasis: Vec<[[f64; 7]; 4]>,
    pub margins: Vec<f64>,
    pub rho: RadiusFunction,
    pub stencils: Stencils,
    f0: OnceLock<EField>,
}

impl Deformation {
    pub fn new(patch: &ParametricPatch, mode: TangentMode, rho: RadiusFunction) -> Result<Self> {
        if rho.values.len() != patch.len() {
            return Err(Error::GridMismatch("radius function does not match the patch".into()));
        }
        let stencils = patch.grid.stencils(Scheme::Upwind);
        let jets = patch.sample();
        let differenced = mode == TangentMode::Differenced && !matches!(patch.map, ImmersionMap::Torus { .. });
        let tangents: Vec<[Vec8; 4]> = if differenced {
            let x: Vec<Vec8> = jets.iter().map(|j| j.x).collect();
            (0..patch.len())
                .into_par_iter()
                .map(|n| stencils.apply(&x, n))
                .collect()
        } else {
            jets.iter().map(|j| j.d1).collect()
        };
        let per_node: Vec<(Frames, [[f64; 7]; 4], f64)> = (0..patch.len())
            .into_par_iter()
            .map(|n| {
                let f = patch
                    .frames_from(&jets[n].x, &tangents[n])
                    .map_err(|gram| Error::DegenerateImmersion { node: n, gram })?;
                let margin = cayley_margin(&f.tangent);
                if margin < 0.9 {
                    return Err(Error::MarginTooLow { node: n, margin });
                }
                let e = e_basis_with_normals(&f.tangent, &f.normal)?;
                Ok((f, e.basis, margin))
            })
            .collect::<Result<_>>()?;
        let mut frames = Vec::with_capacity(per_node.len());
        let mut ebasis = Vec::with_capacity(per_node.len());
        let mut margins = Vec::with_capacity(per_node.len());
        for (f, e, m) in per_node {
            frames.push(f);
            ebasis.push(e);
            margins.push(m);
        }
        Ok(Deformation {
            patch: patch.clone(),
            mode,
            tangents,
            frames,
            ebasis,
            margins,
            rho,
            stencils,
            f0: OnceLock::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Ambient displacement `V = Σ vᵃ Nₐ` at every node.
    pub fn ambient(&self, v: &NormalField) -> Vec<Vec8> {
        v.values
            .iter()
            .zip(&self.frames)
            .map(|(c, f)| std::array::from_fn(|k| (0..4).map(|a| c[a] * f.normal[a][k]).sum()))
            .collect()
    }

    /// Normal projection of a constant ambient vector.
    pub fn project_constant(&self, w: &Vec8) -> NormalField {
        NormalField {
            values: self.frames.iter().map(|f| f.normal.map(|n| dot(&n, w))).collect(),
        }
    }

    fn perturbed_tangents(&self, big_v: &[Vec8], n: usize) -> [Vec8; 4] {
        let d = self.stencils.apply(big_v, n);
        std::array::from_fn(|i| std::array::from_fn(|c| self.tangents[n][i][c] + d[i][c]))
    }

    pub fn nonlinear_f(&self, v: &NormalField) -> Result<EField> {
        if v.values.len() != self.len() {
            return Err(Error::GridMismatch("normal field does not match the immersion".into()));
        }
        let big_v = self.ambient(v);
        let values = (0..self.len())
            .into_par_iter()
            .map(|n| {
                let t = self.perturbed_tangents(&big_v, n);
                if !(normalized_gram_det(&t) >= 1e-8) {
                    return Err(Error::ImmersionDegenerate(n));
                }
                Ok(pointwise_defect(&self.ebasis[n], &t, &self.frames[n].m))
            })
            .collect::<Result<_>>()?;
        Ok(EField { values })
    }

    /// `F(0)`, cached.
    pub fn f0(&self) -> &EField {
        self.f0.get_or_init(|| EField {
            values: (0..self.len())
                .into_par_iter()
                .map(|n| pointwise_defect(&self.ebasis[n], &self.tangents[n], &self.frames[n].m))
                .collect(),
        })
    }

    /// Assembled linearization at `v = 0` (4N × 4N, node-major blocks).
    pub fn assemble_d(&self) -> Csr {
        let rows: Vec<Vec<(usize, usize, f64)>> = (0..self.len())
            .into_par_iter()
            .map(|n| {
                let f = &self.frames[n];
                // G_i = Σⱼ M_ij Eᵀ T_j  (4 × 8)
                let slot: [[[f64; 8]; 7]; 4] = std::array::from_fn(|j| tau_slot_matrix(&f.tangent.frame, j));
                let g: [[[f64; 8]; 4]; 4] = std::array::from_fn(|i| {
                    std::array::from_fn(|e| {
                        std::array::from_fn(|c| {
                            (0..4)
                                .map(|j| f.m[i][j] * (0..7).map(|r| self.ebasis[n][e][r] * slot[j][r][c]).sum::<f64>())
                                .sum()
                        })
                    })
                });
                let mut out = Vec::with_capacity(192);
                for i in 0..4 {
                    for &(k, w) in &self.stencils.rows[n][i] {
                        let nk = &self.frames[k].normal;
                        for e in 0..4 {
                            for a in 0..4 {
                                out.push((4 * n + e, 4 * k + a, w * dot(&g[i][e], &nk[a])));
                            }
                        }
                    }
                }
                out
            })
            .collect();
        Csr::from_triplets(4 * self.len(), 4 * self.len(), rows.into_iter().flatten().collect())
    }

    /// Step used by the directional linearization: `h = 1e−5 / maxₙ(|vₙ|/ρₙ)`.
    pub fn linearization_step(&self, v: &NormalField) -> f64 {
        let m = v
            .values
            .iter()
            .zip(&self.rho.values)
            .map(|(c, r)| c.iter().map(|x| x * x).sum::<f64>().sqrt() / r)
            .fold(0.0, f64::max);
        if m == 0.0 {
            1e-5
        } else {
            1e-5 / m
        }
    }

    /// `(F(hv) − F(−hv)) / 2h`.
    pub fn directional_d(&self, v: &NormalField) -> Result<EField> {
        self.directional_d_step(v, self.linearization_step(v))
    }

    pub fn directional_d_step(&self, v: &NormalField, h: f64) -> Result<EField> {
        let p = self.nonlinear_f(&v.scaled(h))?;
        let m = self.nonlinear_f(&v.scaled(-h))?;
        Ok(p.axpy(-1.0, &m).scaled(0.5 / h))
    }

    /// `Q(v) = F(v) − F(0) − Dv` with the assembled `D`.
    pub fn quadratic_q(&self, d: &Csr, v: &NormalField) -> Result<EField> {
        let fv = self.nonlinear_f(v)?;
        let dv = d.matvec(&v.flat());
        let f0 = self.f0();
        Ok(EField {
            values: (0..self.len())
                .map(|n| std::array::from_fn(|e| fv.values[n][e] - f0.values[n][e] - dv[4 * n + e]))
                .collect(),
        })
    }

    /// Nodes on the outermost radial ring (clamped in the iteration).
    pub fn outer_ring(&self) -> Vec<bool> {
        self.radial_ring(self.patch.grid.dims()[3] - 1)
    }

    /// Nodes on the two outermost radial levels, where the radial stencil is
    /// the backward closure. The iteration imposes no equation there: with
    /// forward stencils inside, equations on these levels act as Cauchy data at
    /// the outer end and make the chord system exponentially ill-conditioned.
    pub fn closure_levels(&self) -> Vec<bool> {
        let last = self.patch.grid.dims()[3] - 1;
        (0..self.len())
            .map(|n| !matches!(self.patch.map, ImmersionMap::Torus { .. }) && self.patch.grid.multi(n)[3] + 1 >= last)
            .collect()
    }

    fn radial_ring(&self, level: usize) -> Vec<bool> {
        let g = &self.patch.grid;
        (0..self.len())
            .map(|n| !matches!(self.patch.map, ImmersionMap::Torus { .. }) && g.multi(n)[3] == level)
            .collect()
    }

    /// Minimum Cayley margin of the tangent planes of `f + V`.
    pub fn perturbed_min_margin(&self, v: &NormalField) -> f64 {
        let big_v = self.ambient(v);
        (0..self.len())
            .into_par_iter()
            .map(|n| {
                let t = self.perturbed_tangents(&big_v, n);
                let m = &self.frames[n].m;
                let frame: [Vec8; 4] =
                    std::array::from_fn(|j| std::array::from_fn(|c| (0..4).map(|i| m[i][j] * t[i][c]).sum()));
                match crate::spin7::plane::gram_schmidt4(&frame) {
                    Some((q, _)) => crate::spin7::phi0_eval(&q),
                    None => f64::NEG_INFINITY,
                }
            })
            .reduce(|| f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::make_flat_torus4;

    #[test]
    fn flat_torus_annihilates_constants() {
        let p = make_flat_torus4(4).unwrap();
        let d = Deformation::new(&p, TangentMode::Analytic, RadiusFunction::constant(p.len(), 1.0)).unwrap();
        let v = NormalField {
            values: vec![[0.3, -0.1, 0.7, 0.2]; p.len()],
        };
        let dv = d.assemble_d().matvec(&v.flat());
        assert!(dv.iter().all(|x| x.abs() < 1e-10));
        assert!(d.nonlinear_f(&v).unwrap().sup() < 1e-12);
    }

    #[test]
    fn defect_identity_is_exact() {
        let p = make_flat_torus4(4).unwrap();
        let d = Deformation::new(&p, TangentMode::Analytic, RadiusFunction::constant(p.len(), 1.0)).unwrap();
        let m = d.assemble_d();
        let v = NormalField {
            values: (0..p.len())
                .map(|n| [0.01 * (n as f64).sin(), 0.02, 0.0, -0.01 * (n as f64).cos()])
                .collect(),
        };
        let q = d.quadratic_q(&m, &v).unwrap();
        let fv = d.nonlinear_f(&v).unwrap();
        let dv = m.matvec(&v.flat());
        for n in 0..p.len() {
            for e in 0..4 {
                let r = fv.values[n][e] - d.f0().values[n][e] - dv[4 * n + e] - q.values[n][e];
                assert_eq!(r, 0.0);
            }
        }
    }
}
