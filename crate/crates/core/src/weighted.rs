//! Radius functions and weighted Sobolev/Hölder norms on structured patches.
//!
//! Derivatives are central differences in grid coordinates, made covariant with
//! the metric and Christoffel symbols of the analytic immersion. Vector-valued
//! fields are differentiated componentwise in their frame.

use crate::error::{Error, Result};
use crate::grid::Scheme;
use crate::scenarios::ParametricPatch;
use crate::spin7::plane::dot;
use nalgebra::Matrix4;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Node-major grid function with `comps` components per node.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub comps: usize,
    pub data: Vec<f64>,
}

impl Field {
    pub fn scalar(data: Vec<f64>) -> Self {
        Field { comps: 1, data }
    }

    pub fn zeros(nodes: usize, comps: usize) -> Self {
        Field {
            comps,
            data: vec![0.0; nodes * comps],
        }
    }

    pub fn from_vec4(v: &[[f64; 4]]) -> Self {
        Field {
            comps: 4,
            data: v.iter().flatten().copied().collect(),
        }
    }

    pub fn nodes(&self) -> usize {
        self.data.len() / self.comps
    }

    pub fn at(&self, node: usize) -> &[f64] {
        &self.data[node * self.comps..(node + 1) * self.comps]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Field {
            comps: self.comps,
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusFunction {
    pub values: Vec<f64>,
}

impl RadiusFunction {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::BadRange(format!("radius function not positive at node {i}")));
        }
        Ok(RadiusFunction { values })
    }

    pub fn constant(nodes: usize, value: f64) -> Self {
        RadiusFunction {
            values: vec![value; nodes],
        }
    }

    /// `ρ = min(1, |X|)`: distance to the cone vertex at the origin.
    pub fn distance_to_vertex(patch: &ParametricPatch) -> Self {
        let values = (0..patch.len())
            .map(|n| patch.point(n).iter().map(|x| x * x).sum::<f64>().sqrt().min(1.0))
            .collect();
        RadiusFunction { values }
    }

    /// `ρ = s`, the radial coordinate (unclamped; for model annuli).
    pub fn radial_coordinate(patch: &ParametricPatch) -> Result<Self> {
        let values = (0..patch.len())
            .map(|n| {
                patch
                    .radial(n)
                    .ok_or_else(|| Error::BadRange("patch has no radial coordinate".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RadiusFunction { values })
    }

    /// Largest deviation of `ρ/r` from the band `[c₁, c₂]` (0 when inside).
    pub fn comparison_violation(&self, r: &[f64], c1: f64, c2: f64) -> f64 {
        self.values
            .iter()
            .zip(r)
            .map(|(p, r)| {
                let q = p / r;
                (c1 - q).max(q - c2).max(0.0)
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormSpec {
    pub p: f64,
    pub k: usize,
    pub delta: f64,
}

impl WeightedNormSpec {
    pub fn new(p: f64, k: usize, delta: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::BadRange(format!("p must lie in (1, ∞), got {p}")));
        }
        Ok(WeightedNormSpec { p, k, delta })
    }
}

/// Metric data of a patch at every node.
pub struct PatchGeometry {
    /// Riemannian volume times quadrature weight.
    pub dmu: Vec<f64>,
    pub ginv: Vec<[[f64; 4]; 4]>,
    stencils: crate::grid::Stencils,
    christoffel: OnceLock<Vec<[[[f64; 4]; 4]; 4]>>,
    patch: ParametricPatch,
}

impl PatchGeometry {
    pub fn new(patch: &ParametricPatch) -> Self {
        let q = patch.grid.quadrature();
        let per_node: Vec<(f64, [[f64; 4]; 4])> = (0..patch.len())
            .into_par_iter()
            .map(|n| {
                let j = patch.jet(n);
                let g = Matrix4::from_fn(|a, b| dot(&j.d1[a], &j.d1[b]));
                let inv = g.try_inverse().unwrap_or_else(Matrix4::zeros);
                (
                    g.determinant().max(0.0).sqrt() * q[n],
                    std::array::from_fn(|a| std::array::from_fn(|b| inv[(a, b)])),
                )
            })
            .collect();
        let (dmu, ginv) = per_node.into_iter().unzip();
        PatchGeometry {
            dmu,
            ginv,
            stencils: patch.grid.stencils(Scheme::Central),
            christoffel: OnceLock::new(),
            patch: patch.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.dmu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dmu.is_empty()
    }

    /// `Γᶜ_ab` (indexed `[c][a][b]`).
    fn christoffel(&self) -> &[[[[f64; 4]; 4]; 4]] {
        self.christoffel.get_or_init(|| {
            (0..self.len())
                .into_par_iter()
                .map(|n| {
                    let j = self.patch.jet(n);
                    let gi = &self.ginv[n];
                    std::array::from_fn(|c| {
                        std::array::from_fn(|a| {
                            std::array::from_fn(|b| (0..4).map(|d| gi[c][d] * dot(&j.d1[d], &j.d2[a][b])).sum())
                        })
                    })
                })
                .collect()
        })
    }

    /// Coordinate gradients `[node][comp][axis]`.
    fn gradients(&self, f: &Field) -> Vec<Vec<[f64; 4]>> {
        (0..self.len())
            .into_par_iter()
            .map(|n| {
                (0..f.comps)
                    .map(|c| {
                        std::array::from_fn(|a| {
                            self.stencils.rows[n][a]
                                .iter()
                                .map(|&(j, w)| w * f.data[j * f.comps + c])
                                .sum()
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// Pointwise norms `|∇ⁱ f|` for `i = 0..=k`, `[node][i]`.
    pub fn derivative_norms(&self, f: &Field, k: usize) -> Result<Vec<Vec<f64>>> {
        if k > 2 {
            return Err(Error::MissingDerivatives(k));
        }
        if f.nodes() != self.len() {
            return Err(Error::GridMismatch(format!(
                "field has {} nodes, grid {}",
                f.nodes(),
                self.len()
            )));
        }
        let grads = (k >= 1).then(|| self.gradients(f));
        let gamma = (k >= 2).then(|| self.christoffel());
        let out = (0..self.len())
            .into_par_iter()
            .map(|n| {
                let mut row = vec![f.at(n).iter().map(|x| x * x).sum::<f64>().sqrt()];
                if let Some(gr) = &grads {
                    let gi = &self.ginv[n];
                    let mut s1 = 0.0;
                    for d in &gr[n] {
                        for a in 0..4 {
                            for b in 0..4 {
                                s1 += gi[a][b] * d[a] * d[b];
                            }
                        }
                    }
                    row.push(s1.max(0.0).sqrt());
                    if let Some(gam) = gamma {
                        let mut s2 = 0.0;
                        for c in 0..f.comps {
                            let mut h = [[0.0; 4]; 4];
                            for a in 0..4 {
                                for &(j, w) in &self.stencils.rows[n][a] {
                                    for b in 0..4 {
                                        h[a][b] += w * gr[j][c][b];
                                    }
                                }
                            }
                            let cov: [[f64; 4]; 4] = std::array::from_fn(|a| {
                                std::array::from_fn(|b| {
                                    0.5 * (h[a][b] + h[b][a])
                                        - (0..4).map(|e| gam[n][e][a][b] * gr[n][c][e]).sum::<f64>()
                                })
                            });
                            for a in 0..4 {
                                for b in 0..4 {
                                    for cc in 0..4 {
                                        for d in 0..4 {
                                            s2 += gi[a][cc] * gi[b][d] * cov[a][b] * cov[cc][d];
                                        }
                                    }
                                }
                            }
                        }
                        row.push(s2.max(0.0).sqrt());
                    }
                }
                row
            })
            .collect();
        Ok(out)
    }
}

/// Sum in fixed node order so that results do not depend on thread scheduling.
fn ordered_sum(terms: Vec<f64>) -> f64 {
    terms.iter().sum()
}

fn check_rho(geom: &PatchGeometry, rho: &RadiusFunction) -> Result<()> {
    if rho.values.len() != geom.len() {
        return Err(Error::GridMismatch(format!(
            "radius function has {} nodes, grid {}",
            rho.values.len(),
            geom.len()
        )));
    }
    Ok(())
}

/// `(Σᵢ ∫ |∇ⁱs|^p ρ^{(−δ+i)p} ρ^{−4} dμ)^{1/p}`.
pub fn weighted_sobolev_norm_with(
    geom: &PatchGeometry,
    field: &Field,
    spec: &WeightedNormSpec,
    rho: &RadiusFunction,
) -> Result<f64> {
    check_rho(geom, rho)?;
    let d = geom.derivative_norms(field, spec.k)?;
    let terms = (0..geom.len())
        .into_par_iter()
        .map(|n| {
            let r = rho.values[n];
            let inner: f64 = d[n]
                .iter()
                .enumerate()
                .map(|(i, v)| (v * r.powf(-spec.delta + i as f64)).powf(spec.p))
                .sum();
            inner * r.powi(-4) * geom.dmu[n]
        })
        .collect();
    Ok(ordered_sum(terms).powf(1.0 / spec.p))
}

pub fn weighted_sobolev_norm(
    field: &Field,
    patch: &ParametricPatch,
    spec: &WeightedNormSpec,
    rho: &RadiusFunction,
) -> Result<f64> {
    weighted_sobolev_norm_with(&PatchGeometry::new(patch), field, spec, rho)
}

/// `maxₙ Σᵢ |∇ⁱs| ρ^{−δ+i}`.
pub fn weighted_holder_norm_with(
    geom: &PatchGeometry,
    field: &Field,
    spec: &WeightedNormSpec,
    rho: &RadiusFunction,
) -> Result<f64> {
    check_rho(geom, rho)?;
    let d = geom.derivative_norms(field, spec.k)?;
    Ok((0..geom.len())
        .map(|n| {
            d[n].iter()
                .enumerate()
                .map(|(i, v)| v * rho.values[n].powf(-spec.delta + i as f64))
                .sum::<f64>()
        })
        .fold(0.0, f64::max))
}

pub fn weighted_holder_norm(
    field: &Field,
    patch: &ParametricPatch,
    spec: &WeightedNormSpec,
    rho: &RadiusFunction,
) -> Result<f64> {
    weighted_holder_norm_with(&PatchGeometry::new(patch), field, spec, rho)
}

fn pairing_density(u: &Field, v: &Field, nodes: usize) -> Result<Vec<f64>> {
    if u.comps != v.comps || u.data.len() != v.data.len() || u.nodes() != nodes {
        return Err(Error::GridMismatch("fields live on different grids".into()));
    }
    Ok((0..nodes)
        .map(|n| u.at(n).iter().zip(v.at(n)).map(|(a, b)| a * b).sum())
        .collect())
}

/// `∫⟨u, v⟩ dμ`.
pub fn duality_pairing_with(geom: &PatchGeometry, u: &Field, v: &Field) -> Result<f64> {
    let d = pairing_density(u, v, geom.len())?;
    Ok(ordered_sum(d.iter().zip(&geom.dmu).map(|(a, b)| a * b).collect()))
}

pub fn duality_pairing(u: &Field, v: &Field, patch: &ParametricPatch) -> Result<f64> {
    duality_pairing_with(&PatchGeometry::new(patch), u, v)
}

/// `∫⟨u, v⟩ ρ^{w−4} dμ` for a per-node weight `w`.
pub fn weighted_pairing_with(
    geom: &PatchGeometry,
    u: &Field,
    v: &Field,
    rho: &RadiusFunction,
    w: &dyn Fn(usize) -> f64,
) -> Result<f64> {
    check_rho(geom, rho)?;
    let d = pairing_density(u, v, geom.len())?;
    Ok(ordered_sum(
        (0..geom.len())
            .map(|n| d[n] * rho.values[n].powf(w(n) - 4.0) * geom.dmu[n])
            .collect(),
    ))
}

/// Weight of the interpolating inner product: `δ − ε` for `ρ ≤ ½t^ν`, `δ + ε`
/// for `ρ ≥ t^ν`, and a monotone cubic in `log ρ` in between.
pub fn interpolating_weight(rho: f64, t_nu: f64, delta: f64, eps: f64) -> f64 {
    let (lo, hi) = ((0.5 * t_nu).ln(), t_nu.ln());
    let y = ((rho.ln() - lo) / (hi - lo)).clamp(0.0, 1.0);
    delta - eps + 2.0 * eps * y * y * (3.0 - 2.0 * y)
}

pub fn interpolating_inner_product_with(
    geom: &PatchGeometry,
    u: &Field,
    v: &Field,
    rho: &RadiusFunction,
    t_nu: f64,
    delta: f64,
    eps: f64,
) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::BadRange(format!("eps must be positive, got {eps}")));
    }
    weighted_pairing_with(geom, u, v, rho, &|n| {
        interpolating_weight(rho.values[n], t_nu, delta, eps)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndKind {
    Ac,
    Cs,
}

/// Whether `L^p_{k,δ} ↪ L^{p̃}_{k̃,δ̃}` on a conical end of a 4-manifold.
/// Exponents outside `(1, ∞)` are never allowed, and no derivatives are gained
/// (`k ≥ k̃`) even when `p̃ < p` would permit it by counting alone.
#[allow(clippy::too_many_arguments)]
pub fn embedding_allowed(k: usize, kt: usize, p: f64, pt: f64, delta: f64, deltat: f64, end: EndKind) -> bool {
    let n = 4.0;
    if !(p > 1.0 && pt > 1.0 && p.is_finite() && pt.is_finite()) {
        return false;
    }
    let sobolev = k >= kt && k as f64 - kt as f64 >= n * (1.0 / p - 1.0 / pt);
    let (weak, strict) = match end {
        EndKind::Ac => (deltat >= delta, deltat > delta),
        EndKind::Cs => (deltat <= delta, deltat < delta),
    };
    sobolev && ((p <= pt && weak) || (pt < p && strict))
}
