//! Model submanifolds as immersions of structured grids: flat T⁴ ⊂ T⁸, the
//! flat Cayley cone, the complex quadric cone and its smoothing.
//!
//! Conical patches use coordinates `(θ₁, θ₂, θ₃, u)` with `u = ln s` on the
//! last axis, so node order runs over the link fastest and the radius slowest.

pub mod jet;
pub mod link;

pub use jet::{smoothstep, J2};
pub use link::{LinkJet, LinkKind};

use crate::error::{Error, Result};
use crate::grid::{Axis, Grid4};
use crate::spin7::plane::{dot, gram_schmidt4, upper_inverse};
use crate::spin7::{cayley_margin, OrientedPlane4, Vec8};
use nalgebra::{Matrix4, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::io::Write;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatchKind {
    Torus4,
    Cone,
    AcSmoothing,
    Glued,
}

/// Radial coefficients `(C₁, C₂)` of `X = C₁·A + C₂·B` as functions of `u = ln s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "profile")]
pub enum RadialProfile {
    Cone,
    /// `{Σ zₖ² = ε²}` written as a normal graph over the cone.
    Smoothing {
        epsilon: f64,
    },
    /// Smoothing at scale `epsilon_t` below `⅝·t_nu`, the cone above `⅞·t_nu`,
    /// blended by the cutoff in `2s/t_nu − 1`.
    Glued {
        epsilon_t: f64,
        t_nu: f64,
    },
}

impl RadialProfile {
    pub fn coeffs(&self, u: f64) -> (J2, J2) {
        let s = J2::var(u).exp();
        let cone = s.scale(FRAC_1_SQRT_2);
        let smoothing = |eps: f64| {
            let inv = (-J2::var(u)).exp().scale(eps * eps / (2.0 * SQRT_2));
            (cone + inv, cone - inv)
        };
        match *self {
            RadialProfile::Cone => (cone, cone),
            RadialProfile::Smoothing { epsilon } => smoothing(epsilon),
            RadialProfile::Glued { epsilon_t, t_nu } => {
                let g = s.scale(2.0 / t_nu) - J2::constant(1.0);
                let w = g.compose(smoothstep(g.v, 0.25, 0.75));
                let one_minus = J2::constant(1.0) - w;
                let (a1, a2) = smoothing(epsilon_t);
                (one_minus * a1 + w * cone, one_minus * a2 + w * cone)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "map")]
pub enum ImmersionMap {
    /// `x ↦ (x, 0) + offset` on the unit 4-torus.
    Torus {
        offset: Vec8,
    },
    Conical {
        link: LinkKind,
        profile: RadialProfile,
    },
}

/// Position with first and second coordinate derivatives.
#[derive(Clone, Debug)]
pub struct Jet {
    pub x: Vec8,
    pub d1: [Vec8; 4],
    pub d2: [[Vec8; 4]; 4],
}

/// Orthonormal tangent and normal frames at a node. `m` is the inverse
/// Gram–Schmidt factor: `tangent[j] = Σᵢ m[i][j]·∂ᵢX` (orientation included).
#[derive(Clone, Debug)]
pub struct Frames {
    pub tangent: OrientedPlane4,
    pub normal: [Vec8; 4],
    pub m: [[f64; 4]; 4],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub link: [usize; 3],
    pub radial: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution {
            link: [12, 12, 12],
            radial: 64,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParametricPatch {
    pub kind: PatchKind,
    pub map: ImmersionMap,
    pub grid: Grid4,
    pub epsilon: f64,
    /// Decay rate of the end (λ for AC pieces, μ for CS pieces).
    pub rate: Option<f64>,
    /// ±1 applied to the first tangent so that the patch is Cayley-oriented.
    pub orientation: f64,
}

pub fn make_flat_torus4(n: usize) -> Result<ParametricPatch> {
    make_flat_torus4_offset(n, [0.0; 8])
}

pub fn make_flat_torus4_offset(n: usize, offset: Vec8) -> Result<ParametricPatch> {
    if n < 4 {
        return Err(Error::BadRange(format!("torus resolution {n} < 4")));
    }
    let grid = Grid4::new(std::array::from_fn(|_| Axis::periodic(n, 0.0, 1.0)))?;
    Ok(ParametricPatch {
        kind: PatchKind::Torus4,
        map: ImmersionMap::Torus { offset },
        grid,
        epsilon: 0.0,
        rate: None,
        orientation: 1.0,
    })
}

/// Radial axis in `u = ln s`, uniform between the given bounds.
pub fn log_radial_axis(r_lo: f64, r_hi: f64, n: usize) -> Axis {
    Axis::uniform_closed(r_lo.ln(), r_hi.ln(), n)
}

/// A conical patch over an arbitrary radial axis (in `u = ln s`).
pub fn conical_patch(
    kind: PatchKind,
    link: LinkKind,
    profile: RadialProfile,
    link_res: [usize; 3],
    radial: Axis,
) -> Result<ParametricPatch> {
    if link == LinkKind::RoundSphere && profile != RadialProfile::Cone {
        return Err(Error::BadRange("the round link only carries the flat cone".into()));
    }
    let [a0, a1, a2] = link.axes(link_res);
    let grid = Grid4::new([a0, a1, a2, radial])?;
    let (epsilon, rate) = match profile {
        RadialProfile::Cone => (0.0, None),
        RadialProfile::Smoothing { epsilon } => (epsilon, Some(-1.0)),
        RadialProfile::Glued { epsilon_t, .. } => (epsilon_t, None),
    };
    let mut patch = ParametricPatch {
        kind,
        map: ImmersionMap::Conical { link, profile },
        grid,
        epsilon,
        rate,
        orientation: 1.0,
    };
    let f = patch.frames(patch.grid.len() - 1)?;
    if cayley_margin(&f.tangent) < 0.0 {
        patch.orientation = -1.0;
    }
    Ok(patch)
}

pub fn make_round_cone(r_lo: f64, r_hi: f64, res: Resolution) -> Result<ParametricPatch> {
    check_range(r_lo, r_hi)?;
    conical_patch(
        PatchKind::Cone,
        LinkKind::RoundSphere,
        RadialProfile::Cone,
        res.link,
        log_radial_axis(r_lo, r_hi, res.radial),
    )
}

pub fn make_quadric_cone(r_lo: f64, r_hi: f64, res: Resolution) -> Result<ParametricPatch> {
    check_range(r_lo, r_hi)?;
    conical_patch(
        PatchKind::Cone,
        LinkKind::Quadric,
        RadialProfile::Cone,
        res.link,
        log_radial_axis(r_lo, r_hi, res.radial),
    )
}

/// The smoothing `{Σ zₖ² = ε²}` over `s ∈ [ε, r_hi]`. The parametrization
/// degenerates at `s = ε/√2`, so the core `s < ε` is not covered.
pub fn make_quadric_smoothing(epsilon: f64, r_hi: f64, res: Resolution) -> Result<ParametricPatch> {
    if !(epsilon > 0.0) {
        return Err(Error::BadRange(format!("epsilon must be positive, got {epsilon}")));
    }
    check_range(epsilon, r_hi)?;
    conical_patch(
        PatchKind::AcSmoothing,
        LinkKind::Quadric,
        RadialProfile::Smoothing { epsilon },
        res.link,
        log_radial_axis(epsilon, r_hi, res.radial),
    )
}

fn check_range(r_lo: f64, r_hi: f64) -> Result<()> {
    if !(r_lo > 0.0 && r_hi > r_lo) {
        return Err(Error::BadRange(format!("need 0 < r_lo < r_hi, got ({r_lo}, {r_hi})")));
    }
    Ok(())
}

/// Löwdin orthonormalization: the orthonormal frame closest to `v`.
pub fn lowdin4(v: &[Vec8; 4]) -> Option<[Vec8; 4]> {
    let s = Matrix4::from_fn(|a, b| dot(&v[a], &v[b]));
    let eig = SymmetricEigen::new(s);
    if eig.eigenvalues.min() < 1e-12 {
        return None;
    }
    let w = eig.eigenvectors
        * Matrix4::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt()))
        * eig.eigenvectors.transpose();
    Some(std::array::from_fn(|a| {
        std::array::from_fn(|k| (0..4).map(|b| v[b][k] * w[(b, a)]).sum())
    }))
}

impl ParametricPatch {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn link(&self) -> Option<LinkKind> {
        match self.map {
            ImmersionMap::Conical { link, .. } => Some(link),
            ImmersionMap::Torus { .. } => None,
        }
    }

    pub fn profile(&self) -> Option<RadialProfile> {
        match self.map {
            ImmersionMap::Conical { profile, .. } => Some(profile),
            ImmersionMap::Torus { .. } => None,
        }
    }

    /// Radial coordinate `s` of a node (None on the torus).
    pub fn radial(&self, node: usize) -> Option<f64> {
        match self.map {
            ImmersionMap::Conical { .. } => Some(self.grid.coords(node)[3].exp()),
            ImmersionMap::Torus { .. } => None,
        }
    }

    pub fn jet_at(&self, c: [f64; 4]) -> Jet {
        match &self.map {
            ImmersionMap::Torus { offset } => {
                let mut x = *offset;
                let mut d1 = [[0.0; 8]; 4];
                for a in 0..4 {
                    x[a] += c[a];
                    d1[a][a] = 1.0;
                }
                Jet {
                    x,
                    d1,
                    d2: [[[0.0; 8]; 4]; 4],
                }
            }
            ImmersionMap::Conical { link, profile } => {
                let l = link.jet([c[0], c[1], c[2]]);
                let (c1, c2) = profile.coeffs(c[3]);
                let comb =
                    |p: f64, a: &Vec8, q: f64, b: &Vec8| -> Vec8 { std::array::from_fn(|k| p * a[k] + q * b[k]) };
                let x = comb(c1.v, &l.a, c2.v, &l.b);
                let mut d1 = [[0.0; 8]; 4];
                let mut d2 = [[[0.0; 8]; 4]; 4];
                for i in 0..3 {
                    d1[i] = comb(c1.v, &l.da[i], c2.v, &l.db[i]);
                    for j in 0..3 {
                        d2[i][j] = comb(c1.v, &l.dda[i][j], c2.v, &l.ddb[i][j]);
                    }
                    d2[i][3] = comb(c1.d, &l.da[i], c2.d, &l.db[i]);
                    d2[3][i] = d2[i][3];
                }
                d1[3] = comb(c1.d, &l.a, c2.d, &l.b);
                d2[3][3] = comb(c1.dd, &l.a, c2.dd, &l.b);
                Jet { x, d1, d2 }
            }
        }
    }

    pub fn jet(&self, node: usize) -> Jet {
        self.jet_at(self.grid.coords(node))
    }

    pub fn point(&self, node: usize) -> Vec8 {
        self.jet(node).x
    }

    /// Jets at every node, in node order.
    pub fn sample(&self) -> Vec<Jet> {
        (0..self.len()).into_par_iter().map(|n| self.jet(n)).collect()
    }

    /// Smooth reference directions that span the normal space approximately.
    pub fn reference_normals(&self, x: &Vec8) -> [Vec8; 4] {
        let mut e = [[0.0; 8]; 4];
        for a in 0..4 {
            e[a][4 + a] = 1.0;
        }
        match self.map {
            ImmersionMap::Conical {
                link: LinkKind::Quadric,
                ..
            } => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let zbar = [x[0], -x[1], x[2], -x[3], x[4], -x[5], 0.0, 0.0].map(|v| v / r);
                let izbar = [x[1], x[0], x[3], x[2], -x[5], -x[4], 0.0, 0.0].map(|v| v / r);
                [zbar, izbar, e[2], e[3]]
            }
            _ => e,
        }
    }

    pub fn frames(&self, node: usize) -> Result<Frames> {
        let j = self.jet(node);
        self.frames_from(&j.x, &j.d1)
            .map_err(|gram| Error::DegenerateImmersion { node, gram })
    }

    /// Frames from a position and coordinate tangents; `Err` carries the
    /// normalized Gram determinant when it falls below 1e−8.
    pub fn frames_from(&self, x: &Vec8, d1: &[Vec8; 4]) -> std::result::Result<Frames, f64> {
        let mut t = *d1;
        t[0] = t[0].map(|v| v * self.orientation);
        let (q, r) = gram_schmidt4(&t).ok_or(0.0)?;
        let scale: f64 = t.iter().map(|v| dot(v, v)).product();
        let gram = (0..4).map(|i| r[i][i] * r[i][i]).product::<f64>() / scale;
        if !(gram >= 1e-8) {
            return Err(gram);
        }
        let mut m = upper_inverse(&r);
        for j in 0..4 {
            m[0][j] *= self.orientation;
        }
        let refs = self.reference_normals(x);
        let proj: [Vec8; 4] = std::array::from_fn(|a| {
            let mut v = refs[a];
            for qi in &q {
                let c = dot(qi, &v);
                for k in 0..8 {
                    v[k] -= c * qi[k];
                }
            }
            v
        });
        let mut normal = lowdin4(&proj).ok_or(gram)?;
        if crate::spin7::plane::det8(&q, &normal) < 0.0 {
            normal[3] = normal[3].map(|v| -v);
        }
        Ok(Frames {
            tangent: OrientedPlane4 { frame: q },
            normal,
            m,
        })
    }

    /// Write `<stem>.json` (header) and `<stem>.bin` (positions, 8 little-endian
    /// f64 per node in node order).
    pub fn export(&self, dir: &Path, stem: &str) -> Result<()> {
        #[derive(Serialize)]
        struct Header<'a> {
            kind: PatchKind,
            map: &'a ImmersionMap,
            dims: [usize; 4],
            epsilon: f64,
            rate: Option<f64>,
            orientation: f64,
            nodes: usize,
            layout: &'static str,
        }
        let header = Header {
            kind: self.kind,
            map: &self.map,
            dims: self.grid.dims(),
            epsilon: self.epsilon,
            rate: self.rate,
            orientation: self.orientation,
            nodes: self.len(),
            layout: "f64le[nodes][8]; node = i0 + n0*(i1 + n1*(i2 + n2*i3)), axis 3 radial",
        };
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(&serde_json::to_value(&header).expect("header serializes"))
            .expect("value serializes");
        std::fs::write(dir.join(format!("{stem}.json")), json + "\n")?;
        let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join(format!("{stem}.bin")))?);
        for n in 0..self.len() {
            for v in self.point(n) {
                f.write_all(&v.to_le_bytes())?;
            }
        }
        f.flush()?;
        Ok(())
    }
}

/// Distance between the orthogonal projectors onto two 4-planes (Frobenius / √2).
pub fn plane_distance(p: &OrientedPlane4, q: &OrientedPlane4) -> f64 {
    let mut s = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            let c = dot(&p.frame[a], &q.frame[b]);
            s += c * c;
        }
    }
    (4.0 - s).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Resolution {
        Resolution {
            link: [6, 6, 6],
            radial: 12,
        }
    }

    #[test]
    fn torus_nodes_and_frames() {
        let p = make_flat_torus4(4).unwrap();
        assert_eq!(p.len(), 256);
        let f = p.frames(17).unwrap();
        assert!((cayley_margin(&f.tangent) - 1.0).abs() < 1e-15);
        for a in 0..4 {
            assert_eq!(f.normal[a][4 + a], 1.0);
        }
    }

    #[test]
    fn analytic_radial_derivatives_match_differences() {
        for profile in [
            RadialProfile::Cone,
            RadialProfile::Smoothing { epsilon: 0.1 },
            RadialProfile::Glued {
                epsilon_t: 0.004,
                t_nu: 0.05,
            },
        ] {
            let p = conical_patch(
                PatchKind::Glued,
                LinkKind::Quadric,
                profile,
                [6, 6, 6],
                log_radial_axis(0.01, 1.0, 8),
            )
            .unwrap();
            let c = [0.3, 1.1, 0.7, (0.04f64).ln()];
            let j = p.jet_at(c);
            let h = 1e-5;
            let mut cp = c;
            let mut cm = c;
            cp[3] += h;
            cm[3] -= h;
            let (jp, jm) = (p.jet_at(cp), p.jet_at(cm));
            for k in 0..8 {
                assert!(((jp.x[k] - jm.x[k]) / (2.0 * h) - j.d1[3][k]).abs() < 1e-8);
                for i in 0..4 {
                    assert!(((jp.d1[i][k] - jm.d1[i][k]) / (2.0 * h) - j.d2[3][i][k]).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn cone_nodes_are_calibrated_and_radial() {
        let p = make_quadric_cone(0.1, 2.0, small()).unwrap();
        for n in (0..p.len()).step_by(37) {
            let f = p.frames(n).unwrap();
            assert!((cayley_margin(&f.tangent) - 1.0).abs() < 1e-9);
            let x = p.point(n);
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let inside: f64 = f.tangent.frame.iter().map(|q| dot(q, &x).powi(2)).sum::<f64>().sqrt();
            assert!((inside - r).abs() < 1e-10 * r.max(1.0));
        }
    }

    #[test]
    fn normal_frames_complete_an_oriented_basis() {
        let p = make_quadric_smoothing(0.1, 2.0, small()).unwrap();
        let f = p.frames(100).unwrap();
        let det = crate::spin7::plane::det8(&f.tangent.frame, &f.normal);
        assert!((det - 1.0).abs() < 1e-10);
    }
}
