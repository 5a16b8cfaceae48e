//! Links of the model cones with angular coordinates and analytic derivatives.
//!
//! A conical immersion is written `X = C₁(u)·A(θ) + C₂(u)·B(θ)` with `u = ln s`
//! and `θ` the three link angles, so a link supplies the pair `(A, B)` with
//! first and second angular derivatives.

use crate::grid::Axis;
use crate::spin7::Vec8;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    /// Round S³ in span(e₁..e₄) (Hopf coordinates ξ₁, ξ₂, η): the flat Cayley cone.
    RoundSphere,
    /// Orthonormal pairs (a, b) in ℝ³ parametrized by ZYZ Euler angles
    /// (α, γ, β) of the rotation `[a b a×b]`: the link of the complex quadric cone.
    Quadric,
}

/// `(A, B)` with derivatives along the three link axes.
#[derive(Clone, Debug)]
pub struct LinkJet {
    pub a: Vec8,
    pub b: Vec8,
    pub da: [Vec8; 3],
    pub db: [Vec8; 3],
    pub dda: [[Vec8; 3]; 3],
    pub ddb: [[Vec8; 3]; 3],
}

impl LinkKind {
    /// Angular axes at the given resolution: two periodic, one cell-centred.
    pub fn axes(self, res: [usize; 3]) -> [Axis; 3] {
        match self {
            LinkKind::RoundSphere => [
                Axis::periodic(res[0], 0.0, 2.0 * PI),
                Axis::periodic(res[1], 0.0, 2.0 * PI),
                Axis::midpoint(0.0, PI / 2.0, res[2]),
            ],
            LinkKind::Quadric => [
                Axis::periodic(res[0], 0.0, 2.0 * PI),
                Axis::periodic(res[1], 0.0, 2.0 * PI),
                Axis::midpoint(0.0, PI, res[2]),
            ],
        }
    }

    pub fn jet(self, th: [f64; 3]) -> LinkJet {
        match self {
            LinkKind::RoundSphere => round_jet(th),
            LinkKind::Quadric => quadric_jet(th),
        }
    }

    /// Exact volume of the link in the metric induced at unit radius.
    pub fn volume(self) -> f64 {
        match self {
            LinkKind::RoundSphere => 2.0 * PI * PI,
            LinkKind::Quadric => 4.0 * PI * PI,
        }
    }
}

/// n-th derivative of cos and sin.
fn dcos(x: f64, n: usize) -> f64 {
    match n % 4 {
        0 => x.cos(),
        1 => -x.sin(),
        2 => -x.cos(),
        _ => x.sin(),
    }
}

fn dsin(x: f64, n: usize) -> f64 {
    dcos(x, n + 3)
}

/// Evaluate with derivative multi-index `n` (orders along the three axes).
type Eval = dyn Fn([usize; 3]) -> (Vec8, Vec8);

fn collect(f: &Eval) -> LinkJet {
    let unit = |k: usize| {
        let mut n = [0; 3];
        n[k] = 1;
        n
    };
    let (a, b) = f([0; 3]);
    let mut da = [[0.0; 8]; 3];
    let mut db = [[0.0; 8]; 3];
    let mut dda = [[[0.0; 8]; 3]; 3];
    let mut ddb = [[[0.0; 8]; 3]; 3];
    for i in 0..3 {
        (da[i], db[i]) = f(unit(i));
        for j in 0..3 {
            let mut n = unit(i);
            n[j] += 1;
            (dda[i][j], ddb[i][j]) = f(n);
        }
    }
    LinkJet { a, b, da, db, dda, ddb }
}

fn round_jet(th: [f64; 3]) -> LinkJet {
    let [x1, x2, eta] = th;
    collect(&move |n: [usize; 3]| {
        // components are products of one-variable trigonometric factors
        let ce = dcos(eta, n[2]);
        let se = dsin(eta, n[2]);
        let f1 = |g: fn(f64, usize) -> f64| g(x1, n[0]) * if n[1] == 0 { 1.0 } else { 0.0 };
        let f2 = |g: fn(f64, usize) -> f64| g(x2, n[1]) * if n[0] == 0 { 1.0 } else { 0.0 };
        let mut p = [0.0; 8];
        p[0] = ce * f1(dcos);
        p[1] = ce * f1(dsin);
        p[2] = se * f2(dcos);
        p[3] = se * f2(dsin);
        let half = p.map(|x| x * FRAC_1_SQRT_2);
        (half, half)
    })
}

type M3 = [[f64; 3]; 3];

fn mat_mul(a: &M3, b: &M3) -> M3 {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| a[i][k] * b[k][j]).sum()))
}

/// n-th derivative of the rotation about z.
fn rz(t: f64, n: usize) -> M3 {
    let z = if n == 0 { 1.0 } else { 0.0 };
    [
        [dcos(t, n), -dsin(t, n), 0.0],
        [dsin(t, n), dcos(t, n), 0.0],
        [0.0, 0.0, z],
    ]
}

/// n-th derivative of the rotation about y.
fn ry(t: f64, n: usize) -> M3 {
    let z = if n == 0 { 1.0 } else { 0.0 };
    [
        [dcos(t, n), 0.0, dsin(t, n)],
        [0.0, z, 0.0],
        [-dsin(t, n), 0.0, dcos(t, n)],
    ]
}

/// `ℝ³ → ℝ⁸` for real and purely imaginary vectors under the complex structure
/// `z₁ = x₁ + i x₂, z₂ = x₃ + i x₄, z₃ = x₅ − i x₆`.
pub fn embed_real(a: [f64; 3]) -> Vec8 {
    [a[0], 0.0, a[1], 0.0, a[2], 0.0, 0.0, 0.0]
}

pub fn embed_imag(b: [f64; 3]) -> Vec8 {
    [0.0, b[0], 0.0, b[1], 0.0, -b[2], 0.0, 0.0]
}

fn quadric_jet(th: [f64; 3]) -> LinkJet {
    // grid axes are (α, γ, β); R = Rz(α)·Ry(β)·Rz(γ)
    let [al, ga, be] = th;
    collect(&move |n: [usize; 3]| {
        let r = mat_mul(&mat_mul(&rz(al, n[0]), &ry(be, n[2])), &rz(ga, n[1]));
        let a = [r[0][0], r[1][0], r[2][0]];
        let b = [r[0][1], r[1][1], r[2][1]];
        (embed_real(a), embed_imag(b))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_derivatives(kind: LinkKind, th: [f64; 3]) {
        let j = kind.jet(th);
        let h = 1e-5;
        for i in 0..3 {
            let mut p = th;
            let mut m = th;
            p[i] += h;
            m[i] -= h;
            let (jp, jm) = (kind.jet(p), kind.jet(m));
            for k in 0..8 {
                assert!(((jp.a[k] - jm.a[k]) / (2.0 * h) - j.da[i][k]).abs() < 1e-8);
                assert!(((jp.b[k] - jm.b[k]) / (2.0 * h) - j.db[i][k]).abs() < 1e-8);
                for l in 0..3 {
                    assert!(((jp.da[l][k] - jm.da[l][k]) / (2.0 * h) - j.dda[i][l][k]).abs() < 1e-8);
                    assert!(((jp.db[l][k] - jm.db[l][k]) / (2.0 * h) - j.ddb[i][l][k]).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn analytic_link_derivatives_match_differences() {
        check_derivatives(LinkKind::RoundSphere, [0.3, 1.9, 0.6]);
        check_derivatives(LinkKind::Quadric, [0.3, 1.1, 0.7]);
    }

    #[test]
    fn quadric_pair_is_orthonormal() {
        let j = LinkKind::Quadric.jet([0.4, 2.0, 1.3]);
        let a: Vec<f64> = [0, 2, 4].iter().map(|&k| j.a[k]).collect();
        let b = [j.b[1], j.b[3], -j.b[5]];
        let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>();
        assert!(dot.abs() < 1e-14);
        assert!((a.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-14);
    }
}
