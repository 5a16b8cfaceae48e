//! The Cayley form and the quadruple product τ evaluated through precomputed
//! coefficient tables of the alternated fourfold octonion product.

use super::form::{minors, FourForm, Vec8};
use super::octonion::{basis, fourfold};
use serde::{Deserialize, Serialize};
use std::sync::LazyLock;

/// Sparse coefficient lists: component 0 is the real part (the Cayley form),
/// components 1..8 the imaginary part.
struct Tables {
    terms: [Vec<(usize, f64)>; 8],
}

static TABLES: LazyLock<Tables> = LazyLock::new(|| {
    let mut dense = [[0.0f64; 70]; 8];
    for (idx, s) in super::form::SUBSETS.iter().enumerate() {
        let v = [basis(s[0]), basis(s[1]), basis(s[2]), basis(s[3])];
        let q = fourfold(&v);
        for c in 0..8 {
            // entries are exact multiples of 1/24 summed to integers
            dense[c][idx] = (q[c] * 24.0).round() / 24.0;
        }
    }
    let terms = std::array::from_fn(|c| {
        dense[c]
            .iter()
            .enumerate()
            .filter(|(_, x)| x.abs() > 1e-12)
            .map(|(i, x)| (i, *x))
            .collect()
    });
    Tables { terms }
});

/// Quadruple product value in Im 𝕆.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauValue {
    pub components: [f64; 7],
}

impl TauValue {
    pub fn norm(&self) -> f64 {
        self.components.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Real and imaginary parts of the alternated product on four vectors.
pub fn quad(v: &[Vec8; 4]) -> [f64; 8] {
    let m = minors(v);
    std::array::from_fn(|c| TABLES.terms[c].iter().map(|&(i, x)| x * m[i]).sum())
}

pub fn phi0_eval(v: &[Vec8; 4]) -> f64 {
    let m = minors(v);
    TABLES.terms[0].iter().map(|&(i, x)| x * m[i]).sum()
}

pub fn tau_raw(v: &[Vec8; 4]) -> [f64; 7] {
    let m = minors(v);
    std::array::from_fn(|c| TABLES.terms[c + 1].iter().map(|&(i, x)| x * m[i]).sum())
}

pub fn tau_eval(v: &[Vec8; 4]) -> TauValue {
    TauValue { components: tau_raw(v) }
}

/// Cayley form reconstructed from the octonion product.
pub fn derived_phi0() -> FourForm {
    let mut f = FourForm::zero();
    for &(i, x) in &TABLES.terms[0] {
        f.coeffs[i] = x;
    }
    f
}

/// The 7×8 matrix of `w ↦ τ(v₀,…,w,…,v₃)` with `w` in slot `slot`.
pub fn tau_slot_matrix(v: &[Vec8; 4], slot: usize) -> [[f64; 8]; 7] {
    let mut out = [[0.0; 8]; 7];
    let mut w = *v;
    for k in 0..8 {
        w[slot] = basis(k);
        let t = tau_raw(&w);
        for c in 0..7 {
            out[c][k] = t[c];
        }
    }
    out
}
