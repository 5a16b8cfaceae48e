//! Alternating 4-forms on ℝ⁸ stored by their 70 basis coefficients.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::sync::LazyLock;

pub type Vec8 = [f64; 8];

/// Strictly increasing 4-subsets of {0..8} in lexicographic order.
pub static SUBSETS: LazyLock<Vec<[usize; 4]>> = LazyLock::new(|| {
    let mut v = Vec::with_capacity(70);
    for a in 0..8 {
        for b in a + 1..8 {
            for c in b + 1..8 {
                for d in c + 1..8 {
                    v.push([a, b, c, d]);
                }
            }
        }
    }
    v
});

/// Pair index of `(a, b)` with `a < b` among the 28 column pairs.
fn pair_index(a: usize, b: usize) -> usize {
    debug_assert!(a < b);
    a * (15 - a) / 2 + b - a - 1
}

/// Laplace expansion plan: each 4-subset splits into 6 (pair, complementary pair, sign).
static SPLITS: LazyLock<Vec<[(usize, usize, f64); 6]>> = LazyLock::new(|| {
    SUBSETS
        .iter()
        .map(|s| {
            // splits of positions {0,1,2,3} into (p,q | r,u) with sign of the permutation
            let plans = [
                ((0, 1), (2, 3), 1.0),
                ((0, 2), (1, 3), -1.0),
                ((0, 3), (1, 2), 1.0),
                ((1, 2), (0, 3), 1.0),
                ((1, 3), (0, 2), -1.0),
                ((2, 3), (0, 1), 1.0),
            ];
            plans.map(|((p, q), (r, u), sg)| (pair_index(s[p], s[q]), pair_index(s[r], s[u]), sg))
        })
        .collect()
});

/// All 70 maximal minors of the 4×8 matrix with rows `v`.
pub fn minors(v: &[Vec8; 4]) -> [f64; 70] {
    let mut m01 = [0.0; 28];
    let mut m23 = [0.0; 28];
    let mut idx = 0;
    for a in 0..8 {
        for b in a + 1..8 {
            m01[idx] = v[0][a] * v[1][b] - v[0][b] * v[1][a];
            m23[idx] = v[2][a] * v[3][b] - v[2][b] * v[3][a];
            idx += 1;
        }
    }
    let mut out = [0.0; 70];
    for (o, plan) in out.iter_mut().zip(SPLITS.iter()) {
        *o = plan.iter().map(|&(i, j, s)| s * m01[i] * m23[j]).sum();
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct FourForm {
    pub coeffs: [f64; 70],
}

/// Nonzero terms of the Cayley form, 1-based index quadruples.
pub const PHI0_TERMS: [([usize; 4], f64); 14] = [
    ([1, 2, 3, 4], 1.0),
    ([1, 2, 5, 6], -1.0),
    ([1, 2, 7, 8], -1.0),
    ([1, 3, 5, 7], -1.0),
    ([1, 3, 6, 8], 1.0),
    ([1, 4, 5, 8], -1.0),
    ([1, 4, 6, 7], -1.0),
    ([2, 3, 5, 8], -1.0),
    ([2, 3, 6, 7], -1.0),
    ([2, 4, 5, 7], 1.0),
    ([2, 4, 6, 8], -1.0),
    ([3, 4, 5, 6], -1.0),
    ([3, 4, 7, 8], -1.0),
    ([5, 6, 7, 8], 1.0),
];

impl FourForm {
    pub fn zero() -> Self {
        FourForm { coeffs: [0.0; 70] }
    }

    pub fn subset_index(s: [usize; 4]) -> Option<usize> {
        SUBSETS.iter().position(|&x| x == s)
    }

    /// The standard Cayley form on ℝ⁸.
    pub fn phi0() -> Self {
        let mut f = Self::zero();
        for (s, c) in PHI0_TERMS {
            let idx = Self::subset_index(s.map(|i| i - 1)).expect("sorted subset");
            f.coeffs[idx] = c;
        }
        f
    }

    /// Coefficients of an alternating multilinear map read off on basis 4-subsets.
    pub fn from_alternating(f: impl Fn(&[Vec8; 4]) -> f64) -> Self {
        let mut out = Self::zero();
        for (c, s) in out.coeffs.iter_mut().zip(SUBSETS.iter()) {
            let v = s.map(|i| {
                let mut e = [0.0; 8];
                e[i] = 1.0;
                e
            });
            *c = f(&v);
        }
        out
    }

    pub fn eval(&self, v: &[Vec8; 4]) -> f64 {
        let m = minors(v);
        self.coeffs.iter().zip(m.iter()).map(|(c, x)| c * x).sum()
    }

    pub fn nonzero_terms(&self) -> Vec<([usize; 4], f64)> {
        SUBSETS
            .iter()
            .zip(self.coeffs.iter())
            .filter(|(_, c)| **c != 0.0)
            .map(|(s, c)| (*s, *c))
            .collect()
    }
}

fn subset_key(s: &[usize; 4]) -> String {
    s.iter().map(|i| char::from(b'1' + *i as u8)).collect()
}

impl Serialize for FourForm {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<String, f64> = SUBSETS
            .iter()
            .zip(self.coeffs.iter())
            .map(|(s, c)| (subset_key(s), *c))
            .collect();
        #[derive(Serialize)]
        struct Wire {
            coeffs: BTreeMap<String, f64>,
        }
        Wire { coeffs: map }.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for FourForm {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            coeffs: BTreeMap<String, f64>,
        }
        let w = Wire::deserialize(de)?;
        let mut f = FourForm::zero();
        for (k, v) in w.coeffs {
            let digits: Vec<usize> = k.bytes().map(|b| (b as usize).wrapping_sub(b'1' as usize)).collect();
            let s: [usize; 4] = digits
                .try_into()
                .map_err(|_| serde::de::Error::custom(format!("bad subset key {k}")))?;
            let idx =
                FourForm::subset_index(s).ok_or_else(|| serde::de::Error::custom(format!("bad subset key {k}")))?;
            f.coeffs[idx] = v;
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det4(m: [[f64; 4]; 4]) -> f64 {
        let mut total = 0.0;
        for (p, s) in crate::spin7::octonion::perms4() {
            total += s * (0..4).map(|i| m[i][p[i]]).product::<f64>();
        }
        total
    }

    #[test]
    fn minors_match_permutation_expansion() {
        let v: [Vec8; 4] = std::array::from_fn(|i| std::array::from_fn(|j| ((i * 8 + j) as f64 * 0.37).sin()));
        let m = minors(&v);
        for (k, s) in SUBSETS.iter().enumerate() {
            let sub = std::array::from_fn(|i| std::array::from_fn(|j| v[i][s[j]]));
            assert!((m[k] - det4(sub)).abs() < 1e-12);
        }
    }

    #[test]
    fn phi0_has_fourteen_unit_terms() {
        let f = FourForm::phi0();
        let t = f.nonzero_terms();
        assert_eq!(t.len(), 14);
        assert!(t.iter().all(|(_, c)| c.abs() == 1.0));
    }

    #[test]
    fn json_roundtrip() {
        let f = FourForm::phi0();
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"1234\":1.0"));
        let g: FourForm = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }
}
