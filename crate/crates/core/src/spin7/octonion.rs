//! Octonions on ℝ⁸. The first coordinate is the unit, the remaining seven are
//! the imaginary units e₁..e₇.

use std::sync::LazyLock;

pub type Oct = [f64; 8];

/// Oriented Fano lines `(i, j, k, s)` meaning `e_i e_j = s e_k`.
///
/// These signs are the unique choice (see [`matching_line_signs`]) for which the
/// alternated fourfold product reproduces the standard Cayley form.
pub const FANO_LINES: [(usize, usize, usize, f64); 7] = [
    (1, 2, 3, 1.0),
    (1, 4, 5, -1.0),
    (1, 6, 7, -1.0),
    (2, 4, 6, -1.0),
    (2, 5, 7, 1.0),
    (3, 4, 7, -1.0),
    (3, 5, 6, -1.0),
];

/// `TABLE[i][j] = (k, s)` with `e_i e_j = s e_k`.
pub type ProductTable = [[(usize, f64); 8]; 8];

pub fn product_table(lines: &[(usize, usize, usize, f64); 7]) -> ProductTable {
    let mut t = [[(0usize, 0.0f64); 8]; 8];
    for (i, row) in t.iter_mut().enumerate() {
        row[0] = (i, 1.0);
    }
    for j in 0..8 {
        t[0][j] = (j, 1.0);
    }
    for i in 1..8 {
        t[i][i] = (0, -1.0);
    }
    for &(i, j, k, s) in lines {
        // cyclic rotations keep the sign, transpositions flip it
        for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
            t[a][b] = (c, s);
            t[b][a] = (c, -s);
        }
    }
    t
}

static TABLE: LazyLock<ProductTable> = LazyLock::new(|| product_table(&FANO_LINES));

pub fn mul_with(t: &ProductTable, a: &Oct, b: &Oct) -> Oct {
    let mut c = [0.0; 8];
    for i in 0..8 {
        if a[i] == 0.0 {
            continue;
        }
        for j in 0..8 {
            let (k, s) = t[i][j];
            c[k] += s * a[i] * b[j];
        }
    }
    c
}

pub fn mul(a: &Oct, b: &Oct) -> Oct {
    mul_with(&TABLE, a, b)
}

pub fn conj(a: &Oct) -> Oct {
    let mut c = a.map(|x| -x);
    c[0] = a[0];
    c
}

pub fn norm(a: &Oct) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn basis(i: usize) -> Oct {
    let mut e = [0.0; 8];
    e[i] = 1.0;
    e
}

/// The 24 permutations of four slots with their signs.
pub(crate) fn perms4() -> Vec<([usize; 4], f64)> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let mut seen = [false; 4];
                    if p.iter().all(|&x| !std::mem::replace(&mut seen[x], true)) {
                        let mut inv = 0;
                        for i in 0..4 {
                            for j in i + 1..4 {
                                if p[i] > p[j] {
                                    inv += 1;
                                }
                            }
                        }
                        out.push((p, if inv % 2 == 0 { 1.0 } else { -1.0 }));
                    }
                }
            }
        }
    }
    out
}

/// Alternated fourfold product `-(1/24) Σ sgn(σ) x (ȳ (z w̄))` over permutations
/// of the arguments. Its real part is the Cayley form, its imaginary part the
/// quadruple product τ.
pub fn fourfold_with(t: &ProductTable, v: &[Oct; 4]) -> Oct {
    let mut acc = [0.0; 8];
    for (p, s) in perms4() {
        let (x, y, z, w) = (&v[p[0]], &v[p[1]], &v[p[2]], &v[p[3]]);
        let zw = mul_with(t, z, &conj(w));
        let yzw = mul_with(t, &conj(y), &zw);
        let r = mul_with(t, x, &yzw);
        for k in 0..8 {
            acc[k] += s * r[k];
        }
    }
    acc.map(|x| -x / 24.0)
}

pub fn fourfold(v: &[Oct; 4]) -> Oct {
    fourfold_with(&TABLE, v)
}

/// All sign assignments of the Fano lines whose induced 4-form equals `target`
/// on every basis 4-subset.
pub fn matching_line_signs(target: &super::FourForm) -> Vec<[f64; 7]> {
    let mut hits = Vec::new();
    for mask in 0u32..128 {
        let mut lines = FANO_LINES;
        let mut signs = [0.0; 7];
        for (l, line) in lines.iter_mut().enumerate() {
            line.3 = if mask >> l & 1 == 1 { -1.0 } else { 1.0 };
            signs[l] = line.3;
        }
        let t = product_table(&lines);
        let ok = super::form::SUBSETS.iter().enumerate().all(|(idx, s)| {
            let v = [basis(s[0]), basis(s[1]), basis(s[2]), basis(s[3])];
            (fourfold_with(&t, &v)[0] - target.coeffs[idx]).abs() < 1e-12
        });
        if ok {
            hits.push(signs);
        }
    }
    hits
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_oct(rng: &mut ChaCha8Rng) -> Oct {
        std::array::from_fn(|_| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn unit_and_imaginary_squares() {
        let x = [0.3, -1.0, 2.0, 0.5, 0.0, 1.5, -0.25, 4.0];
        assert_eq!(mul(&basis(0), &x), x);
        assert_eq!(mul(&x, &basis(0)), x);
        for i in 1..8 {
            let mut m = [0.0; 8];
            m[0] = -1.0;
            assert_eq!(mul(&basis(i), &basis(i)), m);
        }
    }

    #[test]
    fn norm_multiplicative_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let (a, b) = (rand_oct(&mut rng), rand_oct(&mut rng));
            let lhs = norm(&mul(&a, &b));
            assert!((lhs - norm(&a) * norm(&b)).abs() < 1e-12);
        }
    }

    #[test]
    fn imaginary_units_anticommute() {
        for i in 1..8 {
            for j in 1..8 {
                if i != j {
                    let ab = mul(&basis(i), &basis(j));
                    let ba = mul(&basis(j), &basis(i));
                    assert!(ab.iter().zip(ba).all(|(x, y)| x + y == 0.0));
                }
            }
        }
    }

    #[test]
    fn hard_coded_lines_are_the_unique_match() {
        let hits = matching_line_signs(&super::super::FourForm::phi0());
        assert_eq!(hits.len(), 1);
        let expected: Vec<f64> = FANO_LINES.iter().map(|l| l.3).collect();
        assert_eq!(hits[0].to_vec(), expected);
    }
}
