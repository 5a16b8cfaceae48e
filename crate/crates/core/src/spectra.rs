//! Critical rates of the linearized Cayley operator on the flat Cayley cone
//! ℝ⁴ ⊂ ℝ⁸, computed by exact linear algebra on homogeneous solutions.
//!
//! The operator is `D = Σ Bᵢ ∂ᵢ` on 4-component fields. Rates `λ ≥ 0` count
//! homogeneous polynomial solutions; rates `λ < 0` use the ansatz
//! `v = P(x)/|x|^{2m}` with `P` homogeneous of degree `λ + 2m`.

use crate::error::{Error, Result};
use crate::flow::pointwise_defect;
use crate::fmt::sci;
use crate::spin7::{e_basis_with_normals, OrientedPlane4, Vec8};
use nalgebra::{DMatrix, Matrix4};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantCoeffOperator {
    /// `b[i][row][col]`: coefficient matrix of `∂ᵢ`.
    pub b: [[[f64; 4]; 4]; 4],
}

/// Nearest rational with denominator ≤ 4 within 1e−8, if any.
pub fn small_rational(x: f64) -> Option<Ratio<i64>> {
    (1..=4).find_map(|d| {
        let n = (x * d as f64).round();
        ((x - n / d as f64).abs() <= 1e-8).then(|| Ratio::new(n as i64, d))
    })
}

/// Linearize the defect at the flat plane `span(e₁..e₄)` along linear normal
/// fields `xᵢ·e₄₊ₐ`, whose only effect is to tilt tangent `i` towards `e₄₊ₐ`.
pub fn extract_operator_coeffs() -> Result<ConstantCoeffOperator> {
    let plane = OrientedPlane4::span_of([0, 1, 2, 3]);
    let normals: [Vec8; 4] = OrientedPlane4::span_of([4, 5, 6, 7]).frame;
    let e = e_basis_with_normals(&plane, &normals)?;
    let id = [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ];
    let h = 1e-5;
    let f = |i: usize, a: usize, s: f64| {
        let mut t = plane.frame;
        t[i][4 + a] += s;
        pointwise_defect(&e.basis, &t, &id)
    };
    let mut b = [[[0.0; 4]; 4]; 4];
    let mut worst = 0.0f64;
    for i in 0..4 {
        for a in 0..4 {
            let (p, z, m) = (f(i, a, h), f(i, a, 0.0), f(i, a, -h));
            for r in 0..4 {
                let second = (p[r] - 2.0 * z[r] + m[r]) / (h * h);
                worst = worst.max(second.abs());
                let d = (p[r] - m[r]) / (2.0 * h);
                b[i][r][a] = small_rational(d).map_or(d, |q| *q.numer() as f64 / *q.denom() as f64);
            }
        }
    }
    if worst > 1e-6 {
        return Err(Error::NonLinearityDetected(worst));
    }
    Ok(ConstantCoeffOperator { b })
}

impl ConstantCoeffOperator {
    pub fn zero() -> Self {
        ConstantCoeffOperator { b: [[[0.0; 4]; 4]; 4] }
    }

    /// Principal symbol `Σ ξᵢ Bᵢ`.
    pub fn symbol(&self, xi: [f64; 4]) -> Matrix4<f64> {
        Matrix4::from_fn(|r, c| (0..4).map(|i| xi[i] * self.b[i][r][c]).sum())
    }

    /// Smallest `|det σ(ξ)|` over random unit covectors.
    pub fn min_symbol_det<R: Rng>(&self, rng: &mut R, samples: usize) -> f64 {
        (0..samples)
            .map(|_| {
                let v: [f64; 4] = std::array::from_fn(|_| crate::spin7::gaussian(rng));
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                self.symbol(v.map(|x| x / n)).determinant().abs()
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_elliptic<R: Rng>(&self, rng: &mut R) -> bool {
        self.min_symbol_det(rng, 100) >= 1e-6
    }

    /// Entries as exact rationals, or `None` if any entry is not a small rational.
    pub fn rational(&self) -> Option<[[[Ratio<i64>; 4]; 4]; 4]> {
        let mut out = [[[Ratio::zero(); 4]; 4]; 4];
        for i in 0..4 {
            for r in 0..4 {
                for c in 0..4 {
                    out[i][r][c] = small_rational(self.b[i][r][c])?;
                }
            }
        }
        Some(out)
    }

    /// Integer coefficients after clearing denominators (positive scale).
    fn integer_coeffs(&self) -> Result<[[[i64; 4]; 4]; 4]> {
        let q = self
            .rational()
            .ok_or_else(|| Error::BadRange("operator coefficients are not small rationals".into()))?;
        let l = q.iter().flatten().flatten().fold(1i64, |l, x| l.lcm(x.denom()));
        Ok(q.map(|m| m.map(|row| row.map(|x| (x * l).to_integer()))))
    }
}

/// Exponent tuples of degree `d` in four variables, in lexicographic order.
pub fn monomials(d: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for a in (0..=d).rev() {
        for b in (0..=d - a).rev() {
            for c in (0..=d - a - b).rev() {
                out.push([a, b, c, d - a - b - c]);
            }
        }
    }
    out
}

/// Sparse integer matrix stored by rows, each sorted by column.
#[derive(Clone, Debug, PartialEq)]
pub struct IntMatrix {
    pub ncols: usize,
    pub rows: Vec<Vec<(usize, BigInt)>>,
}

impl IntMatrix {
    fn from_map(nrows: usize, ncols: usize, entries: HashMap<(usize, usize), i64>) -> Self {
        let mut rows = vec![Vec::new(); nrows];
        for ((r, c), v) in entries {
            if v != 0 {
                rows[r].push((c, BigInt::from(v)));
            }
        }
        for row in &mut rows {
            row.sort_by_key(|e| e.0);
        }
        IntMatrix { ncols, rows }
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows.len(), self.ncols);
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row {
                m[(r, *c)] = v.to_string().parse::<f64>().expect("integer entry");
            }
        }
        m
    }

    /// Right-multiply by an integer matrix given as dense rows.
    pub fn times(&self, u: &[Vec<i64>]) -> IntMatrix {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                (0..self.ncols)
                    .filter_map(|c| {
                        let s: BigInt = row.iter().map(|(k, v)| v * BigInt::from(u[*k][c])).sum();
                        (!s.is_zero()).then_some((c, s))
                    })
                    .collect()
            })
            .collect();
        IntMatrix {
            ncols: self.ncols,
            rows,
        }
    }
}

fn normalize(row: &mut [(usize, BigInt)]) {
    let g = row.iter().fold(BigInt::zero(), |g, (_, v)| g.gcd(v));
    if g > BigInt::one() {
        for (_, v) in row.iter_mut() {
            *v /= &g;
        }
    }
}

/// `p·a − q·b` for sorted sparse rows.
fn combine(p: &BigInt, a: &[(usize, BigInt)], q: &BigInt, b: &[(usize, BigInt)]) -> Vec<(usize, BigInt)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ca = a.get(i).map_or(usize::MAX, |e| e.0);
        let cb = b.get(j).map_or(usize::MAX, |e| e.0);
        let (c, v) = if ca < cb {
            i += 1;
            (ca, p * &a[i - 1].1)
        } else if cb < ca {
            j += 1;
            (cb, -(q * &b[j - 1].1))
        } else {
            i += 1;
            j += 1;
            (ca, p * &a[i - 1].1 - q * &b[j - 1].1)
        };
        if !v.is_zero() {
            out.push((c, v));
        }
    }
    out
}

/// Row echelon form by fraction-free elimination: `(pivot column, row)` pairs.
fn echelon(m: &IntMatrix) -> Vec<(usize, Vec<(usize, BigInt)>)> {
    let mut active: Vec<Vec<(usize, BigInt)>> = m.rows.iter().filter(|r| !r.is_empty()).cloned().collect();
    let mut pivots = Vec::new();
    for col in 0..m.ncols {
        let hits: Vec<usize> = (0..active.len()).filter(|&r| active[r][0].0 == col).collect();
        let Some(&best) = hits.iter().min_by_key(|&&r| active[r].len()) else {
            continue;
        };
        let pivot = active[best].clone();
        for &r in &hits {
            if r != best {
                let lead = active[r][0].1.clone();
                let mut row = combine(&pivot[0].1, &active[r], &lead, &pivot);
                normalize(&mut row);
                active[r] = row;
            }
        }
        active.swap_remove(best);
        active.retain(|r| !r.is_empty());
        pivots.push((col, pivot));
    }
    pivots
}

pub fn exact_rank(m: &IntMatrix) -> usize {
    echelon(m).len()
}

/// Basis of the rational kernel, one vector per free column.
pub fn exact_kernel(m: &IntMatrix) -> Vec<Vec<BigRational>> {
    let piv = echelon(m);
    let is_pivot: Vec<bool> = {
        let mut v = vec![false; m.ncols];
        for (c, _) in &piv {
            v[*c] = true;
        }
        v
    };
    (0..m.ncols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut x = vec![BigRational::zero(); m.ncols];
            x[f] = BigRational::one();
            for (c, row) in piv.iter().rev() {
                let s: BigRational = row[1..]
                    .iter()
                    .map(|(j, v)| BigRational::from(v.clone()) * &x[*j])
                    .sum();
                x[*c] = -s / BigRational::from(row[0].1.clone());
            }
            x
        })
        .collect()
}

/// Numerical kernel dimension by SVD (cross-check only).
pub fn float_kernel_dim(m: &IntMatrix) -> usize {
    let a = m.to_f64();
    if a.nrows() == 0 {
        return a.ncols();
    }
    let sv = if a.nrows() >= a.ncols() {
        a.singular_values()
    } else {
        a.transpose().singular_values()
    };
    let smax = sv.iter().fold(0.0f64, |x, y| x.max(*y));
    let rank = sv.iter().filter(|&&s| s > 1e-9 * smax.max(1.0)).count();
    a.ncols() - rank
}

/// Linear system of `D` on homogeneous polynomial fields of the given degree:
/// unknowns `(component, monomial of degree d)`, equations on degree `d − 1`.
pub fn homogeneous_system(op: &ConstantCoeffOperator, degree: usize) -> Result<IntMatrix> {
    let b = op.integer_coeffs()?;
    let cols = monomials(degree);
    if degree == 0 {
        return Ok(IntMatrix {
            ncols: 4 * cols.len(),
            rows: Vec::new(),
        });
    }
    let rows = monomials(degree - 1);
    let row_of: HashMap<[usize; 4], usize> = rows.iter().enumerate().map(|(k, m)| (*m, k)).collect();
    let mut e = HashMap::new();
    for (cm, mono) in cols.iter().enumerate() {
        for i in 0..4 {
            if mono[i] == 0 {
                continue;
            }
            let mut t = *mono;
            t[i] -= 1;
            let r = row_of[&t];
            for n in 0..4 {
                for a in 0..4 {
                    *e.entry((4 * r + n, 4 * cm + a)).or_insert(0) += b[i][n][a] * mono[i] as i64;
                }
            }
        }
    }
    Ok(IntMatrix::from_map(4 * rows.len(), 4 * cols.len(), e))
}

pub fn homogeneous_kernel_dim(op: &ConstantCoeffOperator, degree: usize) -> Result<usize> {
    if degree > 6 {
        return Err(Error::BadRange(format!("degree {degree} > 6")));
    }
    let m = homogeneous_system(op, degree)?;
    Ok(m.ncols - exact_rank(&m))
}

/// `|x|^{2m+2}·D(P/|x|^{2m}) = |x|² Σ Bᵢ∂ᵢP − 2m Σ xᵢBᵢP` on `P` of degree `deg`.
pub fn ansatz_system(op: &ConstantCoeffOperator, deg: usize, m: usize) -> Result<IntMatrix> {
    let b = op.integer_coeffs()?;
    let cols = monomials(deg);
    let rows = monomials(deg + 1);
    let row_of: HashMap<[usize; 4], usize> = rows.iter().enumerate().map(|(k, m)| (*m, k)).collect();
    let mut e = HashMap::new();
    let mut add = |mono: [usize; 4], cm: usize, i: usize, scale: i64| {
        let r = row_of[&mono];
        for n in 0..4 {
            for a in 0..4 {
                *e.entry((4 * r + n, 4 * cm + a)).or_insert(0) += scale * b[i][n][a];
            }
        }
    };
    for (cm, mono) in cols.iter().enumerate() {
        for i in 0..4 {
            if mono[i] > 0 {
                for j in 0..4 {
                    let mut t = *mono;
                    t[i] -= 1;
                    t[j] += 2;
                    add(t, cm, i, mono[i] as i64);
                }
            }
            let mut t = *mono;
            t[i] += 1;
            add(t, cm, i, -2 * m as i64);
        }
    }
    Ok(IntMatrix::from_map(4 * rows.len(), 4 * cols.len(), e))
}

/// Coefficients of `|x|^{2k}·P` for `P` given on `monomials(deg)` (4 components).
fn times_r2k(p: &[BigRational], deg: usize, k: usize) -> Vec<BigRational> {
    let mut cur: Vec<BigRational> = p.to_vec();
    let mut d = deg;
    for _ in 0..k {
        let src = monomials(d);
        let dst = monomials(d + 2);
        let idx: HashMap<[usize; 4], usize> = dst.iter().enumerate().map(|(k, m)| (*m, k)).collect();
        let mut next = vec![BigRational::zero(); 4 * dst.len()];
        for (s, mono) in src.iter().enumerate() {
            for j in 0..4 {
                let mut t = *mono;
                t[j] += 2;
                let r = idx[&t];
                for a in 0..4 {
                    next[4 * r + a] += &cur[4 * s + a];
                }
            }
        }
        cur = next;
        d += 2;
    }
    cur
}

fn rational_rank(vectors: &[Vec<BigRational>]) -> usize {
    // clear denominators row by row, then reuse the integer elimination
    let ncols = vectors.first().map_or(0, |v| v.len());
    let rows = vectors
        .iter()
        .map(|v| {
            let l = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
            v.iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .map(|(c, x)| (c, (x * BigRational::from(l.clone())).to_integer()))
                .collect()
        })
        .collect();
    exact_rank(&IntMatrix { ncols, rows })
}

/// Dimension of rate-`λ` solutions for `λ < 0`, using `m = 1..=4`. Solutions
/// from every `m` are lifted to the common denominator `|x|^8` and the joint
/// rank is tracked; the count must stabilize over the last two values of `m`.
pub fn negative_rate_kernel_dim(op: &ConstantCoeffOperator, lambda: i32) -> Result<usize> {
    if lambda >= 0 {
        return Err(Error::BadRange(format!("rate {lambda} is not negative")));
    }
    let m_max = 4usize;
    let top = lambda + 2 * m_max as i32;
    if top < 0 {
        return Err(Error::BadRange(format!("rate {lambda} is below the ansatz range")));
    }
    let mut joint: Vec<Vec<BigRational>> = Vec::new();
    let mut dims = Vec::new();
    for m in 1..=m_max {
        let deg = lambda + 2 * m as i32;
        if deg >= 0 {
            let deg = deg as usize;
            for p in exact_kernel(&ansatz_system(op, deg, m)?) {
                joint.push(times_r2k(&p, deg, m_max - m));
            }
        }
        dims.push(rational_rank(&joint));
    }
    let n = dims.len();
    if dims[n - 1] != dims[n - 2] {
        return Err(Error::AnsatzExhausted { lambda, dims });
    }
    Ok(dims[n - 1])
}

/// Integer rate with its multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub entries: Vec<(f64, usize)>,
    pub range: (f64, f64),
}

/// Integer rates in the open interval with nonzero multiplicity. Only integer
/// rates occur: every solution is componentwise harmonic and homogeneous.
pub fn flat_rate_table(op: &ConstantCoeffOperator, lo: f64, hi: f64) -> Result<RateTable> {
    if !(lo < hi) {
        return Err(Error::BadRange(format!("empty rate range ({lo}, {hi})")));
    }
    let mut entries = Vec::new();
    let first = (lo.floor() as i32) + 1;
    for l in first..=(hi.ceil() as i32 - 1) {
        if (l as f64) <= lo || (l as f64) >= hi {
            continue;
        }
        let d = if l >= 0 {
            homogeneous_kernel_dim(op, l as usize)?
        } else {
            negative_rate_kernel_dim(op, l)?
        };
        if d > 0 {
            entries.push((l as f64, d));
        }
    }
    Ok(RateTable {
        entries,
        range: (lo, hi),
    })
}

impl RateTable {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["lambda", "d"]).expect("in-memory write");
        for (l, d) in &self.entries {
            w.write_record([sci(*l), d.to_string()]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let headers = r.headers().map_err(|e| Error::BadRange(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["lambda", "d"] {
            return Err(Error::BadRange("rate table header must be `lambda,d`".into()));
        }
        let mut entries: Vec<(f64, usize)> = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::BadRange(e.to_string()))?;
            let l: f64 = rec[0]
                .trim()
                .parse()
                .map_err(|_| Error::BadRange(format!("bad rate `{}`", &rec[0])))?;
            let d: usize = rec[1]
                .trim()
                .parse()
                .map_err(|_| Error::BadRange(format!("bad multiplicity `{}`", &rec[1])))?;
            if entries.last().is_some_and(|e| e.0 >= l) {
                return Err(Error::BadRange("rates must be strictly increasing".into()));
            }
            entries.push((l, d));
        }
        let range = match (entries.first(), entries.last()) {
            (Some(a), Some(b)) => (a.0, b.0),
            _ => (0.0, 0.0),
        };
        Ok(RateTable { entries, range })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }
}

/// `Σ d(λ)` over rates strictly between the endpoints.
pub fn index_change(table: &RateTable, delta1: f64, delta2: f64) -> Result<i64> {
    if !(delta1 < delta2) {
        return Err(Error::BadRange(format!(
            "need delta1 < delta2, got ({delta1}, {delta2})"
        )));
    }
    for &(l, _) in &table.entries {
        for d in [delta1, delta2] {
            if (l - d).abs() <= 1e-9 {
                return Err(Error::CriticalEndpoint(d));
            }
        }
    }
    Ok(table
        .entries
        .iter()
        .filter(|(l, _)| *l > delta1 && *l < delta2)
        .map(|(_, d)| *d as i64)
        .sum())
}

/// Reference multiplicities for the flat Cayley plane over `(−4, 2)`.
pub const FLAT_REFERENCE: [(i32, usize); 4] = [(-3, 1), (-1, 1), (0, 4), (1, 12)];

/// Compare against [`FLAT_REFERENCE`]; a mismatch reports the computed table.
pub fn check_flat_table(table: &RateTable) -> Result<()> {
    let expected: Vec<(f64, usize)> = FLAT_REFERENCE.iter().map(|&(l, d)| (l as f64, d)).collect();
    if table.entries == expected {
        Ok(())
    } else {
        let shown: Vec<String> = table.entries.iter().map(|(l, d)| format!("({l}, {d})")).collect();
        Err(Error::RateTableMismatch(shown.join(" ")))
    }
}

/// `½(σ + χ) − [N]·[N] + dim 𝒮` for a compact Cayley.
pub fn compact_index_formula(sigma: i64, euler: i64, self_intersection: i64, dim_family: i64) -> Result<i64> {
    if (sigma + euler) % 2 != 0 {
        return Err(Error::ParityError(sigma + euler));
    }
    if dim_family < 0 {
        return Err(Error::BadRange("family dimension must be nonnegative".into()));
    }
    Ok((sigma + euler) / 2 - self_intersection + dim_family)
}

/// Symbol check: `BᵢᵀBⱼ + BⱼᵀBᵢ = 2δᵢⱼ`.
pub fn clifford_defect(op: &ConstantCoeffOperator) -> f64 {
    let m: [Matrix4<f64>; 4] = std::array::from_fn(|i| Matrix4::from_fn(|r, c| op.b[i][r][c]));
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let s = m[i].transpose() * m[j] + m[j].transpose() * m[i];
            let target: Matrix4<f64> = Matrix4::identity() * if i == j { 2.0 } else { 0.0 };
            worst = worst.max((s - target).abs().max());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_are_small_integers_with_clifford_symbol() {
        let op = extract_operator_coeffs().unwrap();
        assert!(op.rational().is_some());
        for x in op.b.iter().flatten().flatten() {
            assert!([-1.0, -0.5, 0.0, 0.5, 1.0].contains(x), "{x}");
        }
        assert!(clifford_defect(&op) < 1e-12);
        assert!(op.symbol([1.0, 0.0, 0.0, 0.0]).determinant().abs() > 0.5);
    }

    #[test]
    fn low_degree_kernels() {
        let op = extract_operator_coeffs().unwrap();
        assert_eq!(homogeneous_kernel_dim(&op, 0).unwrap(), 4);
        assert_eq!(homogeneous_kernel_dim(&op, 1).unwrap(), 12);
        assert_eq!(homogeneous_kernel_dim(&ConstantCoeffOperator::zero(), 0).unwrap(), 4);
    }

    #[test]
    fn index_formula_arithmetic() {
        assert_eq!(compact_index_formula(0, 0, 0, 0).unwrap(), 0);
        assert_eq!(compact_index_formula(0, 2, 0, 0).unwrap(), 1);
        assert_eq!(compact_index_formula(-16, 24, 0, 0).unwrap(), 4);
        assert!(matches!(compact_index_formula(1, 0, 0, 0), Err(Error::ParityError(1))));
    }

    #[test]
    fn csv_roundtrip() {
        let t = RateTable {
            entries: vec![(-3.0, 4), (0.0, 4), (1.0, 12)],
            range: (-4.0, 2.0),
        };
        let back = RateTable::from_csv(&t.to_csv()).unwrap();
        assert_eq!(back.entries, t.entries);
        assert!(t.to_csv().starts_with("lambda,d\n"));
        let commented = RateTable::from_csv(&format!("# seed=3\n{}", t.to_csv())).unwrap();
        assert_eq!(commented.entries, t.entries);
    }
}
