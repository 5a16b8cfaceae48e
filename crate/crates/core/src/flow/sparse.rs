//! Compressed sparse rows and an LSQR least-squares solver.

use crate::error::{Error, Result};
use rayon::prelude::*;
use std::io::{Read, Write};

#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl Csr {
    /// Build from `(row, col, value)` triplets; duplicates are summed, exact
    /// zeros dropped, columns sorted within each row.
    pub fn from_triplets(nrows: usize, ncols: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_by_key(|e| (e.0, e.1));
        let mut indptr = vec![0; nrows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut data: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *data.last_mut().expect("entry exists") += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        let mut m = Csr {
            nrows,
            ncols,
            indptr,
            indices,
            data,
        };
        m.drop_zeros();
        m
    }

    fn drop_zeros(&mut self) {
        let mut indptr = vec![0; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut data = Vec::with_capacity(self.data.len());
        for r in 0..self.nrows {
            for p in self.indptr[r]..self.indptr[r + 1] {
                if self.data[p] != 0.0 {
                    indices.push(self.indices[p]);
                    data.push(self.data[p]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.data = data;
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.indptr[r]..self.indptr[r + 1]).map(move |p| (self.indices[p], self.data[p]))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows)
            .into_par_iter()
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn transpose(&self) -> Csr {
        let mut t = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                t.push((c, r, v));
            }
        }
        Csr::from_triplets(self.ncols, self.nrows, t)
    }

    /// Keep the listed rows and columns (in the given order).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Csr {
        let mut map = vec![usize::MAX; self.ncols];
        for (new, &c) in cols.iter().enumerate() {
            map[c] = new;
        }
        let mut t = Vec::new();
        for (nr, &r) in rows.iter().enumerate() {
            for (c, v) in self.row(r) {
                if map[c] != usize::MAX {
                    t.push((nr, map[c], v));
                }
            }
        }
        Csr::from_triplets(rows.len(), cols.len(), t)
    }

    /// `diag(left) · A · diag(right)`.
    pub fn scaled(&self, left: &[f64], right: &[f64]) -> Csr {
        let mut m = self.clone();
        for r in 0..self.nrows {
            for p in self.indptr[r]..self.indptr[r + 1] {
                m.data[p] *= left[r] * right[self.indices[p]];
            }
        }
        m
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                d[(r, c)] = v;
            }
        }
        d
    }

    /// Binary triplet file: `u64 nrows, u64 ncols, u64 nnz`, then `nnz` records
    /// of `(u64 row, u64 col, f64 value)`, all little-endian.
    pub fn write_triplets(&self, w: &mut impl Write) -> std::io::Result<()> {
        for v in [self.nrows, self.ncols, self.nnz()] {
            w.write_all(&(v as u64).to_le_bytes())?;
        }
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                w.write_all(&(r as u64).to_le_bytes())?;
                w.write_all(&(c as u64).to_le_bytes())?;
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_triplets(r: &mut impl Read) -> std::io::Result<Csr> {
        let mut b = [0u8; 8];
        let mut u = |r: &mut dyn Read| -> std::io::Result<u64> {
            r.read_exact(&mut b)?;
            Ok(u64::from_le_bytes(b))
        };
        let (nrows, ncols, nnz) = (u(r)? as usize, u(r)? as usize, u(r)? as usize);
        let mut t = Vec::with_capacity(nnz);
        for _ in 0..nnz {
            let row = u(r)? as usize;
            let col = u(r)? as usize;
            let v = f64::from_bits(u(r)?);
            t.push((row, col, v));
        }
        Ok(Csr::from_triplets(nrows, ncols, t))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LsqrOptions {
    pub atol: f64,
    pub btol: f64,
    pub max_iter: usize,
}

impl Default for LsqrOptions {
    fn default() -> Self {
        LsqrOptions {
            atol: 1e-12,
            btol: 1e-8,
            max_iter: 20_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LsqrResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `‖b − Ax‖`.
    pub residual: f64,
    /// `‖Aᵀ(b − Ax)‖`.
    pub normal_residual: f64,
    pub converged: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// LSQR (Paige–Saunders) started from zero, which yields the minimum-norm
/// least-squares solution. `at` must be the transpose of `a`.
pub fn lsqr(a: &Csr, at: &Csr, b: &[f64], opts: LsqrOptions) -> Result<LsqrResult> {
    if b.len() != a.nrows || at.nrows != a.ncols {
        return Err(Error::SolverFailure("dimension mismatch".into()));
    }
    let n = a.ncols;
    let mut x = vec![0.0; n];
    let mut beta = norm(b);
    if beta == 0.0 {
        return Ok(LsqrResult {
            x,
            iterations: 0,
            residual: 0.0,
            normal_residual: 0.0,
            converged: true,
        });
    }
    let mut u: Vec<f64> = b.iter().map(|v| v / beta).collect();
    let mut v = at.matvec(&u);
    let mut alpha = norm(&v);
    if alpha == 0.0 {
        return Ok(LsqrResult {
            x,
            iterations: 0,
            residual: beta,
            normal_residual: 0.0,
            converged: true,
        });
    }
    v.iter_mut().for_each(|e| *e /= alpha);
    let mut w = v.clone();
    let (mut phibar, mut rhobar) = (beta, alpha);
    let bnorm = beta;
    let mut anorm2 = 0.0;
    let mut arnorm = alpha * beta;
    let mut it = 0;
    let mut converged = false;
    while it < opts.max_iter {
        it += 1;
        let av = a.matvec(&v);
        u.iter_mut().zip(&av).for_each(|(ui, ai)| *ui = ai - alpha * *ui);
        beta = norm(&u);
        if beta > 0.0 {
            u.iter_mut().for_each(|e| *e /= beta);
        }
        anorm2 += alpha * alpha + beta * beta;
        let atu = at.matvec(&u);
        v.iter_mut().zip(&atu).for_each(|(vi, ai)| *vi = ai - beta * *vi);
        alpha = norm(&v);
        if alpha > 0.0 {
            v.iter_mut().for_each(|e| *e /= alpha);
        }
        let rho = rhobar.hypot(beta);
        let c = rhobar / rho;
        let s = beta / rho;
        let theta = s * alpha;
        rhobar = -c * alpha;
        let phi = c * phibar;
        phibar *= s;
        let t1 = phi / rho;
        let t2 = -theta / rho;
        x.iter_mut().zip(&w).for_each(|(xi, wi)| *xi += t1 * wi);
        w.iter_mut().zip(&v).for_each(|(wi, vi)| *wi = vi + t2 * *wi);
        arnorm = alpha * (c * phibar).abs();
        let anorm = anorm2.sqrt();
        let xnorm = norm(&x);
        let r = phibar;
        if r <= opts.btol * bnorm + opts.atol * anorm * xnorm || arnorm <= opts.atol * anorm * r {
            converged = true;
            break;
        }
    }
    Ok(LsqrResult {
        x,
        iterations: it,
        residual: phibar,
        normal_residual: arnorm,
        converged,
    })
}
