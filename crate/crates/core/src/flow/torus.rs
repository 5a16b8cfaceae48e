//! Singular values of translation-invariant operators on periodic grids.
//!
//! A block operator that commutes with grid translations is block diagonal in
//! the discrete Fourier basis, so its singular values are those of the
//! `b × b` symbol blocks `Â(θ) = Σ_off A(off) e^{iθ·off}`, one per wave vector.

use super::Csr;
use crate::error::{Error, Result};
use crate::grid::Grid4;
use nalgebra::{Complex, DMatrix};

/// Entries of the block rows of node 0 as `(row comp, offset node, col comp, value)`.
fn origin_stencil(d: &Csr, block: usize) -> Vec<(usize, usize, usize, f64)> {
    (0..block)
        .flat_map(|e| d.row(e).map(move |(c, v)| (e, c / block, c % block, v)))
        .collect()
}

fn wrap(grid: &Grid4, from: usize, to: usize) -> usize {
    let dims = grid.dims();
    let (a, b) = (grid.multi(from), grid.multi(to));
    grid.index(std::array::from_fn(|k| (b[k] + dims[k] - a[k]) % dims[k]))
}

/// All singular values of `d` (ascending), with `block` unknowns per node.
/// Fails with `GridMismatch` unless every block row is a translate of node 0's.
pub fn periodic_singular_values(d: &Csr, grid: &Grid4, block: usize) -> Result<Vec<f64>> {
    let n = grid.len();
    if d.nrows != n * block || d.ncols != n * block {
        return Err(Error::GridMismatch(format!(
            "{}×{} operator on {n} nodes",
            d.nrows, d.ncols
        )));
    }
    let origin = origin_stencil(d, block);
    let scale = origin.iter().fold(0.0f64, |m, x| m.max(x.3.abs())).max(1.0);
    let mut reference = std::collections::HashMap::new();
    for &(e, j, a, v) in &origin {
        *reference.entry((e, j, a)).or_insert(0.0) += v;
    }
    for node in 0..n {
        let mut seen = std::collections::HashMap::new();
        for e in 0..block {
            for (c, v) in d.row(node * block + e) {
                *seen.entry((e, wrap(grid, node, c / block), c % block)).or_insert(0.0) += v;
            }
        }
        let keys: std::collections::BTreeSet<_> = seen.keys().chain(reference.keys()).copied().collect();
        for key in keys {
            let dev = (seen.get(&key).copied().unwrap_or(0.0) - reference.get(&key).copied().unwrap_or(0.0)).abs();
            if dev > 1e-12 * scale {
                return Err(Error::GridMismatch(format!(
                    "operator is not translation invariant at node {node}"
                )));
            }
        }
    }
    let dims = grid.dims();
    let mut out = Vec::with_capacity(n * block);
    for kn in 0..n {
        let k = grid.multi(kn);
        let mut sym = DMatrix::<Complex<f64>>::zeros(block, block);
        for &(e, j, a, v) in &origin {
            let off = grid.multi(j);
            let phase: f64 = (0..4)
                .map(|q| 2.0 * std::f64::consts::PI * (k[q] * off[q]) as f64 / dims[q] as f64)
                .sum();
            sym[(e, a)] += Complex::from_polar(v, phase);
        }
        out.extend(sym.singular_values().iter().copied());
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Number of singular values below the largest relative gap among the
/// smallest `window`, with the gap size.
pub fn kernel_gap(sv: &[f64], window: usize) -> (usize, f64) {
    let w = window.min(sv.len().saturating_sub(1));
    (0..w)
        .map(|i| (i + 1, sv[i + 1] / sv[i].max(f64::MIN_POSITIVE)))
        .fold((0, 0.0), |best, c| if c.1 > best.1 { c } else { best })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense_svd_for_a_forward_difference() {
        let grid = Grid4::new(std::array::from_fn(|_| crate::grid::Axis::periodic(3, 0.0, 1.0))).unwrap();
        let t: Vec<_> = (0..grid.len())
            .flat_map(|i| {
                let mut m = grid.multi(i);
                m[0] = (m[0] + 1) % 3;
                m[2] = (m[2] + 2) % 3;
                [(i, i, -1.0), (i, grid.index(m), 1.5)]
            })
            .collect();
        let d = Csr::from_triplets(grid.len(), grid.len(), t);
        let sv = periodic_singular_values(&d, &grid, 1).unwrap();
        let mut dense: Vec<f64> = d.to_dense().singular_values().iter().copied().collect();
        dense.sort_by(f64::total_cmp);
        for (a, b) in sv.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_position_dependent_operators() {
        let grid = Grid4::new(std::array::from_fn(|_| crate::grid::Axis::periodic(3, 0.0, 1.0))).unwrap();
        let d = Csr::from_triplets(
            grid.len(),
            grid.len(),
            (0..grid.len()).map(|i| (i, i, i as f64)).collect(),
        );
        assert!(matches!(
            periodic_singular_values(&d, &grid, 1),
            Err(Error::GridMismatch(_))
        ));
    }
}
