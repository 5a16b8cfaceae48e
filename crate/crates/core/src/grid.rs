//! Structured tensor grids with four axes. Node index varies fastest over
//! axis 0 (the first link coordinate) and slowest over axis 3 (the radius).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AxisKind {
    /// Uniform nodes on a circle of the given period.
    Periodic { period: f64 },
    /// Nodes including both interval endpoints (trapezoid quadrature).
    Closed,
    /// Cell centres of a uniform subdivision of `[lo, hi]` (midpoint quadrature).
    Midpoint { lo: f64, hi: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub nodes: Vec<f64>,
    pub kind: AxisKind,
}

/// Difference scheme for first derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Second-order one-sided (forward) differences, backward at the far end of
    /// bounded axes. Free of spurious zero modes on periodic grids.
    Upwind,
    /// Second-order central differences, one-sided at boundaries.
    Central,
}

/// Derivative at `t` of the quadratic interpolating the three points.
pub fn lagrange_deriv(xs: [f64; 3], t: f64) -> [f64; 3] {
    std::array::from_fn(|j| {
        let others: Vec<usize> = (0..3).filter(|&l| l != j).collect();
        let denom: f64 = others.iter().map(|&l| xs[j] - xs[l]).product();
        let num: f64 = others
            .iter()
            .map(|&m| others.iter().filter(|&&l| l != m).map(|&l| t - xs[l]).product::<f64>())
            .sum();
        num / denom
    })
}

impl Axis {
    pub fn periodic(n: usize, start: f64, period: f64) -> Self {
        let nodes = (0..n).map(|i| start + period * i as f64 / n as f64).collect();
        Axis {
            nodes,
            kind: AxisKind::Periodic { period },
        }
    }

    pub fn closed(nodes: Vec<f64>) -> Self {
        Axis {
            nodes,
            kind: AxisKind::Closed,
        }
    }

    pub fn uniform_closed(lo: f64, hi: f64, n: usize) -> Self {
        let nodes = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
        Axis {
            nodes,
            kind: AxisKind::Closed,
        }
    }

    pub fn midpoint(lo: f64, hi: f64, n: usize) -> Self {
        let h = (hi - lo) / n as f64;
        let nodes = (0..n).map(|i| lo + h * (i as f64 + 0.5)).collect();
        Axis {
            nodes,
            kind: AxisKind::Midpoint { lo, hi },
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.kind, AxisKind::Periodic { .. })
    }

    pub fn weights(&self) -> Vec<f64> {
        let n = self.len();
        match self.kind {
            AxisKind::Periodic { period } => vec![period / n as f64; n],
            AxisKind::Midpoint { lo, hi } => vec![(hi - lo) / n as f64; n],
            AxisKind::Closed => {
                let x = &self.nodes;
                (0..n)
                    .map(|i| {
                        let left = if i > 0 { x[i] - x[i - 1] } else { 0.0 };
                        let right = if i + 1 < n { x[i + 1] - x[i] } else { 0.0 };
                        0.5 * (left + right)
                    })
                    .collect()
            }
        }
    }

    /// Node `i + k` with its coordinate unwrapped across the period.
    fn shifted(&self, i: usize, k: isize) -> Option<(usize, f64)> {
        let n = self.len() as isize;
        let j = i as isize + k;
        match self.kind {
            AxisKind::Periodic { period } => {
                let wraps = j.div_euclid(n);
                let jj = j.rem_euclid(n) as usize;
                Some((jj, self.nodes[jj] + period * wraps as f64))
            }
            _ => (0..n).contains(&j).then(|| (j as usize, self.nodes[j as usize])),
        }
    }

    /// First-derivative weights at node `i` as `(node, weight)` pairs.
    pub fn stencil(&self, i: usize, scheme: Scheme) -> Vec<(usize, f64)> {
        let offsets: [[isize; 3]; 3] = [[0, 1, 2], [-1, 0, 1], [-2, -1, 0]];
        let order: &[usize] = match scheme {
            Scheme::Upwind => &[0, 2],
            Scheme::Central => &[1, 0, 2],
        };
        for &o in order {
            let pts: Option<Vec<(usize, f64)>> = offsets[o].iter().map(|&k| self.shifted(i, k)).collect();
            if let Some(p) = pts {
                let w = lagrange_deriv([p[0].1, p[1].1, p[2].1], self.nodes[i]);
                return p.iter().zip(w).map(|(&(j, _), w)| (j, w)).collect();
            }
        }
        Vec::new()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid4 {
    pub axes: [Axis; 4],
}

impl Grid4 {
    pub fn new(axes: [Axis; 4]) -> Result<Self> {
        if axes.iter().any(|a| a.len() < 3) {
            return Err(Error::BadRange("every axis needs at least 3 nodes".into()));
        }
        Ok(Grid4 { axes })
    }

    pub fn dims(&self) -> [usize; 4] {
        std::array::from_fn(|a| self.axes[a].len())
    }

    pub fn len(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: [usize; 4]) -> usize {
        let d = self.dims();
        i[0] + d[0] * (i[1] + d[1] * (i[2] + d[2] * i[3]))
    }

    pub fn multi(&self, mut idx: usize) -> [usize; 4] {
        let d = self.dims();
        let mut out = [0; 4];
        for a in 0..4 {
            out[a] = idx % d[a];
            idx /= d[a];
        }
        out
    }

    pub fn coords(&self, idx: usize) -> [f64; 4] {
        let m = self.multi(idx);
        std::array::from_fn(|a| self.axes[a].nodes[m[a]])
    }

    pub fn quadrature(&self) -> Vec<f64> {
        let w: [Vec<f64>; 4] = std::array::from_fn(|a| self.axes[a].weights());
        (0..self.len())
            .map(|idx| {
                let m = self.multi(idx);
                (0..4).map(|a| w[a][m[a]]).product()
            })
            .collect()
    }

    /// Per-node derivative stencils along each axis.
    pub fn stencils(&self, scheme: Scheme) -> Stencils {
        let one_d: [Vec<Vec<(usize, f64)>>; 4] = std::array::from_fn(|a| {
            (0..self.axes[a].len())
                .map(|i| self.axes[a].stencil(i, scheme))
                .collect()
        });
        let d = self.dims();
        let strides = [1, d[0], d[0] * d[1], d[0] * d[1] * d[2]];
        let mut rows = Vec::with_capacity(self.len());
        for idx in 0..self.len() {
            let m = self.multi(idx);
            let per_axis: [Vec<(usize, f64)>; 4] = std::array::from_fn(|a| {
                one_d[a][m[a]]
                    .iter()
                    .map(|&(j, w)| (idx + j * strides[a] - m[a] * strides[a], w))
                    .collect()
            });
            rows.push(per_axis);
        }
        Stencils { rows }
    }

    pub fn same_shape(&self, other: &Grid4) -> bool {
        self.dims() == other.dims()
    }
}

#[derive(Clone, Debug)]
pub struct Stencils {
    pub rows: Vec<[Vec<(usize, f64)>; 4]>,
}

impl Stencils {
    /// Derivative of a vector-valued nodal field along each axis at `node`.
    pub fn apply<const D: usize>(&self, field: &[[f64; D]], node: usize) -> [[f64; D]; 4] {
        std::array::from_fn(|a| {
            let mut acc = [0.0; D];
            for &(j, w) in &self.rows[node][a] {
                for k in 0..D {
                    acc[k] += w * field[j][k];
                }
            }
            acc
        })
    }

    pub fn apply_scalar(&self, field: &[f64], node: usize) -> [f64; 4] {
        std::array::from_fn(|a| self.rows[node][a].iter().map(|&(j, w)| w * field[j]).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_differentiate_quadratics_exactly() {
        let ax = Axis::closed(vec![0.0, 0.3, 0.7, 1.2, 2.0, 2.1]);
        for scheme in [Scheme::Upwind, Scheme::Central] {
            for i in 0..ax.len() {
                let st = ax.stencil(i, scheme);
                let d: f64 = st.iter().map(|&(j, w)| w * ax.nodes[j].powi(2)).sum();
                assert!((d - 2.0 * ax.nodes[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn upwind_is_forward_on_periodic_axes() {
        let ax = Axis::periodic(8, 0.0, 1.0);
        let st = ax.stencil(7, Scheme::Upwind);
        let idx: Vec<usize> = st.iter().map(|p| p.0).collect();
        assert_eq!(idx, vec![7, 0, 1]);
        let h = 1.0 / 8.0;
        assert!((st[0].1 + 1.5 / h).abs() < 1e-12);
        assert!((st[1].1 - 2.0 / h).abs() < 1e-12);
        assert!((st[2].1 + 0.5 / h).abs() < 1e-12);
    }

    #[test]
    fn quadrature_sums_to_measure() {
        let g = Grid4::new([
            Axis::periodic(5, 0.0, 2.0),
            Axis::midpoint(0.0, 3.0, 4),
            Axis::uniform_closed(1.0, 2.0, 7),
            Axis::closed(vec![0.0, 0.5, 2.0]),
        ])
        .unwrap();
        let total: f64 = g.quadrature().iter().sum();
        assert!((total - 2.0 * 3.0 * 1.0 * 2.0).abs() < 1e-12);
        for idx in [0, 17, g.len() - 1] {
            assert_eq!(g.index(g.multi(idx)), idx);
        }
    }
}
