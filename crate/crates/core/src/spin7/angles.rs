//! Characteristic angles between oriented 4-planes and the transverse-pair
//! angle criterion Σθᵢ ≤ π.

use super::plane::{det8, dot, OrientedPlane4};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleReport {
    /// Principal angles in ascending order.
    pub angles: [f64; 4],
    pub sum: f64,
    pub passes: bool,
    pub intersection_sign: i32,
}

/// Principal angles computed from cosines and sines separately so that both
/// small and near-right angles are resolved to full precision.
pub fn principal_angles(p1: &OrientedPlane4, p2: &OrientedPlane4) -> [f64; 4] {
    let c = DMatrix::from_fn(4, 4, |i, j| dot(&p1.frame[i], &p2.frame[j]));
    let mut cos: Vec<f64> = c.singular_values().iter().map(|x| x.min(1.0)).collect();
    cos.sort_by(|a, b| b.partial_cmp(a).unwrap());
    // components of p2 orthogonal to p1
    let resid = DMatrix::from_fn(4, 8, |j, k| {
        p2.frame[j][k]
            - (0..4)
                .map(|i| dot(&p1.frame[i], &p2.frame[j]) * p1.frame[i][k])
                .sum::<f64>()
    });
    let mut sin: Vec<f64> = resid.singular_values().iter().map(|x| x.min(1.0)).collect();
    sin.sort_by(|a, b| a.partial_cmp(b).unwrap());
    std::array::from_fn(|i| sin[i].atan2(cos[i]))
}

pub fn angle_criterion(p1: &OrientedPlane4, p2: &OrientedPlane4) -> Result<AngleReport> {
    let angles = principal_angles(p1, p2);
    if angles.iter().any(|&a| a < 1e-9) {
        return Err(Error::Degenerate { angles });
    }
    let sum: f64 = angles.iter().sum();
    let d = det8(&p1.frame, &p2.frame);
    let intersection_sign = if d.abs() < 1e-12 { 0 } else { d.signum() as i32 };
    Ok(AngleReport {
        angles,
        sum,
        passes: sum <= PI,
        intersection_sign,
    })
}

/// `span(e₁..e₄)` rotated towards `span(e₅..e₈)` by the given angles in the
/// coordinate two-planes `(eᵢ, e₄₊ᵢ)`.
pub fn rotated_reference(angles: [f64; 4]) -> OrientedPlane4 {
    let frame = std::array::from_fn(|i| {
        let mut v = [0.0; 8];
        v[i] = angles[i].cos();
        v[i + 4] = angles[i].sin();
        v
    });
    OrientedPlane4 { frame }
}
