//! Sampled constants for the partition product bounds and the quadratic
//! difference estimate, and the frozen values they are checked against.
//!
//! Constants are fitted once on one seed with a safety factor, written to a
//! TOML file, and re-verified on fresh fields from another seed.

use crate::error::{Error, Result};
use crate::flow::{Deformation, NormalField, TangentMode};
use crate::gluing::{gradient_product_ratio, product_ratio, quadric_scenario, GluingData};
use crate::scenarios::Resolution;
use crate::weighted::{weighted_sobolev_norm_with, Field, PatchGeometry, RadiusFunction, WeightedNormSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Geometry and norm parameters shared by the sweeps.
#[derive(Clone, Copy, Debug)]
pub struct EstimateSetup {
    pub epsilon: f64,
    pub nu: f64,
    pub big_r0: f64,
    pub r0: f64,
    pub p: f64,
    pub k: usize,
    pub delta: f64,
    pub res: Resolution,
}

impl Default for EstimateSetup {
    fn default() -> Self {
        EstimateSetup {
            epsilon: 0.1,
            nu: 0.8,
            big_r0: 0.5,
            r0: 0.2,
            p: 2.0,
            k: 1,
            delta: 1.25,
            res: Resolution {
                link: [6, 6, 6],
                radial: 32,
            },
        }
    }
}

/// A random smooth field `ρ^δ · Σ aⱼ cos(mⱼ·x + φⱼ)` on the grid coordinates,
/// with small integer wave numbers (the radial one in `ln s`).
pub fn random_smooth_field<R: Rng>(
    coords: &[[f64; 4]],
    rho: &RadiusFunction,
    delta: f64,
    comps: usize,
    rng: &mut R,
) -> Field {
    let modes: Vec<Vec<([f64; 4], f64, f64)>> = (0..comps)
        .map(|_| {
            (0..4)
                .map(|_| {
                    let m: [f64; 4] = std::array::from_fn(|_| rng.random_range(-2i32..=2) as f64);
                    (
                        m,
                        rng.random_range(-1.0..1.0),
                        rng.random_range(0.0..std::f64::consts::TAU),
                    )
                })
                .collect()
        })
        .collect();
    let mut data = Vec::with_capacity(coords.len() * comps);
    for (n, x) in coords.iter().enumerate() {
        let w = rho.values[n].powf(delta);
        for c in &modes {
            let v: f64 = c
                .iter()
                .map(|(m, a, ph)| a * (m.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + ph).cos())
                .sum();
            data.push(w * v);
        }
    }
    Field { data, comps }
}

/// Largest sampled ratios at one scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProductSample {
    pub t: f64,
    /// `max ‖αu‖_{k,δ} / ‖u‖_{k,δ}`.
    pub c0: f64,
    /// `max ‖|∇α| u‖_{k,δ−1} · |log t| / ‖u‖_{k,δ}`.
    pub c1: f64,
}

/// Product ratios for `count` random fields at each scale.
pub fn product_sweep(setup: &EstimateSetup, t_list: &[f64], count: usize, seed: u64) -> Result<Vec<ProductSample>> {
    let spec = WeightedNormSpec::new(setup.p, setup.k, setup.delta)?;
    t_list
        .iter()
        .map(|&t| {
            let glued = quadric_scenario(
                setup.epsilon,
                &GluingData::new(t, setup.nu, setup.big_r0, setup.r0),
                setup.res,
            )?;
            let geom = PatchGeometry::new(&glued.patch);
            let coords: Vec<[f64; 4]> = (0..glued.len()).map(|n| glued.patch.grid.coords(n)).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut c0, mut c1) = (0.0f64, 0.0f64);
            for _ in 0..count {
                let u = random_smooth_field(&coords, &glued.rho, setup.delta, 4, &mut rng);
                c0 = c0.max(product_ratio(&glued, &geom, &u, &spec)?);
                c1 = c1.max(gradient_product_ratio(&glued, &geom, &u, &spec)?);
            }
            Ok(ProductSample { t, c0, c1 })
        })
        .collect()
}

/// `‖Q(v₁) − Q(v₂)‖_{k,δ−1} / ((‖v₁‖ + ‖v₂‖)‖v₁ − v₂‖)` with `v` norms in
/// `L^p_{k+1,δ}`, for `count` random pairs with `‖vᵢ‖ ≤ radius`; the maximum
/// per scale.
pub fn quadratic_sweep(
    setup: &EstimateSetup,
    t_list: &[f64],
    radius: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let lower = WeightedNormSpec::new(setup.p, setup.k, setup.delta - 1.0)?;
    let upper = WeightedNormSpec::new(setup.p, setup.k + 1, setup.delta)?;
    t_list
        .iter()
        .map(|&t| {
            let glued = quadric_scenario(
                setup.epsilon,
                &GluingData::new(t, setup.nu, setup.big_r0, setup.r0),
                setup.res,
            )?;
            let deform = Deformation::new(&glued.patch, TangentMode::Analytic, glued.rho.clone())?;
            let geom = PatchGeometry::new(&glued.patch);
            let d = deform.assemble_d();
            let coords: Vec<[f64; 4]> = (0..glued.len()).map(|n| glued.patch.grid.coords(n)).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst = 0.0f64;
            for _ in 0..count {
                let mut pair = Vec::with_capacity(2);
                for _ in 0..2 {
                    let f = random_smooth_field(&coords, &glued.rho, setup.delta, 4, &mut rng);
                    let norm = weighted_sobolev_norm_with(&geom, &f, &upper, &glued.rho)?;
                    let target = radius * rng.random_range(0.1..1.0);
                    pair.push(NormalField {
                        values: f
                            .data
                            .chunks(4)
                            .map(|c| std::array::from_fn(|i| c[i] * target / norm))
                            .collect(),
                    });
                }
                let (v1, v2) = (&pair[0], &pair[1]);
                let q1 = deform.quadratic_q(&d, v1)?;
                let q2 = deform.quadratic_q(&d, v2)?;
                let dq = q1.axpy(-1.0, &q2).to_field();
                let n1 = weighted_sobolev_norm_with(&geom, &v1.to_field(), &upper, &glued.rho)?;
                let n2 = weighted_sobolev_norm_with(&geom, &v2.to_field(), &upper, &glued.rho)?;
                let diff = weighted_sobolev_norm_with(&geom, &v1.axpy(-1.0, v2).to_field(), &upper, &glued.rho)?;
                let lhs = weighted_sobolev_norm_with(&geom, &dq, &lower, &glued.rho)?;
                worst = worst.max(lhs / ((n1 + n2) * diff));
            }
            Ok((t, worst))
        })
        .collect()
}

/// Constants fitted once and kept under version control.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrozenConstants {
    pub c0: f64,
    pub c1: f64,
    pub c_q: f64,
    /// Radius of the ball in `L^p_{k+1,δ}` on which `c_q` is claimed.
    pub e_q: f64,
    pub safety: f64,
    pub fit_seed: u64,
    pub fields: usize,
    pub product_scales: Vec<f64>,
    pub quadratic_scales: Vec<f64>,
}

impl FrozenConstants {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::config("<constants>", e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("constants serialize")
    }
}

/// Fits all constants as `safety × max observed ratio`.
pub fn fit_constants(
    setup: &EstimateSetup,
    product_scales: &[f64],
    quadratic_scales: &[f64],
    e_q: f64,
    fields: usize,
    seed: u64,
    safety: f64,
) -> Result<FrozenConstants> {
    let prod = product_sweep(setup, product_scales, fields, seed)?;
    let quad = quadratic_sweep(setup, quadratic_scales, e_q, fields, seed)?;
    Ok(FrozenConstants {
        c0: safety * prod.iter().fold(0.0f64, |m, s| m.max(s.c0)),
        c1: safety * prod.iter().fold(0.0f64, |m, s| m.max(s.c1)),
        c_q: safety * quad.iter().fold(0.0f64, |m, s| m.max(s.1)),
        e_q,
        safety,
        fit_seed: seed,
        fields,
        product_scales: product_scales.to_vec(),
        quadratic_scales: quadratic_scales.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_fields_carry_the_weight() {
        let coords = vec![[0.0; 4]; 3];
        let rho = RadiusFunction::from_values(vec![1.0, 0.5, 0.25]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_smooth_field(&coords, &rho, 1.0, 2, &mut rng);
        // identical coordinates: only the weight differs between nodes
        for c in 0..2 {
            assert!((f.data[2 + c] - 0.5 * f.data[c]).abs() < 1e-15);
            assert!((f.data[4 + c] - 0.25 * f.data[c]).abs() < 1e-15);
        }
    }

    #[test]
    fn frozen_constants_roundtrip() {
        let c = FrozenConstants {
            c0: 1.5,
            c1: 2.0,
            c_q: 3.0,
            e_q: 0.01,
            safety: 1.5,
            fit_seed: 0,
            fields: 20,
            product_scales: vec![0.08, 0.04],
            quadratic_scales: vec![0.04, 0.02],
        };
        assert_eq!(toml::from_str::<FrozenConstants>(&c.to_toml()).unwrap(), c);
    }
}
