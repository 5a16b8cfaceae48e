//! Algebra of the Spin(7) structure on ℝ⁸: octonions, the Cayley form, the
//! quadruple product τ, calibration margins, the constraint space E and
//! characteristic angles between planes.

pub mod angles;
pub mod ebasis;
pub mod form;
pub mod octonion;
pub mod plane;
pub mod tau;

pub use angles::{angle_criterion, principal_angles, AngleReport};
pub use ebasis::{e_basis, e_basis_with_normals, tau_jacobian, EBasis};
pub use form::{FourForm, Vec8};
pub use octonion::{conj, mul as octonion_mul, Oct};
pub use plane::{cayley_margin, OrientedPlane4};
pub use tau::{phi0_eval, quad, tau_eval, tau_raw, tau_slot_matrix, TauValue};

use nalgebra::DMatrix;
use rand::Rng;

/// Uniformly random oriented orthonormal 4-frame (QR of a Gaussian matrix).
pub fn random_frame<R: Rng>(rng: &mut R) -> OrientedPlane4 {
    let v: [Vec8; 4] = std::array::from_fn(|_| std::array::from_fn(|_| gaussian(rng)));
    OrientedPlane4::from_vectors(&v).expect("Gaussian frames are independent")
}

pub(crate) fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box–Muller
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Complex structure used throughout: `J e_a = s e_b` for the listed pairs, so
/// that `z₁ = x₁ + i x₂, z₂ = x₃ + i x₄, z₃ = x₅ − i x₆, z₄ = x₇ − i x₈`.
pub const COMPLEX_PAIRS: [(usize, usize, f64); 4] = [(0, 1, 1.0), (2, 3, 1.0), (4, 5, -1.0), (6, 7, -1.0)];

pub fn complex_j(v: &Vec8) -> Vec8 {
    let mut out = [0.0; 8];
    for (a, b, s) in COMPLEX_PAIRS {
        out[b] += s * v[a];
        out[a] -= s * v[b];
    }
    out
}

/// An element of Spin(7): exponential of a generator in the Lie algebra, i.e. of
/// an antisymmetric matrix annihilating Φ₀. The algebra is found as the kernel
/// of the infinitesimal action on the Cayley form.
pub fn spin7_generators() -> Vec<DMatrix<f64>> {
    // basis of so(8): E_ij - E_ji
    let mut cols = Vec::new();
    let mut gens = Vec::new();
    let phi = FourForm::phi0();
    for i in 0..8 {
        for j in i + 1..8 {
            let mut a = DMatrix::zeros(8, 8);
            a[(i, j)] = 1.0;
            a[(j, i)] = -1.0;
            // (A·Φ)(v) = Σ_slot Φ(.., A v_slot, ..)
            let act = FourForm::from_alternating(|v| {
                (0..4)
                    .map(|s| {
                        let mut w = *v;
                        let av = &a * nalgebra::DVector::from_column_slice(&v[s]);
                        w[s] = std::array::from_fn(|k| av[k]);
                        phi.eval(&w)
                    })
                    .sum()
            });
            cols.push(act.coeffs.to_vec());
            gens.push(a);
        }
    }
    let m = DMatrix::from_fn(70, 28, |r, c| cols[c][r]);
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("right vectors requested");
    let mut out = Vec::new();
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s < 1e-9 {
            let mut g = DMatrix::zeros(8, 8);
            for (c, gen) in gens.iter().enumerate() {
                g += gen * vt[(k, c)];
            }
            out.push(g);
        }
    }
    out
}

/// Random element of Spin(7) as a product of exponentials of random generators.
pub fn random_spin7<R: Rng>(rng: &mut R) -> DMatrix<f64> {
    let gens = spin7_generators();
    let mut a = DMatrix::zeros(8, 8);
    for g in &gens {
        a += g * gaussian(rng);
    }
    // exp via scaling and squaring with a Taylor series
    let norm = a.norm();
    let mut k = 0;
    while norm / 2f64.powi(k) > 0.25 {
        k += 1;
    }
    let b = a / 2f64.powi(k);
    let mut e = DMatrix::identity(8, 8);
    let mut term = DMatrix::identity(8, 8);
    for n in 1..20 {
        term = &term * &b / n as f64;
        e += &term;
    }
    for _ in 0..k {
        e = &e * &e;
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn stabilizer_algebra_has_dimension_21() {
        assert_eq!(spin7_generators().len(), 21);
    }

    #[test]
    fn random_spin7_preserves_the_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_spin7(&mut rng);
        let p = random_frame(&mut rng);
        let q = p.transformed(&g);
        assert!((cayley_margin(&p) - cayley_margin(&q)).abs() < 1e-10);
    }

    #[test]
    fn complex_planes_are_calibrated() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let u: Vec8 = std::array::from_fn(|_| gaussian(&mut rng));
            let w: Vec8 = std::array::from_fn(|_| gaussian(&mut rng));
            let p = OrientedPlane4::from_vectors(&[u, complex_j(&u), w, complex_j(&w)]).unwrap();
            assert!((cayley_margin(&p) - 1.0).abs() < 1e-10);
            assert!(p.tau().norm() < 1e-10);
        }
    }
}
