use cayley_forge::scenarios::{make_round_cone, Resolution};
use cayley_forge::spectra::{
    exact_rank, extract_operator_coeffs, flat_rate_table, homogeneous_system, index_change, RateTable,
};
use cayley_forge::spin7::angles::principal_angles;
use cayley_forge::spin7::tau::{phi0_eval, tau_raw};
use cayley_forge::spin7::{random_frame, OrientedPlane4, Vec8};
use cayley_forge::weighted::{
    embedding_allowed, weighted_holder_norm, weighted_sobolev_norm, EndKind, Field, RadiusFunction, WeightedNormSpec,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn random_tuple(rng: &mut ChaCha8Rng) -> [Vec8; 4] {
    std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
}

fn random_orthogonal(rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(8, 8, |_, _| rng.random_range(-1.0..1.0));
    a.qr().q()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn swapping_two_slots_negates_phi_and_tau(seed in any::<u64>(), i in 0usize..4, j in 0usize..4) {
        prop_assume!(i != j);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_tuple(&mut rng);
        let mut w = v;
        w.swap(i, j);
        prop_assert!((phi0_eval(&v) + phi0_eval(&w)).abs() <= 1e-12);
        for (a, b) in tau_raw(&v).iter().zip(tau_raw(&w).iter()) {
            prop_assert!((a + b).abs() <= 1e-12);
        }
    }

    #[test]
    fn orthonormal_frames_satisfy_the_norm_identity(seed in any::<u64>()) {
        let p = random_frame(&mut ChaCha8Rng::seed_from_u64(seed));
        let phi = phi0_eval(&p.frame);
        let tau = p.tau().norm();
        prop_assert!(phi.abs() <= 1.0 + 1e-12);
        prop_assert!((phi * phi + tau * tau - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn angles_are_symmetric_and_rotation_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p1, p2) = (random_frame(&mut rng), random_frame(&mut rng));
        let q = random_orthogonal(&mut rng);
        let a = principal_angles(&p1, &p2);
        let b = principal_angles(&p2, &p1);
        let c = principal_angles(&p1.transformed(&q), &p2.transformed(&q));
        for k in 0..4 {
            prop_assert!((a[k] - b[k]).abs() <= 1e-9, "{a:?} vs {b:?}");
            prop_assert!((a[k] - c[k]).abs() <= 1e-9, "{a:?} vs {c:?}");
        }
    }

    #[test]
    fn coordinate_planes_have_right_or_zero_angles(mask in 0u8..=255) {
        prop_assume!(mask.count_ones() == 4);
        let idx: Vec<usize> = (0..8).filter(|i| mask >> i & 1 == 1).collect();
        let p = OrientedPlane4::span_of([idx[0], idx[1], idx[2], idx[3]]);
        let base = OrientedPlane4::span_of([0, 1, 2, 3]);
        let shared = idx.iter().filter(|&&i| i < 4).count();
        let a = principal_angles(&base, &p);
        prop_assert_eq!(a.iter().filter(|x| x.abs() < 1e-12).count(), shared);
        prop_assert_eq!(a.iter().filter(|x| (*x - std::f64::consts::FRAC_PI_2).abs() < 1e-12).count(), 4 - shared);
    }
}

fn small_cone() -> &'static (cayley_forge::scenarios::ParametricPatch, RadiusFunction) {
    static CONE: OnceLock<(cayley_forge::scenarios::ParametricPatch, RadiusFunction)> = OnceLock::new();
    CONE.get_or_init(|| {
        let patch = make_round_cone(
            0.2,
            1.0,
            Resolution {
                link: [4, 4, 6],
                radial: 8,
            },
        )
        .unwrap();
        let rho = RadiusFunction::radial_coordinate(&patch).unwrap();
        (patch, rho)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn norms_are_homogeneous(seed in any::<u64>(), c in -20.0f64..20.0, k in 0usize..3, delta in -2.0f64..2.0) {
        let (patch, rho) = small_cone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = Field::scalar((0..patch.len()).map(|_| rng.random_range(-1.0..1.0)).collect());
        let spec = WeightedNormSpec::new(2.0, k, delta).unwrap();
        let (s, sc) = (weighted_sobolev_norm(&f, patch, &spec, rho).unwrap(), weighted_sobolev_norm(&f.scaled(c), patch, &spec, rho).unwrap());
        let (h, hc) = (weighted_holder_norm(&f, patch, &spec, rho).unwrap(), weighted_holder_norm(&f.scaled(c), patch, &spec, rho).unwrap());
        prop_assert!((sc - c.abs() * s).abs() <= 1e-12 * sc.max(1e-300));
        prop_assert!((hc - c.abs() * h).abs() <= 1e-12 * hc.max(1e-300));
    }

    #[test]
    fn cone_patches_are_dilation_equivariant(c in 0.1f64..10.0) {
        let res = Resolution { link: [4, 4, 6], radial: 8 };
        let a = make_round_cone(0.2, 1.0, res).unwrap();
        let b = make_round_cone(0.2 * c, c, res).unwrap();
        for n in 0..a.len() {
            let (x, y) = (a.point(n), b.point(n));
            for k in 0..8 {
                prop_assert!((c * x[k] - y[k]).abs() <= 1e-12 * c.max(1.0));
            }
        }
    }
}

/// The embedding is refuted by a test-function family exactly when one of
/// these necessary conditions fails on the end:
/// oscillating bumps (no derivative gain), concentrating bumps (scaling),
/// pure powers `r^a` (weak weight order), and `r^δ |log r|^{−b}` with
/// `1/p < b ≤ 1/p̃` (strict weight order once `p̃ < p`).
fn embedding_oracle(k: usize, kt: usize, p: f64, pt: f64, delta: f64, deltat: f64, end: EndKind) -> bool {
    let oscillating = k >= kt;
    let concentrating = -(kt as f64) + 4.0 / pt >= -(k as f64) + 4.0 / p - 1e-12;
    // orientation of the end: AC decays toward r → ∞, CS toward r → 0
    let towards = |x: f64| if end == EndKind::Ac { x } else { -x };
    let powers = towards(deltat - delta) >= 0.0;
    let logs = !(pt < p && deltat == delta);
    oscillating && concentrating && powers && logs
}

#[test]
fn embedding_predicate_matches_test_function_table() {
    let ks = [0usize, 1, 2];
    let ps = [1.5, 2.0, 4.0];
    let ds = [-1.0, 0.0, 1.0];
    let mut cases = 0;
    for &k in &ks {
        for &kt in &ks {
            for &p in &ps {
                for &pt in &ps {
                    for &d in &ds {
                        for &dt in &ds {
                            for end in [EndKind::Ac, EndKind::Cs] {
                                assert_eq!(
                                    embedding_allowed(k, kt, p, pt, d, dt, end),
                                    embedding_oracle(k, kt, p, pt, d, dt, end),
                                    "k={k} k̃={kt} p={p} p̃={pt} δ={d} δ̃={dt} {end:?}"
                                );
                                cases += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    assert!(cases >= 200);
    assert!(!embedding_allowed(1, 0, 1.0, 2.0, 0.0, 0.0, EndKind::Ac));
    assert!(!embedding_allowed(1, 0, 2.0, f64::INFINITY, 0.0, 0.0, EndKind::Ac));
}

fn flat_table() -> &'static RateTable {
    static TABLE: OnceLock<RateTable> = OnceLock::new();
    TABLE.get_or_init(|| flat_rate_table(&extract_operator_coeffs().unwrap(), -4.0, 2.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn index_change_is_additive(mut x in prop::array::uniform3(-3.9f64..1.9)) {
        x.sort_by(f64::total_cmp);
        prop_assume!(x[0] < x[1] && x[1] < x[2]);
        prop_assume!(x.iter().all(|v| (v - v.round()).abs() > 1e-6));
        let t = flat_table();
        let whole = index_change(t, x[0], x[2]).unwrap();
        let parts = index_change(t, x[0], x[1]).unwrap() + index_change(t, x[1], x[2]).unwrap();
        prop_assert_eq!(whole, parts);
    }
}

/// A random unimodular integer matrix as a product of elementary row operations.
fn unimodular(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<i64>> {
    let mut u: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    for _ in 0..3 * n {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        if i == j {
            continue;
        }
        let c = rng.random_range(-2i64..=2);
        let src = u[j].clone();
        for (x, y) in u[i].iter_mut().zip(&src) {
            *x += c * y;
        }
    }
    if rng.random_bool(0.5) {
        u.swap(0, n - 1);
    }
    u
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn kernel_dimensions_are_basis_independent(seed in any::<u64>(), degree in 0usize..3) {
        let op = extract_operator_coeffs().unwrap();
        let m = homogeneous_system(&op, degree).unwrap();
        let u = unimodular(m.ncols, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(exact_rank(&m), exact_rank(&m.times(&u)));
    }
}
