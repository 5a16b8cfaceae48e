//! The Cayley form, the quadruple product and calibration margins.
//!
//! ```text
//! cargo run --release --example cayley_planes
//! ```

use cayley_forge::spin7::tau::derived_phi0;
use cayley_forge::spin7::{cayley_margin, e_basis, random_frame, random_spin7, FourForm, OrientedPlane4};
use rand::SeedableRng;

fn main() -> cayley_forge::Result<()> {
    // the 14 terms of Φ₀, read off the octonion product
    let phi = derived_phi0();
    assert_eq!(phi, FourForm::phi0());
    for (idx, c) in phi.nonzero_terms() {
        let name: Vec<String> = idx.iter().map(|i| format!("{}", i + 1)).collect();
        println!("{:+} dx{}", c, name.join(""));
    }

    for (label, idx) in [
        ("span(e1..e4)", [0, 1, 2, 3]),
        ("span(e1,e2,e5,e6)", [0, 1, 4, 5]),
        ("span(e1,e2,e3,e5)", [0, 1, 2, 4]),
    ] {
        let p = OrientedPlane4::span_of(idx);
        println!(
            "{label:<20} Φ₀ = {:+.3}  |τ| = {:.3}",
            cayley_margin(&p),
            p.tau().norm()
        );
    }

    // Spin(7) moves a Cayley plane to another Cayley plane
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let g = random_spin7(&mut rng);
    let moved = OrientedPlane4::span_of([0, 1, 2, 3]).transformed(&g);
    println!(
        "g·span(e1..e4): Φ₀ = {:.12}, |τ| = {:.1e}",
        cayley_margin(&moved),
        moved.tau().norm()
    );
    let e = e_basis(&moved)?;
    println!(
        "rank of the effective constraints: {:?} (gap {:.1e})",
        e.exact_rank(),
        e.rank_gap()
    );

    // a generic plane: Φ₀² + |τ|² = 1
    let p = random_frame(&mut rng);
    let (f, t) = (cayley_margin(&p), p.tau().norm());
    println!(
        "random plane: Φ₀ = {f:+.6}, |τ| = {t:.6}, Φ₀² + |τ|² = {:.15}",
        f * f + t * t
    );
    Ok(())
}
