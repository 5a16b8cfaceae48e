//! Weighted Sobolev and Hölder norms on a cone and the embedding rules.
//!
//! ```text
//! cargo run --release --example weighted_norms
//! ```

use cayley_forge::scenarios::{make_quadric_cone, Resolution};
use cayley_forge::weighted::{
    embedding_allowed, weighted_holder_norm, weighted_sobolev_norm, EndKind, Field, RadiusFunction, WeightedNormSpec,
};

fn main() -> cayley_forge::Result<()> {
    let cone = make_quadric_cone(
        0.01,
        1.0,
        Resolution {
            link: [6, 6, 6],
            radial: 48,
        },
    )?;
    let rho = RadiusFunction::radial_coordinate(&cone)?;
    // s^w lies in every space of weight below w on the tip
    for w in [1.0, 1.5, 2.0] {
        let f = Field::scalar(rho.values.iter().map(|r| r.powf(w)).collect());
        for delta in [0.5, 1.0, 1.25] {
            let spec = WeightedNormSpec::new(2.0, 1, delta)?;
            println!(
                "s^{w}: δ = {delta:<4}  L²₁,δ = {:>10.4}  C¹_δ = {:>10.4}",
                weighted_sobolev_norm(&f, &cone, &spec, &rho)?,
                weighted_holder_norm(&f, &cone, &spec, &rho)?
            );
        }
    }
    for (k, kt, p, pt, d, dt, end) in [
        (2, 1, 2.0, 4.0, 1.0, 1.0, EndKind::Cs),
        (2, 1, 2.0, 4.0, 1.0, 0.5, EndKind::Cs),
        (2, 1, 2.0, 4.0, 1.0, 0.5, EndKind::Ac),
        (1, 1, 2.0, 4.0, 1.0, 1.0, EndKind::Ac),
    ] {
        println!(
            "L^{p}_{k},{d} ⊂ L^{pt}_{kt},{dt} on {end:?} end: {}",
            embedding_allowed(k, kt, p, pt, d, dt, end)
        );
    }
    Ok(())
}
