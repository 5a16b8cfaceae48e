//! Characteristic angles of transverse plane pairs and the angle criterion.
//!
//! ```text
//! cargo run --release --example plane_angles
//! ```

use cayley_forge::spin7::angles::rotated_reference;
use cayley_forge::spin7::{angle_criterion, OrientedPlane4};
use cayley_forge::Error;

fn main() -> cayley_forge::Result<()> {
    // two complex planes meeting positively: the angles add up to 2π
    let a = OrientedPlane4::span_of([0, 1, 2, 3]);
    let b = OrientedPlane4::span_of([4, 5, 6, 7]);
    let r = angle_criterion(&a, &b)?;
    println!(
        "complex pair: θ = {:?}, Σθ = {:.12}, passes = {}",
        r.angles, r.sum, r.passes
    );

    for th in [[0.2, 0.3, 0.4, 0.5], [0.9, 0.9, 0.9, 0.9], [1.2, 0.4, 1.0, 0.7]] {
        let r = angle_criterion(&a, &rotated_reference(th))?;
        println!(
            "rotated by {th:?}: Σθ = {:.4}, passes = {}, sign = {}",
            r.sum, r.passes, r.intersection_sign
        );
    }

    // sharing a direction is not a transverse pair
    match angle_criterion(&a, &rotated_reference([0.0, 0.3, 0.3, 0.3])) {
        Err(Error::Degenerate { angles }) => println!("degenerate, angles {angles:?}"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
