//! Deform the glued quadric to a Cayley submanifold by chord iteration.
//!
//! ```text
//! cargo run --release --example cayley_iteration -- 0.02
//! ```

use cayley_forge::flow::iterate::{iterate_to_cayley, IterateParams};
use cayley_forge::gluing::{cone_scenario, quadric_scenario, GluingData};
use cayley_forge::scenarios::Resolution;

fn main() -> cayley_forge::Result<()> {
    let t: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.02);
    let res = Resolution {
        link: [6, 6, 6],
        radial: 32,
    };
    let data = GluingData::new(t, 0.8, 0.5, 0.2);

    let report = iterate_to_cayley(&quadric_scenario(0.1, &data, res)?, &IterateParams::default())?;
    print!("{}", report.history_csv());
    println!(
        "converged = {}, ‖F‖: {:.3e} → {:.3e}, margin {:.6} → {:.6}",
        report.converged, report.f0_norm, report.final_f_norm, report.initial_margin, report.final_margin
    );

    // an exact cone is already Cayley
    let cone = iterate_to_cayley(&cone_scenario(&data, res)?, &IterateParams::default())?;
    println!("cone: {} iteration(s), ‖v‖ = {:.1e}", cone.history.len(), cone.v_norm);
    Ok(())
}
