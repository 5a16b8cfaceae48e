//! How the initial defect of the glued quadric decays with the gluing scale.
//!
//! ```text
//! cargo run --release --example initial_error
//! ```

use cayley_forge::flow::iterate::{initial_error_scan, ScanSetup};
use cayley_forge::scenarios::Resolution;

fn main() -> cayley_forge::Result<()> {
    let setup = ScanSetup {
        epsilon: 0.1,
        nu: 0.8,
        big_r0: 0.5,
        r0: 0.2,
        lambda: -1.0,
        mu: 1.5,
        delta: 1.25,
        p: 2.0,
        k: 1,
        res: Resolution {
            link: [6, 6, 6],
            radial: 64,
        },
        cone_only: false,
    };
    let scan = initial_error_scan(&setup, &[0.08, 0.04, 0.02, 0.01])?;
    print!("{}", scan.to_csv());
    println!(
        "fitted slope {:.4}, predicted ν(μ − δ) = {:.4}",
        scan.slope, scan.predicted
    );
    Ok(())
}
