//! Fits the product and quadratic constants and, with `--write`, freezes them
//! into `data/frozen_constants.toml`.
//!
//! ```text
//! cargo run --release --example fit_constants -- --write
//! ```

use cayley_forge::estimates::{fit_constants, product_sweep, quadratic_sweep, EstimateSetup};

const PRODUCT_SCALES: [f64; 4] = [0.08, 0.04, 0.02, 0.01];
const QUADRATIC_SCALES: [f64; 2] = [0.04, 0.02];
const E_Q: f64 = 0.05;
const FIELDS: usize = 20;
const SEED: u64 = 0;
const SAFETY: f64 = 1.5;

fn main() -> cayley_forge::Result<()> {
    let setup = EstimateSetup::default();
    for s in product_sweep(&setup, &PRODUCT_SCALES, FIELDS, SEED)? {
        println!("t = {:<5}  C0 ≥ {:.4}  C1 ≥ {:.4}", s.t, s.c0, s.c1);
    }
    for (t, c) in quadratic_sweep(&setup, &QUADRATIC_SCALES, E_Q, FIELDS, SEED)? {
        println!("t = {t:<5}  C_Q ≥ {c:.4}");
    }
    if std::env::args().any(|a| a == "--write") {
        let c = fit_constants(&setup, &PRODUCT_SCALES, &QUADRATIC_SCALES, E_Q, FIELDS, SEED, SAFETY)?;
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/frozen_constants.toml");
        std::fs::write(path, c.to_toml())?;
        println!("wrote {path}");
    }
    Ok(())
}
