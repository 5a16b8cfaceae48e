//! Critical rates of the linearized Cayley operator on a flat plane, counted
//! exactly from homogeneous solutions. With `--write` the table over (−4, 2)
//! is stored in `data/flat_rates.csv`.
//!
//! ```text
//! cargo run --release --example critical_rates -- --write
//! ```

use cayley_forge::spectra::{
    check_flat_table, clifford_defect, extract_operator_coeffs, flat_rate_table, homogeneous_kernel_dim, index_change,
    negative_rate_kernel_dim,
};

fn main() -> cayley_forge::Result<()> {
    let op = extract_operator_coeffs()?;
    println!("Clifford defect of the extracted symbol: {:.1e}", clifford_defect(&op));
    for d in 0..=3 {
        println!("degree {d}: {} homogeneous solutions", homogeneous_kernel_dim(&op, d)?);
    }
    for l in [-1, -2, -3, -4] {
        println!("rate {l}: {} solutions", negative_rate_kernel_dim(&op, l)?);
    }
    let table = flat_rate_table(&op, -4.0, 2.0)?;
    print!("{}", table.to_csv());
    println!("index change over (−0.5, 1.5): {}", index_change(&table, -0.5, 1.5)?);
    if let Err(e) = check_flat_table(&table) {
        println!("{e}");
    }
    if std::env::args().any(|a| a == "--write") {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/flat_rates.csv");
        std::fs::write(path, table.to_csv())?;
        println!("wrote {path}");
    }
    Ok(())
}
