//! The linearized operator on the flat Cayley torus T⁴: its kernel is exactly
//! the four constant normal fields.
//!
//! ```text
//! cargo run --release --example flat_torus_kernel -- 8
//! ```

use cayley_forge::flow::torus::{kernel_gap, periodic_singular_values};
use cayley_forge::flow::{Deformation, TangentMode};
use cayley_forge::scenarios::make_flat_torus4;
use cayley_forge::weighted::RadiusFunction;

fn main() -> cayley_forge::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let patch = make_flat_torus4(n)?;
    let deform = Deformation::new(
        &patch,
        TangentMode::Analytic,
        RadiusFunction::constant(patch.len(), 1.0),
    )?;
    let d = deform.assemble_d();
    let sv = periodic_singular_values(&d, &patch.grid, 4)?;
    let (dim, gap) = kernel_gap(&sv, 16);
    println!("{n}⁴ grid, {}×{} operator", d.nrows, d.ncols);
    let head: Vec<String> = sv[..8].iter().map(|s| format!("{s:.3e}")).collect();
    println!("smallest singular values: {}", head.join(" "));
    println!("kernel dimension {dim}, gap {gap:.3e}");
    Ok(())
}
