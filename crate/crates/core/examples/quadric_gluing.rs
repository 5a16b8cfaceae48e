//! Glue the smoothing of the complex quadric cone into the cone at a few scales
//! and look at the calibration margin, the seams and the cutoff decay.
//!
//! ```text
//! cargo run --release --example quadric_gluing
//! ```

use cayley_forge::gluing::{alpha_cayley_scan, alpha_decay_scan, quadric_scenario, seam_diagnostics, GluingData, Part};
use cayley_forge::scenarios::Resolution;

fn main() -> cayley_forge::Result<()> {
    let res = Resolution {
        link: [6, 6, 6],
        radial: 64,
    };
    for t in [0.08, 0.04, 0.02, 0.01] {
        let glued = quadric_scenario(0.1, &GluingData::new(t, 0.8, 0.5, 0.2), res)?;
        let m = alpha_cayley_scan(&glued)?;
        let decay = alpha_decay_scan(&glued)?;
        let seams = seam_diagnostics(&glued);
        let jump = seams.iter().fold(0.0f64, |a, s| a.max(s.coord_jump).max(s.diff_jump));
        let [up, mid, low, _] = glued.part_counts();
        println!(
            "t = {t:<5} parts {up}/{mid}/{low}  min Φ₀ = {:.6} ({:?})  sup ρ|∇α|·|log t| = {:.3}  seam jump {jump:.1e}",
            m.min_margin, glued.parts[m.argmin], decay.normalized
        );
    }
    let glued = quadric_scenario(0.1, &GluingData::new(0.02, 0.8, 0.5, 0.2), res)?;
    let dir = std::env::temp_dir().join("cayley-forge-gluing");
    std::fs::create_dir_all(&dir)?;
    glued.export(&dir, "quadric")?;
    println!("exported to {}", dir.display());
    assert_eq!(glued.parts.iter().filter(|p| **p == Part::Leftover).count(), 0);
    Ok(())
}
