use cayley_forge::estimates::FrozenConstants;
use cayley_forge::spectra::{extract_operator_coeffs, flat_rate_table, RateTable};
use std::path::Path;

fn data(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

#[test]
fn shipped_flat_rate_table_is_reproducible() {
    let shipped = std::fs::read_to_string(data("flat_rates.csv")).unwrap();
    let table = flat_rate_table(&extract_operator_coeffs().unwrap(), -4.0, 2.0).unwrap();
    assert_eq!(
        table.to_csv(),
        shipped,
        "regenerate with `cargo run --example critical_rates -- --write`"
    );
    assert_eq!(RateTable::load(&data("flat_rates.csv")).unwrap().entries, table.entries);
}

#[test]
fn frozen_constants_are_well_formed() {
    let c = FrozenConstants::load(&data("frozen_constants.toml")).unwrap();
    assert!(c.c0 > 0.0 && c.c1 > 0.0 && c.c_q > 0.0 && c.e_q > 0.0);
    assert!(c.safety >= 1.0);
    assert!(c.fields >= 20);
    assert!(c.product_scales.windows(2).all(|w| w[1] < w[0]));
}
