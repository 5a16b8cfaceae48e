//! Content-addressed cache of assembled operator matrices.
//!
//! Files are `<dir>/<sha256 hex>.trip` in the sparse triplet layout of
//! [`Csr::write_triplets`](crate::flow::Csr::write_triplets).

use crate::error::Result;
use crate::flow::{Csr, Deformation};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Hex SHA-256 of the key text.
pub fn cache_key(key: &str) -> String {
    Sha256::digest(key.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn cache_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{}.trip", cache_key(key)))
}

/// `D` for `deform`, read from the cache when present and stored otherwise.
/// A file whose shape disagrees with the deformation is rebuilt.
pub fn assembled_d(dir: &Path, key: &str, deform: &Deformation) -> Result<Csr> {
    let path = cache_path(dir, key);
    if let Ok(bytes) = std::fs::read(&path) {
        if let Ok(d) = Csr::read_triplets(&mut bytes.as_slice()) {
            if d.nrows == 4 * deform.len() && d.ncols == 4 * deform.len() {
                return Ok(d);
            }
        }
    }
    let d = deform.assemble_d();
    std::fs::create_dir_all(dir)?;
    let mut buf = Vec::new();
    d.write_triplets(&mut buf)?;
    std::fs::write(&path, buf)?;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_stable_hex() {
        let k = cache_key("abc");
        assert_eq!(k, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
