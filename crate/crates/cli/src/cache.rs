use std::env;
use std::path::PathBuf;

use schurtwirl::schurbasis::{load_or_build, SchurDecomposition};
use schurtwirl::{Result, TensorSpace};

pub const CACHE_ENV: &str = "SCHURTWIRL_CACHE_DIR";

/// `$SCHURTWIRL_CACHE_DIR`, else `$HOME/.cache/schurtwirl`.
pub fn cache_dir() -> Option<PathBuf> {
    if let Some(dir) = env::var_os(CACHE_ENV).filter(|v| !v.is_empty()) {
        return Some(PathBuf::from(dir));
    }
    env::var_os("HOME").map(|home| PathBuf::from(home).join(".cache").join("schurtwirl"))
}

pub fn basis(space: TensorSpace, no_cache: bool) -> Result<SchurDecomposition> {
    let dir = if no_cache { None } else { cache_dir() };
    load_or_build(space, dir.as_deref())
}
