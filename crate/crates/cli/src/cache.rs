//! Persistent `ν^(β)` cache: one json object per line.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use pipedream::perm::Permutation;
use pipedream::poly::BetaPolynomial;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

/// Overrides [`default_path`].
pub const CACHE_ENV: &str = "PIPEDREAM_CACHE";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache io error at {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub word: String,
    /// Ascending powers of β.
    pub nu_coeffs: Vec<i64>,
    pub schema_version: u32,
}

impl CacheEntry {
    /// `None` when a coefficient does not fit in `i64`.
    pub fn new(w: &Permutation, nu: &BetaPolynomial) -> Option<CacheEntry> {
        Some(CacheEntry {
            word: w.to_string(),
            nu_coeffs: nu.coeffs_i64()?,
            schema_version: SCHEMA_VERSION,
        })
    }

    fn decode(&self) -> Result<(Permutation, BetaPolynomial), String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!("schema version {}", self.schema_version));
        }
        if self.nu_coeffs.last() == Some(&0) {
            return Err("trailing zero coefficient".into());
        }
        let w: Permutation = self.word.parse().map_err(|e| format!("{e}"))?;
        let coeffs = self.nu_coeffs.iter().map(|&c| BigInt::from(c)).collect();
        Ok((w, BetaPolynomial::from_big_coeffs(coeffs)))
    }
}

#[derive(Debug, Default)]
pub struct LoadedCache {
    pub entries: BTreeMap<Permutation, BetaPolynomial>,
    /// Lines that were skipped as unreadable.
    pub skipped: usize,
}

/// `$PIPEDREAM_CACHE`, else `$XDG_CACHE_HOME/pipedream/nu.jsonl`, else
/// `$HOME/.cache/pipedream/nu.jsonl`, else `pipedream-nu.jsonl` in the working directory.
pub fn default_path() -> PathBuf {
    let var = |k: &str| std::env::var_os(k).filter(|v| !v.is_empty()).map(PathBuf::from);
    if let Some(p) = var(CACHE_ENV) {
        return p;
    }
    if let Some(dir) = var("XDG_CACHE_HOME") {
        return dir.join("pipedream").join("nu.jsonl");
    }
    if let Some(home) = var("HOME") {
        return home.join(".cache").join("pipedream").join("nu.jsonl");
    }
    PathBuf::from("pipedream-nu.jsonl")
}

/// A missing file loads as an empty cache.
pub fn load(path: &Path) -> Result<LoadedCache, CacheError> {
    let io_err = |source| CacheError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = match fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(LoadedCache::default()),
        Err(e) => return Err(io_err(e)),
    };
    let mut out = LoadedCache::default();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let decoded = serde_json::from_str::<CacheEntry>(&line)
            .map_err(|e| e.to_string())
            .and_then(|e| e.decode());
        match decoded {
            Ok((w, nu)) => {
                out.entries.insert(w, nu);
            }
            Err(why) => {
                log::warn!("{}:{}: skipping cache line: {why}", path.display(), k + 1);
                out.skipped += 1;
            }
        }
    }
    Ok(out)
}

/// Writes the whole cache to a temporary file next to `path`, then renames it.
pub fn store<'a>(
    path: &Path,
    entries: impl IntoIterator<Item = (&'a Permutation, &'a BetaPolynomial)>,
) -> Result<(), CacheError> {
    let io_err = |source| CacheError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(io_err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err)?;
    for (w, nu) in entries {
        let Some(entry) = CacheEntry::new(w, nu) else {
            log::warn!("not caching ν_{w}: coefficient exceeds i64");
            continue;
        };
        let line = serde_json::to_string(&entry).expect("cache entries serialize");
        writeln!(tmp, "{line}").map_err(io_err)?;
    }
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Removes the cache file; a missing file is not an error.
pub fn clear(path: &Path) -> Result<bool, CacheError> {
    match fs::remove_file(path) {
        Ok(()) => Ok(true),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(false),
        Err(source) => Err(CacheError::Io {
            path: path.to_path_buf(),
            source,
        }),
    }
}
