//! On-disk table of simulated critical values keyed by `(n, beta, B, seed)`.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const CACHE_DIR_ENV: &str = "MIXSEP_CACHE_DIR";
pub const CACHE_FILE: &str = "hn_quantiles.csv";

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
struct Entry {
    n: usize,
    beta: f64,
    #[serde(rename = "B")]
    replications: usize,
    seed: u64,
    quantile: f64,
}

#[derive(Debug, Clone)]
pub struct QuantileCache {
    file: Option<PathBuf>,
}

impl QuantileCache {
    /// `$MIXSEP_CACHE_DIR`, else `$XDG_CACHE_HOME/mixsep`, else
    /// `$HOME/.cache/mixsep`; no caching if none is set.
    pub fn from_env() -> Self {
        let dir = std::env::var_os(CACHE_DIR_ENV)
            .map(PathBuf::from)
            .or_else(|| std::env::var_os("XDG_CACHE_HOME").map(|d| PathBuf::from(d).join("mixsep")))
            .or_else(|| std::env::var_os("HOME").map(|d| PathBuf::from(d).join(".cache").join("mixsep")));
        Self {
            file: dir.map(|d| d.join(CACHE_FILE)),
        }
    }

    pub fn in_dir(dir: &Path) -> Self {
        Self {
            file: Some(dir.join(CACHE_FILE)),
        }
    }

    pub fn disabled() -> Self {
        Self { file: None }
    }

    pub fn path(&self) -> Option<&Path> {
        self.file.as_deref()
    }

    fn entries(&self) -> Vec<Entry> {
        let Some(file) = &self.file else {
            return Vec::new();
        };
        let Ok(mut reader) = csv::Reader::from_path(file) else {
            return Vec::new();
        };
        // unreadable rows are skipped rather than poisoning the cache
        reader.deserialize().filter_map(Result::ok).collect()
    }

    pub fn get(&self, n: usize, beta: f64, replications: usize, seed: u64) -> Option<f64> {
        self.entries()
            .into_iter()
            .find(|e| e.n == n && e.beta == beta && e.replications == replications && e.seed == seed)
            .map(|e| e.quantile)
    }

    /// Appends an entry; failures to write are ignored.
    pub fn put(&self, n: usize, beta: f64, replications: usize, seed: u64, quantile: f64) {
        let Some(file) = &self.file else {
            return;
        };
        let _ = self.try_put(file, Entry {
            n,
            beta,
            replications,
            seed,
            quantile,
        });
    }

    fn try_put(&self, file: &Path, entry: Entry) -> std::io::Result<()> {
        if let Some(dir) = file.parent() {
            fs::create_dir_all(dir)?;
        }
        let fresh = !file.exists();
        let handle = OpenOptions::new().create(true).append(true).open(file)?;
        let mut writer = csv::WriterBuilder::new().has_headers(fresh).from_writer(handle);
        writer.serialize(entry)?;
        writer.flush()?;
        writer.into_inner().map_err(|e| e.into_error())?.flush()
    }
}
