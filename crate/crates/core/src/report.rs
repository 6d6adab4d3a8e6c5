//! TSV report writing.
//!
//! Every report starts with comment lines carrying the toolkit version,
//! the config hash, the seed, and any stage-specific metadata. Bodies are
//! deterministic: no timestamps, fixed float formatting, and files are
//! written to a temporary name and renamed so a failing stage never leaves
//! a half-written report behind.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::Result;

#[derive(Debug, Clone)]
pub struct ReportMeta {
    pub config_hash: String,
    pub seed: u64,
    pub extra: Vec<(String, String)>,
}

impl ReportMeta {
    pub fn new(config_hash: impl Into<String>, seed: u64) -> ReportMeta {
        ReportMeta {
            config_hash: config_hash.into(),
            seed,
            extra: Vec::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<String>) -> ReportMeta {
        self.extra.push((key.into(), value.into()));
        self
    }
}

/// Write one TSV report atomically.
pub fn write_report(
    path: &Path,
    meta: &ReportMeta,
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<PathBuf> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
        writeln!(w, "# storyscope {}", crate::VERSION)?;
        writeln!(w, "# config_sha256={}", meta.config_hash)?;
        writeln!(w, "# seed={}", meta.seed)?;
        for (k, v) in &meta.extra {
            writeln!(w, "# {k}={v}")?;
        }
        writeln!(w, "{}", columns.join("\t"))?;
        for row in rows {
            writeln!(w, "{}", row.join("\t"))?;
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(path.to_path_buf())
}

/// Fixed-precision float formatting for report bodies.
pub fn f6(x: f64) -> String {
    format!("{x:.6}")
}

pub fn f4(x: f64) -> String {
    format!("{x:.4}")
}
