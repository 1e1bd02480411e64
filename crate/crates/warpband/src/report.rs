//! Report envelopes and atomic output files.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{CliError, Result};
use crate::syntax::SYNTAX_VERSION;

pub const TOOL: &str = "warpband";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Wrapper written around every JSON payload.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub syntax_version: &'static str,
    pub command: &'a [String],
    pub wall_clock_seconds: f64,
    pub tolerances: Tolerances,
    pub warnings: &'a [String],
    pub payload: &'a T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(command: &'a [String], tolerances: Tolerances, warnings: &'a [String], payload: &'a T) -> Self {
        Envelope {
            tool: TOOL,
            version: VERSION,
            syntax_version: SYNTAX_VERSION,
            command,
            wall_clock_seconds: 0.0,
            tolerances,
            warnings,
            payload,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text =
            serde_json::to_string_pretty(self).map_err(|e| CliError::Argument(format!("cannot encode report: {e}")))?;
        text.push('\n');
        Ok(text)
    }
}

/// Writes `contents` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Argument(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        CliError::io(format!("writing {}", path.display()), e)
    })
}

/// Fails unless `dir` exists (or can be created) and is a directory.
pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Argument(format!("output directory {} is not usable: {e}", dir.display())))?;
    if !dir.is_dir() {
        return Err(CliError::Argument(format!(
            "output directory {} is not a directory",
            dir.display()
        )));
    }
    Ok(())
}

/// Fails unless the parent directory of `path` exists.
pub fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(d) if !d.as_os_str().is_empty() && !d.is_dir() => Err(CliError::Argument(format!(
            "directory of {} does not exist",
            path.display()
        ))),
        _ => Ok(()),
    }
}

/// The payload part of a serialised envelope, for comparisons that ignore
/// the wall clock.
pub fn payload_of(json: &str) -> Option<serde_json::Value> {
    serde_json::from_str::<serde_json::Value>(json)
        .ok()?
        .get("payload")
        .cloned()
}
