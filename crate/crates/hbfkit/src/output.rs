//! Output formatting and atomic file writes shared by the experiment
//! harness and the CLI.
//!
//! Numbers destined for CSV files go through [`fmt_sig`], which renders 12
//! significant digits in scientific notation — precise enough that a value
//! change is visible, stable enough that reruns diff clean. Files are
//! written via a temp-file-and-rename dance so a crashed run never leaves
//! a truncated artifact behind.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Crate version baked in at compile time.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// `git describe` of the build tree, or `"unknown"` outside a repository.
pub const GIT_DESCRIBE: &str = env!("HBFKIT_GIT_DESCRIBE");

/// Formats a float with 12 significant digits in scientific notation.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

/// Writes `contents` to `path` atomically: the bytes land in a temporary
/// sibling file which is then renamed over the destination, so readers see
/// either the old file or the complete new one, never a partial write.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    let directory = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = directory {
        std::fs::create_dir_all(dir)?;
    }
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let nonce = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.subsec_nanos())
        .unwrap_or(0);
    let tmp_name = format!(".{file_name}.{}.{nonce}.tmp", std::process::id());
    let tmp_path: PathBuf = match directory {
        Some(dir) => dir.join(&tmp_name),
        None => PathBuf::from(&tmp_name),
    };
    std::fs::write(&tmp_path, contents)?;
    match std::fs::rename(&tmp_path, path) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = std::fs::remove_file(&tmp_path);
            Err(e.into())
        }
    }
}

/// Build identity block embedded in every metadata sidecar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolInfo {
    /// Binary name.
    pub name: String,
    /// Crate version.
    pub version: String,
    /// `git describe` of the source tree the binary was built from.
    pub git_describe: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo {
            name: "hbfkit".into(),
            version: VERSION.into(),
            git_describe: GIT_DESCRIBE.into(),
        }
    }
}

/// JSON metadata sidecar written next to the CSV artifacts. Wall-clock
/// duration lives here (and only here) so the CSVs stay byte-identical
/// across reruns of the same config and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata<T: Clone> {
    /// Build identity of the producing binary.
    pub tool: ToolInfo,
    /// Full resolved experiment description.
    pub experiment: T,
    /// Wall-clock duration of the run, seconds.
    pub wall_clock_secs: f64,
    /// Note on modeling choices a reader of the numbers must know.
    pub notes: Vec<String>,
}

impl<T: Clone + Serialize> Metadata<T> {
    /// Renders the sidecar as pretty-printed JSON.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

impl From<serde_json::Error> for crate::error::Error {
    fn from(e: serde_json::Error) -> Self {
        crate::error::Error::Io(std::io::Error::other(e))
    }
}

// ── Tests ──

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting_is_stable() {
        assert_eq!(fmt_sig(1.0), "1.00000000000e0");
        assert_eq!(fmt_sig(-0.5), "-5.00000000000e-1");
        assert_eq!(fmt_sig(1234.56789), "1.23456789000e3");
        // Round-trip error is below the displayed precision.
        let x = std::f64::consts::PI * 1e-3;
        let back: f64 = fmt_sig(x).parse().unwrap();
        assert!((back - x).abs() / x < 1e-11);
    }

    #[test]
    fn atomic_write_replaces_and_leaves_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("data.csv");
        atomic_write(&target, b"first\n").unwrap();
        atomic_write(&target, b"second\n").unwrap();
        assert_eq!(std::fs::read_to_string(&target).unwrap(), "second\n");
        let leftovers: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .filter(|name| name != "data.csv")
            .collect();
        assert!(leftovers.is_empty(), "temp files left behind: {leftovers:?}");
    }

    #[test]
    fn metadata_serializes_with_tool_identity() {
        let meta = Metadata {
            tool: ToolInfo::default(),
            experiment: "probe".to_string(),
            wall_clock_secs: 1.25,
            notes: vec!["unit leading constants".into()],
        };
        let json = meta.to_json().unwrap();
        assert!(json.contains("\"name\": \"hbfkit\""));
        assert!(json.contains("\"wall_clock_secs\": 1.25"));
        let back: Metadata<String> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, meta);
    }
}
