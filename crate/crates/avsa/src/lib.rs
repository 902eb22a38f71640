//! File formats, corpus scanning and the `avsa` command-line tool built on
//! [`avsa_core`].

pub mod avsf;
pub mod cli;
pub mod detections;
pub mod error;
pub mod images;
mod man;
pub mod report;
pub mod scan;
pub mod scene_file;
pub mod wav;

use std::io::Write;
use std::path::Path;

pub use error::{AvsaError, Result};

/// Writes bytes to a file, or to stdout for `-`.
pub fn write_output(path: &Path, bytes: &[u8]) -> Result<()> {
    if path == Path::new("-") {
        let mut out = std::io::stdout().lock();
        return out
            .write_all(bytes)
            .and_then(|_| out.flush())
            .map_err(|e| AvsaError::io("<stdout>", e));
    }
    std::fs::write(path, bytes).map_err(|e| AvsaError::io(path, e))
}
