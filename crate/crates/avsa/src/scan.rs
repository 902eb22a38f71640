//! Parallel validity scan over a directory of WAV files.

use std::path::{Path, PathBuf};

use avsa_core::{validity_test, CorpusReport, FileOutcome, ValidityConfig};
use rayon::prelude::*;

use crate::error::{AvsaError, Result};
use crate::wav;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScanOptions {
    pub config: ValidityConfig,
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
    pub remap: Option<Vec<usize>>,
    pub exclude_errors: bool,
}

/// `.wav` files under `root` (case-insensitive), as `(relative path, full path)`,
/// sorted by relative path. Relative paths use `/` on every platform.
pub fn collect_wavs(root: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(root).to_path_buf();
            AvsaError::io(path, e.into())
        })?;
        let is_wav = entry.path().extension().is_some_and(|x| x.eq_ignore_ascii_case("wav"));
        if !entry.file_type().is_file() || !is_wav {
            continue;
        }
        let rel = entry.path().strip_prefix(root).unwrap_or(entry.path());
        let rel = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        out.push((rel, entry.path().to_path_buf()));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

fn test_file(path: &Path, opts: &ScanOptions) -> std::result::Result<avsa_core::ValidityResult, String> {
    let audio = wav::load(path, opts.remap.as_deref()).map_err(|e| e.detail())?;
    let foa = audio.into_foa().map_err(|e| e.detail())?;
    validity_test(&foa, &opts.config).map_err(|e| e.to_string())
}

/// Tests every WAV under `root`. Output order and content do not depend on
/// `jobs`.
pub fn scan_corpus(root: &Path, opts: &ScanOptions) -> Result<CorpusReport> {
    let files = collect_wavs(root)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| AvsaError::Usage(format!("cannot start worker threads: {e}")))?;
    let outcomes: Vec<FileOutcome> = pool.install(|| {
        files
            .par_iter()
            .map(|(rel, full)| FileOutcome {
                path: rel.clone(),
                result: test_file(full, opts),
            })
            .collect()
    });
    Ok(CorpusReport::from_outcomes(outcomes, opts.config, opts.exclude_errors)?)
}
