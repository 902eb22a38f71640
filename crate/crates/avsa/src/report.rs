//! JSON reports. Every report carries `schema_version`; an infinite energy
//! ratio (silent W channel) is written as `null`.

use serde::{Deserialize, Serialize};

use avsa_core::{CorpusReport, ValidityConfig, ValidityResult};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityParams {
    pub tau: f64,
    pub cutoff_hz: f64,
}

impl From<&ValidityConfig> for ValidityParams {
    fn from(c: &ValidityConfig) -> Self {
        Self {
            tau: c.tau,
            cutoff_hz: c.cutoff_hz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateReport {
    pub schema_version: u32,
    pub path: String,
    pub config: ValidityParams,
    pub energy_ratio: Option<f64>,
    pub passed: bool,
    pub e_w: f64,
    pub e_xyz: f64,
}

impl ValidateReport {
    pub fn new(path: &str, config: &ValidityConfig, r: &ValidityResult) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            path: path.to_string(),
            config: config.into(),
            energy_ratio: finite(r.energy_ratio),
            passed: r.passed,
            e_w: r.e_w,
            e_xyz: r.e_xyz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub path: String,
    pub energy_ratio: Option<f64>,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub files: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub errors_excluded: bool,
    pub pass_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub schema_version: u32,
    pub config: ValidityParams,
    pub summary: ScanSummary,
    pub files: Vec<ScanEntry>,
}

impl From<&CorpusReport> for ScanReport {
    fn from(r: &CorpusReport) -> Self {
        let files = r
            .files
            .iter()
            .map(|f| match &f.result {
                Ok(v) => ScanEntry {
                    path: f.path.clone(),
                    energy_ratio: finite(v.energy_ratio),
                    passed: v.passed,
                    error: None,
                },
                Err(e) => ScanEntry {
                    path: f.path.clone(),
                    energy_ratio: None,
                    passed: false,
                    error: Some(e.clone()),
                },
            })
            .collect();
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            config: (&r.config).into(),
            summary: ScanSummary {
                files: r.files.len(),
                passed: r.passed,
                failed: r.failed,
                errors: r.errors,
                errors_excluded: r.errors_excluded,
                pass_fraction: r.pass_fraction,
            },
            files,
        }
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types always serialize");
    s.push('\n');
    s
}

/// One passing path per line.
pub fn pass_list(r: &CorpusReport) -> String {
    r.pass_list().map(|p| format!("{p}\n")).collect()
}
