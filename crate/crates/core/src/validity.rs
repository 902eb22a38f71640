//! Energy-ratio test for well-formed FOA recordings.
//!
//! For any mix of uncorrelated plane waves and diffuse sound, the dipole
//! energy `E_xyz` of a correctly encoded ACN/SN3D recording equals the
//! omnidirectional energy `E_w`. A file passes when
//! `|E_xyz / E_w − 1| ≤ τ`. Energies are measured below a cutoff frequency
//! by summing `|STFT|²` over the bins whose center frequency is below it.

use alloc::string::String;
use alloc::vec::Vec;

use crate::ambisonics::FoaSignal;
use crate::error::{Error, Result};
use crate::features::ENERGY_FLOOR;
use crate::stft::{stft, StftConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityConfig {
    pub tau: f64,
    pub cutoff_hz: f64,
    pub stft: StftConfig,
}

impl Default for ValidityConfig {
    fn default() -> Self {
        Self {
            tau: 0.1,
            cutoff_hz: 4000.0,
            stft: StftConfig::default(),
        }
    }
}

impl ValidityConfig {
    pub fn new(tau: f64, cutoff_hz: f64) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::Config(alloc::format!("tau must lie in (0, 1), got {tau}")));
        }
        if !(cutoff_hz > 0.0 && cutoff_hz.is_finite()) {
            return Err(Error::Config(alloc::format!(
                "cutoff must be positive, got {cutoff_hz}"
            )));
        }
        Ok(Self {
            tau,
            cutoff_hz,
            ..Self::default()
        })
    }

    fn check_rate(&self, sample_rate: u32) -> Result<()> {
        let nyquist = sample_rate as f64 / 2.0;
        if self.cutoff_hz >= nyquist {
            return Err(Error::Config(alloc::format!(
                "cutoff {} Hz is not below Nyquist ({nyquist} Hz)",
                self.cutoff_hz
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityResult {
    /// `E_xyz / E_w`; `+∞` when `E_w` is below the silence floor.
    pub energy_ratio: f64,
    pub passed: bool,
    pub e_w: f64,
    pub e_xyz: f64,
}

impl ValidityResult {
    fn from_energies(e_w: f64, e_xyz: f64, tau: f64) -> Self {
        let energy_ratio = if e_w < ENERGY_FLOOR { f64::INFINITY } else { e_xyz / e_w };
        Self {
            energy_ratio,
            passed: (energy_ratio - 1.0).abs() <= tau,
            e_w,
            e_xyz,
        }
    }

    /// Re-evaluates the pass flag at another threshold.
    pub fn passes_at(&self, tau: f64) -> bool {
        (self.energy_ratio - 1.0).abs() <= tau
    }
}

/// Band-limited energy-ratio test.
pub fn validity_test(x: &FoaSignal, cfg: &ValidityConfig) -> Result<ValidityResult> {
    if x.is_empty() {
        return Err(Error::EmptySignal);
    }
    cfg.check_rate(x.sample_rate())?;
    let [w, y, z, xx] = x.channels();
    let spec = stft(&[w, y, z, xx], x.sample_rate(), &cfg.stft)?;
    let kept = (0..spec.bins())
        .take_while(|&k| cfg.stft.bin_frequency(k, x.sample_rate()) < cfg.cutoff_hz)
        .count();
    let mut energies = [0.0; 4];
    for (c, e) in energies.iter_mut().enumerate() {
        for t in 0..spec.frames() {
            *e += spec.frame(c, t)[..kept].iter().map(|v| v.norm_sqr()).sum::<f64>();
        }
    }
    Ok(ValidityResult::from_energies(
        energies[0],
        energies[1] + energies[2] + energies[3],
        cfg.tau,
    ))
}

/// Result for one corpus file: a test result or the reason it could not be
/// tested.
#[derive(Debug, Clone, PartialEq)]
pub struct FileOutcome {
    pub path: String,
    pub result: core::result::Result<ValidityResult, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusReport {
    /// Sorted by path.
    pub files: Vec<FileOutcome>,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub pass_fraction: f64,
    pub config: ValidityConfig,
    pub errors_excluded: bool,
}

impl CorpusReport {
    /// Aggregates per-file outcomes. Ordering of the input does not matter.
    /// Unreadable files count as failures unless `exclude_errors` is set, in
    /// which case they are dropped from the denominator.
    pub fn from_outcomes(mut files: Vec<FileOutcome>, config: ValidityConfig, exclude_errors: bool) -> Result<Self> {
        files.sort_by(|a, b| a.path.cmp(&b.path));
        let passed = files.iter().filter(|f| matches!(&f.result, Ok(r) if r.passed)).count();
        let errors = files.iter().filter(|f| f.result.is_err()).count();
        let failed = files.len() - passed - errors;
        let denominator = if exclude_errors { passed + failed } else { files.len() };
        if denominator == 0 {
            return Err(Error::Config("no valid files found".into()));
        }
        Ok(Self {
            pass_fraction: passed as f64 / denominator as f64,
            files,
            passed,
            failed,
            errors,
            config,
            errors_excluded: exclude_errors,
        })
    }

    /// Paths of the files that passed, in report order.
    pub fn pass_list(&self) -> impl Iterator<Item = &str> {
        self.files
            .iter()
            .filter(|f| matches!(&f.result, Ok(r) if r.passed))
            .map(|f| f.path.as_str())
    }
}
