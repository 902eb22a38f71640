//! Slaney-style mel filterbank: linear below 1 kHz, logarithmic above,
//! triangular filters with area (Slaney) normalization.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{exp, ln};

const F_SP: f64 = 200.0 / 3.0;
const MIN_LOG_HZ: f64 = 1000.0;
const MIN_LOG_MEL: f64 = MIN_LOG_HZ / F_SP;

fn log_step() -> f64 {
    ln(6.4) / 27.0
}

pub fn hz_to_mel(hz: f64) -> f64 {
    if hz >= MIN_LOG_HZ {
        MIN_LOG_MEL + ln(hz / MIN_LOG_HZ) / log_step()
    } else {
        hz / F_SP
    }
}

pub fn mel_to_hz(mel: f64) -> f64 {
    if mel >= MIN_LOG_MEL {
        MIN_LOG_HZ * exp(log_step() * (mel - MIN_LOG_MEL))
    } else {
        F_SP * mel
    }
}

/// `n_mels × bins` nonnegative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    n_mels: usize,
    bins: usize,
    weights: Vec<f64>,
}

impl MelFilterbank {
    pub const DEFAULT_MELS: usize = 128;

    /// Filterbank spanning 0 Hz to Nyquist.
    pub fn new(sample_rate: u32, fft_size: usize, n_mels: usize) -> Result<Self> {
        Self::with_range(sample_rate, fft_size, n_mels, 0.0, sample_rate as f64 / 2.0)
    }

    pub fn with_range(sample_rate: u32, fft_size: usize, n_mels: usize, f_min: f64, f_max: f64) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::SampleRate(0));
        }
        if n_mels == 0 || fft_size < 2 {
            return Err(Error::Config(
                "mel filterbank needs n_mels > 0 and fft_size >= 2".into(),
            ));
        }
        if !(0.0 <= f_min && f_min < f_max && f_max <= sample_rate as f64 / 2.0) {
            return Err(Error::Config(alloc::format!(
                "mel range {f_min}..{f_max} Hz is invalid at {sample_rate} Hz"
            )));
        }
        let bins = fft_size / 2 + 1;
        let nyquist = sample_rate as f64 / 2.0;
        let fft_freqs: Vec<f64> = (0..bins).map(|k| nyquist * k as f64 / (bins - 1) as f64).collect();
        let (m_lo, m_hi) = (hz_to_mel(f_min), hz_to_mel(f_max));
        let edges: Vec<f64> = (0..n_mels + 2)
            .map(|i| mel_to_hz(m_lo + (m_hi - m_lo) * i as f64 / (n_mels + 1) as f64))
            .collect();

        let mut weights = alloc::vec![0.0; n_mels * bins];
        for m in 0..n_mels {
            let (lo, center, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            let norm = 2.0 / (hi - lo);
            let row = &mut weights[m * bins..(m + 1) * bins];
            for (w, f) in row.iter_mut().zip(&fft_freqs) {
                let rising = (f - lo) / (center - lo);
                let falling = (hi - f) / (hi - center);
                *w = rising.min(falling).max(0.0) * norm;
            }
            if row.iter().all(|w| *w <= 0.0) {
                return Err(Error::Config(alloc::format!(
                    "mel band {m} covers no FFT bin; use fewer bands or a larger FFT"
                )));
            }
        }
        Ok(Self { n_mels, bins, weights })
    }

    pub fn n_mels(&self) -> usize {
        self.n_mels
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.weights[m * self.bins..(m + 1) * self.bins]
    }

    pub fn row_sum(&self, m: usize) -> f64 {
        self.row(m).iter().sum()
    }

    /// `fb · v` for a per-bin vector.
    pub fn apply(&self, per_bin: &[f64]) -> Vec<f64> {
        debug_assert_eq!(per_bin.len(), self.bins);
        (0..self.n_mels)
            .map(|m| self.row(m).iter().zip(per_bin).map(|(w, v)| w * v).sum())
            .collect()
    }
}
