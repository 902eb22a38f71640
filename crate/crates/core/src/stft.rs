//! Short-time Fourier transform with center padding.
//!
//! Frame `t` is centered on input sample `t·hop`. The signal is padded with
//! `window_length / 2` zeros on the left and with zeros on the right as
//! needed, and each windowed frame sits centered in a zero-padded
//! `fft_size` buffer. The frame count is `ceil(len / hop)`, so one second
//! at 24 kHz with the default 240-sample hop gives exactly 100 frames.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::math::{cos, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftConfig {
    window_length: usize,
    hop_length: usize,
    fft_size: usize,
}

impl Default for StftConfig {
    /// 21 ms Hann window (504 samples at 24 kHz), 10 ms hop, 512-point FFT.
    fn default() -> Self {
        Self {
            window_length: 504,
            hop_length: 240,
            fft_size: 512,
        }
    }
}

impl StftConfig {
    pub fn new(window_length: usize, hop_length: usize, fft_size: usize) -> Result<Self> {
        if hop_length == 0 || window_length == 0 || fft_size == 0 {
            return Err(Error::Config("STFT lengths must be positive".into()));
        }
        if !(hop_length <= window_length && window_length <= fft_size) {
            return Err(Error::Config(alloc::format!(
                "STFT requires hop <= window <= fft, got {hop_length}/{window_length}/{fft_size}"
            )));
        }
        Ok(Self {
            window_length,
            hop_length,
            fft_size,
        })
    }

    /// Window and hop given in seconds, rounded to whole samples; FFT size is
    /// the next power of two at or above the window.
    pub fn from_durations(sample_rate: u32, window_s: f64, hop_s: f64) -> Result<Self> {
        let window = libm::round(window_s * sample_rate as f64) as usize;
        let hop = libm::round(hop_s * sample_rate as f64) as usize;
        Self::new(window, hop, window.max(1).next_power_of_two())
    }

    pub fn window_length(&self) -> usize {
        self.window_length
    }

    pub fn hop_length(&self) -> usize {
        self.hop_length
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// `ceil(len / hop)`.
    pub fn frame_count(&self, len: usize) -> usize {
        len.div_ceil(self.hop_length)
    }

    /// Periodic Hann window.
    pub fn window(&self) -> Vec<f64> {
        let n = self.window_length as f64;
        (0..self.window_length)
            .map(|i| 0.5 - 0.5 * cos(TAU * i as f64 / n))
            .collect()
    }

    /// Center frequency of bin `k` in Hz.
    pub fn bin_frequency(&self, k: usize, sample_rate: u32) -> f64 {
        k as f64 * sample_rate as f64 / self.fft_size as f64
    }
}

/// `channels × frames × bins` complex spectrogram.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrogram {
    sample_rate: u32,
    config: StftConfig,
    channels: usize,
    frames: usize,
    data: Vec<Complex64>,
}

impl ComplexSpectrogram {
    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bins(&self) -> usize {
        self.config.bins()
    }

    pub fn get(&self, channel: usize, frame: usize, bin: usize) -> Complex64 {
        self.data[(channel * self.frames + frame) * self.bins() + bin]
    }

    /// Bins of one frame of one channel.
    pub fn frame(&self, channel: usize, frame: usize) -> &[Complex64] {
        let b = self.bins();
        let start = (channel * self.frames + frame) * b;
        &self.data[start..start + b]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Keeps only the listed channels, in the given order.
    pub fn select_channels(&self, which: &[usize]) -> Result<Self> {
        let per = self.frames * self.bins();
        let mut data = Vec::with_capacity(per * which.len());
        for &c in which {
            if c >= self.channels {
                return Err(Error::ChannelCount {
                    expected: c + 1,
                    actual: self.channels,
                });
            }
            data.extend_from_slice(&self.data[c * per..(c + 1) * per]);
        }
        Ok(Self {
            channels: which.len(),
            data,
            ..self.clone()
        })
    }
}

/// STFT of equally long channels.
pub fn stft(channels: &[&[f64]], sample_rate: u32, cfg: &StftConfig) -> Result<ComplexSpectrogram> {
    if sample_rate == 0 {
        return Err(Error::SampleRate(0));
    }
    let Some(first) = channels.first() else {
        return Err(Error::ChannelCount { expected: 1, actual: 0 });
    };
    let len = first.len();
    if channels.iter().any(|c| c.len() != len) {
        return Err(Error::RaggedChannels);
    }
    if len == 0 {
        return Err(Error::EmptySignal);
    }
    if len < cfg.hop_length {
        return Err(Error::SignalTooShort {
            len,
            hop: cfg.hop_length,
        });
    }

    let plan = FftPlan::new(cfg.fft_size);
    let window = cfg.window();
    let frames = cfg.frame_count(len);
    let bins = cfg.bins();
    let half_window = cfg.window_length / 2;
    let offset = (cfg.fft_size - cfg.window_length) / 2;
    let mut data = Vec::with_capacity(channels.len() * frames * bins);
    let mut buf = alloc::vec![0.0; cfg.fft_size];

    for signal in channels {
        for t in 0..frames {
            buf.iter_mut().for_each(|v| *v = 0.0);
            // padded index p maps to input sample p - half_window
            let start = (t * cfg.hop_length) as isize - half_window as isize;
            for (i, w) in window.iter().enumerate() {
                let n = start + i as isize;
                if n >= 0 && (n as usize) < len {
                    buf[offset + i] = signal[n as usize] * w;
                }
            }
            data.extend(plan.forward_real(&buf));
        }
    }

    Ok(ComplexSpectrogram {
        sample_rate,
        config: *cfg,
        channels: channels.len(),
        frames,
        data,
    })
}
