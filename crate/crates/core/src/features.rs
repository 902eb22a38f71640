//! Log-mel energies and spatial features (normalized active intensity,
//! inter-channel level and phase differences), aggregated to mel bands and
//! stacked as channels.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::alignment::EmbeddingRole;
use crate::ambisonics::{FoaSignal, StereoSignal};
use crate::error::{Error, Result};
use crate::math::{ln, sqrt};
use crate::mel::MelFilterbank;
use crate::stft::{stft, ComplexSpectrogram, StftConfig};

/// Added inside every logarithm.
pub const LOG_EPSILON: f64 = 1e-10;
/// Energies below this are treated as silence in normalizations.
pub const ENERGY_FLOOR: f64 = 1e-12;

/// What a feature channel holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    LogMelW,
    LogMelY,
    LogMelZ,
    LogMelX,
    LogMelLeft,
    LogMelRight,
    LogMelMono,
    LogMel(u16),
    IntensityX,
    IntensityY,
    IntensityZ,
    Icld,
    IpdCos,
    IpdSin,
    Embedding(EmbeddingRole),
}

impl ChannelKind {
    pub fn label(&self) -> String {
        let fixed = match self {
            Self::LogMelW => "log-mel-w",
            Self::LogMelY => "log-mel-y",
            Self::LogMelZ => "log-mel-z",
            Self::LogMelX => "log-mel-x",
            Self::LogMelLeft => "log-mel-left",
            Self::LogMelRight => "log-mel-right",
            Self::LogMelMono => "log-mel-mono",
            Self::LogMel(i) => return alloc::format!("log-mel-{i}"),
            Self::IntensityX => "intensity-x",
            Self::IntensityY => "intensity-y",
            Self::IntensityZ => "intensity-z",
            Self::Icld => "icld",
            Self::IpdCos => "ipd-cos",
            Self::IpdSin => "ipd-sin",
            Self::Embedding(role) => return alloc::format!("embedding-{}", role.label()),
        };
        fixed.to_string()
    }

    pub fn parse(label: &str) -> Option<Self> {
        let kind = match label {
            "log-mel-w" => Self::LogMelW,
            "log-mel-y" => Self::LogMelY,
            "log-mel-z" => Self::LogMelZ,
            "log-mel-x" => Self::LogMelX,
            "log-mel-left" => Self::LogMelLeft,
            "log-mel-right" => Self::LogMelRight,
            "log-mel-mono" => Self::LogMelMono,
            "intensity-x" => Self::IntensityX,
            "intensity-y" => Self::IntensityY,
            "intensity-z" => Self::IntensityZ,
            "icld" => Self::Icld,
            "ipd-cos" => Self::IpdCos,
            "ipd-sin" => Self::IpdSin,
            other => {
                if let Some(role) = other.strip_prefix("embedding-") {
                    return EmbeddingRole::parse(role).map(Self::Embedding);
                }
                let idx = other.strip_prefix("log-mel-")?;
                return idx.parse().ok().map(Self::LogMel);
            }
        };
        Some(kind)
    }

    /// Channels whose values are bounded to `[-1, 1]`.
    pub fn is_unit_bounded(&self) -> bool {
        matches!(
            self,
            Self::IntensityX | Self::IntensityY | Self::IntensityZ | Self::IpdCos | Self::IpdSin
        )
    }

    fn log_mel_for(channels: usize, c: usize) -> Self {
        match (channels, c) {
            (1, _) => Self::LogMelMono,
            (2, 0) => Self::LogMelLeft,
            (2, _) => Self::LogMelRight,
            (4, 0) => Self::LogMelW,
            (4, 1) => Self::LogMelY,
            (4, 2) => Self::LogMelZ,
            (4, _) => Self::LogMelX,
            _ => Self::LogMel(c as u16),
        }
    }
}

/// `channels × frames × bands` real tensor, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    kinds: Vec<ChannelKind>,
    frames: usize,
    bands: usize,
    data: Vec<f64>,
}

impl FeatureTensor {
    pub fn new(kinds: Vec<ChannelKind>, frames: usize, bands: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != kinds.len() * frames * bands {
            return Err(Error::Shape(alloc::format!(
                "{} values for a {}x{}x{} tensor",
                data.len(),
                kinds.len(),
                frames,
                bands
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature tensor"));
        }
        Ok(Self {
            kinds,
            frames,
            bands,
            data,
        })
    }

    pub fn channels(&self) -> usize {
        self.kinds.len()
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels(), self.frames, self.bands)
    }

    pub fn kinds(&self) -> &[ChannelKind] {
        &self.kinds
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, c: usize, t: usize, m: usize) -> f64 {
        self.data[(c * self.frames + t) * self.bands + m]
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.frames * self.bands;
        &self.data[c * n..(c + 1) * n]
    }

    /// Concatenates along the channel axis.
    pub fn stack(mut self, other: FeatureTensor) -> Result<Self> {
        if (self.frames, self.bands) != (other.frames, other.bands) {
            return Err(Error::Shape(alloc::format!(
                "cannot stack {}x{} onto {}x{}",
                other.frames,
                other.bands,
                self.frames,
                self.bands
            )));
        }
        self.kinds.extend(other.kinds);
        self.data.extend(other.data);
        Ok(self)
    }
}

/// `log(fb · |X|² + ε)` per channel and frame.
pub fn log_mel(spec: &ComplexSpectrogram, fb: &MelFilterbank) -> Result<FeatureTensor> {
    check_bins(spec, fb)?;
    let (channels, frames) = (spec.channels(), spec.frames());
    let mut data = Vec::with_capacity(channels * frames * fb.n_mels());
    let mut power = alloc::vec![0.0; spec.bins()];
    for c in 0..channels {
        for t in 0..frames {
            for (p, v) in power.iter_mut().zip(spec.frame(c, t)) {
                *p = v.norm_sqr();
            }
            data.extend(fb.apply(&power).into_iter().map(|e| ln(e + LOG_EPSILON)));
        }
    }
    let kinds = (0..channels).map(|c| ChannelKind::log_mel_for(channels, c)).collect();
    FeatureTensor::new(kinds, frames, fb.n_mels(), data)
}

fn check_bins(spec: &ComplexSpectrogram, fb: &MelFilterbank) -> Result<()> {
    if spec.bins() != fb.bins() {
        return Err(Error::Shape(alloc::format!(
            "spectrogram has {} bins, filterbank expects {}",
            spec.bins(),
            fb.bins()
        )));
    }
    Ok(())
}

fn check_channels(spec: &ComplexSpectrogram, expected: usize) -> Result<()> {
    if spec.channels() != expected {
        return Err(Error::ChannelCount {
            expected,
            actual: spec.channels(),
        });
    }
    Ok(())
}

/// Per-bin intensity numerator `2·Re(w*·[x, y, z])` and total energy
/// `|w|² + |x|² + |y|² + |z|²`. The normalized intensity is their ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityField {
    frames: usize,
    bins: usize,
    numerator: Vec<[f64; 3]>,
    energy: Vec<f64>,
}

fn normalize(num: [f64; 3], den: f64) -> [f64; 3] {
    if den < ENERGY_FLOOR {
        [0.0; 3]
    } else {
        [num[0] / den, num[1] / den, num[2] / den]
    }
}

impl IntensityField {
    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn numerator(&self, t: usize, b: usize) -> [f64; 3] {
        self.numerator[t * self.bins + b]
    }

    pub fn energy(&self, t: usize, b: usize) -> f64 {
        self.energy[t * self.bins + b]
    }

    /// Normalized intensity `i_tf` as Cartesian `[x, y, z]`; zero where the
    /// bin is silent.
    pub fn vector(&self, t: usize, b: usize) -> [f64; 3] {
        normalize(self.numerator(t, b), self.energy(t, b))
    }

    pub fn vectors(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        self.numerator.iter().zip(&self.energy).map(|(n, d)| normalize(*n, *d))
    }

    /// Per-bin intensity averaged over the whole signal:
    /// `Σ_t N_tf / Σ_t D_tf`.
    pub fn long_term_bin_vectors(&self) -> Vec<[f64; 3]> {
        (0..self.bins)
            .map(|b| {
                let mut num = [0.0; 3];
                let mut den = 0.0;
                for t in 0..self.frames {
                    let n = self.numerator(t, b);
                    for i in 0..3 {
                        num[i] += n[i];
                    }
                    den += self.energy(t, b);
                }
                normalize(num, den)
            })
            .collect()
    }

    /// Per-mel-band intensity averaged over the whole signal:
    /// `Σ_t fb_m·N_t / Σ_t fb_m·D_t`.
    pub fn long_term_band_vectors(&self, fb: &MelFilterbank) -> Result<Vec<[f64; 3]>> {
        if fb.bins() != self.bins {
            return Err(Error::Shape("filterbank bins differ from intensity bins".into()));
        }
        Ok((0..fb.n_mels())
            .map(|m| {
                let row = fb.row(m);
                let mut num = [0.0; 3];
                let mut den = 0.0;
                for t in 0..self.frames {
                    for (b, w) in row.iter().enumerate().filter(|(_, w)| **w > 0.0) {
                        let n = self.numerator(t, b);
                        for i in 0..3 {
                            num[i] += w * n[i];
                        }
                        den += w * self.energy(t, b);
                    }
                }
                normalize(num, den)
            })
            .collect())
    }
}

/// Normalized active intensity of a 4-channel (W, Y, Z, X) spectrogram.
pub fn active_intensity(spec: &ComplexSpectrogram) -> Result<IntensityField> {
    check_channels(spec, 4)?;
    let (frames, bins) = (spec.frames(), spec.bins());
    let mut numerator = Vec::with_capacity(frames * bins);
    let mut energy = Vec::with_capacity(frames * bins);
    for t in 0..frames {
        let (w, y, z, x) = (spec.frame(0, t), spec.frame(1, t), spec.frame(2, t), spec.frame(3, t));
        for b in 0..bins {
            let wc = w[b].conj();
            numerator.push([2.0 * (wc * x[b]).re, 2.0 * (wc * y[b]).re, 2.0 * (wc * z[b]).re]);
            energy.push(w[b].norm_sqr() + x[b].norm_sqr() + y[b].norm_sqr() + z[b].norm_sqr());
        }
    }
    Ok(IntensityField {
        frames,
        bins,
        numerator,
        energy,
    })
}

/// Mel-band intensity as a ratio of filterbank-weighted sums,
/// `(fb_m · N_t) / (fb_m · D_t)`, giving channels x, y, z.
pub fn aggregate_intensity_mel(field: &IntensityField, fb: &MelFilterbank) -> Result<FeatureTensor> {
    if fb.bins() != field.bins {
        return Err(Error::Shape(alloc::format!(
            "intensity has {} bins, filterbank expects {}",
            field.bins,
            fb.bins()
        )));
    }
    let (frames, bands) = (field.frames, fb.n_mels());
    let mut data = alloc::vec![0.0; 3 * frames * bands];
    for t in 0..frames {
        let nums = &field.numerator[t * field.bins..(t + 1) * field.bins];
        let dens = &field.energy[t * field.bins..(t + 1) * field.bins];
        for m in 0..bands {
            let mut num = [0.0; 3];
            let mut den = 0.0;
            for ((w, n), d) in fb.row(m).iter().zip(nums).zip(dens) {
                if *w > 0.0 {
                    for i in 0..3 {
                        num[i] += w * n[i];
                    }
                    den += w * d;
                }
            }
            let v = normalize(num, den);
            for (i, vi) in v.into_iter().enumerate() {
                data[(i * frames + t) * bands + m] = vi;
            }
        }
    }
    FeatureTensor::new(
        alloc::vec![
            ChannelKind::IntensityX,
            ChannelKind::IntensityY,
            ChannelKind::IntensityZ
        ],
        frames,
        bands,
        data,
    )
}

/// Four log-mel channels (W, Y, Z, X) followed by mel-band intensity x, y, z.
pub fn foa_features(x: &FoaSignal, cfg: &StftConfig, fb: &MelFilterbank) -> Result<FeatureTensor> {
    let [w, y, z, xx] = x.channels();
    let spec = stft(&[w, y, z, xx], x.sample_rate(), cfg)?;
    let mel = log_mel(&spec, fb)?;
    let intensity = aggregate_intensity_mel(&active_intensity(&spec)?, fb)?;
    mel.stack(intensity)
}

/// Single-channel log-mel.
pub fn mono_features(signal: &[f64], sample_rate: u32, cfg: &StftConfig, fb: &MelFilterbank) -> Result<FeatureTensor> {
    log_mel(&stft(&[signal], sample_rate, cfg)?, fb)
}

/// `2·log(|l| + ε) − 2·log(|r| + ε)` per (frame, bin).
pub fn icld(spec: &ComplexSpectrogram) -> Result<Vec<f64>> {
    check_channels(spec, 2)?;
    let mut out = Vec::with_capacity(spec.frames() * spec.bins());
    for t in 0..spec.frames() {
        for (l, r) in spec.frame(0, t).iter().zip(spec.frame(1, t)) {
            out.push(2.0 * ln(sqrt(l.norm_sqr()) + LOG_EPSILON) - 2.0 * ln(sqrt(r.norm_sqr()) + LOG_EPSILON));
        }
    }
    Ok(out)
}

/// `[cos(∠l − ∠r), sin(∠l − ∠r)]` of one bin pair; `(1, 0)` if either is
/// below the energy floor.
pub fn phase_difference(l: Complex64, r: Complex64) -> [f64; 2] {
    let (ml, mr) = (sqrt(l.norm_sqr()), sqrt(r.norm_sqr()));
    if ml < ENERGY_FLOOR || mr < ENERGY_FLOOR {
        return [1.0, 0.0];
    }
    // l·r* = |l||r|·e^{i(∠l − ∠r)}
    let cross = l * r.conj();
    let m = ml * mr;
    [cross.re / m, cross.im / m]
}

/// `[cos(∠l − ∠r), sin(∠l − ∠r)]` per (frame, bin); `(1, 0)` where either
/// channel is below the energy floor.
pub fn ipd(spec: &ComplexSpectrogram) -> Result<Vec<[f64; 2]>> {
    check_channels(spec, 2)?;
    let mut out = Vec::with_capacity(spec.frames() * spec.bins());
    for t in 0..spec.frames() {
        for (l, r) in spec.frame(0, t).iter().zip(spec.frame(1, t)) {
            out.push(phase_difference(*l, *r));
        }
    }
    Ok(out)
}

/// Log-mel L and R, then ICLD, IPD-cos and IPD-sin as energy-weighted mel
/// means (weights `fb_mb·(|l_b|² + |r_b|²)`). Silent bands get ICLD 0 and IPD (1, 0).
pub fn stereo_features(y: &StereoSignal, cfg: &StftConfig, fb: &MelFilterbank) -> Result<FeatureTensor> {
    let spec = stft(&[&y.left, &y.right], y.sample_rate, cfg)?;
    let mel = log_mel(&spec, fb)?;
    let level = icld(&spec)?;
    let phase = ipd(&spec)?;
    let (frames, bins, bands) = (spec.frames(), spec.bins(), fb.n_mels());

    let mut data = alloc::vec![0.0; 3 * frames * bands];
    for t in 0..frames {
        let energy: Vec<f64> = spec
            .frame(0, t)
            .iter()
            .zip(spec.frame(1, t))
            .map(|(l, r)| l.norm_sqr() + r.norm_sqr())
            .collect();
        let lv = &level[t * bins..(t + 1) * bins];
        let pv = &phase[t * bins..(t + 1) * bins];
        for m in 0..bands {
            let mut acc = [0.0; 3];
            let mut weight = 0.0;
            for (b, w) in fb.row(m).iter().enumerate().filter(|(_, w)| **w > 0.0) {
                let we = w * energy[b];
                acc[0] += we * lv[b];
                acc[1] += we * pv[b][0];
                acc[2] += we * pv[b][1];
                weight += we;
            }
            let v = if weight < ENERGY_FLOOR {
                [0.0, 1.0, 0.0]
            } else {
                [acc[0] / weight, acc[1] / weight, acc[2] / weight]
            };
            for (i, vi) in v.into_iter().enumerate() {
                data[(i * frames + t) * bands + m] = vi;
            }
        }
    }
    let spatial = FeatureTensor::new(
        alloc::vec![ChannelKind::Icld, ChannelKind::IpdCos, ChannelKind::IpdSin],
        frames,
        bands,
        data,
    )?;
    mel.stack(spatial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambisonics::{encode_source, extract_stereo, rotate, rotation_matrix, Direction, RotationAngles};
    use crate::fft::FftPlan;
    use crate::math::{cos, exp, sin, sqrt, TAU};
    use crate::scene::{synthesize_scene, white_noise, SceneSpec};
    use proptest::prelude::*;

    fn defaults() -> (StftConfig, MelFilterbank) {
        (StftConfig::default(), MelFilterbank::new(24000, 512, 128).unwrap())
    }

    fn norm3(v: [f64; 3]) -> f64 {
        sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    }

    #[test]
    fn shapes_for_one_second() {
        let (cfg, fb) = defaults();
        let s = white_noise(24000, 1);
        let x = encode_source(&s, 24000, Direction::from_degrees(30.0, 10.0).unwrap()).unwrap();
        assert_eq!(foa_features(&x, &cfg, &fb).unwrap().shape(), (7, 100, 128));
        let st = extract_stereo(&x, Direction::FRONT);
        assert_eq!(stereo_features(&st, &cfg, &fb).unwrap().shape(), (5, 100, 128));
        assert_eq!(mono_features(&s, 24000, &cfg, &fb).unwrap().shape(), (1, 100, 128));
    }

    #[test]
    fn silence_features() {
        let (cfg, fb) = defaults();
        let x = FoaSignal::silence(24000, 4800).unwrap();
        let f = foa_features(&x, &cfg, &fb).unwrap();
        let floor = ln(LOG_EPSILON);
        for c in 0..4 {
            assert!(f.channel(c).iter().all(|v| *v == floor));
        }
        for c in 4..7 {
            assert!(f.channel(c).iter().all(|v| *v == 0.0));
        }
        assert_eq!(
            f.kinds(),
            &[
                ChannelKind::LogMelW,
                ChannelKind::LogMelY,
                ChannelKind::LogMelZ,
                ChannelKind::LogMelX,
                ChannelKind::IntensityX,
                ChannelKind::IntensityY,
                ChannelKind::IntensityZ
            ]
        );
    }

    #[test]
    fn doubling_amplitude_adds_log4() {
        let (cfg, fb) = defaults();
        let s = white_noise(4800, 5);
        let s2: Vec<f64> = s.iter().map(|v| 2.0 * v).collect();
        let a = mono_features(&s, 24000, &cfg, &fb).unwrap();
        let b = mono_features(&s2, 24000, &cfg, &fb).unwrap();
        let log4 = ln(4.0);
        for (p, q) in a.data().iter().zip(b.data()) {
            // the epsilon shifts each cell by at most eps / energy
            assert!((q - p - log4).abs() < 1e-9 + LOG_EPSILON / exp(*p), "{p} {q}");
        }
    }

    #[test]
    fn white_noise_mel_energy_tracks_row_sums() {
        let (cfg, fb) = defaults();
        let s = white_noise(240_000, 21);
        let spec = stft(&[&s], 24000, &cfg).unwrap();
        let mut mean = alloc::vec![0.0; 128];
        let mut power = alloc::vec![0.0; spec.bins()];
        for t in 0..spec.frames() {
            for (p, v) in power.iter_mut().zip(spec.frame(0, t)) {
                *p = v.norm_sqr();
            }
            for (acc, e) in mean.iter_mut().zip(fb.apply(&power)) {
                *acc += e / spec.frames() as f64;
            }
        }
        // E|X_k|² = σ²·Σ w² for every bin of white noise
        let win_energy: f64 = cfg.window().iter().map(|w| w * w).sum();
        for m in 0..128 {
            let expected = win_energy * fb.row_sum(m);
            let rel = (mean[m] - expected).abs() / expected;
            assert!(rel < 0.1, "band {m}: relative error {rel}");
        }
    }

    #[test]
    fn single_plane_wave_intensity_is_doa() {
        let (cfg, fb) = defaults();
        let d = Direction::from_degrees(-120.0, 35.0).unwrap();
        let x = encode_source(&white_noise(4800, 8), 24000, d).unwrap();
        let [w, y, z, xx] = x.channels();
        let spec = stft(&[w, y, z, xx], 24000, &cfg).unwrap();
        let field = active_intensity(&spec).unwrap();
        let doa = d.to_cartesian();
        for t in 0..field.frames() {
            for b in 0..field.bins() {
                if field.energy(t, b) > 1e-6 {
                    let v = field.vector(t, b);
                    for i in 0..3 {
                        assert!((v[i] - doa[i]).abs() < 1e-6);
                    }
                }
            }
        }
        let bands = aggregate_intensity_mel(&field, &fb).unwrap();
        for c in 0..3 {
            assert!(bands.channel(c).iter().all(|v| (v - doa[c]).abs() < 1e-6));
        }
    }

    #[test]
    fn silent_intensity_is_zero() {
        let (cfg, fb) = defaults();
        let z = alloc::vec![0.0; 1000];
        let spec = stft(&[&z, &z, &z, &z], 24000, &cfg).unwrap();
        let field = active_intensity(&spec).unwrap();
        assert!(field.vectors().all(|v| v == [0.0; 3]));
        let bands = aggregate_intensity_mel(&field, &fb).unwrap();
        assert!(bands.data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn intensity_requires_four_channels() {
        let (cfg, _) = defaults();
        let z = alloc::vec![0.0; 1000];
        let spec = stft(&[&z, &z], 24000, &cfg).unwrap();
        assert!(matches!(
            active_intensity(&spec),
            Err(Error::ChannelCount { expected: 4, actual: 2 })
        ));
        let spec4 = stft(&[&z, &z, &z, &z], 24000, &cfg).unwrap();
        assert!(matches!(icld(&spec4), Err(Error::ChannelCount { expected: 2, .. })));
        assert!(matches!(ipd(&spec4), Err(Error::ChannelCount { expected: 2, .. })));
    }

    #[test]
    fn diffuse_scene_has_weak_long_term_intensity() {
        let cfg = StftConfig::default();
        let x = synthesize_scene(&SceneSpec::new(24000, 24000).with_diffuse(1.0, 4)).unwrap();
        let [w, y, z, xx] = x.channels();
        let spec = stft(&[w, y, z, xx], 24000, &cfg).unwrap();
        let field = active_intensity(&spec).unwrap();
        let lt = field.long_term_bin_vectors();
        let mean: f64 = lt.iter().map(|v| norm3(*v)).sum::<f64>() / lt.len() as f64;
        assert!(mean <= 0.3, "mean long-term |i| {mean}");
    }

    #[test]
    fn opposite_sources_cancel_in_bands() {
        let (cfg, fb) = defaults();
        let n = 48000;
        let spec = SceneSpec::new(24000, n)
            .with_source(Direction::from_degrees(60.0, 0.0).unwrap(), white_noise(n, 30))
            .with_source(Direction::from_degrees(-120.0, 0.0).unwrap(), white_noise(n, 31));
        let x = synthesize_scene(&spec).unwrap();
        let [w, y, z, xx] = x.channels();
        let s = stft(&[w, y, z, xx], 24000, &cfg).unwrap();
        let bands = active_intensity(&s).unwrap().long_term_band_vectors(&fb).unwrap();
        for (m, v) in bands.iter().enumerate() {
            assert!(norm3(*v) <= 0.2, "band {m}: {}", norm3(*v));
        }
    }

    #[test]
    fn rotated_scene_rotates_intensity() {
        let (cfg, fb) = defaults();
        let spec = SceneSpec::new(24000, 12000)
            .with_source(Direction::from_degrees(20.0, 5.0).unwrap(), white_noise(12000, 1))
            .with_source(Direction::from_degrees(-100.0, -30.0).unwrap(), white_noise(12000, 2))
            .with_diffuse(0.3, 3);
        let x = synthesize_scene(&spec).unwrap();
        let q = rotation_matrix(RotationAngles::new(0.7, -0.3, 1.2).unwrap());
        let f0 = foa_features(&x, &cfg, &fb).unwrap();
        let f1 = foa_features(&rotate(&x, &q), &cfg, &fb).unwrap();
        for t in 0..f0.frames() {
            for m in 0..f0.bands() {
                let v = [f0.get(4, t, m), f0.get(5, t, m), f0.get(6, t, m)];
                let r = q.apply_cartesian(v);
                for i in 0..3 {
                    assert!((f1.get(4 + i, t, m) - r[i]).abs() < 1e-6);
                }
            }
        }
        // W log-mel is untouched by rotation
        assert_eq!(f0.channel(0), f1.channel(0));
    }

    #[test]
    fn icld_ipd_examples() {
        let cfg = StftConfig::default();
        let l = white_noise(4800, 40);
        let spec = stft(&[&l, &l], 24000, &cfg).unwrap();
        assert!(icld(&spec).unwrap().iter().all(|v| *v == 0.0));
        assert!(ipd(&spec)
            .unwrap()
            .iter()
            .all(|v| (v[0] - 1.0).abs() < 1e-12 && v[1].abs() < 1e-12));

        let half: Vec<f64> = l.iter().map(|v| v / 2.0).collect();
        let spec = stft(&[&l, &half], 24000, &cfg).unwrap();
        let d = icld(&spec).unwrap();
        let two_log2 = 2.0 * ln(2.0);
        for (i, v) in d.iter().enumerate() {
            if spec.data()[i].norm() > 1e-3 {
                assert!((v - two_log2).abs() < 1e-6);
            }
        }

        let neg: Vec<f64> = l.iter().map(|v| -v).collect();
        let spec = stft(&[&l, &neg], 24000, &cfg).unwrap();
        for (i, p) in ipd(&spec).unwrap().iter().enumerate() {
            if spec.data()[i].norm() > 1e-9 {
                assert!((p[0] + 1.0).abs() < 1e-12 && p[1].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ipd_follows_shift_theorem() {
        // r is l circularly delayed by `delay` samples, so R_k = L_k·e^{-2πik·delay/N}
        let n = 512;
        let delay = 7;
        let l = white_noise(n, 77);
        let r: Vec<f64> = (0..n).map(|i| l[(i + n - delay) % n]).collect();
        let plan = FftPlan::new(n);
        let (lf, rf) = (plan.forward_real(&l), plan.forward_real(&r));
        for k in 0..plan.bins() {
            let p = phase_difference(lf[k], rf[k]);
            let expected = TAU * (k * delay) as f64 / n as f64;
            assert!((p[0] - cos(expected)).abs() < 1e-6 && (p[1] - sin(expected)).abs() < 1e-6);
        }
    }

    #[test]
    fn stereo_feature_examples() {
        let (cfg, fb) = defaults();
        let l = white_noise(24000, 50);
        let same = StereoSignal::new(24000, l.clone(), l.clone()).unwrap();
        let f = stereo_features(&same, &cfg, &fb).unwrap();
        assert!(f.channel(2).iter().all(|v| *v == 0.0));
        assert!(f.channel(3).iter().all(|v| (*v - 1.0).abs() < 1e-12));
        assert!(f.channel(4).iter().all(|v| v.abs() < 1e-12));

        let half: Vec<f64> = l.iter().map(|v| v / 2.0).collect();
        let f = stereo_features(&StereoSignal::new(24000, l, half).unwrap(), &cfg, &fb).unwrap();
        let two_log2 = 2.0 * ln(2.0);
        assert!(f.channel(2).iter().all(|v| (v - two_log2).abs() < 1e-6));
    }

    #[test]
    fn channel_labels_round_trip() {
        let kinds = [
            ChannelKind::LogMelW,
            ChannelKind::LogMelRight,
            ChannelKind::LogMel(9),
            ChannelKind::IntensityZ,
            ChannelKind::IpdSin,
            ChannelKind::Embedding(EmbeddingRole::TargetVideo),
        ];
        for k in kinds {
            assert_eq!(ChannelKind::parse(&k.label()), Some(k));
        }
        assert_eq!(ChannelKind::parse("bogus"), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn intensity_magnitude_bounded(seed in 0u64..u64::MAX, gains in proptest::array::uniform4(-3.0f64..3.0)) {
            let (cfg, fb) = defaults();
            let n = 1200;
            let chans: Vec<Vec<f64>> = (0..4)
                .map(|c| white_noise(n, seed.wrapping_add(c)).into_iter().map(|v| v * gains[c as usize]).collect())
                .collect();
            let spec = stft(&[&chans[0], &chans[1], &chans[2], &chans[3]], 24000, &cfg).unwrap();
            let field = active_intensity(&spec).unwrap();
            for v in field.vectors() {
                prop_assert!(norm3(v) <= 1.0 + 1e-12);
            }
            let bands = aggregate_intensity_mel(&field, &fb).unwrap();
            for t in 0..bands.frames() {
                for m in 0..bands.bands() {
                    let v = [bands.get(0, t, m), bands.get(1, t, m), bands.get(2, t, m)];
                    prop_assert!(norm3(v) <= 1.0 + 1e-12);
                }
            }
        }

        #[test]
        fn icld_antisymmetry(seed in 0u64..1000) {
            let cfg = StftConfig::default();
            let l = white_noise(1000, seed);
            let r = white_noise(1000, seed + 1);
            let a = stft(&[&l, &r], 24000, &cfg).unwrap();
            let b = stft(&[&r, &l], 24000, &cfg).unwrap();
            for (p, q) in icld(&a).unwrap().iter().zip(icld(&b).unwrap()) {
                prop_assert_eq!(*p, -q);
            }
            for (p, q) in ipd(&a).unwrap().iter().zip(ipd(&b).unwrap()) {
                prop_assert_eq!(p[1], -q[1]);
                prop_assert_eq!(p[0], q[0]);
            }
        }
    }
}
