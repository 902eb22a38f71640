//! WAV reading and writing. Channel order on disk is ACN (W, Y, Z, X) for
//! FOA and (L, R) for stereo. The path `-` means stdin or stdout.

use std::fs::File;
use std::io::{BufReader, Cursor, Read};
use std::path::{Path, PathBuf};

use avsa_core::{Error as CoreError, FoaSignal, StereoSignal};

use crate::error::{AvsaError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum SampleFormat {
    /// 32-bit IEEE float.
    #[default]
    Float32,
    /// 16-bit signed PCM.
    Pcm16,
}

/// Deinterleaved audio with samples as `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavAudio {
    pub sample_rate: u32,
    pub channels: Vec<Vec<f64>>,
}

fn display(path: &Path) -> PathBuf {
    if path == Path::new("-") {
        PathBuf::from("<stdin>")
    } else {
        path.to_path_buf()
    }
}

impl WavAudio {
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Output channel `i` is input channel `map[i]`.
    pub fn remap(self, map: &[usize]) -> Result<Self> {
        if let Some(bad) = map.iter().find(|&&i| i >= self.channels.len()) {
            return Err(AvsaError::Usage(format!(
                "remap index {bad} out of range for {} channels",
                self.channels.len()
            )));
        }
        let channels = map.iter().map(|&i| self.channels[i].clone()).collect();
        Ok(Self {
            sample_rate: self.sample_rate,
            channels,
        })
    }

    pub fn into_foa(self) -> Result<FoaSignal> {
        Ok(FoaSignal::from_channels(self.sample_rate, self.channels)?)
    }

    pub fn into_stereo(self) -> Result<StereoSignal> {
        let n = self.channels.len();
        let [left, right]: [Vec<f64>; 2] = self
            .channels
            .try_into()
            .map_err(|_| CoreError::ChannelCount { expected: 2, actual: n })?;
        Ok(StereoSignal::new(self.sample_rate, left, right)?)
    }

    pub fn into_mono(self) -> Result<Vec<f64>> {
        let n = self.channels.len();
        let [mono]: [Vec<f64>; 1] = self
            .channels
            .try_into()
            .map_err(|_| CoreError::ChannelCount { expected: 1, actual: n })?;
        Ok(mono)
    }

    pub fn from_foa(x: &FoaSignal) -> Self {
        Self {
            sample_rate: x.sample_rate(),
            channels: x.channels().to_vec(),
        }
    }

    pub fn from_stereo(y: &StereoSignal) -> Self {
        Self {
            sample_rate: y.sample_rate,
            channels: vec![y.left.clone(), y.right.clone()],
        }
    }

    pub fn mono(sample_rate: u32, signal: Vec<f64>) -> Self {
        Self {
            sample_rate,
            channels: vec![signal],
        }
    }
}

pub fn read_wav(path: &Path) -> Result<WavAudio> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        std::io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| AvsaError::io(display(path), e))?;
        return read_wav_from(Cursor::new(buf), path);
    }
    let file = File::open(path).map_err(|e| AvsaError::io(path, e))?;
    read_wav_from(BufReader::new(file), path)
}

/// Reads WAV data from any reader; `path` is only used in messages.
pub fn read_wav_from<R: Read>(reader: R, path: &Path) -> Result<WavAudio> {
    let bad = |e: hound::Error| AvsaError::Wav {
        path: display(path),
        message: e.to_string(),
    };
    let mut wav = hound::WavReader::new(reader).map_err(bad)?;
    let spec = wav.spec();
    let n = spec.channels as usize;
    if n == 0 {
        return Err(AvsaError::Wav {
            path: display(path),
            message: "no channels".into(),
        });
    }
    let interleaved: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Float => wav
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(bad)?,
        hound::SampleFormat::Int => {
            let scale = 1.0 / (1u64 << (spec.bits_per_sample - 1)) as f64;
            wav.samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(bad)?
        }
    };
    let mut channels = vec![Vec::with_capacity(interleaved.len() / n); n];
    for frame in interleaved.chunks_exact(n) {
        for (c, v) in channels.iter_mut().zip(frame) {
            c.push(*v);
        }
    }
    Ok(WavAudio {
        sample_rate: spec.sample_rate,
        channels,
    })
}

/// Encodes a complete WAV file in memory.
pub fn wav_bytes(audio: &WavAudio, format: SampleFormat) -> Result<Vec<u8>> {
    let ch = audio.channels.len();
    if ch == 0 || ch > u16::MAX as usize {
        return Err(AvsaError::Usage(format!("cannot write {ch} channels")));
    }
    if audio.channels.iter().any(|c| c.len() != audio.len()) {
        return Err(CoreError::RaggedChannels.into());
    }
    let spec = hound::WavSpec {
        channels: ch as u16,
        sample_rate: audio.sample_rate,
        bits_per_sample: match format {
            SampleFormat::Float32 => 32,
            SampleFormat::Pcm16 => 16,
        },
        sample_format: match format {
            SampleFormat::Float32 => hound::SampleFormat::Float,
            SampleFormat::Pcm16 => hound::SampleFormat::Int,
        },
    };
    let fail = |e: hound::Error| AvsaError::Wav {
        path: PathBuf::from("<output>"),
        message: e.to_string(),
    };
    let mut cursor = Cursor::new(Vec::new());
    {
        let mut w = hound::WavWriter::new(&mut cursor, spec).map_err(fail)?;
        for n in 0..audio.len() {
            for c in &audio.channels {
                match format {
                    SampleFormat::Float32 => w.write_sample(c[n] as f32),
                    SampleFormat::Pcm16 => w.write_sample((c[n] * 32768.0).round().clamp(-32768.0, 32767.0) as i16),
                }
                .map_err(fail)?;
            }
        }
        w.finalize().map_err(fail)?;
    }
    Ok(cursor.into_inner())
}

pub fn write_wav(path: &Path, audio: &WavAudio, format: SampleFormat) -> Result<()> {
    let bytes = wav_bytes(audio, format)?;
    crate::write_output(path, &bytes)
}

/// Reads a channel map: a JSON array of source channel indices.
pub fn read_remap(path: &Path) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path).map_err(|e| AvsaError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| AvsaError::json(path, e))
}

/// Reads a WAV file and applies an optional channel map.
pub fn load(path: &Path, remap: Option<&[usize]>) -> Result<WavAudio> {
    let audio = read_wav(path)?;
    match remap {
        Some(map) => audio.remap(map),
        None => Ok(audio),
    }
}
