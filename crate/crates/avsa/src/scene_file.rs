//! Scene descriptions for `synth-scene`.
//!
//! ```json
//! {"sample_rate": 24000, "duration_s": 1.0, "seed": 7,
//!  "diffuse": {"gain": 0.1, "components": 64},
//!  "sources": [{"azimuth_deg": 30, "elevation_deg": 0,
//!               "signal": {"kind": "noise", "gain": 1.0}}]}
//! ```
//!
//! A noise source without its own seed uses `seed + 1 + index`.

use std::path::Path;

use avsa_core::math::{sin, TAU};
use avsa_core::scene::{white_noise, DEFAULT_DIFFUSE_COMPONENTS};
use avsa_core::{Direction, SceneSpec};
use serde::{Deserialize, Serialize};

use crate::error::{AvsaError, Result};

fn default_rate() -> u32 {
    24000
}

fn one() -> f64 {
    1.0
}

fn default_components() -> usize {
    DEFAULT_DIFFUSE_COMPONENTS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SignalSpec {
    Noise {
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default = "one")]
        gain: f64,
    },
    Sine {
        frequency_hz: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        phase_deg: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub azimuth_deg: f64,
    #[serde(default)]
    pub elevation_deg: f64,
    pub signal: SignalSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffuseSpec {
    pub gain: f64,
    #[serde(default = "default_components")]
    pub components: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    #[serde(default = "default_rate")]
    pub sample_rate: u32,
    /// Length in seconds; ignored when `length` is given.
    #[serde(default)]
    pub duration_s: Option<f64>,
    /// Length in samples.
    #[serde(default)]
    pub length: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub diffuse: Option<DiffuseSpec>,
    #[serde(default)]
    pub sources: Vec<SourceSpec>,
}

impl SceneFile {
    pub fn samples(&self) -> Result<usize> {
        match (self.length, self.duration_s) {
            (Some(n), _) => Ok(n),
            (None, Some(d)) if d.is_finite() && d > 0.0 => Ok((d * self.sample_rate as f64).round() as usize),
            (None, Some(d)) => Err(AvsaError::Usage(format!("duration_s must be positive, got {d}"))),
            (None, None) => Ok(self.sample_rate as usize),
        }
    }

    pub fn to_spec(&self) -> Result<SceneSpec> {
        let len = self.samples()?;
        let mut spec = SceneSpec::new(self.sample_rate, len);
        spec.seed = self.seed;
        if let Some(d) = &self.diffuse {
            spec.diffuse_gain = d.gain;
            spec.diffuse_component_count = d.components;
        }
        for (i, s) in self.sources.iter().enumerate() {
            let signal = match s.signal {
                SignalSpec::Noise { seed, gain } => {
                    let seed = seed.unwrap_or_else(|| self.seed.wrapping_add(1 + i as u64));
                    white_noise(len, seed).into_iter().map(|v| gain * v).collect()
                }
                SignalSpec::Sine {
                    frequency_hz,
                    amplitude,
                    phase_deg,
                } => {
                    let phase = phase_deg.to_radians();
                    (0..len)
                        .map(|n| amplitude * sin(TAU * frequency_hz * n as f64 / self.sample_rate as f64 + phase))
                        .collect()
                }
            };
            let direction = Direction::from_degrees(s.azimuth_deg, s.elevation_deg)?;
            spec = spec.with_source(direction, signal);
        }
        Ok(spec)
    }
}

pub fn parse_scene(text: &str, path: &Path) -> Result<SceneFile> {
    serde_json::from_str(text).map_err(|e| AvsaError::json(path, e))
}

pub fn read_scene(path: &Path) -> Result<SceneFile> {
    let text = std::fs::read_to_string(path).map_err(|e| AvsaError::io(path, e))?;
    parse_scene(&text, path)
}
