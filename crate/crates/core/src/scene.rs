//! Discrete realization of a sound scene: point sources plus an isotropic
//! diffuse field made of uncorrelated plane waves on a Fibonacci lattice.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::ambisonics::{encode_direction, Direction, FoaSignal};
use crate::error::{Error, Result};
use crate::math::{asin, sqrt, PI};

pub const DEFAULT_DIFFUSE_COMPONENTS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSource {
    pub direction: Direction,
    pub signal: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub sample_rate: u32,
    /// Output length in samples; every source signal must have this length.
    pub length: usize,
    pub sources: Vec<SceneSource>,
    /// Linear amplitude of the whole diffuse field (W-channel RMS for unit-variance noise).
    pub diffuse_gain: f64,
    pub diffuse_component_count: usize,
    pub seed: u64,
}

impl SceneSpec {
    pub fn new(sample_rate: u32, length: usize) -> Self {
        Self {
            sample_rate,
            length,
            sources: Vec::new(),
            diffuse_gain: 0.0,
            diffuse_component_count: DEFAULT_DIFFUSE_COMPONENTS,
            seed: 0,
        }
    }

    pub fn with_source(mut self, direction: Direction, signal: Vec<f64>) -> Self {
        self.sources.push(SceneSource { direction, signal });
        self
    }

    pub fn with_diffuse(mut self, gain: f64, seed: u64) -> Self {
        self.diffuse_gain = gain;
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.sample_rate == 0 {
            return Err(Error::SampleRate(0));
        }
        if self.length == 0 {
            return Err(Error::EmptySignal);
        }
        if !(self.diffuse_gain.is_finite() && self.diffuse_gain >= 0.0) {
            return Err(Error::Config(alloc::format!(
                "diffuse_gain must be finite and >= 0, got {}",
                self.diffuse_gain
            )));
        }
        if self.diffuse_gain > 0.0 && self.diffuse_component_count == 0 {
            return Err(Error::Config("diffuse field needs at least one component".into()));
        }
        if let Some(bad) = self.sources.iter().find(|s| s.signal.len() != self.length) {
            return Err(Error::Shape(alloc::format!(
                "source has {} samples, scene length is {}",
                bad.signal.len(),
                self.length
            )));
        }
        Ok(())
    }
}

/// `count` near-uniform directions on the sphere (golden-angle spiral).
pub fn fibonacci_sphere(count: usize) -> Vec<Direction> {
    let golden_angle = PI * (3.0 - sqrt(5.0));
    (0..count)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
            // asin of a value in (-1, 1) and any finite azimuth: always valid
            Direction::new(k as f64 * golden_angle, asin(z)).expect("lattice direction")
        })
        .collect()
}

/// Sum of encoded sources plus the diffuse field. Bit-reproducible for a
/// given spec: the noise is drawn component by component from one
/// ChaCha8 stream seeded with `spec.seed`.
pub fn synthesize_scene(spec: &SceneSpec) -> Result<FoaSignal> {
    spec.validate()?;
    let n = spec.length;
    let mut channels: [Vec<f64>; 4] = [
        alloc::vec![0.0; n],
        alloc::vec![0.0; n],
        alloc::vec![0.0; n],
        alloc::vec![0.0; n],
    ];
    let mut add_plane_wave = |dir: Direction, signal: &[f64], scale: f64| {
        let g = encode_direction(dir).to_array();
        for (ch, gain) in channels.iter_mut().zip(g) {
            let gain = gain * scale;
            for (dst, s) in ch.iter_mut().zip(signal) {
                *dst += gain * s;
            }
        }
    };

    for src in &spec.sources {
        add_plane_wave(src.direction, &src.signal, 1.0);
    }

    if spec.diffuse_gain > 0.0 {
        let m = spec.diffuse_component_count;
        let scale = spec.diffuse_gain / sqrt(m as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut noise = alloc::vec![0.0; n];
        for dir in fibonacci_sphere(m) {
            for v in noise.iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
            add_plane_wave(dir, &noise, scale);
        }
    }

    FoaSignal::new(spec.sample_rate, channels)
}

/// Unit-variance Gaussian white noise from a seeded ChaCha8 stream.
pub fn white_noise(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}
