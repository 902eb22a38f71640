//! Toy-scale contrastive trainer.
//!
//! Linear heads stand in for the audio and video encoders, and in AVSA mode
//! two further linear maps stand in for the audio-to-video and video-to-audio
//! translation networks. Training is full-batch gradient descent on the
//! symmetric contrastive loss.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::alignment::{
    avc_targets, avsa_targets, backprop_to_embeddings, cosine_similarity_matrix, retrieval_accuracy,
    symmetric_contrastive_loss, EmbeddingBatch, EmbeddingRole, TargetMask,
};
use crate::error::{Error, Result};
use crate::math::sqrt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToyMode {
    /// One crop per clip; positives are same-clip pairs.
    Avc,
    /// Several crops per clip; positives are same-clip, same-crop pairs.
    Avsa,
}

impl ToyMode {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Avc => "avc",
            Self::Avsa => "avsa",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyConfig {
    pub mode: ToyMode,
    pub clips: usize,
    /// Crops per clip in AVSA mode. AVC always uses one.
    pub crops: usize,
    pub latent_dim: usize,
    pub feature_dim: usize,
    pub embed_dim: usize,
    pub noise: f64,
    pub epochs: usize,
    pub lr: f64,
    pub temperature: f64,
    pub seed: u64,
    /// Pair each audio row with the video of a random other row.
    pub shuffled: bool,
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self {
            mode: ToyMode::Avsa,
            clips: 32,
            crops: 4,
            latent_dim: 8,
            feature_dim: 16,
            embed_dim: EmbeddingBatch::DEFAULT_DIM,
            noise: 0.05,
            epochs: 500,
            lr: 10.0,
            temperature: 1.0,
            seed: 0,
            shuffled: false,
        }
    }
}

impl ToyConfig {
    pub fn crops_per_clip(&self) -> usize {
        match self.mode {
            ToyMode::Avc => 1,
            ToyMode::Avsa => self.crops,
        }
    }

    pub fn rows(&self) -> usize {
        self.clips * self.crops_per_clip()
    }

    fn validate(&self) -> Result<()> {
        if self.clips < 2 {
            return Err(Error::Config("at least two clips are needed".into()));
        }
        if self.crops == 0 || self.latent_dim == 0 || self.feature_dim == 0 || self.embed_dim == 0 {
            return Err(Error::Config("toy dimensions must be positive".into()));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::Config("noise must be finite and non-negative".into()));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::Config("learning rate must be finite and non-negative".into()));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::Config("temperature must be positive".into()));
        }
        Ok(())
    }
}

/// Paired audio and video feature vectors, one row per (clip, crop).
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPairs {
    pub clips: usize,
    pub crops: usize,
    pub dim: usize,
    pub audio: Vec<f64>,
    pub video: Vec<f64>,
}

impl SyntheticPairs {
    pub fn rows(&self) -> usize {
        self.clips * self.crops
    }
}

struct Mixing {
    audio: Vec<f64>,
    video: Vec<f64>,
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn mixing(cfg: &ToyConfig, rng: &mut ChaCha8Rng) -> Mixing {
    let n = cfg.feature_dim * cfg.latent_dim;
    let scale = 1.0 / sqrt(cfg.latent_dim as f64);
    Mixing {
        audio: gaussian(rng, n, scale),
        video: gaussian(rng, n, scale),
    }
}

/// Each row draws a latent code as the sum of a per-clip code and a
/// per-crop code, so crops of one clip are related but distinct. Both
/// modalities observe the code through their own random mixing matrix plus
/// Gaussian noise.
fn generate(cfg: &ToyConfig, mix: &Mixing, rng: &mut ChaCha8Rng) -> SyntheticPairs {
    let (k, l, f) = (cfg.crops_per_clip(), cfg.latent_dim, cfg.feature_dim);
    let rows = cfg.clips * k;
    let half = sqrt(0.5);
    let mut latent = Vec::with_capacity(rows * l);
    for _ in 0..cfg.clips {
        let clip = gaussian(rng, l, half);
        for _ in 0..k {
            let crop = gaussian(rng, l, half);
            latent.extend(clip.iter().zip(&crop).map(|(a, b)| a + b));
        }
    }
    let mut video_rows: Vec<usize> = (0..rows).collect();
    if cfg.shuffled {
        for i in (1..rows).rev() {
            video_rows.swap(i, rng.random_range(0..=i));
        }
    }
    let project = |m: &[f64], z: &[f64], rng: &mut ChaCha8Rng, out: &mut Vec<f64>| {
        for o in 0..f {
            let clean: f64 = m[o * l..(o + 1) * l].iter().zip(z).map(|(a, b)| a * b).sum();
            out.push(clean + cfg.noise * rng.sample::<f64, _>(StandardNormal));
        }
    };
    let mut audio = Vec::with_capacity(rows * f);
    let mut video = Vec::with_capacity(rows * f);
    for r in 0..rows {
        project(&mix.audio, &latent[r * l..(r + 1) * l], rng, &mut audio);
        let v = video_rows[r];
        project(&mix.video, &latent[v * l..(v + 1) * l], rng, &mut video);
    }
    SyntheticPairs {
        clips: cfg.clips,
        crops: k,
        dim: f,
        audio,
        video,
    }
}

/// Linear map `out = W · in` with `W` stored row-major, `d_out × d_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyHead {
    pub d_in: usize,
    pub d_out: usize,
    pub weights: Vec<f64>,
}

impl ToyHead {
    fn random(d_in: usize, d_out: usize, rng: &mut ChaCha8Rng) -> Self {
        Self {
            d_in,
            d_out,
            weights: gaussian(rng, d_in * d_out, 1.0 / sqrt(d_in as f64)),
        }
    }

    /// Applies the map to each row of `input`.
    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(input.len() / self.d_in * self.d_out);
        for x in input.chunks(self.d_in) {
            for o in 0..self.d_out {
                let w = &self.weights[o * self.d_in..(o + 1) * self.d_in];
                out.push(w.iter().zip(x).map(|(a, b)| a * b).sum());
            }
        }
        out
    }

    /// Accumulates `∂loss/∂W` given `∂loss/∂out` for each row.
    fn accumulate(&self, input: &[f64], grad_out: &[f64], acc: &mut [f64]) {
        for (x, g) in input.chunks(self.d_in).zip(grad_out.chunks(self.d_out)) {
            for (o, go) in g.iter().enumerate() {
                if *go == 0.0 {
                    continue;
                }
                for (a, xi) in acc[o * self.d_in..(o + 1) * self.d_in].iter_mut().zip(x) {
                    *a += go * xi;
                }
            }
        }
    }

    fn step(&mut self, grad: &[f64], lr: f64) {
        for (w, g) in self.weights.iter_mut().zip(grad) {
            *w -= lr * g;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyHeads {
    pub audio: ToyHead,
    pub video: ToyHead,
    /// Audio-to-video translation, AVSA only.
    pub a2v: Option<ToyHead>,
    /// Video-to-audio translation, AVSA only.
    pub v2a: Option<ToyHead>,
}

struct Forward {
    target_audio: EmbeddingBatch,
    target_video: EmbeddingBatch,
    pred_audio: EmbeddingBatch,
    pred_video: EmbeddingBatch,
}

impl ToyHeads {
    fn forward(&self, pairs: &SyntheticPairs) -> Result<Forward> {
        let (n, k, d) = (pairs.clips, pairs.crops, self.audio.d_out);
        let batch = |data, role| EmbeddingBatch::new(n, k, d, role, data);
        let ta = self.audio.forward(&pairs.audio);
        let tv = self.video.forward(&pairs.video);
        let (pa, pv) = match (&self.a2v, &self.v2a) {
            (Some(a2v), Some(v2a)) => (v2a.forward(&pairs.video), a2v.forward(&pairs.audio)),
            _ => (tv.clone(), ta.clone()),
        };
        Ok(Forward {
            target_audio: batch(ta, EmbeddingRole::TargetAudio)?,
            target_video: batch(tv, EmbeddingRole::TargetVideo)?,
            pred_audio: batch(pa, EmbeddingRole::PredictedAudio)?,
            pred_video: batch(pv, EmbeddingRole::PredictedVideo)?,
        })
    }

    /// Symmetric loss, and the mean of the two retrieval accuracies.
    fn evaluate(&self, pairs: &SyntheticPairs, m: &TargetMask, temperature: f64) -> Result<(f64, f64)> {
        let fw = self.forward(pairs)?;
        let sa = cosine_similarity_matrix(&fw.pred_audio, &fw.target_audio)?;
        let sv = cosine_similarity_matrix(&fw.pred_video, &fw.target_video)?;
        let (loss, _, _) = symmetric_contrastive_loss(&sa, &sv, m, temperature)?;
        let acc = 0.5 * (retrieval_accuracy(&sa, m) + retrieval_accuracy(&sv, m));
        Ok((loss, acc))
    }

    /// Predicted audio, target audio, predicted video and target video
    /// embeddings of `pairs`.
    pub fn embeddings(&self, pairs: &SyntheticPairs) -> Result<[EmbeddingBatch; 4]> {
        let fw = self.forward(pairs)?;
        Ok([fw.pred_audio, fw.target_audio, fw.pred_video, fw.target_video])
    }

    /// Retrieval accuracy of these heads on `pairs`.
    pub fn accuracy(&self, pairs: &SyntheticPairs) -> Result<f64> {
        let m = targets(pairs);
        Ok(self.evaluate(pairs, &m, 1.0)?.1)
    }
}

fn targets(pairs: &SyntheticPairs) -> TargetMask {
    if pairs.crops == 1 {
        avc_targets(pairs.clips)
    } else {
        avsa_targets(pairs.clips, pairs.crops)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub heads: ToyHeads,
    /// Loss before each update, then the final loss: `epochs + 1` entries.
    pub loss_curve: Vec<f64>,
    pub train_accuracy: f64,
    pub held_out_accuracy: f64,
    pub train: SyntheticPairs,
    pub held_out: SyntheticPairs,
}

fn diverged(e: Error, epoch: usize) -> Error {
    match e {
        Error::NonFinite(_) => Error::Diverged { epoch, loss: f64::NAN },
        other => other,
    }
}

/// Generates a training set and a held-out set of the same size, then trains
/// all heads jointly.
pub fn toy_train(cfg: &ToyConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mix = mixing(cfg, &mut rng);
    let train = generate(cfg, &mix, &mut rng);
    let held_out = generate(cfg, &mix, &mut rng);
    let (f, e) = (cfg.feature_dim, cfg.embed_dim);
    let mut heads = ToyHeads {
        audio: ToyHead::random(f, e, &mut rng),
        video: ToyHead::random(f, e, &mut rng),
        a2v: None,
        v2a: None,
    };
    if cfg.mode == ToyMode::Avsa {
        heads.a2v = Some(ToyHead::random(f, e, &mut rng));
        heads.v2a = Some(ToyHead::random(f, e, &mut rng));
    }
    let m = targets(&train);
    let mut loss_curve = Vec::with_capacity(cfg.epochs + 1);
    for epoch in 0..cfg.epochs {
        let fw = heads.forward(&train).map_err(|e| diverged(e, epoch))?;
        let sa = cosine_similarity_matrix(&fw.pred_audio, &fw.target_audio)?;
        let sv = cosine_similarity_matrix(&fw.pred_video, &fw.target_video)?;
        let (loss, ga, gv) = symmetric_contrastive_loss(&sa, &sv, &m, cfg.temperature)?;
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch, loss });
        }
        loss_curve.push(loss);
        let da = backprop_to_embeddings(&ga, &fw.pred_audio, &fw.target_audio)?;
        let dv = backprop_to_embeddings(&gv, &fw.pred_video, &fw.target_video)?;
        let zeros = || alloc::vec![0.0; f * e];
        let (mut g_audio, mut g_video) = (zeros(), zeros());
        heads.audio.accumulate(&train.audio, &da.target, &mut g_audio);
        heads.video.accumulate(&train.video, &dv.target, &mut g_video);
        match (&mut heads.a2v, &mut heads.v2a) {
            (Some(a2v), Some(v2a)) => {
                let (mut g_a2v, mut g_v2a) = (zeros(), zeros());
                a2v.accumulate(&train.audio, &dv.pred, &mut g_a2v);
                v2a.accumulate(&train.video, &da.pred, &mut g_v2a);
                a2v.step(&g_a2v, cfg.lr);
                v2a.step(&g_v2a, cfg.lr);
            }
            _ => {
                heads.video.accumulate(&train.video, &da.pred, &mut g_video);
                heads.audio.accumulate(&train.audio, &dv.pred, &mut g_audio);
            }
        }
        heads.audio.step(&g_audio, cfg.lr);
        heads.video.step(&g_video, cfg.lr);
    }
    let (final_loss, train_accuracy) = heads
        .evaluate(&train, &m, cfg.temperature)
        .map_err(|e| diverged(e, cfg.epochs))?;
    if !final_loss.is_finite() {
        return Err(Error::Diverged {
            epoch: cfg.epochs,
            loss: final_loss,
        });
    }
    loss_curve.push(final_loss);
    let held_out_accuracy = heads.evaluate(&held_out, &targets(&held_out), cfg.temperature)?.1;
    Ok(TrainOutcome {
        heads,
        loss_curve,
        train_accuracy,
        held_out_accuracy,
        train,
        held_out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mode: ToyMode) -> ToyConfig {
        ToyConfig {
            mode,
            clips: 8,
            embed_dim: 16,
            epochs: 30,
            ..ToyConfig::default()
        }
    }

    #[test]
    fn zero_learning_rate_keeps_loss_constant() {
        let out = toy_train(&ToyConfig {
            lr: 0.0,
            ..small(ToyMode::Avsa)
        })
        .unwrap();
        assert_eq!(out.loss_curve.len(), 31);
        assert!(out.loss_curve.iter().all(|l| *l == out.loss_curve[0]));
    }

    #[test]
    fn training_is_deterministic() {
        let a = toy_train(&small(ToyMode::Avc)).unwrap();
        let b = toy_train(&small(ToyMode::Avc)).unwrap();
        assert_eq!(a.loss_curve, b.loss_curve);
        assert_eq!(a.heads, b.heads);
    }

    #[test]
    fn loss_decreases() {
        for mode in [ToyMode::Avc, ToyMode::Avsa] {
            let out = toy_train(&small(mode)).unwrap();
            assert!(out.loss_curve.last().unwrap() < &out.loss_curve[0], "{mode:?}");
        }
    }

    #[test]
    fn avc_uses_one_crop() {
        let out = toy_train(&small(ToyMode::Avc)).unwrap();
        assert_eq!(out.train.crops, 1);
        assert!(out.heads.a2v.is_none());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(toy_train(&ToyConfig {
            clips: 1,
            ..small(ToyMode::Avc)
        })
        .is_err());
        assert!(toy_train(&ToyConfig {
            temperature: 0.0,
            ..small(ToyMode::Avc)
        })
        .is_err());
        assert!(toy_train(&ToyConfig {
            lr: f64::NAN,
            ..small(ToyMode::Avc)
        })
        .is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let cfg = ToyConfig {
            lr: 1e300,
            ..small(ToyMode::Avc)
        };
        assert!(matches!(toy_train(&cfg), Err(Error::Diverged { .. })));
    }
}
