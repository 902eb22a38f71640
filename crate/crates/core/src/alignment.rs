//! Cosine-similarity matrices, contrastive targets, the cross-entropy loss
//! and its analytic gradients.
//!
//! Batches are flattened clip-major, crop-minor: embedding `(i, k)` of a
//! batch with `K` crops per clip sits at row `i·K + k`. Rows of a
//! similarity matrix index predicted embeddings, columns index targets.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::features::ENERGY_FLOOR;
use crate::math::{exp, ln, pairwise_sum, sqrt};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingRole {
    PredictedAudio,
    TargetAudio,
    PredictedVideo,
    TargetVideo,
}

impl EmbeddingRole {
    pub fn label(&self) -> &'static str {
        match self {
            Self::PredictedAudio => "predicted-audio",
            Self::TargetAudio => "target-audio",
            Self::PredictedVideo => "predicted-video",
            Self::TargetVideo => "target-video",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "predicted-audio" => Self::PredictedAudio,
            "target-audio" => Self::TargetAudio,
            "predicted-video" => Self::PredictedVideo,
            "target-video" => Self::TargetVideo,
            _ => return None,
        })
    }
}

/// `N × K × D` embeddings stored as `N·K` rows of length `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingBatch {
    clips: usize,
    crops: usize,
    dim: usize,
    role: EmbeddingRole,
    data: Vec<f64>,
}

impl EmbeddingBatch {
    pub const DEFAULT_DIM: usize = 128;

    pub fn new(clips: usize, crops: usize, dim: usize, role: EmbeddingRole, data: Vec<f64>) -> Result<Self> {
        if clips == 0 || crops == 0 || dim == 0 {
            return Err(Error::Shape("embedding batch dimensions must be positive".into()));
        }
        if data.len() != clips * crops * dim {
            return Err(Error::Shape(alloc::format!(
                "{} values for {clips}x{crops}x{dim} embeddings",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("embedding batch"));
        }
        Ok(Self {
            clips,
            crops,
            dim,
            role,
            data,
        })
    }

    pub fn clips(&self) -> usize {
        self.clips
    }

    pub fn crops(&self) -> usize {
        self.crops
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.clips * self.crops
    }

    pub fn role(&self) -> EmbeddingRole {
        self.role
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    /// Row of clip `i`, crop `k`.
    pub fn get(&self, clip: usize, crop: usize) -> &[f64] {
        self.row(clip * self.crops + crop)
    }

    fn norms(&self) -> Vec<f64> {
        (0..self.rows())
            .map(|r| sqrt(self.row(r).iter().map(|v| v * v).sum()))
            .collect()
    }
}

/// Dense `rows × cols` matrix of similarities (or logits).
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(alloc::format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: alloc::vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }
}

/// Cosine similarity of every predicted row with every target row. Entries
/// involving a zero-norm embedding are 0.
pub fn cosine_similarity_matrix(pred: &EmbeddingBatch, target: &EmbeddingBatch) -> Result<SimilarityMatrix> {
    if pred.dim != target.dim {
        return Err(Error::Shape(alloc::format!(
            "embedding dimensions differ: {} vs {}",
            pred.dim,
            target.dim
        )));
    }
    let (pn, tn) = (pred.norms(), target.norms());
    let mut data = Vec::with_capacity(pred.rows() * target.rows());
    for (r, &np) in pn.iter().enumerate() {
        let p = pred.row(r);
        for (c, &nt) in tn.iter().enumerate() {
            if np < ENERGY_FLOOR || nt < ENERGY_FLOOR {
                data.push(0.0);
                continue;
            }
            let dot: f64 = p.iter().zip(target.row(c)).map(|(a, b)| a * b).sum();
            data.push((dot / (np * nt)).clamp(-1.0, 1.0));
        }
    }
    SimilarityMatrix::new(pred.rows(), target.rows(), data)
}

/// One positive column per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetMask {
    cols: usize,
    positives: Vec<usize>,
}

impl TargetMask {
    pub fn new(cols: usize, positives: Vec<usize>) -> Result<Self> {
        if let Some(bad) = positives.iter().find(|&&p| p >= cols) {
            return Err(Error::Shape(alloc::format!("positive column {bad} out of {cols}")));
        }
        Ok(Self { cols, positives })
    }

    pub fn rows(&self) -> usize {
        self.positives.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn positive(&self, r: usize) -> usize {
        self.positives[r]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.positives[r] == c
    }

    /// Row-major 0/1 matrix.
    pub fn to_dense(&self) -> Vec<u8> {
        let mut out = alloc::vec![0u8; self.rows() * self.cols];
        for (r, &p) in self.positives.iter().enumerate() {
            out[r * self.cols + p] = 1;
        }
        out
    }
}

/// Positive iff same clip.
pub fn avc_targets(clips: usize) -> TargetMask {
    TargetMask {
        cols: clips,
        positives: (0..clips).collect(),
    }
}

/// Positive iff same clip and same crop; same-clip misaligned pairs and
/// cross-clip pairs are negatives.
pub fn avsa_targets(clips: usize, crops: usize) -> TargetMask {
    let n = clips * crops;
    TargetMask {
        cols: n,
        positives: (0..n).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossOutput {
    pub loss: f64,
    /// `∂loss/∂S`, row-major like the similarity matrix.
    pub grad: Vec<f64>,
}

/// Mean over rows of `−log softmax(S_r / τ)[positive]`, with gradient
/// `(softmax − M) / (τ · rows)`.
pub fn contrastive_loss(s: &SimilarityMatrix, m: &TargetMask, temperature: f64) -> Result<LossOutput> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::Config(alloc::format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    if (s.rows, s.cols) != (m.rows(), m.cols) {
        return Err(Error::Shape(alloc::format!(
            "similarity is {}x{}, targets are {}x{}",
            s.rows,
            s.cols,
            m.rows(),
            m.cols
        )));
    }
    if s.rows == 0 {
        return Err(Error::Shape("empty similarity matrix".into()));
    }
    let scale = 1.0 / (temperature * s.rows as f64);
    let mut row_losses = Vec::with_capacity(s.rows);
    let mut grad = Vec::with_capacity(s.data.len());
    for r in 0..s.rows {
        let logits: Vec<f64> = s.row(r).iter().map(|v| v / temperature).collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| exp(l - max)).collect();
        let lse = max + ln(pairwise_sum(&exps));
        let p = m.positive(r);
        row_losses.push(lse - logits[p]);
        for (c, l) in logits.iter().enumerate() {
            let soft = exp(l - lse);
            let target = if c == p { 1.0 } else { 0.0 };
            grad.push((soft - target) * scale);
        }
    }
    Ok(LossOutput {
        loss: pairwise_sum(&row_losses) / s.rows as f64,
        grad,
    })
}

/// Mean of the audio- and video-direction losses; each gradient carries the
/// factor ½.
pub fn symmetric_contrastive_loss(
    audio: &SimilarityMatrix,
    video: &SimilarityMatrix,
    m: &TargetMask,
    temperature: f64,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let a = contrastive_loss(audio, m, temperature)?;
    let v = contrastive_loss(video, m, temperature)?;
    let half = |g: Vec<f64>| g.into_iter().map(|x| 0.5 * x).collect::<Vec<_>>();
    Ok((0.5 * (a.loss + v.loss), half(a.grad), half(v.grad)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingGradients {
    /// `∂loss/∂P`, same layout as the predicted batch.
    pub pred: Vec<f64>,
    /// `∂loss/∂T`, same layout as the target batch.
    pub target: Vec<f64>,
    /// Rows whose norm was below the floor; their gradient is zero.
    pub zero_norm_pred: Vec<usize>,
    pub zero_norm_target: Vec<usize>,
}

/// Chain rule through `s_rc = p_r·t_c / (‖p_r‖‖t_c‖)`, using
/// `∂s/∂p = t/(‖p‖‖t‖) − s·p/‖p‖²` and symmetrically for `t`.
pub fn backprop_to_embeddings(
    grad_s: &[f64],
    pred: &EmbeddingBatch,
    target: &EmbeddingBatch,
) -> Result<EmbeddingGradients> {
    let s = cosine_similarity_matrix(pred, target)?;
    if grad_s.len() != s.data.len() {
        return Err(Error::Shape(alloc::format!(
            "gradient has {} entries, similarity has {}",
            grad_s.len(),
            s.data.len()
        )));
    }
    let d = pred.dim;
    let (pn, tn) = (pred.norms(), target.norms());
    let mut gp = alloc::vec![0.0; pred.data.len()];
    let mut gt = alloc::vec![0.0; target.data.len()];
    // With a_rc = g_rc / (‖p_r‖‖t_c‖):
    //   ∂/∂p_r = Σ_c a_rc t_c − (Σ_c g_rc s_rc / ‖p_r‖²) p_r
    //   ∂/∂t_c = Σ_r a_rc p_r − (Σ_r g_rc s_rc / ‖t_c‖²) t_c
    let mut t_self = alloc::vec![0.0; target.rows()];
    for r in 0..pred.rows() {
        if pn[r] < ENERGY_FLOOR {
            continue;
        }
        let p = pred.row(r);
        let mut p_self = 0.0;
        let out = &mut gp[r * d..(r + 1) * d];
        for c in 0..target.rows() {
            let g = grad_s[r * s.cols + c];
            if tn[c] < ENERGY_FLOOR || g == 0.0 {
                continue;
            }
            let gs = g * s.get(r, c);
            p_self += gs;
            t_self[c] += gs;
            let a = g / (pn[r] * tn[c]);
            for (o, t) in out.iter_mut().zip(target.row(c)) {
                *o += a * t;
            }
            for (o, pj) in gt[c * d..(c + 1) * d].iter_mut().zip(p) {
                *o += a * pj;
            }
        }
        let k = p_self / (pn[r] * pn[r]);
        for (o, pj) in out.iter_mut().zip(p) {
            *o -= k * pj;
        }
    }
    for c in 0..target.rows() {
        if tn[c] < ENERGY_FLOOR {
            continue;
        }
        let k = t_self[c] / (tn[c] * tn[c]);
        for (o, t) in gt[c * d..(c + 1) * d].iter_mut().zip(target.row(c)) {
            *o -= k * t;
        }
    }
    let zero = |n: &[f64]| {
        n.iter()
            .enumerate()
            .filter(|(_, v)| **v < ENERGY_FLOOR)
            .map(|(i, _)| i)
            .collect()
    };
    Ok(EmbeddingGradients {
        pred: gp,
        target: gt,
        zero_norm_pred: zero(&pn),
        zero_norm_target: zero(&tn),
    })
}

/// Fraction of rows whose argmax column is the positive one. Ties go to the
/// lowest column index.
pub fn retrieval_accuracy(s: &SimilarityMatrix, m: &TargetMask) -> f64 {
    if s.rows == 0 {
        return 0.0;
    }
    let hits = (0..s.rows)
        .filter(|&r| {
            let row = s.row(r);
            let mut best = 0;
            for (c, v) in row.iter().enumerate().skip(1) {
                if *v > row[best] {
                    best = c;
                }
            }
            best == m.positive(r)
        })
        .count();
    hits as f64 / s.rows as f64
}
