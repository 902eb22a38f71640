//! The AVSF tensor format.
//!
//! Layout, all integers little-endian `u32`:
//!
//! ```text
//! "AVSF" | version | channels | frames | bands | json length | json | f32 data
//! ```
//!
//! The JSON block names each channel (`{"channels": [...]}`); embedding
//! files also record the clip and crop counts. Data is row-major
//! `channels × frames × bands`, little-endian `f32`.

use std::path::Path;

use avsa_core::{ChannelKind, EmbeddingBatch, FeatureTensor};
use serde::{Deserialize, Serialize};

use crate::error::{AvsaError, Result};

pub const MAGIC: &[u8; 4] = b"AVSF";
pub const AVSF_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelBlock {
    pub channels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clips: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crops_per_clip: Option<usize>,
}

/// A decoded file before its channel block is interpreted.
#[derive(Debug, Clone, PartialEq)]
pub struct AvsfFile {
    pub block: ChannelBlock,
    pub frames: usize,
    pub bands: usize,
    pub data: Vec<f32>,
}

fn u32_of(n: usize, what: &str) -> Result<u32> {
    u32::try_from(n).map_err(|_| AvsaError::Usage(format!("{what} {n} does not fit the AVSF header")))
}

fn encode(block: &ChannelBlock, frames: usize, bands: usize, data: &[f64]) -> Result<Vec<u8>> {
    let json = serde_json::to_vec(block).map_err(|e| AvsaError::json("<avsf header>", e))?;
    let mut out = Vec::with_capacity(24 + json.len() + data.len() * 4);
    out.extend_from_slice(MAGIC);
    for v in [
        AVSF_VERSION,
        u32_of(block.channels.len(), "channel count")?,
        u32_of(frames, "frame count")?,
        u32_of(bands, "band count")?,
        u32_of(json.len(), "header length")?,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&json);
    for v in data {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    Ok(out)
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<AvsfFile> {
    let bad = |message: String| AvsaError::Avsf {
        path: path.to_path_buf(),
        message,
    };
    if bytes.len() < 24 || &bytes[..4] != MAGIC {
        return Err(bad("missing AVSF magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
    let (version, channels, frames, bands, json_len) = (word(0), word(1), word(2), word(3), word(4));
    if version != AVSF_VERSION as usize {
        return Err(bad(format!("unsupported version {version}")));
    }
    let json_end = 24usize
        .checked_add(json_len)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| bad("truncated channel block".into()))?;
    let block: ChannelBlock = serde_json::from_slice(&bytes[24..json_end]).map_err(|e| AvsaError::json(path, e))?;
    if block.channels.len() != channels {
        return Err(bad(format!(
            "header says {channels} channels, block names {}",
            block.channels.len()
        )));
    }
    let count = channels
        .checked_mul(frames)
        .and_then(|n| n.checked_mul(bands))
        .ok_or_else(|| bad("tensor size overflows".into()))?;
    let payload = &bytes[json_end..];
    if payload.len() != count * 4 {
        return Err(bad(format!(
            "expected {} data bytes, found {}",
            count * 4,
            payload.len()
        )));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(AvsfFile {
        block,
        frames,
        bands,
        data,
    })
}

pub fn encode_tensor(t: &FeatureTensor) -> Result<Vec<u8>> {
    let block = ChannelBlock {
        channels: t.kinds().iter().map(ChannelKind::label).collect(),
        clips: None,
        crops_per_clip: None,
    };
    encode(&block, t.frames(), t.bands(), t.data())
}

pub fn decode_tensor(bytes: &[u8], path: &Path) -> Result<FeatureTensor> {
    let file = decode(bytes, path)?;
    let kinds = file
        .block
        .channels
        .iter()
        .map(|l| {
            ChannelKind::parse(l).ok_or_else(|| AvsaError::Avsf {
                path: path.to_path_buf(),
                message: format!("unknown channel label {l:?}"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let data = file.data.iter().map(|v| f64::from(*v)).collect();
    Ok(FeatureTensor::new(kinds, file.frames, file.bands, data)?)
}

/// One channel, `N·K` frames, `D` bands.
pub fn encode_embeddings(batch: &EmbeddingBatch) -> Result<Vec<u8>> {
    let block = ChannelBlock {
        channels: vec![ChannelKind::Embedding(batch.role()).label()],
        clips: Some(batch.clips()),
        crops_per_clip: Some(batch.crops()),
    };
    encode(&block, batch.rows(), batch.dim(), batch.data())
}

pub fn decode_embeddings(bytes: &[u8], path: &Path) -> Result<EmbeddingBatch> {
    let file = decode(bytes, path)?;
    let bad = |message: &str| AvsaError::Avsf {
        path: path.to_path_buf(),
        message: message.into(),
    };
    let role = match file.block.channels.as_slice() {
        [label] => match ChannelKind::parse(label) {
            Some(ChannelKind::Embedding(role)) => role,
            _ => return Err(bad("channel is not an embedding")),
        },
        _ => return Err(bad("embedding files have exactly one channel")),
    };
    let crops = file.block.crops_per_clip.unwrap_or(1);
    let clips = file.block.clips.unwrap_or(file.frames / crops.max(1));
    if crops == 0 || clips * crops != file.frames {
        return Err(bad("clip and crop counts do not match the frame count"));
    }
    let data = file.data.iter().map(|v| f64::from(*v)).collect();
    Ok(EmbeddingBatch::new(clips, crops, file.bands, role, data)?)
}

pub fn read_tensor(path: &Path) -> Result<FeatureTensor> {
    let bytes = std::fs::read(path).map_err(|e| AvsaError::io(path, e))?;
    decode_tensor(&bytes, path)
}

pub fn read_embeddings(path: &Path) -> Result<EmbeddingBatch> {
    let bytes = std::fs::read(path).map_err(|e| AvsaError::io(path, e))?;
    decode_embeddings(&bytes, path)
}
