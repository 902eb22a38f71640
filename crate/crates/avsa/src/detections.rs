//! Object detections supplied by an external detector.
//!
//! ```json
//! {"frame": {"width": 1024, "height": 512},
//!  "objects": [{"bbox": [x, y, w, h], "center": [cx, cy], "label": "person", "confidence": 0.9}]}
//! ```

use std::path::Path;

use avsa_core::Detection;
use serde::{Deserialize, Serialize};

use crate::error::{AvsaError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSize {
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectedObject {
    pub bbox: [f64; 4],
    pub center: [f64; 2],
    #[serde(default)]
    pub label: String,
    #[serde(default = "full_confidence")]
    pub confidence: f64,
}

fn full_confidence() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionsFile {
    pub frame: FrameSize,
    #[serde(default)]
    pub objects: Vec<DetectedObject>,
}

impl DetectionsFile {
    pub fn detections(&self) -> Vec<Detection> {
        self.objects
            .iter()
            .map(|o| Detection {
                bbox: o.bbox,
                center: o.center,
                label: o.label.clone(),
                confidence: o.confidence,
            })
            .collect()
    }
}

pub fn parse_detections(text: &str, path: &Path) -> Result<DetectionsFile> {
    serde_json::from_str(text).map_err(|e| AvsaError::json(path, e))
}

pub fn read_detections(path: &Path) -> Result<DetectionsFile> {
    let text = std::fs::read_to_string(path).map_err(|e| AvsaError::io(path, e))?;
    parse_detections(&text, path)
}
