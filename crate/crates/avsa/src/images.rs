//! PNG frames and crops, plus the JSON sidecar written next to each crop.

use std::path::Path;

use avsa_core::{Crop, CropProvenance, EquirectFrame, Quadrant, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{AvsaError, Result};

fn image_err(path: &Path, e: impl ToString) -> AvsaError {
    AvsaError::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub fn read_rgb(path: &Path) -> Result<RgbImage> {
    let img = image::open(path).map_err(|e| image_err(path, e))?.into_rgb8();
    let (w, h) = img.dimensions();
    Ok(RgbImage::new(w, h, img.into_raw())?)
}

pub fn read_equirect(path: &Path) -> Result<EquirectFrame> {
    Ok(EquirectFrame::new(read_rgb(path)?)?)
}

pub fn png_bytes(img: &RgbImage, path: &Path) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let encoder = image::codecs::png::PngEncoder::new(&mut out);
    image::ImageEncoder::write_image(
        encoder,
        img.data(),
        img.width(),
        img.height(),
        image::ExtendedColorType::Rgb8,
    )
    .map_err(|e| image_err(path, e))?;
    Ok(out)
}

pub fn write_png(path: &Path, img: &RgbImage) -> Result<()> {
    let bytes = png_bytes(img, path)?;
    std::fs::write(path, bytes).map_err(|e| AvsaError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CropSidecar {
    pub schema_version: u32,
    pub mode: String,
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrant: Option<String>,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub fov_deg: f64,
    pub out_size: u32,
    pub provenance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub seed: u64,
}

impl CropSidecar {
    pub fn new(
        mode: &str,
        index: usize,
        quadrant: Option<Quadrant>,
        crop: &Crop,
        label: Option<&str>,
        seed: u64,
    ) -> Self {
        let (provenance, detection_index) = match crop.provenance() {
            CropProvenance::Detected(i) => ("detected", Some(i)),
            CropProvenance::RandomFallback => ("random-fallback", None),
        };
        Self {
            schema_version: crate::report::REPORT_SCHEMA_VERSION,
            mode: mode.to_string(),
            index,
            quadrant: quadrant.map(|q| q.label().to_string()),
            azimuth_deg: crop.azimuth_deg(),
            elevation_deg: crop.elevation_deg(),
            fov_deg: crop.fov_deg(),
            out_size: crop.out_size(),
            provenance: provenance.to_string(),
            detection_index,
            label: label.map(str::to_string),
            seed,
        }
    }
}
