//! Crop selection from object detections.
//!
//! AVC training uses one crop per clip, drawn uniformly from the detections
//! (or at a random direction when there are none). AVSA training uses four
//! crops, one per azimuth quadrant:
//!
//! | quadrant    | azimuth      |
//! |-------------|--------------|
//! | left-back   | (90°, 180°]  |
//! | left-front  | (0°, 90°]    |
//! | right-front | (−90°, 0°]   |
//! | right-back  | (−180°, −90°]|
//!
//! Quadrants without a usable detection get a random crop inside the
//! quadrant. Random crops keep their elevation within ±45°. The four crop
//! centers are kept at least [`MIN_SEPARATION_DEG`] apart in azimuth; a
//! detection closer than that to an already chosen crop does not qualify.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ambisonics::Direction;
use crate::error::{Error, Result};
use crate::geometry::{
    column_azimuth_deg, row_elevation_deg, Crop, CropProvenance, DEFAULT_CROP_SIZE, DEFAULT_FOV_DEG,
};
use crate::math::fabs;

pub const FALLBACK_MAX_ELEVATION_DEG: f64 = 45.0;
pub const MIN_SEPARATION_DEG: f64 = 1.0;

/// One detected object in pixel coordinates of the equirectangular frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    /// `[x, y, w, h]`.
    pub bbox: [f64; 4],
    pub center: [f64; 2],
    pub label: String,
    pub confidence: f64,
}

impl Detection {
    /// Checks the box lies in a `width × height` frame and contains the center.
    pub fn validate(&self, width: u32, height: u32) -> Result<()> {
        let [x, y, w, h] = self.bbox;
        let [cx, cy] = self.center;
        let finite = self.bbox.iter().chain(&self.center).all(|v| v.is_finite());
        let inside =
            finite && w >= 0.0 && h >= 0.0 && x >= 0.0 && y >= 0.0 && x + w <= width as f64 && y + h <= height as f64;
        if !inside {
            return Err(Error::Shape(alloc::format!(
                "bounding box {:?} is not inside a {width}x{height} frame",
                self.bbox
            )));
        }
        if !(x <= cx && cx <= x + w && y <= cy && cy <= y + h) {
            return Err(Error::Shape(alloc::format!(
                "center {:?} lies outside its box {:?}",
                self.center,
                self.bbox
            )));
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(Error::Config(alloc::format!(
                "confidence {} outside [0, 1]",
                self.confidence
            )));
        }
        Ok(())
    }

    pub fn azimuth_deg(&self, width: u32) -> f64 {
        wrap_deg(column_azimuth_deg(self.center[0], width))
    }

    /// Centers in the outer half-pixel rows map to the poles.
    pub fn elevation_deg(&self, height: u32) -> f64 {
        row_elevation_deg(self.center[1], height).clamp(-90.0, 90.0)
    }

    pub fn direction(&self, width: u32, height: u32) -> Result<Direction> {
        Direction::from_degrees(self.azimuth_deg(width), self.elevation_deg(height))
    }
}

/// How the field of view of a crop is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FovMode {
    Fixed(f64),
    /// `scale × angular size of the box`, clamped; random crops use `fallback_deg`.
    FromBbox {
        scale: f64,
        min_deg: f64,
        max_deg: f64,
        fallback_deg: f64,
    },
}

impl Default for FovMode {
    fn default() -> Self {
        Self::Fixed(DEFAULT_FOV_DEG)
    }
}

impl FovMode {
    fn for_detection(&self, det: &Detection, width: u32, height: u32) -> f64 {
        match *self {
            Self::Fixed(fov) => fov,
            Self::FromBbox {
                scale,
                min_deg,
                max_deg,
                ..
            } => {
                let span_w = det.bbox[2] / width as f64 * 360.0;
                let span_h = det.bbox[3] / height as f64 * 180.0;
                (scale * span_w.max(span_h)).clamp(min_deg, max_deg)
            }
        }
    }

    fn for_fallback(&self) -> f64 {
        match *self {
            Self::Fixed(fov) => fov,
            Self::FromBbox { fallback_deg, .. } => fallback_deg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropSettings {
    pub fov: FovMode,
    pub out_size: u32,
}

impl Default for CropSettings {
    fn default() -> Self {
        Self {
            fov: FovMode::default(),
            out_size: DEFAULT_CROP_SIZE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Quadrant {
    LeftBack,
    LeftFront,
    RightFront,
    RightBack,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [
        Quadrant::LeftBack,
        Quadrant::LeftFront,
        Quadrant::RightFront,
        Quadrant::RightBack,
    ];

    /// `(lower, upper]` azimuth bounds in degrees.
    pub fn bounds_deg(&self) -> (f64, f64) {
        match self {
            Self::LeftBack => (90.0, 180.0),
            Self::LeftFront => (0.0, 90.0),
            Self::RightFront => (-90.0, 0.0),
            Self::RightBack => (-180.0, -90.0),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::LeftBack => "left-back",
            Self::LeftFront => "left-front",
            Self::RightFront => "right-front",
            Self::RightBack => "right-back",
        }
    }
}

/// Quadrant of an azimuth in degrees. Values are first wrapped into
/// `(-180, 180]`.
pub fn quadrant_of(azimuth_deg: f64) -> Quadrant {
    let a = wrap_deg(azimuth_deg);
    if a > 90.0 {
        Quadrant::LeftBack
    } else if a > 0.0 {
        Quadrant::LeftFront
    } else if a > -90.0 {
        Quadrant::RightFront
    } else {
        Quadrant::RightBack
    }
}

/// Wraps degrees into `(-180, 180]` without a radian round trip, so exact
/// boundary values stay exact.
pub fn wrap_deg(a: f64) -> f64 {
    if a > -180.0 && a <= 180.0 {
        return a;
    }
    let r = crate::math::rem_euclid(a + 180.0, 360.0) - 180.0;
    if r <= -180.0 {
        180.0
    } else {
        r
    }
}

fn azimuth_gap_deg(a: f64, b: f64) -> f64 {
    let d = fabs(a - b) % 360.0;
    d.min(360.0 - d)
}

/// Uniform in `(lo, hi]`.
fn uniform_half_open(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.random();
    hi - u * (hi - lo)
}

fn random_elevation(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random();
    -FALLBACK_MAX_ELEVATION_DEG + u * 2.0 * FALLBACK_MAX_ELEVATION_DEG
}

fn fallback_crop(azimuth_deg: f64, elevation_deg: f64, settings: &CropSettings) -> Result<Crop> {
    Crop::from_degrees(
        azimuth_deg,
        elevation_deg,
        settings.fov.for_fallback(),
        settings.out_size,
        CropProvenance::RandomFallback,
    )
}

fn detection_crop(index: usize, det: &Detection, width: u32, height: u32, settings: &CropSettings) -> Result<Crop> {
    Crop::from_degrees(
        det.azimuth_deg(width),
        det.elevation_deg(height),
        settings.fov.for_detection(det, width, height),
        settings.out_size,
        CropProvenance::Detected(index),
    )
}

fn validate_all(detections: &[Detection], width: u32, height: u32) -> Result<()> {
    if height == 0 || width != 2 * height {
        return Err(Error::Shape(alloc::format!(
            "equirectangular frame must be 2:1, got {width}x{height}"
        )));
    }
    detections.iter().try_for_each(|d| d.validate(width, height))
}

/// One crop for AVC: a uniformly chosen detection, or a random direction
/// when the list is empty.
pub fn select_crop_avc(
    detections: &[Detection],
    width: u32,
    height: u32,
    settings: &CropSettings,
    seed: u64,
) -> Result<Crop> {
    validate_all(detections, width, height)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if detections.is_empty() {
        let az = uniform_half_open(&mut rng, -180.0, 180.0);
        let el = random_elevation(&mut rng);
        return fallback_crop(az, el, settings);
    }
    let i = rng.random_range(0..detections.len());
    detection_crop(i, &detections[i], width, height, settings)
}

/// Four crops for AVSA, one per quadrant in [`Quadrant::ALL`] order.
pub fn select_crops_avsa(
    detections: &[Detection],
    width: u32,
    height: u32,
    settings: &CropSettings,
    seed: u64,
) -> Result<[Crop; 4]> {
    validate_all(detections, width, height)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let azimuths: Vec<f64> = detections.iter().map(|d| d.azimuth_deg(width)).collect();
    let mut chosen_az: Vec<f64> = Vec::with_capacity(4);
    let mut crops: Vec<Crop> = Vec::with_capacity(4);
    let separated = |az: f64, chosen: &[f64]| chosen.iter().all(|c| azimuth_gap_deg(az, *c) >= MIN_SEPARATION_DEG);

    for q in Quadrant::ALL {
        let candidates: Vec<usize> = (0..detections.len())
            .filter(|&i| quadrant_of(azimuths[i]) == q && separated(azimuths[i], &chosen_az))
            .collect();
        let crop = if candidates.is_empty() {
            let (lo, hi) = q.bounds_deg();
            // A 90° quadrant loses at most 2° to its neighbours' exclusion zones.
            let mut az = uniform_half_open(&mut rng, lo, hi);
            while !separated(az, &chosen_az) {
                az = uniform_half_open(&mut rng, lo, hi);
            }
            let el = random_elevation(&mut rng);
            chosen_az.push(az);
            fallback_crop(az, el, settings)?
        } else {
            let i = candidates[rng.random_range(0..candidates.len())];
            chosen_az.push(azimuths[i]);
            detection_crop(i, &detections[i], width, height, settings)?
        };
        crops.push(crop);
    }
    Ok([crops[0], crops[1], crops[2], crops[3]])
}

#[cfg(test)]
mod tests {
    use super::*;

    const W: u32 = 1024;
    const H: u32 = 512;

    fn det_at(az_deg: f64, el_deg: f64) -> Detection {
        let cx = (180.0 - az_deg) / 360.0 * W as f64 - 0.5;
        let cy = (90.0 - el_deg) / 180.0 * H as f64 - 0.5;
        Detection {
            bbox: [cx - 5.0, cy - 5.0, 10.0, 10.0],
            center: [cx, cy],
            label: "person".into(),
            confidence: 0.9,
        }
    }

    #[test]
    fn edge_rows_map_to_poles() {
        let det = |cy: f64| Detection {
            bbox: [0.0, 0.0, W as f64, H as f64],
            center: [10.0, cy],
            label: "sky".into(),
            confidence: 0.5,
        };
        assert_eq!(det(0.0).elevation_deg(H), 90.0 - 180.0 * 0.5 / H as f64);
        assert_eq!(det(H as f64).elevation_deg(H), -90.0);
        let crops = select_crops_avsa(&[det(H as f64 - 0.1)], W, H, &CropSettings::default(), 3).unwrap();
        assert!(crops.iter().all(|c| c.elevation_deg().abs() <= 90.0));
    }

    #[test]
    fn quadrant_boundaries() {
        assert_eq!(quadrant_of(180.0), Quadrant::LeftBack);
        assert_eq!(quadrant_of(90.0), Quadrant::LeftFront);
        assert_eq!(quadrant_of(90.000001), Quadrant::LeftBack);
        assert_eq!(quadrant_of(0.0), Quadrant::RightFront);
        assert_eq!(quadrant_of(-90.0), Quadrant::RightBack);
        assert_eq!(quadrant_of(-180.0), Quadrant::LeftBack);
    }

    #[test]
    fn single_detection_is_chosen_for_avc() {
        let d = det_at(30.0, 10.0);
        let crop = select_crop_avc(std::slice::from_ref(&d), W, H, &CropSettings::default(), 5).unwrap();
        assert_eq!(crop.provenance(), CropProvenance::Detected(0));
        assert!(crop.center().angle_to(&Direction::from_degrees(30.0, 10.0).unwrap()) < 1e-9);
    }

    #[test]
    fn empty_avc_fallback_is_seeded() {
        let a = select_crop_avc(&[], W, H, &CropSettings::default(), 42).unwrap();
        let b = select_crop_avc(&[], W, H, &CropSettings::default(), 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.provenance(), CropProvenance::RandomFallback);
        assert!(a.center().elevation_deg().abs() <= 45.0);
        let c = select_crop_avc(&[], W, H, &CropSettings::default(), 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn avc_choice_is_uniform() {
        let dets: Vec<Detection> = [-150.0, -30.0, 45.0, 120.0].iter().map(|a| det_at(*a, 0.0)).collect();
        let mut counts = [0usize; 4];
        for seed in 0..1000 {
            match select_crop_avc(&dets, W, H, &CropSettings::default(), seed)
                .unwrap()
                .provenance()
            {
                CropProvenance::Detected(i) => counts[i] += 1,
                CropProvenance::RandomFallback => panic!("unexpected fallback"),
            }
        }
        for c in counts {
            assert!((200..=300).contains(&c), "{counts:?}");
        }
    }

    #[test]
    fn one_detection_per_quadrant_in_order() {
        let dets = [
            det_at(-100.0, 0.0),
            det_at(10.0, 5.0),
            det_at(135.0, -5.0),
            det_at(-45.0, 20.0),
        ];
        let crops = select_crops_avsa(&dets, W, H, &CropSettings::default(), 1).unwrap();
        let idx: Vec<_> = crops.iter().map(|c| c.provenance()).collect();
        assert_eq!(
            idx,
            [
                CropProvenance::Detected(2),
                CropProvenance::Detected(1),
                CropProvenance::Detected(3),
                CropProvenance::Detected(0)
            ]
        );
    }

    #[test]
    fn single_quadrant_detections_get_three_fallbacks() {
        let dets = [det_at(20.0, 0.0), det_at(50.0, 0.0), det_at(80.0, 3.0)];
        let crops = select_crops_avsa(&dets, W, H, &CropSettings::default(), 9).unwrap();
        let fallbacks = crops
            .iter()
            .filter(|c| c.provenance() == CropProvenance::RandomFallback)
            .count();
        assert_eq!(fallbacks, 3);
        assert!(matches!(crops[1].provenance(), CropProvenance::Detected(_)));
        for (crop, q) in crops.iter().zip(Quadrant::ALL) {
            assert_eq!(quadrant_of(crop.azimuth_deg()), q);
        }
    }

    #[test]
    fn detection_at_exactly_ninety_degrees_is_left_front() {
        // column 255.5 of a 1024-wide frame is exactly 90°
        let d = Detection {
            bbox: [250.0, 250.0, 11.0, 11.0],
            center: [255.5, 255.5],
            label: "car".into(),
            confidence: 0.5,
        };
        assert_eq!(d.azimuth_deg(W), 90.0);
        let crops = select_crops_avsa(&[d], W, H, &CropSettings::default(), 3).unwrap();
        assert_eq!(crops[1].provenance(), CropProvenance::Detected(0));
    }

    #[test]
    fn too_close_detection_does_not_qualify() {
        // 90.2° (left-back) is taken first; 89.8° (left-front) is within 1°
        let dets = [det_at(90.2, 0.0), det_at(89.8, 0.0)];
        let crops = select_crops_avsa(&dets, W, H, &CropSettings::default(), 0).unwrap();
        assert_eq!(crops[0].provenance(), CropProvenance::Detected(0));
        assert_eq!(crops[1].provenance(), CropProvenance::RandomFallback);
    }

    #[test]
    fn invalid_detections_rejected() {
        let mut d = det_at(0.0, 0.0);
        d.center = [0.0, 0.0];
        assert!(select_crop_avc(&[d], W, H, &CropSettings::default(), 0).is_err());
        let mut d = det_at(0.0, 0.0);
        d.bbox[2] = 5000.0;
        assert!(select_crops_avsa(&[d], W, H, &CropSettings::default(), 0).is_err());
    }

    #[test]
    fn fov_from_bbox() {
        let mut d = det_at(0.0, 0.0);
        d.bbox = [400.0, 200.0, 100.0, 40.0];
        d.center = [450.0, 220.0];
        let settings = CropSettings {
            fov: FovMode::FromBbox {
                scale: 1.5,
                min_deg: 30.0,
                max_deg: 120.0,
                fallback_deg: 90.0,
            },
            out_size: 64,
        };
        let crop = select_crop_avc(&[d], W, H, &settings, 0).unwrap();
        let expected = 1.5 * 100.0 / 1024.0 * 360.0;
        assert!((crop.fov_deg() - expected).abs() < 1e-12);
        assert_eq!(select_crop_avc(&[], W, H, &settings, 0).unwrap().fov_deg(), 90.0);
    }
}
