//! Equirectangular pixel ↔ direction mapping and gnomonic (rectilinear)
//! crops.
//!
//! Pixel `(x, y)` addresses the pixel center at integer coordinates. The
//! left edge of the panorama is azimuth +180°, the center column is the
//! front, and the image top is the zenith:
//!
//! ```text
//! azimuth   = 180° − 360°·(x + 0.5)/W
//! elevation =  90° − 180°·(y + 0.5)/H
//! ```

use alloc::vec::Vec;

use crate::ambisonics::{rotation_matrix, Direction, RotationAngles};
use crate::error::{Error, Result};
use crate::math::{floor, rem_euclid, tan};

pub const DEFAULT_FOV_DEG: f64 = 90.0;
pub const DEFAULT_CROP_SIZE: u32 = 112;

fn in_frame(x: f64, y: f64, width: u32, height: u32) -> bool {
    (-0.5..=width as f64 - 0.5).contains(&x) && (-0.5..=height as f64 - 0.5).contains(&y)
}

/// Azimuth in degrees of a (possibly fractional) pixel column.
pub fn column_azimuth_deg(x: f64, width: u32) -> f64 {
    180.0 - 360.0 * (x + 0.5) / width as f64
}

/// Elevation in degrees of a (possibly fractional) pixel row.
pub fn row_elevation_deg(y: f64, height: u32) -> f64 {
    90.0 - 180.0 * (y + 0.5) / height as f64
}

/// Direction seen at pixel `(x, y)`. Accepts the whole frame area including
/// the outer half-pixel margins.
pub fn pixel_to_direction(x: f64, y: f64, width: u32, height: u32) -> Result<Direction> {
    if width == 0 || height == 0 || !x.is_finite() || !y.is_finite() || !in_frame(x, y, width, height) {
        return Err(Error::OutOfBounds { x, y, width, height });
    }
    Direction::from_degrees(column_azimuth_deg(x, width), row_elevation_deg(y, height))
}

/// Inverse of [`pixel_to_direction`]; `x` lands in `[-0.5, W − 0.5)`.
pub fn direction_to_pixel(d: Direction, width: u32, height: u32) -> (f64, f64) {
    let x = (180.0 - d.azimuth_deg()) / 360.0 * width as f64 - 0.5;
    let y = (90.0 - d.elevation_deg()) / 180.0 * height as f64 - 0.5;
    (x, y)
}

/// 8-bit RGB image, row-major, 3 bytes per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if data.len() != width as usize * height as usize * 3 {
            return Err(Error::Shape(alloc::format!(
                "{} bytes for a {width}x{height} RGB image",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let data = rgb
            .iter()
            .copied()
            .cycle()
            .take(width as usize * height as usize * 3)
            .collect();
        Self { width, height, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }
}

/// Full 360° × 180° panorama; width must be twice the height.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquirectFrame {
    image: RgbImage,
}

impl EquirectFrame {
    pub fn new(image: RgbImage) -> Result<Self> {
        if image.height == 0 || image.width != 2 * image.height {
            return Err(Error::Shape(alloc::format!(
                "equirectangular frame must be 2:1, got {}x{}",
                image.width,
                image.height
            )));
        }
        Ok(Self { image })
    }

    pub fn width(&self) -> u32 {
        self.image.width
    }

    pub fn height(&self) -> u32 {
        self.image.height
    }

    pub fn image(&self) -> &RgbImage {
        &self.image
    }

    /// Bilinear sample at fractional pixel coordinates; columns wrap around
    /// the ±180° seam, rows clamp at the poles.
    pub fn sample(&self, x: f64, y: f64) -> [f64; 3] {
        let (w, h) = (self.width() as i64, self.height() as i64);
        let x0 = floor(x);
        let y0 = floor(y);
        let (fx, fy) = (x - x0, y - y0);
        let col = |c: i64| rem_euclid(c as f64, w as f64) as u32;
        let row = |r: i64| r.clamp(0, h - 1) as u32;
        let (cx0, cx1) = (col(x0 as i64), col(x0 as i64 + 1));
        let (ry0, ry1) = (row(y0 as i64), row(y0 as i64 + 1));
        let p00 = self.image.pixel(cx0, ry0);
        let p10 = self.image.pixel(cx1, ry0);
        let p01 = self.image.pixel(cx0, ry1);
        let p11 = self.image.pixel(cx1, ry1);
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            let top = p00[i] as f64 * (1.0 - fx) + p10[i] as f64 * fx;
            let bottom = p01[i] as f64 * (1.0 - fx) + p11[i] as f64 * fx;
            *o = top * (1.0 - fy) + bottom * fy;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CropProvenance {
    /// Centered on the detection with this index.
    Detected(usize),
    RandomFallback,
}

/// A square rectilinear view into the panorama.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crop {
    center: Direction,
    // exact values the crop was built from; `center` is derived from them
    azimuth_deg: f64,
    elevation_deg: f64,
    fov_deg: f64,
    out_size: u32,
    provenance: CropProvenance,
}

impl Crop {
    pub fn new(center: Direction, fov_deg: f64, out_size: u32, provenance: CropProvenance) -> Result<Self> {
        Self::build(
            center,
            center.azimuth_deg(),
            center.elevation_deg(),
            fov_deg,
            out_size,
            provenance,
        )
    }

    /// Like [`Crop::new`] but keeps the given degree values bit-exact for
    /// [`Crop::azimuth_deg`] and [`Crop::elevation_deg`].
    pub fn from_degrees(
        azimuth_deg: f64,
        elevation_deg: f64,
        fov_deg: f64,
        out_size: u32,
        provenance: CropProvenance,
    ) -> Result<Self> {
        let center = Direction::from_degrees(azimuth_deg, elevation_deg)?;
        let azimuth_deg = crate::selection::wrap_deg(azimuth_deg);
        Self::build(center, azimuth_deg, elevation_deg, fov_deg, out_size, provenance)
    }

    fn build(
        center: Direction,
        azimuth_deg: f64,
        elevation_deg: f64,
        fov_deg: f64,
        out_size: u32,
        provenance: CropProvenance,
    ) -> Result<Self> {
        if !(fov_deg > 0.0 && fov_deg < 180.0) {
            return Err(Error::Config(alloc::format!(
                "field of view must lie in (0, 180), got {fov_deg}"
            )));
        }
        if out_size == 0 {
            return Err(Error::Config("crop size must be positive".into()));
        }
        Ok(Self {
            center,
            azimuth_deg,
            elevation_deg,
            fov_deg,
            out_size,
            provenance,
        })
    }

    pub fn center(&self) -> Direction {
        self.center
    }

    pub fn azimuth_deg(&self) -> f64 {
        self.azimuth_deg
    }

    pub fn elevation_deg(&self) -> f64 {
        self.elevation_deg
    }

    pub fn fov_deg(&self) -> f64 {
        self.fov_deg
    }

    pub fn out_size(&self) -> u32 {
        self.out_size
    }

    pub fn provenance(&self) -> CropProvenance {
        self.provenance
    }

    /// Focal length in output pixels.
    pub fn focal_length(&self) -> f64 {
        self.out_size as f64 / 2.0 / tan(self.fov_deg.to_radians() / 2.0)
    }

    /// Viewing direction through fractional output pixel `(u, v)`. The
    /// optical axis passes through `((S − 1)/2, (S − 1)/2)`.
    pub fn ray_direction(&self, u: f64, v: f64) -> Direction {
        let half = self.out_size as f64 / 2.0;
        let f = self.focal_length();
        let right = (u + 0.5 - half) / f;
        let down = (v + 0.5 - half) / f;
        // camera frame in (front, left, up)
        let local = [1.0, -right, -down];
        let angles =
            RotationAngles::new(self.center.azimuth(), -self.center.elevation(), 0.0).expect("finite crop angles");
        let world = rotation_matrix(angles).apply_cartesian(local);
        Direction::from_cartesian(world).expect("nonzero camera ray")
    }
}

/// Gnomonic projection of the panorama around `crop.center()`.
pub fn gnomonic_crop(frame: &EquirectFrame, crop: &Crop) -> RgbImage {
    let s = crop.out_size;
    let mut data = Vec::with_capacity(s as usize * s as usize * 3);
    for v in 0..s {
        for u in 0..s {
            let d = crop.ray_direction(u as f64, v as f64);
            let (x, y) = direction_to_pixel(d, frame.width(), frame.height());
            for c in frame.sample(x, y) {
                data.push(floor(c + 0.5).clamp(0.0, 255.0) as u8);
            }
        }
    }
    RgbImage {
        width: s,
        height: s,
        data,
    }
}
