//! First-order Ambisonics: plane-wave encoding, rotation, beamforming and
//! stereo extraction.
//!
//! A plane wave from azimuth θ and elevation φ is encoded with the gains
//!
//! ```text
//! u(θ, φ) = [1, sinθ·cosφ, sinφ, cosθ·cosφ]      (W, Y, Z, X)
//! ```
//!
//! so the three dipole gains form the unit direction-of-arrival vector and
//! `uᵀu = 2` for every direction.
//!
//! # Rotation convention
//!
//! [`rotation_matrix`] builds the active rotation `R = Rz(yaw)·Ry(pitch)·Rx(roll)`
//! acting on Cartesian `(x, y, z)` = (front, left, up):
//!
//! ```text
//! Rz(a) = | ca -sa  0 |   Ry(b) = |  cb  0  sb |   Rx(g) = | 1  0   0  |
//!         | sa  ca  0 |           |  0   1  0  |           | 0  cg -sg  |
//!         | 0   0   1 |           | -sb  0  cb |           | 0  sg  cg  |
//! ```
//!
//! Positive yaw turns a source to the left, positive pitch tilts the front
//! downwards and positive roll lifts the left side. The 3 × 3 block of the
//! FOA matrix is `R` re-indexed into the (Y, Z, X) channel basis; W is left
//! untouched.
//!
//! `rotation_matrix(θ₀, −φ₀, 0)` is therefore the orientation of a camera
//! looking at (θ₀, φ₀): it carries the front direction onto the crop center.
//! Aligning a recording with a crop applies its inverse, which carries the
//! crop center onto the front.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{asin, atan2, cos, rem_euclid, sin, sqrt, FRAC_PI_2, PI, TAU};

/// Azimuth/elevation pair in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    azimuth: f64,
    elevation: f64,
}

/// Wraps an azimuth into `(-π, π]`.
pub fn normalize_azimuth(azimuth: f64) -> f64 {
    let wrapped = rem_euclid(azimuth + PI, TAU) - PI;
    if wrapped <= -PI {
        PI
    } else {
        wrapped
    }
}

impl Direction {
    pub const FRONT: Direction = Direction {
        azimuth: 0.0,
        elevation: 0.0,
    };

    /// Builds a direction, wrapping the azimuth into `(-π, π]`.
    /// Elevations beyond ±π/2 are rejected rather than folded.
    pub fn new(azimuth: f64, elevation: f64) -> Result<Self> {
        if !azimuth.is_finite() || !elevation.is_finite() {
            return Err(Error::NonFinite("direction"));
        }
        if elevation.abs() > FRAC_PI_2 {
            return Err(Error::ElevationOutOfRange(elevation));
        }
        Ok(Self {
            azimuth: normalize_azimuth(azimuth),
            elevation,
        })
    }

    pub fn from_degrees(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        Self::new(azimuth_deg.to_radians(), elevation_deg.to_radians())
    }

    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }

    pub fn elevation(&self) -> f64 {
        self.elevation
    }

    pub fn azimuth_deg(&self) -> f64 {
        self.azimuth.to_degrees()
    }

    pub fn elevation_deg(&self) -> f64 {
        self.elevation.to_degrees()
    }

    /// Unit vector `[x, y, z]` (front, left, up).
    pub fn to_cartesian(&self) -> [f64; 3] {
        let ce = cos(self.elevation);
        [cos(self.azimuth) * ce, sin(self.azimuth) * ce, sin(self.elevation)]
    }

    /// Direction of a nonzero Cartesian vector. The vector need not be unit
    /// length. At the poles the azimuth is whatever `atan2(0, 0)` gives (0).
    pub fn from_cartesian(v: [f64; 3]) -> Result<Self> {
        let r = sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        if !r.is_finite() || r == 0.0 {
            return Err(Error::NonFinite("cartesian direction"));
        }
        let el = asin((v[2] / r).clamp(-1.0, 1.0));
        Self::new(atan2(v[1], v[0]), el)
    }

    /// Great-circle angle to another direction, in radians.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        let a = self.to_cartesian();
        let b = other.to_cartesian();
        let cross = [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ];
        let s = sqrt(cross.iter().map(|c| c * c).sum());
        let c: f64 = a.iter().zip(&b).map(|(p, q)| p * q).sum();
        atan2(s, c)
    }
}

/// FOA encoding gains in ACN order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoaGainVector {
    pub w: f64,
    pub y: f64,
    pub z: f64,
    pub x: f64,
}

impl FoaGainVector {
    pub fn to_array(&self) -> [f64; 4] {
        [self.w, self.y, self.z, self.x]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            w: a[0],
            y: a[1],
            z: a[2],
            x: a[3],
        }
    }

    pub fn dot(&self, other: &FoaGainVector) -> f64 {
        self.w * other.w + self.y * other.y + self.z * other.z + self.x * other.x
    }

    /// The dipole part as a Cartesian `[x, y, z]` vector.
    pub fn dipole(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// Plane-wave response `u(θ, φ)`.
pub fn encode_direction(d: Direction) -> FoaGainVector {
    let [x, y, z] = d.to_cartesian();
    FoaGainVector { w: 1.0, y, z, x }
}

/// Four-channel ACN/SN3D time-domain signal.
#[derive(Debug, Clone, PartialEq)]
pub struct FoaSignal {
    sample_rate: u32,
    channels: [Vec<f64>; 4],
}

impl FoaSignal {
    /// `channels` must be in (W, Y, Z, X) order and of equal length.
    pub fn new(sample_rate: u32, channels: [Vec<f64>; 4]) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::SampleRate(sample_rate));
        }
        let n = channels[0].len();
        if channels.iter().any(|c| c.len() != n) {
            return Err(Error::RaggedChannels);
        }
        Ok(Self { sample_rate, channels })
    }

    /// Builds a signal from any number of channels, which must be exactly four.
    pub fn from_channels(sample_rate: u32, channels: Vec<Vec<f64>>) -> Result<Self> {
        let actual = channels.len();
        let arr: [Vec<f64>; 4] = channels
            .try_into()
            .map_err(|_| Error::ChannelCount { expected: 4, actual })?;
        Self::new(sample_rate, arr)
    }

    pub fn silence(sample_rate: u32, len: usize) -> Result<Self> {
        Self::new(
            sample_rate,
            [
                alloc::vec![0.0; len],
                alloc::vec![0.0; len],
                alloc::vec![0.0; len],
                alloc::vec![0.0; len],
            ],
        )
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channels(&self) -> &[Vec<f64>; 4] {
        &self.channels
    }

    pub fn into_channels(self) -> [Vec<f64>; 4] {
        self.channels
    }

    pub fn w(&self) -> &[f64] {
        &self.channels[0]
    }

    pub fn y(&self) -> &[f64] {
        &self.channels[1]
    }

    pub fn z(&self) -> &[f64] {
        &self.channels[2]
    }

    pub fn x(&self) -> &[f64] {
        &self.channels[3]
    }

    /// The four gains applied to sample `n`.
    pub fn frame(&self, n: usize) -> [f64; 4] {
        [
            self.channels[0][n],
            self.channels[1][n],
            self.channels[2][n],
            self.channels[3][n],
        ]
    }

    /// Sum of squares over all four channels.
    pub fn energy(&self) -> f64 {
        self.channels.iter().flat_map(|c| c.iter()).map(|v| v * v).sum()
    }

    /// Multiplies channel `c` by `gains[c]`.
    pub fn scaled(&self, gains: [f64; 4]) -> Self {
        let mut out = self.clone();
        for (ch, g) in out.channels.iter_mut().zip(gains) {
            ch.iter_mut().for_each(|v| *v *= g);
        }
        out
    }

    /// Sample-wise sum of two signals with identical rate and length.
    pub fn add(&self, other: &FoaSignal) -> Result<Self> {
        if self.sample_rate != other.sample_rate || self.len() != other.len() {
            return Err(Error::Shape(alloc::format!(
                "cannot add {}-sample/{} Hz and {}-sample/{} Hz signals",
                self.len(),
                self.sample_rate,
                other.len(),
                other.sample_rate
            )));
        }
        let mut out = self.clone();
        for (a, b) in out.channels.iter_mut().zip(&other.channels) {
            a.iter_mut().zip(b).for_each(|(p, q)| *p += q);
        }
        Ok(out)
    }
}

/// Plane-wave encoding of a mono signal, `x(n) = u(θ, φ)·s(n)`.
pub fn encode_source(signal: &[f64], sample_rate: u32, d: Direction) -> Result<FoaSignal> {
    if signal.is_empty() {
        return Err(Error::EmptySignal);
    }
    let g = encode_direction(d);
    let scale = |gain: f64| signal.iter().map(|s| gain * s).collect::<Vec<_>>();
    FoaSignal::new(sample_rate, [signal.to_vec(), scale(g.y), scale(g.z), scale(g.x)])
}

/// Yaw/pitch/roll in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationAngles {
    yaw: f64,
    pitch: f64,
    roll: f64,
}

impl RotationAngles {
    pub fn new(yaw: f64, pitch: f64, roll: f64) -> Result<Self> {
        if !(yaw.is_finite() && pitch.is_finite() && roll.is_finite()) {
            return Err(Error::NonFinite("rotation angles"));
        }
        Ok(Self { yaw, pitch, roll })
    }

    pub fn from_degrees(yaw: f64, pitch: f64, roll: f64) -> Result<Self> {
        Self::new(yaw.to_radians(), pitch.to_radians(), roll.to_radians())
    }

    pub fn yaw(&self) -> f64 {
        self.yaw
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn roll(&self) -> f64 {
        self.roll
    }
}

type Mat3 = [[f64; 3]; 3];

fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn mat3_transpose(a: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[j][i] = *v;
        }
    }
    out
}

// (Y, Z, X) channel slot -> Cartesian axis index.
const CHANNEL_AXIS: [usize; 3] = [1, 2, 0];

/// FOA rotation: identity on W, orthonormal 3 × 3 block on (Y, Z, X).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoaRotation {
    cartesian: Mat3,
}

impl FoaRotation {
    pub const IDENTITY: FoaRotation = FoaRotation {
        cartesian: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// The rotation acting on Cartesian `[x, y, z]` vectors.
    pub fn cartesian(&self) -> Mat3 {
        self.cartesian
    }

    /// The lower-right block in the (Y, Z, X) channel basis.
    pub fn channel_block(&self) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.cartesian[CHANNEL_AXIS[i]][CHANNEL_AXIS[j]];
            }
        }
        out
    }

    /// Full 4 × 4 matrix in ACN order.
    pub fn matrix(&self) -> [[f64; 4]; 4] {
        let block = self.channel_block();
        let mut out = [[0.0; 4]; 4];
        out[0][0] = 1.0;
        for i in 0..3 {
            for j in 0..3 {
                out[i + 1][j + 1] = block[i][j];
            }
        }
        out
    }

    pub fn inverse(&self) -> Self {
        Self {
            cartesian: mat3_transpose(&self.cartesian),
        }
    }

    /// `self · other`: apply `other` first.
    pub fn compose(&self, other: &FoaRotation) -> Self {
        Self {
            cartesian: mat3_mul(&self.cartesian, &other.cartesian),
        }
    }

    pub fn apply_cartesian(&self, v: [f64; 3]) -> [f64; 3] {
        let r = &self.cartesian;
        [
            r[0][0] * v[0] + r[0][1] * v[1] + r[0][2] * v[2],
            r[1][0] * v[0] + r[1][1] * v[1] + r[1][2] * v[2],
            r[2][0] * v[0] + r[2][1] * v[1] + r[2][2] * v[2],
        ]
    }

    pub fn apply_gains(&self, g: &FoaGainVector) -> FoaGainVector {
        let [x, y, z] = self.apply_cartesian(g.dipole());
        FoaGainVector { w: g.w, y, z, x }
    }

    pub fn apply_direction(&self, d: Direction) -> Direction {
        // A rotated unit vector is never zero.
        Direction::from_cartesian(self.apply_cartesian(d.to_cartesian())).unwrap_or(Direction::FRONT)
    }
}

/// `Rz(yaw)·Ry(pitch)·Rx(roll)` as an FOA rotation.
pub fn rotation_matrix(a: RotationAngles) -> FoaRotation {
    let (sa, ca) = (sin(a.yaw), cos(a.yaw));
    let (sb, cb) = (sin(a.pitch), cos(a.pitch));
    let (sg, cg) = (sin(a.roll), cos(a.roll));
    let rz = [[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]];
    let ry = [[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]];
    let rx = [[1.0, 0.0, 0.0], [0.0, cg, -sg], [0.0, sg, cg]];
    FoaRotation {
        cartesian: mat3_mul(&mat3_mul(&rz, &ry), &rx),
    }
}

/// Applies `q` to every sample. W is copied, never recomputed.
pub fn rotate(x: &FoaSignal, q: &FoaRotation) -> FoaSignal {
    let b = q.channel_block();
    let n = x.len();
    let [w, y, z, xx] = x.channels();
    let mut out: [Vec<f64>; 3] = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    for i in 0..n {
        let v = [y[i], z[i], xx[i]];
        for (row, dst) in b.iter().zip(out.iter_mut()) {
            dst.push(row[0] * v[0] + row[1] * v[1] + row[2] * v[2]);
        }
    }
    let [oy, oz, ox] = out;
    FoaSignal {
        sample_rate: x.sample_rate,
        channels: [w.clone(), oy, oz, ox],
    }
}

/// The rotation that brings the crop center to the front: the inverse of the
/// crop orientation `rotation_matrix(θ₀, −φ₀, 0)`.
pub fn alignment_rotation(crop: Direction) -> FoaRotation {
    // Angles from a valid Direction are always finite.
    let orientation = RotationAngles {
        yaw: crop.azimuth(),
        pitch: -crop.elevation(),
        roll: 0.0,
    };
    rotation_matrix(orientation).inverse()
}

/// Rotates the sound field so that the crop center becomes the front.
pub fn align_to_crop(x: &FoaSignal, crop: Direction) -> FoaSignal {
    rotate(x, &alignment_rotation(crop))
}

/// `y(n) = uᵀ(d)·x(n)`.
pub fn beamform(x: &FoaSignal, d: Direction) -> Vec<f64> {
    let g = encode_direction(d);
    let [w, y, z, xx] = x.channels();
    (0..x.len())
        .map(|i| g.w * w[i] + g.y * y[i] + g.z * z[i] + g.x * xx[i])
        .collect()
}

/// Left/right pair produced by [`extract_stereo`].
#[derive(Debug, Clone, PartialEq)]
pub struct StereoSignal {
    pub sample_rate: u32,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl StereoSignal {
    pub fn new(sample_rate: u32, left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::SampleRate(sample_rate));
        }
        if left.len() != right.len() {
            return Err(Error::RaggedChannels);
        }
        Ok(Self {
            sample_rate,
            left,
            right,
        })
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }
}

/// Two first-order beams at ±90° around the crop center:
/// `[u(90°, 0), u(−90°, 0)]ᵀ · Q · x(n)` with `Q` the crop alignment.
pub fn extract_stereo(x: &FoaSignal, crop: Direction) -> StereoSignal {
    let aligned = align_to_crop(x, crop);
    let left_dir = Direction {
        azimuth: FRAC_PI_2,
        elevation: 0.0,
    };
    let right_dir = Direction {
        azimuth: -FRAC_PI_2,
        elevation: 0.0,
    };
    StereoSignal {
        sample_rate: x.sample_rate,
        left: beamform(&aligned, left_dir),
        right: beamform(&aligned, right_dir),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn gains_close(a: &FoaGainVector, b: &FoaGainVector, tol: f64) -> bool {
        a.to_array().iter().zip(b.to_array()).all(|(p, q)| close(*p, q, tol))
    }

    fn deg(az: f64, el: f64) -> Direction {
        Direction::from_degrees(az, el).unwrap()
    }

    #[test]
    fn azimuth_normalization() {
        assert_eq!(Direction::new(PI, 0.0).unwrap().azimuth(), PI);
        assert_eq!(Direction::new(-PI, 0.0).unwrap().azimuth(), PI);
        assert!(close(
            Direction::new(3.0 * PI / 2.0, 0.0).unwrap().azimuth(),
            -FRAC_PI_2,
            1e-12
        ));
        assert!(close(Direction::new(-5.0 * PI, 0.0).unwrap().azimuth(), PI, 1e-12));
    }

    #[test]
    fn elevation_out_of_range_rejected() {
        assert!(matches!(Direction::new(0.0, 1.6), Err(Error::ElevationOutOfRange(_))));
        assert!(Direction::new(0.0, FRAC_PI_2).is_ok());
        assert!(Direction::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn encode_direction_cardinal_points() {
        let front = encode_direction(deg(0.0, 0.0));
        assert_eq!(front.to_array(), [1.0, 0.0, 0.0, 1.0]);
        let left = encode_direction(deg(90.0, 0.0));
        assert!(gains_close(
            &left,
            &FoaGainVector::from_array([1.0, 1.0, 0.0, 0.0]),
            1e-15
        ));
        let up = encode_direction(deg(0.0, 90.0));
        assert!(gains_close(
            &up,
            &FoaGainVector::from_array([1.0, 0.0, 1.0, 0.0]),
            1e-15
        ));
    }

    #[test]
    fn encode_source_examples() {
        let x = encode_source(&[1.0, -1.0], 24000, Direction::FRONT).unwrap();
        assert_eq!(x.w(), &[1.0, -1.0]);
        assert_eq!(x.y(), &[0.0, 0.0]);
        assert_eq!(x.z(), &[0.0, 0.0]);
        assert_eq!(x.x(), &[1.0, -1.0]);

        let s = [0.3, -0.7, 0.25, 1.5];
        let left = Direction::new(FRAC_PI_2, 0.0).unwrap();
        let x = encode_source(&s, 24000, left).unwrap();
        assert_eq!(x.y(), &s);
        assert_eq!(encode_source(&[], 24000, left), Err(Error::EmptySignal));
    }

    #[test]
    fn rotation_identity_and_left_turn() {
        let q = rotation_matrix(RotationAngles::new(0.0, 0.0, 0.0).unwrap());
        assert_eq!(q, FoaRotation::IDENTITY);
        let q = rotation_matrix(RotationAngles::new(FRAC_PI_2, 0.0, 0.0).unwrap());
        let turned = q.apply_gains(&encode_direction(Direction::FRONT));
        assert!(gains_close(&turned, &encode_direction(deg(90.0, 0.0)), 1e-12));
    }

    #[test]
    fn foa_matrix_block_structure() {
        let q = rotation_matrix(RotationAngles::new(0.3, -0.8, 1.9).unwrap());
        let m = q.matrix();
        assert_eq!(m[0], [1.0, 0.0, 0.0, 0.0]);
        for row in &m[1..] {
            assert_eq!(row[0], 0.0);
        }
        let b = q.channel_block();
        // RᵀR = I and det = +1
        for i in 0..3 {
            for j in 0..3 {
                let dotp: f64 = (0..3).map(|k| b[k][i] * b[k][j]).sum();
                assert!(close(dotp, if i == j { 1.0 } else { 0.0 }, 1e-12));
            }
        }
        let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
            + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
        assert!(close(det, 1.0, 1e-12));
    }

    #[test]
    fn rotate_keeps_w_bitwise_and_identity_is_noop() {
        let s: Vec<f64> = (0..64).map(|i| sin(i as f64 * 0.37) * 0.9).collect();
        let x = encode_source(&s, 48000, deg(33.0, -12.0)).unwrap();
        assert_eq!(rotate(&x, &FoaRotation::IDENTITY), x);
        let q = rotation_matrix(RotationAngles::new(1.1, 0.4, -2.0).unwrap());
        assert_eq!(rotate(&x, &q).w(), x.w());
    }

    #[test]
    fn beamform_examples() {
        let s: Vec<f64> = (0..50).map(|i| cos(i as f64 * 0.21)).collect();
        let d = deg(-37.0, 21.0);
        let x = encode_source(&s, 24000, d).unwrap();
        for (b, v) in beamform(&x, d).iter().zip(&s) {
            assert!(close(*b, 2.0 * v, 1e-15 * v.abs().max(1.0) * 4.0));
        }
        let x = encode_source(&s, 24000, Direction::FRONT).unwrap();
        for (b, v) in beamform(&x, deg(90.0, 0.0)).iter().zip(&s) {
            assert!(close(*b, *v, 1e-15));
        }
        let silent = FoaSignal::silence(24000, 10).unwrap();
        assert!(beamform(&silent, d).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn align_to_crop_front_is_identity() {
        let s = [0.5, 1.0, -0.25];
        let x = encode_source(&s, 24000, deg(120.0, 10.0)).unwrap();
        let y = align_to_crop(&x, Direction::FRONT);
        assert_eq!(y, x);
    }

    #[test]
    fn align_to_crop_moves_center_to_front() {
        let s: Vec<f64> = (0..40).map(|i| sin(i as f64)).collect();
        for (az, el) in [(45.0, 20.0), (-150.0, -35.0), (179.0, 60.0), (10.0, -89.0)] {
            let crop = deg(az, el);
            let x = encode_source(&s, 24000, crop).unwrap();
            let aligned = align_to_crop(&x, crop);
            let expected = encode_source(&s, 24000, Direction::FRONT).unwrap();
            for c in 0..4 {
                for (a, b) in aligned.channels()[c].iter().zip(&expected.channels()[c]) {
                    assert!(close(*a, *b, 1e-9));
                }
            }
            for (b, v) in beamform(&aligned, Direction::FRONT).iter().zip(&s) {
                assert!(close(*b, 2.0 * v, 1e-9));
            }
        }
    }

    #[test]
    fn stereo_examples() {
        let s: Vec<f64> = (0..40).map(|i| cos(i as f64 * 0.5)).collect();
        let crop = deg(70.0, 0.0);
        let at_center = encode_source(&s, 24000, crop).unwrap();
        let st = extract_stereo(&at_center, crop);
        for ((l, r), v) in st.left.iter().zip(&st.right).zip(&s) {
            assert!(close(*l, *v, 1e-12) && close(*r, *v, 1e-12));
        }
        let left_of_crop = encode_source(&s, 24000, deg(160.0, 0.0)).unwrap();
        let st = extract_stereo(&left_of_crop, crop);
        for ((l, r), v) in st.left.iter().zip(&st.right).zip(&s) {
            assert!(close(*l, 2.0 * v, 1e-12) && close(*r, 0.0, 1e-12));
        }
        let hard_right = encode_source(&s, 24000, deg(-90.0, 0.0)).unwrap();
        let st = extract_stereo(&hard_right, Direction::FRONT);
        for ((l, r), v) in st.left.iter().zip(&st.right).zip(&s) {
            assert!(close(*l, 0.0, 1e-12) && close(*r, 2.0 * v, 1e-12));
        }
    }

    #[test]
    fn stereo_left_of_elevated_crop() {
        // "left of the crop" is the crop's own lateral axis
        let crop = deg(-30.0, 40.0);
        let orientation = rotation_matrix(RotationAngles::new(crop.azimuth(), -crop.elevation(), 0.0).unwrap());
        let src = orientation.apply_direction(deg(90.0, 0.0));
        let s = [1.0, -2.0, 0.5];
        let st = extract_stereo(&encode_source(&s, 24000, src).unwrap(), crop);
        for ((l, r), v) in st.left.iter().zip(&st.right).zip(&s) {
            assert!(close(*l, 2.0 * v, 1e-12) && close(*r, 0.0, 1e-12));
        }
    }

    fn arb_direction() -> impl Strategy<Value = Direction> {
        (-PI..PI, -FRAC_PI_2..FRAC_PI_2).prop_map(|(a, e)| Direction::new(a, e).unwrap())
    }

    fn arb_angles() -> impl Strategy<Value = RotationAngles> {
        (-PI..PI, -PI..PI, -PI..PI).prop_map(|(a, b, c)| RotationAngles::new(a, b, c).unwrap())
    }

    proptest! {
        #[test]
        fn encoded_dipoles_are_unit(d in arb_direction()) {
            let g = encode_direction(d);
            prop_assert_eq!(g.w, 1.0);
            prop_assert!(close(g.x * g.x + g.y * g.y + g.z * g.z, 1.0, 1e-14));
        }

        #[test]
        fn encode_rotate_commutation(d in arb_direction(), a in arb_angles()) {
            let q = rotation_matrix(a);
            let lhs = q.apply_gains(&encode_direction(d));
            let rhs = encode_direction(q.apply_direction(d));
            prop_assert!(gains_close(&lhs, &rhs, 1e-9));
        }

        #[test]
        fn rotation_inverse_is_identity(a in arb_angles()) {
            let q = rotation_matrix(a);
            let m = q.compose(&q.inverse()).matrix();
            for i in 0..4 {
                for j in 0..4 {
                    let id = if i == j { 1.0 } else { 0.0 };
                    prop_assert!(close(m[i][j], id, 1e-12));
                }
            }
        }

        #[test]
        fn cartesian_round_trip(d in arb_direction()) {
            let back = Direction::from_cartesian(d.to_cartesian()).unwrap();
            prop_assert!(d.angle_to(&back) < 1e-9);
        }

        #[test]
        fn yaw_rotation_shifts_azimuth(
            s in proptest::collection::vec(-1.0f64..1.0, 1..64),
            d in arb_direction(),
            yaw in -PI..PI,
        ) {
            let x = encode_source(&s, 24000, d).unwrap();
            let q = rotation_matrix(RotationAngles::new(yaw, 0.0, 0.0).unwrap());
            let shifted = Direction::new(d.azimuth() + yaw, d.elevation()).unwrap();
            let expected = encode_source(&s, 24000, shifted).unwrap();
            let rotated = rotate(&x, &q);
            for c in 0..4 {
                for (p, e) in rotated.channels()[c].iter().zip(&expected.channels()[c]) {
                    prop_assert!(close(*p, *e, 1e-9));
                }
            }
            let back = rotate(&rotated, &q.inverse());
            for c in 0..4 {
                for (p, e) in back.channels()[c].iter().zip(&x.channels()[c]) {
                    prop_assert!(close(*p, *e, 1e-9));
                }
            }
        }

        #[test]
        fn rotation_conserves_energy(
            chans in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 1..64),
            a in arb_angles(),
        ) {
            let mut c: [Vec<f64>; 4] = Default::default();
            for (w, y, z, x) in chans {
                c[0].push(w); c[1].push(y); c[2].push(z); c[3].push(x);
            }
            let x = FoaSignal::new(24000, c).unwrap();
            let e0 = x.energy();
            let e1 = rotate(&x, &rotation_matrix(a)).energy();
            prop_assert!((e0 - e1).abs() <= 1e-9 * e0.max(1e-300));
        }

        #[test]
        fn beamformer_is_linear(
            pairs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..32),
            d1 in arb_direction(), d2 in arb_direction(), look in arb_direction(),
        ) {
            let (s1, s2): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let x1 = encode_source(&s1, 24000, d1).unwrap();
            let x2 = encode_source(&s2, 24000, d2).unwrap();
            let sum = x1.add(&x2).unwrap();
            let b = beamform(&sum, look);
            let b1 = beamform(&x1, look);
            let b2 = beamform(&x2, look);
            for i in 0..b.len() {
                prop_assert!(close(b[i], b1[i] + b2[i], 1e-14));
            }
        }

        #[test]
        fn stereo_matches_align_then_front(
            s in proptest::collection::vec(-1.0f64..1.0, 1..32),
            d in arb_direction(), crop in arb_direction(),
        ) {
            let x = encode_source(&s, 24000, d).unwrap();
            let direct = extract_stereo(&x, crop);
            let staged = extract_stereo(&align_to_crop(&x, crop), Direction::FRONT);
            for i in 0..s.len() {
                prop_assert!(close(direct.left[i], staged.left[i], 1e-12));
                prop_assert!(close(direct.right[i], staged.right[i], 1e-12));
            }
        }

        #[test]
        fn single_plane_wave_energy_identity(
            s in proptest::collection::vec(-1.0f64..1.0, 1..256), d in arb_direction(),
        ) {
            let x = encode_source(&s, 24000, d).unwrap();
            let ew: f64 = x.w().iter().map(|v| v * v).sum();
            let exyz: f64 = x.y().iter().chain(x.z()).chain(x.x()).map(|v| v * v).sum();
            prop_assert!((ew - exyz).abs() <= 1e-13 * ew.max(1e-300));
        }

        #[test]
        fn direction_recovered_from_channel_ratios(
            s in proptest::collection::vec(0.01f64..1.0, 1..16), d in arb_direction(),
        ) {
            let x = encode_source(&s, 24000, d).unwrap();
            for n in 0..s.len() {
                let [w, y, z, xx] = x.frame(n);
                let back = Direction::from_cartesian([xx / w, y / w, z / w]).unwrap();
                prop_assert!(d.angle_to(&back) < 1e-9);
            }
        }
    }
}
