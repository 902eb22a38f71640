//! Signal-processing, geometry and contrastive-alignment math for learning
//! audio-visual spatial alignment from first-order Ambisonics (FOA) and
//! 360° equirectangular video.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs; randomness always comes from an explicit seed.
//! File formats, WAV/PNG IO and the command line live in the `avsa` crate.
//!
//! Conventions used throughout:
//!
//! * FOA channels are ACN ordered (W, Y, Z, X) with SN3D normalization.
//! * Azimuth is counterclockwise-positive from the front (left = +90°),
//!   elevation is positive upwards. Angles are radians unless a name says
//!   otherwise.
//! * Cartesian vectors are `[x, y, z]` = (front, left, up).

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod alignment;
pub mod ambisonics;
pub mod error;
pub mod features;
pub mod fft;
pub mod geometry;
pub mod math;
pub mod mel;
pub mod scene;
pub mod selection;
pub mod stft;
pub mod toy;
pub mod validity;

pub use alignment::{
    avc_targets, avsa_targets, backprop_to_embeddings, contrastive_loss, cosine_similarity_matrix, retrieval_accuracy,
    symmetric_contrastive_loss, EmbeddingBatch, EmbeddingGradients, EmbeddingRole, LossOutput, SimilarityMatrix,
    TargetMask,
};
pub use ambisonics::{
    align_to_crop, alignment_rotation, beamform, encode_direction, encode_source, extract_stereo, rotate,
    rotation_matrix, Direction, FoaGainVector, FoaRotation, FoaSignal, RotationAngles, StereoSignal,
};
pub use error::{Error, Result};
pub use features::{
    active_intensity, aggregate_intensity_mel, foa_features, icld, ipd, log_mel, mono_features, phase_difference,
    stereo_features, ChannelKind, FeatureTensor, IntensityField,
};
pub use geometry::{
    direction_to_pixel, gnomonic_crop, pixel_to_direction, Crop, CropProvenance, EquirectFrame, RgbImage,
};
pub use mel::MelFilterbank;
pub use num_complex::Complex64;
pub use scene::{fibonacci_sphere, synthesize_scene, SceneSource, SceneSpec};
pub use selection::{quadrant_of, select_crop_avc, select_crops_avsa, CropSettings, Detection, FovMode, Quadrant};
pub use stft::{stft, ComplexSpectrogram, StftConfig};
pub use toy::{toy_train, SyntheticPairs, ToyConfig, ToyHead, ToyHeads, ToyMode, TrainOutcome};
pub use validity::{validity_test, CorpusReport, FileOutcome, ValidityConfig, ValidityResult};

/// Version of the crate, reported by the command line.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
