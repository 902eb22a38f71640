#![allow(dead_code)]

use std::path::Path;

use avsa::wav::{write_wav, SampleFormat, WavAudio};
use avsa_core::scene::white_noise;
use avsa_core::{
    encode_source, rotate, rotation_matrix, synthesize_scene, Direction, FoaSignal, RotationAngles, SceneSpec,
};

pub const RATE: u32 = 24000;

/// Two sources plus a diffuse bed, one second long.
pub fn reference_scene() -> FoaSignal {
    let n = RATE as usize;
    let spec = SceneSpec::new(RATE, n)
        .with_source(Direction::from_degrees(45.0, 10.0).unwrap(), white_noise(n, 11))
        .with_source(Direction::from_degrees(-120.0, -20.0).unwrap(), white_noise(n, 12))
        .with_diffuse(0.2, 13);
    synthesize_scene(&spec).unwrap()
}

pub fn plane_wave(seed: u64, az: f64, el: f64, len: usize) -> FoaSignal {
    encode_source(&white_noise(len, seed), RATE, Direction::from_degrees(az, el).unwrap()).unwrap()
}

/// Expected outcome of each corpus file: `Some(true)` passes, `Some(false)`
/// fails, `None` cannot be read.
pub struct CorpusFile {
    pub path: &'static str,
    pub expect: Option<bool>,
}

/// Ten FOA files with known validity, and optionally one that is not a WAV.
pub fn write_corpus(root: &Path, with_broken: bool) -> Vec<CorpusFile> {
    let len = 12000;
    let write = |rel: &str, x: &FoaSignal| {
        let path = root.join(rel);
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        write_wav(&path, &WavAudio::from_foa(x), SampleFormat::Float32).unwrap();
    };
    let q = rotation_matrix(RotationAngles::from_degrees(75.0, -30.0, 10.0).unwrap());
    let diffuse = |seed| synthesize_scene(&SceneSpec::new(RATE, len).with_diffuse(0.5, seed)).unwrap();
    let files: Vec<(&'static str, FoaSignal, bool)> = vec![
        ("plane_front.wav", plane_wave(1, 0.0, 0.0, len), true),
        ("plane_left_up.wav", plane_wave(2, 90.0, 40.0, len), true),
        ("plane_back.wav", plane_wave(3, 180.0, -10.0, len), true),
        ("sub/rotated.wav", rotate(&plane_wave(4, -60.0, 25.0, len), &q), true),
        ("sub/diffuse_a.wav", diffuse(5), true),
        ("sub/diffuse_b.wav", diffuse(6), true),
        (
            "bad/w_only.wav",
            plane_wave(7, 30.0, 0.0, len).scaled([1.0, 0.0, 0.0, 0.0]),
            false,
        ),
        (
            "bad/dipoles_x2.wav",
            plane_wave(8, 30.0, 0.0, len).scaled([1.0, 2.0, 2.0, 2.0]),
            false,
        ),
        (
            "bad/dipoles_half.wav",
            plane_wave(9, -150.0, 5.0, len).scaled([1.0, 0.5, 0.5, 0.5]),
            false,
        ),
        ("bad/silent.wav", FoaSignal::silence(RATE, len).unwrap(), false),
    ];
    let mut out = Vec::new();
    for (path, x, pass) in files {
        write(path, &x);
        out.push(CorpusFile {
            path,
            expect: Some(pass),
        });
    }
    if with_broken {
        std::fs::write(root.join("bad/broken.wav"), b"RIFF? not really").unwrap();
        out.push(CorpusFile {
            path: "bad/broken.wav",
            expect: None,
        });
    }
    out
}

fn filterbank() -> avsa_core::MelFilterbank {
    avsa_core::MelFilterbank::new(RATE, 512, 128).unwrap()
}

/// Every committed golden file and its freshly generated bytes.
pub fn golden_outputs() -> Vec<(&'static str, Vec<u8>)> {
    use avsa::avsf::encode_tensor;
    use avsa::report::{to_json, ScanReport, ValidateReport};
    use avsa::scan::{scan_corpus, ScanOptions};
    use avsa_core::{
        beamform, extract_stereo, foa_features, mono_features, stereo_features, validity_test, StftConfig,
        ValidityConfig,
    };

    let cfg = StftConfig::default();
    let fb = filterbank();
    let scene = reference_scene();
    let crop = Direction::from_degrees(30.0, 0.0).unwrap();
    let foa = encode_tensor(&foa_features(&scene, &cfg, &fb).unwrap()).unwrap();
    let stereo = encode_tensor(&stereo_features(&extract_stereo(&scene, crop), &cfg, &fb).unwrap()).unwrap();
    let mono = encode_tensor(&mono_features(&beamform(&scene, crop), RATE, &cfg, &fb).unwrap()).unwrap();

    let vcfg = ValidityConfig::default();
    let r = validity_test(&plane_wave(1, 37.0, -20.0, 12000), &vcfg).unwrap();
    let validate = to_json(&ValidateReport::new("planewave.wav", &vcfg, &r)).into_bytes();

    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path(), true);
    let report = scan_corpus(dir.path(), &ScanOptions::default()).unwrap();
    let scan = to_json(&ScanReport::from(&report)).into_bytes();

    vec![
        ("reference_foa.avsf", foa),
        ("reference_stereo.avsf", stereo),
        ("reference_mono.avsf", mono),
        ("validate_planewave.json", validate),
        ("scan_corpus.json", scan),
    ]
}

pub fn golden_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}
