//! The `avsa` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::OnceLock;

use avsa_core::geometry::{DEFAULT_CROP_SIZE, DEFAULT_FOV_DEG};
use avsa_core::{
    align_to_crop, beamform, extract_stereo, foa_features, gnomonic_crop, mono_features, rotate, rotation_matrix,
    select_crop_avc, select_crops_avsa, stereo_features, synthesize_scene, toy_train, validity_test, CropSettings,
    Direction, FovMode, MelFilterbank, Quadrant, RotationAngles, StftConfig, ToyConfig, ToyMode, ValidityConfig,
};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::avsf::{self, AVSF_VERSION};
use crate::detections::read_detections;
use crate::error::{AvsaError, Result};
use crate::images::{png_bytes, read_equirect, CropSidecar};
use crate::report::{self, ScanReport, ValidateReport, REPORT_SCHEMA_VERSION};
use crate::scan::{scan_corpus, ScanOptions};
use crate::scene_file::read_scene;
use crate::wav::{self, SampleFormat, WavAudio};
use crate::write_output;

/// Defaults shared by every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub sample_rate: u32,
    pub stft: StftConfig,
    pub mel_bands: usize,
    pub fov_deg: f64,
    pub crop_size: u32,
    pub validity: ValidityConfig,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            sample_rate: 24000,
            stft: StftConfig::default(),
            mel_bands: MelFilterbank::DEFAULT_MELS,
            fov_deg: DEFAULT_FOV_DEG,
            crop_size: DEFAULT_CROP_SIZE,
            validity: ValidityConfig::default(),
            seed: 0,
        }
    }
}

/// Library and format versions, as printed by `--version`.
pub fn version_line() -> &'static str {
    static LINE: OnceLock<String> = OnceLock::new();
    LINE.get_or_init(|| {
        format!(
            "{} (avsa-core {}, AVSF v{AVSF_VERSION}, report schema v{REPORT_SCHEMA_VERSION})",
            env!("CARGO_PKG_VERSION"),
            avsa_core::VERSION
        )
    })
}

#[derive(Debug, Parser)]
#[command(
    name = "avsa",
    about = "Spatial audio and 360° video tools for audio-visual alignment"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a scene description (JSON) to an FOA WAV file.
    SynthScene(SynthSceneArgs),
    /// Rotate an FOA recording.
    Rotate(RotateArgs),
    /// Steer a first-order beam and write the mono result.
    Beamform(SteerArgs),
    /// Derive left/right beams around a crop direction.
    Stereo(SteerArgs),
    /// Extract a feature tensor (AVSF).
    Features(FeaturesArgs),
    /// Run the energy-ratio validity test on one FOA file.
    Validate(ValidateArgs),
    /// Validate every WAV file under a directory.
    Scan(ScanArgs),
    /// Select crops from an equirectangular frame and its detections.
    Crops(CropsArgs),
    /// Train the toy contrastive model on synthetic features.
    AlignDemo(AlignDemoArgs),
}

#[derive(Debug, Args)]
pub struct OutputFormat {
    /// Sample format of the written WAV.
    #[arg(long, value_enum, default_value_t = SampleFormat::Float32)]
    pub sample_format: SampleFormat,
}

#[derive(Debug, Args)]
pub struct SynthSceneArgs {
    /// Scene description.
    pub spec: PathBuf,
    /// Output WAV, `-` for stdout.
    #[arg(short, long, default_value = "-")]
    pub output: PathBuf,
    /// Overrides the seed in the scene description.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input WAV, `-` for stdin.
    pub input: PathBuf,
    /// JSON array of source channel indices applied on load.
    #[arg(long)]
    pub remap: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RotateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(short, long, default_value = "-")]
    pub output: PathBuf,
    /// Degrees; positive turns sources to the left.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub yaw: f64,
    /// Degrees; positive tilts the front downwards.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub pitch: f64,
    /// Degrees about the front axis.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub roll: f64,
    #[command(flatten)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct DirectionArgs {
    /// Azimuth in degrees, counterclockwise from the front.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub azimuth: f64,
    /// Elevation in degrees.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub elevation: f64,
}

impl DirectionArgs {
    fn direction(&self) -> Result<Direction> {
        Ok(Direction::from_degrees(self.azimuth, self.elevation)?)
    }
}

#[derive(Debug, Args)]
pub struct SteerArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(short, long, default_value = "-")]
    pub output: PathBuf,
    #[command(flatten)]
    pub direction: DirectionArgs,
    #[command(flatten)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeatureFormat {
    /// Four log-mel channels and three intensity channels.
    Foa,
    /// Two log-mel channels, level difference, and phase difference.
    Stereo,
    /// One log-mel channel.
    Mono,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output AVSF file, `-` for stdout.
    #[arg(short, long, default_value = "-")]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = FeatureFormat::Foa)]
    pub format: FeatureFormat,
    /// Crop azimuth in degrees. FOA input is aligned to the crop first;
    /// stereo and mono are derived from FOA around it.
    #[arg(long, allow_hyphen_values = true)]
    pub azimuth: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub elevation: Option<f64>,
    #[arg(long, default_value_t = MelFilterbank::DEFAULT_MELS)]
    pub mels: usize,
}

#[derive(Debug, Args)]
pub struct ValidityArgs {
    /// Pass threshold on |E_xyz / E_w − 1|.
    #[arg(long, default_value_t = 0.1)]
    pub tau: f64,
    /// Only bins below this frequency (Hz) are counted.
    #[arg(long, default_value_t = 4000.0)]
    pub cutoff: f64,
}

impl ValidityArgs {
    fn config(&self) -> Result<ValidityConfig> {
        Ok(ValidityConfig::new(self.tau, self.cutoff)?)
    }
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub validity: ValidityArgs,
    /// JSON report, `-` for stdout.
    #[arg(short, long, default_value = "-")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Directory searched recursively for `.wav` files.
    pub dir: PathBuf,
    #[command(flatten)]
    pub validity: ValidityArgs,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long)]
    pub remap: Option<PathBuf>,
    /// Leave unreadable files out of the pass fraction.
    #[arg(long)]
    pub exclude_errors: bool,
    /// JSON report, `-` for stdout.
    #[arg(short, long, default_value = "-")]
    pub output: PathBuf,
    /// Also write the passing paths, one per line.
    #[arg(long)]
    pub pass_list: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CropMode {
    /// One crop, from a random detection.
    Avc,
    /// Four crops, one per azimuth quadrant.
    Avsa,
}

#[derive(Debug, Args)]
pub struct CropsArgs {
    /// Equirectangular PNG frame (2:1).
    pub frame: PathBuf,
    /// Detections JSON.
    pub detections: PathBuf,
    #[arg(long, value_enum)]
    pub mode: CropMode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for `crop_<i>.png` and `crop_<i>.json`.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Field of view in degrees.
    #[arg(long, default_value_t = DEFAULT_FOV_DEG)]
    pub fov: f64,
    /// Size the field of view to the box: `scale × box extent`, clamped to
    /// [30°, 120°]; random crops keep `--fov`.
    #[arg(long)]
    pub fov_from_bbox: Option<f64>,
    /// Output edge length in pixels.
    #[arg(long, default_value_t = DEFAULT_CROP_SIZE)]
    pub size: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoMode {
    Avc,
    Avsa,
}

#[derive(Debug, Args)]
pub struct AlignDemoArgs {
    #[arg(long, value_enum, default_value_t = DemoMode::Avsa)]
    pub mode: DemoMode,
    #[arg(long, default_value_t = 32)]
    pub clips: usize,
    #[arg(long, default_value_t = 4)]
    pub crops: usize,
    #[arg(long, default_value_t = 8)]
    pub latent_dim: usize,
    #[arg(long, default_value_t = 16)]
    pub feature_dim: usize,
    #[arg(long, default_value_t = avsa_core::EmbeddingBatch::DEFAULT_DIM)]
    pub embed_dim: usize,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, default_value_t = 500)]
    pub epochs: usize,
    #[arg(long, default_value_t = 10.0)]
    pub lr: f64,
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Pair audio with the video of other rows.
    #[arg(long)]
    pub shuffled: bool,
    /// JSON report, `-` for stdout.
    #[arg(short, long, default_value = "-")]
    pub output: PathBuf,
    /// Write held-out embeddings as AVSF files into this directory.
    #[arg(long)]
    pub embeddings_dir: Option<PathBuf>,
}

/// The clap command with the version line attached.
pub fn command() -> clap::Command {
    Cli::command().version(version_line())
}

fn load(input: &InputArgs) -> Result<WavAudio> {
    let remap = input.remap.as_deref().map(wav::read_remap).transpose()?;
    wav::load(&input.input, remap.as_deref())
}

fn synth_scene(a: &SynthSceneArgs) -> Result<()> {
    let mut scene = read_scene(&a.spec)?;
    if let Some(seed) = a.seed {
        scene.seed = seed;
    }
    let foa = synthesize_scene(&scene.to_spec()?)?;
    wav::write_wav(&a.output, &WavAudio::from_foa(&foa), a.format.sample_format)
}

fn rotate_cmd(a: &RotateArgs) -> Result<()> {
    let foa = load(&a.input)?.into_foa()?;
    let q = rotation_matrix(RotationAngles::from_degrees(a.yaw, a.pitch, a.roll)?);
    wav::write_wav(
        &a.output,
        &WavAudio::from_foa(&rotate(&foa, &q)),
        a.format.sample_format,
    )
}

fn beamform_cmd(a: &SteerArgs) -> Result<()> {
    let foa = load(&a.input)?.into_foa()?;
    let out = WavAudio::mono(foa.sample_rate(), beamform(&foa, a.direction.direction()?));
    wav::write_wav(&a.output, &out, a.format.sample_format)
}

fn stereo_cmd(a: &SteerArgs) -> Result<()> {
    let foa = load(&a.input)?.into_foa()?;
    let out = WavAudio::from_stereo(&extract_stereo(&foa, a.direction.direction()?));
    wav::write_wav(&a.output, &out, a.format.sample_format)
}

fn features_cmd(a: &FeaturesArgs, cfg: &PipelineConfig) -> Result<()> {
    let audio = load(&a.input)?;
    let fb = MelFilterbank::new(audio.sample_rate, cfg.stft.fft_size(), a.mels)?;
    let crop = match (a.azimuth, a.elevation) {
        (None, None) => None,
        (az, el) => Some(Direction::from_degrees(az.unwrap_or(0.0), el.unwrap_or(0.0))?),
    };
    let center = crop.unwrap_or(Direction::FRONT);
    let tensor = match (a.format, audio.channels.len()) {
        (FeatureFormat::Foa, _) => {
            let foa = audio.into_foa()?;
            let foa = match crop {
                Some(c) => align_to_crop(&foa, c),
                None => foa,
            };
            foa_features(&foa, &cfg.stft, &fb)?
        }
        (FeatureFormat::Stereo, 4) => stereo_features(&extract_stereo(&audio.into_foa()?, center), &cfg.stft, &fb)?,
        (FeatureFormat::Stereo, _) => stereo_features(&audio.into_stereo()?, &cfg.stft, &fb)?,
        (FeatureFormat::Mono, 4) => {
            let foa = audio.into_foa()?;
            mono_features(&beamform(&foa, center), foa.sample_rate(), &cfg.stft, &fb)?
        }
        (FeatureFormat::Mono, _) => {
            let rate = audio.sample_rate;
            mono_features(&audio.into_mono()?, rate, &cfg.stft, &fb)?
        }
    };
    write_output(&a.output, &avsf::encode_tensor(&tensor)?)
}

/// Returns whether the file passed.
fn validate_cmd(a: &ValidateArgs) -> Result<bool> {
    let cfg = a.validity.config()?;
    let foa = load(&a.input)?.into_foa()?;
    let r = validity_test(&foa, &cfg)?;
    let rep = ValidateReport::new(&a.input.input.to_string_lossy(), &cfg, &r);
    write_output(&a.output, report::to_json(&rep).as_bytes())?;
    Ok(r.passed)
}

fn scan_cmd(a: &ScanArgs) -> Result<()> {
    let opts = ScanOptions {
        config: a.validity.config()?,
        jobs: a.jobs,
        remap: a.remap.as_deref().map(wav::read_remap).transpose()?,
        exclude_errors: a.exclude_errors,
    };
    let rep = scan_corpus(&a.dir, &opts)?;
    write_output(&a.output, report::to_json(&ScanReport::from(&rep)).as_bytes())?;
    if let Some(path) = &a.pass_list {
        write_output(path, report::pass_list(&rep).as_bytes())?;
    }
    Ok(())
}

fn crops_cmd(a: &CropsArgs) -> Result<()> {
    let frame = read_equirect(&a.frame)?;
    let det_file = read_detections(&a.detections)?;
    if (det_file.frame.width, det_file.frame.height) != (frame.width(), frame.height()) {
        return Err(AvsaError::Usage(format!(
            "detections are for a {}x{} frame but {} is {}x{}",
            det_file.frame.width,
            det_file.frame.height,
            a.frame.display(),
            frame.width(),
            frame.height()
        )));
    }
    let detections = det_file.detections();
    let fov = match a.fov_from_bbox {
        Some(scale) => FovMode::FromBbox {
            scale,
            min_deg: 30.0,
            max_deg: 120.0,
            fallback_deg: a.fov,
        },
        None => FovMode::Fixed(a.fov),
    };
    let settings = CropSettings { fov, out_size: a.size };
    let (w, h) = (frame.width(), frame.height());
    let (mode, crops): (&str, Vec<(Option<Quadrant>, _)>) = match a.mode {
        CropMode::Avc => (
            "avc",
            vec![(None, select_crop_avc(&detections, w, h, &settings, a.seed)?)],
        ),
        CropMode::Avsa => {
            let crops = select_crops_avsa(&detections, w, h, &settings, a.seed)?;
            ("avsa", Quadrant::ALL.iter().copied().map(Some).zip(crops).collect())
        }
    };
    std::fs::create_dir_all(&a.output).map_err(|e| AvsaError::io(&a.output, e))?;
    for (i, (quadrant, crop)) in crops.iter().enumerate() {
        let png_path = a.output.join(format!("crop_{i}.png"));
        let img = gnomonic_crop(&frame, crop);
        write_output(&png_path, &png_bytes(&img, &png_path)?)?;
        let label = match crop.provenance() {
            avsa_core::CropProvenance::Detected(d) => Some(detections[d].label.as_str()),
            avsa_core::CropProvenance::RandomFallback => None,
        };
        let sidecar = CropSidecar::new(mode, i, *quadrant, crop, label, a.seed);
        write_output(
            &a.output.join(format!("crop_{i}.json")),
            report::to_json(&sidecar).as_bytes(),
        )?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct DemoConfig {
    mode: &'static str,
    clips: usize,
    crops_per_clip: usize,
    latent_dim: usize,
    feature_dim: usize,
    embed_dim: usize,
    noise: f64,
    epochs: usize,
    lr: f64,
    temperature: f64,
    shuffled: bool,
}

#[derive(Debug, Serialize)]
struct DemoReport {
    schema_version: u32,
    seed: u64,
    config: DemoConfig,
    train_accuracy: f64,
    held_out_accuracy: f64,
    chance_accuracy: f64,
    loss_curve: Vec<f64>,
}

fn align_demo_cmd(a: &AlignDemoArgs) -> Result<()> {
    let cfg = ToyConfig {
        mode: match a.mode {
            DemoMode::Avc => ToyMode::Avc,
            DemoMode::Avsa => ToyMode::Avsa,
        },
        clips: a.clips,
        crops: a.crops,
        latent_dim: a.latent_dim,
        feature_dim: a.feature_dim,
        embed_dim: a.embed_dim,
        noise: a.noise,
        epochs: a.epochs,
        lr: a.lr,
        temperature: a.temperature,
        seed: a.seed,
        shuffled: a.shuffled,
    };
    let out = toy_train(&cfg)?;
    let rep = DemoReport {
        schema_version: REPORT_SCHEMA_VERSION,
        seed: a.seed,
        config: DemoConfig {
            mode: cfg.mode.label(),
            clips: cfg.clips,
            crops_per_clip: cfg.crops_per_clip(),
            latent_dim: cfg.latent_dim,
            feature_dim: cfg.feature_dim,
            embed_dim: cfg.embed_dim,
            noise: cfg.noise,
            epochs: cfg.epochs,
            lr: cfg.lr,
            temperature: cfg.temperature,
            shuffled: cfg.shuffled,
        },
        train_accuracy: out.train_accuracy,
        held_out_accuracy: out.held_out_accuracy,
        chance_accuracy: 1.0 / cfg.rows() as f64,
        loss_curve: out.loss_curve.clone(),
    };
    if let Some(dir) = &a.embeddings_dir {
        std::fs::create_dir_all(dir).map_err(|e| AvsaError::io(dir, e))?;
        for batch in out.heads.embeddings(&out.held_out)? {
            let path = dir.join(format!("{}.avsf", batch.role().label()));
            write_output(&path, &avsf::encode_embeddings(&batch)?)?;
        }
    }
    write_output(&a.output, report::to_json(&rep).as_bytes())
}

/// Runs a parsed command. `Ok(false)` means a validation failure.
pub fn execute(cli: &Cli) -> Result<bool> {
    let cfg = PipelineConfig::default();
    match &cli.command {
        Command::SynthScene(a) => synth_scene(a)?,
        Command::Rotate(a) => rotate_cmd(a)?,
        Command::Beamform(a) => beamform_cmd(a)?,
        Command::Stereo(a) => stereo_cmd(a)?,
        Command::Features(a) => features_cmd(a, &cfg)?,
        Command::Validate(a) => return validate_cmd(a),
        Command::Scan(a) => scan_cmd(a)?,
        Command::Crops(a) => crops_cmd(a)?,
        Command::AlignDemo(a) => align_demo_cmd(a)?,
    }
    Ok(true)
}

/// Parses arguments and runs. Exit codes: 0 success, 1 validation failure,
/// 2 usage or runtime error.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match command()
        .try_get_matches_from(args)
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("avsa: error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Man pages for the tool and each subcommand, as `(file name, roff)`.
pub fn man_pages() -> Vec<(String, Vec<u8>)> {
    let cmd = command();
    let mut pages: Vec<(String, Vec<u8>)> = cmd
        .get_subcommands()
        .map(|sub| {
            let name = format!("avsa-{}", sub.get_name());
            let page = crate::man::render(&name, sub, version_line());
            (format!("{name}.1"), page.into_bytes())
        })
        .collect();
    pages.push((
        "avsa.1".to_string(),
        crate::man::render("avsa", &cmd, version_line()).into_bytes(),
    ));
    pages.sort();
    pages
}

/// Writes [`man_pages`] into `dir`.
pub fn write_man_pages(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| AvsaError::io(dir, e))?;
    for (name, bytes) in man_pages() {
        write_output(&dir.join(name), &bytes)?;
    }
    Ok(())
}
