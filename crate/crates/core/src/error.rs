use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("input signal is empty")]
    EmptySignal,
    #[error("signal of {len} samples is shorter than one hop ({hop} samples)")]
    SignalTooShort { len: usize, hop: usize },
    #[error("expected {expected} channels, got {actual}")]
    ChannelCount { expected: usize, actual: usize },
    #[error("channels have unequal lengths")]
    RaggedChannels,
    #[error("sample rate must be positive, got {0}")]
    SampleRate(u32),
    #[error("elevation {0} rad is outside [-pi/2, pi/2]")]
    ElevationOutOfRange(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("point ({x}, {y}) lies outside a {width}x{height} frame")]
    OutOfBounds { x: f64, y: f64, width: u32, height: u32 },
    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Diverged { epoch: usize, loss: f64 },
}
