use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("symbol evaluated at z = 0")]
    ZeroArgument,

    #[error("not divisible: spectral condition violated (residual {residual:e})")]
    NotDivisible { residual: f64 },

    #[error("level mismatch: expected level {expected}, got {actual}")]
    LevelMismatch { expected: u32, actual: u32 },

    #[error("unsupported space: {0}")]
    Unsupported(String),

    #[error("invalid frequency {0}: must be finite and positive")]
    InvalidFrequency(f64),

    #[error("interpolation system is ill-conditioned (condition number {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("mask is not interpolatory: A(z) + A(-z) - 2D has residual {residual:e}")]
    NotInterpolatory { residual: f64 },

    #[error("filter bank violates biorthogonality (residual {residual:e})")]
    NotBiorthogonal { residual: f64 },

    #[error("signal length {len} is not divisible by 2^{levels} = {}", 1usize << *levels)]
    LengthNotDivisible { len: usize, levels: u32 },

    #[error("signal start index {start} is not divisible by 2^{levels}")]
    StartNotAligned { start: i64, levels: u32 },

    #[error("level underflow: cannot descend {levels} levels from level {level}")]
    LevelUnderflow { level: u32, levels: u32 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("signal dimension {found} in file does not match requested dimension {expected}")]
    FileDimMismatch { found: usize, expected: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
