//! Crate-wide error type.

use crate::localizer::Eye;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// PGM magic/dimension fields could not be parsed.
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),

    /// PGM declares a sample depth beyond 8 bits.
    #[error("unsupported PGM maxval {0}, only 8-bit graymaps are supported")]
    UnsupportedMaxval(u32),

    /// PGM payload is shorter than width x height.
    #[error("truncated PGM payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    /// Dimension or coordinate arguments violate an operation's contract.
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("rectangle {rect} does not fit inside a {width}x{height} raster")]
    RectOutOfBounds {
        rect: String,
        width: usize,
        height: usize,
    },

    #[error("{width}x{height} window does not fit inside scan region {region}")]
    WindowTooLarge {
        width: usize,
        height: usize,
        region: String,
    },

    #[error("projection is empty")]
    EmptyProjection,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("model head does not match: expected {expected}, found {found}")]
    HeadMismatch { expected: String, found: String },

    #[error("training diverged (non-finite loss) at epoch {epoch}")]
    TrainingDiverged { epoch: usize },

    /// Model file carries an unknown version line.
    #[error("unsupported model file version: {0:?}")]
    ModelVersion(String),

    /// Model file is structurally broken (short, bad floats, bad widths).
    #[error("malformed model file: {0}")]
    MalformedModel(String),

    #[error("annotation row {line}: {message}")]
    Annotation { line: usize, message: String },

    /// No candidate region survived pre-filtering and thresholding for an eye.
    #[error("no eye candidates for the {0} eye")]
    NoCandidates(Eye),

    #[error("invalid argument: {0}")]
    InvalidInput(String),

    #[error("malformed config: {0}")]
    Config(String),
}
