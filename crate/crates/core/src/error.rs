use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid {width}x{height} is too small (need at least 3x3)")]
    InvalidGrid { width: usize, height: usize },
    #[error("point ({x}, {y}) is outside the sampling domain")]
    OutOfDomain { x: f64, y: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("frame timestamps must increase (previous {prev}, current {curr})")]
    NonMonotonicTime { prev: f64, curr: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("explicit step tau={tau} exceeds the stability bound {bound}")]
    Unstable { tau: f64, bound: f64 },
    #[error(
        "iterative solver stopped after {iterations} iterations at relative residual {residual:e}"
    )]
    SolverDiverged { iterations: usize, residual: f64 },
    #[error("degenerate dynamics: m and d are both zero")]
    Degenerate,
    #[error("r={r} lies outside the light cone ct={ct}")]
    OutsideLightCone { r: f64, ct: f64 },
    #[error("closed form is singular at r=0")]
    SingularOrigin,
    #[error("time must be positive, got {0}")]
    NonpositiveTime(f64),
    #[error("probe ({x}, {y}) coincides with a massive node")]
    SingularEvaluation { x: f64, y: f64 },
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("saliency map has zero variance")]
    DegenerateMap,
    #[error("no fixations given")]
    EmptyFixations,
    #[error("scanpath has {len} fixations, embedding needs {k}")]
    PathTooShort { len: usize, k: usize },
    #[error("malformed PGM header at byte {offset}: {reason}")]
    MalformedHeader { offset: usize, reason: String },
    #[error("PGM data truncated: expected {expected} samples, found {found}")]
    TruncatedData { expected: usize, found: usize },
    #[error("unsupported PGM maxval {0} (expected 255 or 65535)")]
    UnsupportedMaxval(u32),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {row}: {reason}")]
    UnparsableRow { row: usize, reason: String },
    #[error("no ground truth for stimulus `{0}`")]
    MissingGroundTruth(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
