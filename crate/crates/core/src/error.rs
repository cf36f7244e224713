use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} index {index} out of range (expected 1..=3)")]
    IndexOutOfRange { what: &'static str, index: usize },

    #[error("{name} = {value} outside admissible range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("kernel evaluated at y = 0")]
    ZeroVector,

    #[error("truncation radius {eps} below grid spacing {h}")]
    EpsTooSmall { eps: f64, h: f64 },

    #[error("block A - mu is numerically singular (condition estimate {cond:.3e})")]
    SingularBlock { cond: f64 },

    #[error("dense size cap exceeded: dimension {dim} > {cap} (16 n^3 must not exceed {cap}, i.e. n <= 8)")]
    SizeCap { dim: usize, cap: usize },

    #[error(
        "coupling gamma = {gamma} is not admissible for kappa = {kappa}: need |gamma| < {threshold:.6} \
         (1/M_(kappa/2)^2; equals 2/pi for kappa = 1)"
    )]
    Inadmissible {
        gamma: f64,
        kappa: f64,
        threshold: f64,
    },

    #[error("profile does not decay at the box boundary (max boundary value {boundary_max:.3e})")]
    ProfileNotDecaying { boundary_max: f64 },

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
