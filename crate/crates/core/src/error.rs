use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("level {level} is below the coarsest admissible level {min}")]
    InvalidLevel { level: u32, min: u32 },

    #[error("cannot expand a level-{from} function into level {to}")]
    Expansion { from: u32, to: u32 },

    #[error("translate {translate} is not a member of level {level} ({what})")]
    Translate {
        what: &'static str,
        level: u32,
        translate: i64,
    },

    #[error("invalid curve: {0}")]
    Curve(String),

    #[error("query not supported for this curve representation: {0}")]
    Unsupported(&'static str),

    #[error("cell at ({x0}, {y0}) with width {width} is too coarse: {crossings} crossings")]
    CellTooCoarse {
        x0: f64,
        y0: f64,
        width: f64,
        crossings: usize,
    },

    #[error("degenerate reference map (jacobian {jacobian:e})")]
    DegenerateMap { jacobian: f64 },

    #[error("cell ({i}, {j}) at level {level}: {source}")]
    Cell {
        level: u32,
        i: i64,
        j: i64,
        source: Box<Error>,
    },

    #[error("mesh does not resolve the basis: {0}")]
    MeshMismatch(String),

    #[error("quadrature order {0} outside 1..=10")]
    QuadOrder(usize),

    #[error(
        "point ({x}, {y}) lies inside the interior region; the jump extension is undefined there"
    )]
    LiftingDomain { x: f64, y: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error(
        "level {level} exceeds the memory guard ({guard}); raise the guard explicitly to proceed"
    )]
    MemoryGuard { level: u32, guard: u32 },

    #[error("matrix is not symmetric positive definite")]
    NotSpd,

    #[error("dense mode limited to {limit} unknowns, system has {n}")]
    TooLargeForDense { n: usize, limit: usize },

    #[error("eigenvalue computation failed: {0}")]
    Eigen(String),

    #[error("unknown example '{0}'")]
    UnknownExample(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
