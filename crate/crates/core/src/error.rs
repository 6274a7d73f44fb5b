use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("support must be nonempty")]
    EmptySupport,
    #[error("duplicate point {0:?} in support")]
    DuplicatePoint(Vec<i64>),
    #[error("collection is not square: {supports} supports in dimension {n}")]
    NotSquare { n: usize, supports: usize },
    #[error("index set must be nonempty")]
    EmptyIndexSet,
    #[error("index {index} out of range for {len} items")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("capacity exceeded: {what} supports at most {limit}, got {got}")]
    Capacity {
        what: &'static str,
        limit: usize,
        got: usize,
    },
    #[error("lattice has rank {rank}, need {needed}")]
    RankDeficient { rank: usize, needed: usize },
    #[error("collection is not lacunary")]
    NotLacunary,
    #[error("index set {0:?} is not a triangular witness")]
    NotTriangularWitness(Vec<usize>),
    #[error("first unit vector is not in the lattice of the witness")]
    FirstUnitNotInLattice,
    #[error("integer matrix is singular")]
    SingularMatrix,
    #[error("point {0:?} has no integral preimage")]
    NotInImage(Vec<i64>),
    #[error("offset level must be nonnegative")]
    NegativeLevel,
    #[error("coordinate {coord} out of range in dimension {n}")]
    BadCoordinate { coord: usize, n: usize },
    #[error("omega orders must be positive")]
    ZeroOrder,
    #[error("support {support}: expected {expected} coefficients, found {found}")]
    CoefficientMismatch {
        support: usize,
        expected: usize,
        found: usize,
    },
    #[error("point has a zero coordinate")]
    ZeroCoordinate,
    #[error("subset is not contained in the collection")]
    NotSubset,
    #[error("precondition failed: {0}")]
    Precondition(Precondition),
    #[error("numerical failure: {detail} (recommendation: {recommendation})")]
    Numerical {
        detail: String,
        recommendation: Recommendation,
    },
    #[error("system is not supported on the given collection")]
    CollectionMismatch,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Failed precondition of a trace test; each has its own variant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Precondition {
    #[error("mixed volume is zero")]
    ZeroMixedVolume,
    #[error("collection lattice has index {0} (lacunary)")]
    Lacunary(String),
    #[error("varied subset B is not abundant")]
    NotAbundant,
    #[error("varied subset B is not inside the candidate set")]
    OutsideCandidate,
    #[error("solution set is empty")]
    EmptySolutionSet,
    #[error("point {index} does not solve the system (residual {residual:e})")]
    NotASolution { index: usize, residual: f64 },
    #[error("points {0} and {1} coincide")]
    DuplicatePoints(usize, usize),
    #[error("system is not Bernstein-generic ({0})")]
    NotGeneric(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Recommendation {
    /// Redraw the random coefficients of the auxiliary system.
    ResampleG,
    /// Retry with a different seed or tighter tracker settings.
    Retry,
}

impl fmt::Display for Recommendation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Recommendation::ResampleG => write!(f, "resample G"),
            Recommendation::Retry => write!(f, "retry"),
        }
    }
}
