use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-physical state: rho = {rho}, p = {p}")]
    NonPhysicalState { rho: f64, p: f64 },

    #[error("non-physical state at node {node} (i = {i}, j = {j}): rho = {rho}, p = {p}")]
    NonPhysicalNode {
        node: usize,
        i: usize,
        j: usize,
        rho: f64,
        p: f64,
    },

    #[error("subsonic input: M = {mach} < 1")]
    SubsonicInput { mach: f64 },

    #[error("stagnant state: flow direction undefined")]
    StagnantState,

    #[error("degenerate direction: {0}")]
    DegenerateDirection(&'static str),

    #[error("point ({x}, {y}) is outside the grid")]
    OutOfDomain { x: f64, y: f64 },

    #[error("start point ({x}, {y}) is outside the domain")]
    OutOfDomainAtStart { x: f64, y: f64 },

    #[error("start point is subsonic (M = {mach}); C+/C- curves need M >= 1")]
    SubsonicAtStart { mach: f64 },

    #[error("direction evaluation failed after step halving at ({x}, {y})")]
    StepFailure { x: f64, y: f64 },

    #[error("adjoint data missing")]
    MissingAdjoint,

    #[error("curve family {family} does not match integral kind {kind}")]
    FamilyMismatch { family: String, kind: String },

    #[error("too few curve points: {n} (need at least 3)")]
    TooFewPoints { n: usize },

    #[error("profile queried at {value}, outside its table [{lo}, {hi}]")]
    OutOfProfileDomain { value: f64, lo: f64, hi: f64 },

    #[error("format error at line {line}, column {column}: {message}")]
    Format {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
