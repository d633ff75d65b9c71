use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported root system type {0:?}")]
    UnsupportedType(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("window is unbounded")]
    UnboundedWindow,

    #[error("window has empty interior")]
    EmptyWindow,

    #[error("window is not chamber-aligned: {0}")]
    WindowNotAligned(String),

    #[error("degenerate arrangement: {0}")]
    Degenerate(String),

    #[error("imaginary affine root has no reflection")]
    ImaginaryReflection,

    #[error("unknown cell {0}")]
    UnknownCell(String),

    #[error("{0} is not a vertex of the complex")]
    NotAVertex(String),

    #[error("image of cell {0} lies outside the complex")]
    ImageOutsideComplex(String),

    #[error("cone reaches {0} outside the window; rebuild with a larger window radius")]
    HullEscapesWindow(String),

    #[error("cell set is not closed under faces (at {0})")]
    NotFaceClosed(String),

    #[error("no integer lift for cell {cell}: {reason}")]
    UnsolvableLift { cell: String, reason: String },

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("depth r must be nonnegative, got {0}")]
    NegativeDepth(String),

    #[error("depth r = {r} is not on the 1/{m} grid")]
    OffGrid { r: String, m: u32 },

    #[error("filtrations over different root systems")]
    MismatchedSystems,

    #[error("point z is not on the segment [x, y]")]
    NotOnSegment,

    #[error("tree ball precondition failed: {0}")]
    TreePrecondition(String),

    #[error("congruence level N = {0} is too small to represent the filtration subgroups faithfully")]
    InsufficientLevel(u32),

    #[error("coefficient system invariant violated: {0}")]
    CoefficientSystem(String),

    #[error("cell {0} is outside the support of the cone")]
    OutsideSupport(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
