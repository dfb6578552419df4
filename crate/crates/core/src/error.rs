use thiserror::Error;

/// Failures raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("eigensolver failed to converge after {iterations} iterations")]
    EigenSolverFailure { iterations: usize },
    #[error("eigenvalue within {distance:.3e} of the dividing line (threshold {threshold:.3e})")]
    OnBoundary { distance: f64, threshold: f64 },
    #[error("spectral gap {gap:.3e} below threshold {threshold:.3e}")]
    GapTooSmall { gap: f64, threshold: f64 },
    #[error("cluster collision: {0}")]
    ClusterCollision(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("system carries no symmetrizer")]
    MissingSymmetrizer,
    #[error("degree overflow: state dimension {0} exceeds the supported bound")]
    DegreeOverflow(usize),
    #[error("not a characteristic point (|det| = {0:.3e})")]
    NotCharacteristic(f64),
    #[error("root is not semi-simple (algebraic {algebraic}, geometric {geometric})")]
    NotSemiSimple { algebraic: usize, geometric: usize },
    #[error("multiplicity mismatch: {0}")]
    MultiplicityMismatch(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("sampled manifold is not a multiplicity manifold: {0}")]
    BadManifold(String),
    #[error("assumption violated: {0}")]
    AssumptionFailure(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("2x2 block does not have eigenvalues of opposite sign")]
    NotMixedSign,
    #[error("pencil is not strictly hyperbolic")]
    NotStrictlyHyperbolic,
    #[error("Lopatinski condition fails at the probe frequency (|D| = {0:.3e})")]
    LopatinskiFailureAtPoint(f64),
    #[error("front degeneracy: [F_0(U)] and the tangential flux jumps are dependent")]
    FrontDegeneracy,
    #[error("root finder failed: {0}")]
    RootFinder(String),
    #[error("shock is not of Lax type: {0}")]
    NotLaxType(String),
    #[error("characteristic boundary: {0}")]
    Characteristic(String),
}

pub type Result<T> = std::result::Result<T, Error>;
