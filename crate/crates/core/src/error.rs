use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by the library.
///
/// Preconditions that callers can violate (ball membership, commutativity,
/// shape agreement) are errors; numerically suspect rank decisions travel as
/// warning flags inside reports and only become `GapFlagged` errors where a
/// harness refuses to consume them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("number of variables must be at least 1")]
    InvalidDimension,
    #[error("variable count mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("degree cap mismatch: {left} vs {right}")]
    CapMismatch { left: usize, right: usize },
    #[error("vectors belong to different spaces")]
    SpaceMismatch,
    #[error("series must have zero constant term")]
    NonzeroConstantTerm,
    #[error("series must be linear (degree at most 1)")]
    NotLinear,
    #[error("point lies outside the open unit ball (|z| = {norm:.6})")]
    OutsideBall { norm: f64 },
    #[error("variable index {index} out of range for d = {d}")]
    VariableOutOfRange { index: usize, d: usize },
    #[error("matrices {i} and {j} fail to commute (residual {residual:.3e})")]
    NonCommuting { i: usize, j: usize, residual: f64 },
    #[error("matrix shapes are inconsistent: {0}")]
    ShapeMismatch(String),
    #[error("generator list is empty")]
    EmptyGenerators,
    #[error("generator {index} is zero")]
    ZeroGenerator { index: usize },
    #[error("denominator of the transform is singular at this tuple")]
    SingularDenominator,
    #[error("truncated composition block is numerically singular")]
    SingularCompression,
    #[error("rank decision is not gap-certified ({context}, gap ratio {gap:.2})")]
    GapFlagged { context: String, gap: f64 },
    #[error("expansion cap {expansion} is below the source cap {cap}")]
    ExpansionBelowCap { cap: usize, expansion: usize },
    #[error("strand {strand} exceeds the degree cap {cap}")]
    StrandAboveCap { strand: usize, cap: usize },
    #[error("polynomial degree {degree} exceeds the cap {cap}")]
    DegreeOverflow { degree: usize, cap: usize },
    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },
    #[error("submodule must be proper and nontrivial")]
    DegenerateSubmodule,
    #[error("submodule basis is not shift-invariant (residual {residual:.3e})")]
    NotShiftInvariant { residual: f64 },
}
