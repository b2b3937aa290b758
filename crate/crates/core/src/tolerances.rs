//! Central tolerance and certification constants.
//!
//! Homology dimensions are integers obtained from floating-point rank
//! decisions, so every threshold that feeds an integer decision lives here
//! together with its certification rule.

/// Relative singular-value threshold for numerical rank: singular values
/// below `RANK_TOL * sigma_max` count as zero.
pub const RANK_TOL: f64 = 1e-9;

/// Minimum ratio (smallest kept singular value) / (largest dropped one) for a
/// rank decision to count as certified. Decisions below this ratio are
/// flagged and refused by the theorem-comparison harness.
pub const GAP_CERTIFICATE_MIN: f64 = 10.0;

/// Maximum commutator residual `max ||T_i T_j - T_j T_i||` accepted when
/// certifying a tuple as commuting.
pub const COMMUTATOR_TOL: f64 = 1e-10;

/// Residual allowed for the complex property `boundary . boundary = 0`,
/// relative to the product of the boundary norms.
pub const COMPLEX_PROPERTY_TOL: f64 = 1e-10;

/// Residual allowed when checking that a matrix is unitary.
pub const UNITARY_TOL: f64 = 1e-12;

/// Tolerance for identities that are exact up to floating-point rounding
/// (reproducing property, adjoint pairing, closed-form kernel identities).
pub const EXACT_F64: f64 = 1e-12;

/// Residual allowed for subspace equality checks done through orthogonal
/// projections.
pub const SUBSPACE_TOL: f64 = 1e-10;

/// Default relative defect threshold above which a submodule scan reports a
/// witness.
pub const ERGODICITY_THRESHOLD: f64 = 0.01;

/// Default expansion headroom: composition operators truncated at source cap
/// N are expanded to degree N + EXPANSION_HEADROOM by default.
pub const EXPANSION_HEADROOM: usize = 40;
