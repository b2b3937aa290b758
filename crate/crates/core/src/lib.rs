//! Desk-scale computational objects of multivariable operator theory on the
//! truncated Drury-Arveson space: Koszul homology of commuting tuples, Dirac
//! operators and Taylor spectra, ball automorphisms and the unitaries they
//! induce, and localized free resolutions with a comparison harness for the
//! homology identities relating them.
//!
//! Everything works at a fixed truncation degree (the cap). Quantities that
//! the truncation distorts are either evaluated strandwise along total degree
//! (where each strand lies entirely under the cap) or reported together with
//! an explicit tail bound; integer outputs such as homology dimensions carry
//! spectral-gap certificates.

pub mod basis;
pub mod error;
pub mod koszul;
pub mod linalg;
pub mod moebius;
pub mod resolution;
pub mod space;
pub mod tolerances;

pub use basis::{
    enumerate_basis, geometric_inverse, substitute, wedge_basis, GradedBasis, MultiIndex,
    TruncatedSeries, WedgeIndex,
};
pub use error::{Error, Result};
pub use koszul::{
    augmented_shift_complex, build_koszul, dirac_report, fredholm_index, homology_dims,
    random_polynomial_tuple, shift_strand_homology, spectrum_membership, strand_homology,
    taylor_invertible, taylor_invertible_with_report, AugmentedReport, DiracReport,
    HomologyReport, KoszulComplex, StrandHomology,
};
pub use linalg::{CMatrix, CVector, RankDecision};
pub use moebius::{
    apply_moebius_to_tuple, base_point_overlap, base_point_transport_defect,
    build_composition_unitary, ergodicity_scan, kernel_identity_residual, row_moebius_check,
    transported_shift_tuple, unitarity_defect, CompositionUnitary, ErgodicityOutcome,
    ErgodicityWitness, MoebiusMap, RowMoebiusReport,
};
pub use resolution::{
    adjoint_kernel_residual, apply_multiplier, compare_local_homology_moebius,
    compare_local_homology_origin, default_point_grid, koszul_resolution_of_point,
    localized_homology, multiplier_norm_bound_check, taylor_resolution_monomial,
    verify_exactness, ComparisonReport, ExactnessReport, LocalizedComplex, MultiplierMatrix,
    ResolutionSpec, ResolvedModule,
};
pub use space::{
    check_in_open_ball, kernel_vector, shift_matrix, shift_matrix_expanded, shift_tuple,
    weighted_adjoint, CommutingTuple, DASpace, DAVector, QuotientModule, ShiftMatrix,
};
