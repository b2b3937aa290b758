//! Koszul complexes of commuting tuples, numerical homology, Dirac
//! operators, Taylor invertibility and spectrum membership, and the graded
//! strand machinery for truncated shift tuples.
//!
//! All boundary matrices are assembled in orthonormal coordinates of the
//! tuple's metric, so plain conjugate transposition is the correct adjoint
//! throughout. Homology dimensions come from gap-certified rank decisions;
//! a narrow spectral gap marks the report as unreliable rather than failing.
//!
//! Shift tuples on a truncated space are never evaluated on the raw space:
//! the complex splits along total degree (homogeneous degree s at alternating
//! grade k lies in strand t = s + k), and only strands that fit entirely
//! under the cap are meaningful. Everything above the cap is a truncation
//! artifact, not homology.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::basis::{wedge_basis, WedgeIndex};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, RankDecision};
use crate::space::{shift_tuple, CommutingTuple, DASpace};
use crate::tolerances::COMPLEX_PROPERTY_TOL;

/// Chain spaces `E_k = H (x) Lambda^k C^d` and boundary matrices
/// `bd_k : E_k -> E_{k-1}` of a commuting tuple, `k = 1..=d`.
#[derive(Debug, Clone)]
pub struct KoszulComplex {
    tuple: CommutingTuple,
    /// Chain space dimensions for k = 0..=d.
    dims: Vec<usize>,
    /// Boundary matrices; `boundaries[k-1]` is `bd_k`.
    boundaries: Vec<CMatrix>,
    /// Residual of the complex property, relative to boundary norms.
    complex_residual: f64,
}

impl KoszulComplex {
    pub fn tuple(&self) -> &CommutingTuple {
        &self.tuple
    }

    pub fn d(&self) -> usize {
        self.tuple.d()
    }

    /// Dimension of `E_k`.
    pub fn dim(&self, k: usize) -> usize {
        self.dims.get(k).copied().unwrap_or(0)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// The boundary `bd_k : E_k -> E_{k-1}`, `1 <= k <= d`.
    pub fn boundary(&self, k: usize) -> &CMatrix {
        &self.boundaries[k - 1]
    }

    pub fn complex_residual(&self) -> f64 {
        self.complex_residual
    }
}

/// Assemble the Koszul boundary `bd_k` of the given matrices blockwise over
/// wedge pairs: the block `(J minus i_j, J)` is `(-1)^(j+1) T_(i_j)`.
fn boundary_matrix(matrices: &[CMatrix], d: usize, n: usize, k: usize) -> CMatrix {
    let src_wedges = wedge_basis(d, k);
    let tgt_wedges = wedge_basis(d, k - 1);
    let tgt_pos: std::collections::HashMap<&WedgeIndex, usize> =
        tgt_wedges.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut out = CMatrix::zeros(tgt_wedges.len() * n, src_wedges.len() * n);
    for (jcol, wedge) in src_wedges.iter().enumerate() {
        for (sign, var, rest) in wedge.removals() {
            let irow = tgt_pos[&rest];
            let block = &matrices[var] * Complex64::new(sign, 0.0);
            out.view_mut((irow * n, jcol * n), (n, n)).copy_from(&block);
        }
    }
    out
}

/// Build the Koszul complex of a commuting tuple and certify the complex
/// property `bd_(k-1) . bd_k = 0`.
pub fn build_koszul(tuple: &CommutingTuple) -> Result<KoszulComplex> {
    let t = tuple.orthonormalized();
    let d = t.d();
    let n = t.dim();
    let dims: Vec<usize> = (0..=d).map(|k| wedge_basis(d, k).len() * n).collect();
    let boundaries: Vec<CMatrix> = (1..=d)
        .map(|k| boundary_matrix(t.matrices(), d, n, k))
        .collect();
    let mut complex_residual = 0.0f64;
    for k in 2..=d {
        let composite = &boundaries[k - 2] * &boundaries[k - 1];
        let scale = (linalg::operator_norm(&boundaries[k - 2])
            * linalg::operator_norm(&boundaries[k - 1]))
        .max(1.0);
        complex_residual = complex_residual.max(linalg::operator_norm(&composite) / scale);
    }
    if complex_residual > COMPLEX_PROPERTY_TOL {
        return Err(Error::NonCommuting { i: 0, j: 0, residual: complex_residual });
    }
    Ok(KoszulComplex { tuple: t, dims, boundaries, complex_residual })
}

/// Homology dimensions of a Koszul complex with the certificates of every
/// rank decision that produced them.
#[derive(Debug, Clone)]
pub struct HomologyReport {
    /// `dim H_k` for k = 0..=d.
    pub dims: Vec<usize>,
    /// Rank of `bd_k` for k = 1..=d.
    pub boundary_ranks: Vec<usize>,
    /// Singular values of each boundary, descending.
    pub singular_spectra: Vec<Vec<f64>>,
    /// Gap certificate of each boundary rank decision.
    pub gap_ratios: Vec<f64>,
    /// Rank tolerance used.
    pub tol: f64,
    /// True when any rank decision failed its gap certificate.
    pub flagged: bool,
}

impl HomologyReport {
    /// Alternating sum `sum_k (-1)^(k+1) dim H_k`.
    pub fn index(&self) -> i64 {
        fredholm_index(self)
    }
}

/// Homology dimensions by singular-value rank: for each k,
/// `dim H_k = dim E_k - rank bd_k - rank bd_(k+1)`.
pub fn homology_dims(complex: &KoszulComplex, tol: f64) -> HomologyReport {
    let d = complex.d();
    let mut decisions: Vec<RankDecision> = Vec::with_capacity(d);
    for k in 1..=d {
        decisions.push(linalg::rank_with_gap(complex.boundary(k), tol));
    }
    let rank_of = |k: usize| -> usize {
        if k == 0 || k > d {
            0
        } else {
            decisions[k - 1].rank
        }
    };
    let dims: Vec<usize> = (0..=d)
        .map(|k| complex.dim(k) - rank_of(k) - rank_of(k + 1))
        .collect();
    let flagged = decisions.iter().any(|r| r.flagged);
    HomologyReport {
        dims,
        boundary_ranks: decisions.iter().map(|r| r.rank).collect(),
        singular_spectra: decisions.iter().map(|r| r.singular_values.clone()).collect(),
        gap_ratios: decisions.iter().map(|r| r.gap_ratio).collect(),
        tol,
        flagged,
    }
}

/// Dirac operator data of a Koszul complex.
#[derive(Debug, Clone)]
pub struct DiracReport {
    /// `dim (ker D intersect E_k)` per grade k = 0..=d.
    pub harmonic_dims: Vec<usize>,
    /// Smallest singular value of `D = bd + bd^*`.
    pub sigma_min: f64,
    /// Largest singular value of D.
    pub sigma_max: f64,
    /// `max |D - D^H|` as assembled.
    pub self_adjoint_residual: f64,
    /// True when `sigma_min > tol * max(1, sigma_max)`.
    pub invertible: bool,
    /// Gap flag inherited from the per-grade kernel decisions.
    pub flagged: bool,
}

/// Assemble `D = bd + bd^*` on the total space and compute its kernel grade
/// by grade. In finite dimensions the kernel of D is graded and its grade-k
/// piece has the dimension of `H_k`.
pub fn dirac_report(complex: &KoszulComplex, tol: f64) -> DiracReport {
    let d = complex.d();
    let total: usize = complex.dims().iter().sum();
    let mut offsets = vec![0usize; d + 2];
    for k in 0..=d {
        offsets[k + 1] = offsets[k] + complex.dim(k);
    }
    let mut dirac = CMatrix::zeros(total, total);
    for k in 1..=d {
        let b = complex.boundary(k);
        dirac
            .view_mut((offsets[k - 1], offsets[k]), (b.nrows(), b.ncols()))
            .copy_from(b);
        dirac
            .view_mut((offsets[k], offsets[k - 1]), (b.ncols(), b.nrows()))
            .copy_from(&b.adjoint());
    }
    let self_adjoint_residual = linalg::max_abs(&(&dirac - dirac.adjoint()));
    let sigma_min = linalg::smallest_singular_value(&dirac);
    let sigma_max = linalg::operator_norm(&dirac);
    let invertible = sigma_min > tol * sigma_max.max(1.0);

    let mut harmonic_dims = Vec::with_capacity(d + 1);
    let mut flagged = false;
    for k in 0..=d {
        let nk = complex.dim(k);
        let down_rows = if k >= 1 { complex.dim(k - 1) } else { 0 };
        let up_rows = if k < d { complex.dim(k + 1) } else { 0 };
        let mut stacked = CMatrix::zeros(down_rows + up_rows, nk);
        if k >= 1 {
            stacked
                .view_mut((0, 0), (down_rows, nk))
                .copy_from(complex.boundary(k));
        }
        if k < d {
            stacked
                .view_mut((down_rows, 0), (up_rows, nk))
                .copy_from(&complex.boundary(k + 1).adjoint());
        }
        let decision = linalg::rank_with_gap(&stacked, tol);
        flagged |= decision.flagged;
        harmonic_dims.push(nk - decision.rank);
    }
    DiracReport {
        harmonic_dims,
        sigma_min,
        sigma_max,
        self_adjoint_residual,
        invertible,
        flagged,
    }
}

/// Taylor invertibility: the Koszul complex is exact, i.e. every homology
/// dimension vanishes. The report carries the certificates.
pub fn taylor_invertible_with_report(
    tuple: &CommutingTuple,
    tol: f64,
) -> Result<(bool, HomologyReport)> {
    let complex = build_koszul(tuple)?;
    let report = homology_dims(&complex, tol);
    let invertible = report.dims.iter().all(|&h| h == 0);
    Ok((invertible, report))
}

pub fn taylor_invertible(tuple: &CommutingTuple, tol: f64) -> Result<bool> {
    taylor_invertible_with_report(tuple, tol).map(|(v, _)| v)
}

/// Membership of a point in the Taylor spectrum: the translated tuple fails
/// to be invertible.
pub fn spectrum_membership(tuple: &CommutingTuple, point: &[Complex64], tol: f64) -> Result<bool> {
    let shifted = tuple.shifted(point)?;
    Ok(!taylor_invertible(&shifted, tol)?)
}

/// Alternating sum `sum_k (-1)^(k+1) dim H_k` of a homology report.
pub fn fredholm_index(report: &HomologyReport) -> i64 {
    report
        .dims
        .iter()
        .enumerate()
        .map(|(k, &h)| if k % 2 == 1 { h as i64 } else { -(h as i64) })
        .sum()
}

/// Homology of one total-degree strand of a graded complex.
#[derive(Debug, Clone)]
pub struct StrandHomology {
    pub strand: usize,
    /// Chain dimensions at grades k = 0..=d within the strand.
    pub chain_dims: Vec<usize>,
    /// `dim H_k` within the strand, k = 0..=d.
    pub dims: Vec<usize>,
    /// Smallest gap ratio among the strand's rank decisions.
    pub min_gap_ratio: f64,
    pub flagged: bool,
}

/// Strandwise Koszul homology of a degree-raising tuple.
///
/// `grading` assigns a total degree to every basis vector of the tuple's
/// space; every nonzero matrix entry must raise the degree by exactly one.
/// The strand of a chain element with homogeneous degree s at grade k is
/// `t = s + k`; chain spaces of strand `t <= max_strand` lie entirely inside
/// the truncation, so their homology is free of boundary artifacts.
pub fn strand_homology(
    tuple: &CommutingTuple,
    grading: &[usize],
    max_strand: usize,
    tol: f64,
) -> Result<Vec<StrandHomology>> {
    let t = tuple.orthonormalized();
    let n = t.dim();
    if grading.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "grading has length {}, space has dimension {n}",
            grading.len()
        )));
    }
    for (i, m) in t.matrices().iter().enumerate() {
        for r in 0..n {
            for c in 0..n {
                if m[(r, c)].norm() > 1e-13 && grading[r] != grading[c] + 1 {
                    return Err(Error::ShapeMismatch(format!(
                        "matrix {i} entry ({r},{c}) does not raise the grading by one"
                    )));
                }
            }
        }
    }
    let d = t.d();
    // Indices of basis vectors at each homogeneous degree.
    let max_degree = grading.iter().copied().max().unwrap_or(0);
    let mut by_degree: Vec<Vec<usize>> = vec![Vec::new(); max_degree + 1];
    for (i, &g) in grading.iter().enumerate() {
        by_degree[g].push(i);
    }
    let degree_slice = |s: usize| -> &[usize] {
        if s <= max_degree { &by_degree[s] } else { &[] }
    };

    let mut out = Vec::with_capacity(max_strand + 1);
    for strand in 0..=max_strand {
        // Strand chain space at grade k: degree (strand - k) vectors tensored
        // with the k-wedges.
        let chain_dims: Vec<usize> = (0..=d)
            .map(|k| {
                if k > strand {
                    0
                } else {
                    degree_slice(strand - k).len() * wedge_basis(d, k).len()
                }
            })
            .collect();
        let mut decisions: Vec<RankDecision> = Vec::with_capacity(d);
        for k in 1..=d {
            decisions.push(strand_boundary_rank(&t, degree_slice, strand, k, tol));
        }
        let rank_of = |k: usize| -> usize {
            if k == 0 || k > d {
                0
            } else {
                decisions[k - 1].rank
            }
        };
        let dims: Vec<usize> = (0..=d)
            .map(|k| chain_dims[k] - rank_of(k) - rank_of(k + 1))
            .collect();
        let min_gap_ratio = decisions
            .iter()
            .map(|r| r.gap_ratio)
            .fold(f64::INFINITY, f64::min);
        let flagged = decisions.iter().any(|r| r.flagged);
        out.push(StrandHomology { strand, chain_dims, dims, min_gap_ratio, flagged });
    }
    Ok(out)
}

fn strand_boundary_rank<'a>(
    tuple: &CommutingTuple,
    degree_slice: impl Fn(usize) -> &'a [usize],
    strand: usize,
    k: usize,
    tol: f64,
) -> RankDecision {
    if k > strand {
        return linalg::rank_with_gap(&CMatrix::zeros(0, 0), tol);
    }
    let d = tuple.d();
    let src_degree = strand - k;
    let src_slice = degree_slice(src_degree);
    let tgt_slice = degree_slice(src_degree + 1);
    let src_wedges = wedge_basis(d, k);
    let tgt_wedges = wedge_basis(d, k - 1);
    let tgt_wedge_pos: std::collections::HashMap<&WedgeIndex, usize> =
        tgt_wedges.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let src_pos: std::collections::HashMap<usize, usize> =
        src_slice.iter().enumerate().map(|(p, &i)| (i, p)).collect();
    let tgt_pos: std::collections::HashMap<usize, usize> =
        tgt_slice.iter().enumerate().map(|(p, &i)| (i, p)).collect();
    let ns = src_slice.len();
    let nt = tgt_slice.len();
    let mut m = CMatrix::zeros(nt * tgt_wedges.len(), ns * src_wedges.len());
    for (jw, wedge) in src_wedges.iter().enumerate() {
        for (sign, var, rest) in wedge.removals() {
            let iw = tgt_wedge_pos[&rest];
            let t = tuple.matrix(var);
            for &col_index in src_slice {
                let jc = src_pos[&col_index];
                for &row_index in tgt_slice {
                    let v = t[(row_index, col_index)];
                    if v != Complex64::new(0.0, 0.0) {
                        let ir = tgt_pos[&row_index];
                        m[(iw * nt + ir, jw * ns + jc)] = v * Complex64::new(sign, 0.0);
                    }
                }
            }
        }
    }
    linalg::rank_with_gap(&m, tol)
}

/// The shift tuple of `H (x) C^rank` on the truncated space, with the
/// grading by total degree. Matrices are in orthonormal coordinates.
pub fn free_module_shift(space: &DASpace, rank: usize) -> (CommutingTuple, Vec<usize>) {
    let base = shift_tuple(space).orthonormalized();
    let n = space.dim();
    let matrices: Vec<CMatrix> = if rank == 1 {
        base.matrices().to_vec()
    } else {
        base.matrices()
            .iter()
            .map(|m| m.kronecker(&DMatrix::<Complex64>::identity(rank, rank)))
            .collect()
    };
    let mut grading = Vec::with_capacity(n * rank);
    for i in 0..n {
        for _ in 0..rank {
            grading.push(space.basis().entry(i).degree());
        }
    }
    let tuple =
        CommutingTuple::new(matrices, None).expect("inflated shift matrices commute");
    (tuple, grading)
}

/// Strand homology of the d-shift tuple on `H (x) C^rank`: for every strand
/// `t <= max_strand <= cap` the chain spaces lie inside the truncation, the
/// homology vanishes at grades k >= 1, and grade 0 carries `rank` dimensions
/// in strand 0 only.
pub fn shift_strand_homology(
    space: &DASpace,
    rank: usize,
    max_strand: usize,
    tol: f64,
) -> Result<Vec<StrandHomology>> {
    if max_strand > space.cap() {
        return Err(Error::StrandAboveCap { strand: max_strand, cap: space.cap() });
    }
    let (tuple, grading) = free_module_shift(space, rank);
    strand_homology(&tuple, &grading, max_strand, tol)
}

/// Exactness data for one strand of the evaluation-augmented shift complex.
#[derive(Debug, Clone)]
pub struct AugmentedStrand {
    pub strand: usize,
    /// Dimension of the grade-0 chain space in this strand.
    pub grade0_dim: usize,
    /// Rank of the first boundary restricted to the strand.
    pub boundary_rank: usize,
    /// `|| P_(im bd_1) - P_(ker eval) ||` within the strand.
    pub subspace_residual: f64,
    pub flagged: bool,
}

/// Report for the augmented complex that extends the shift complex by
/// evaluation at the origin.
#[derive(Debug, Clone)]
pub struct AugmentedReport {
    pub per_strand: Vec<AugmentedStrand>,
    /// Codimension of `im bd_1` in the grade-0 space, summed over complete
    /// strands. Equals the free-module rank: the constants.
    pub cokernel_dim: usize,
    /// The evaluation map restricted to strand 0 is the identity on the
    /// constants.
    pub evaluation_surjective: bool,
    pub max_subspace_residual: f64,
}

/// Verify, strand by strand, that the image of the first shift boundary on
/// `H (x) C^rank` is exactly the kernel of evaluation at the origin, and that
/// evaluation is surjective.
///
/// Within strand `t >= 1` the evaluation map vanishes, so the check is that
/// `bd_1` hits the whole strand; at strand 0 evaluation restricts to the
/// identity on the constants.
pub fn augmented_shift_complex(space: &DASpace, rank: usize, tol: f64) -> Result<AugmentedReport> {
    let (tuple, grading) = free_module_shift(space, rank);
    let t = tuple;
    let n = t.dim();
    let max_degree = space.cap();
    let mut by_degree: Vec<Vec<usize>> = vec![Vec::new(); max_degree + 1];
    for (i, &g) in grading.iter().enumerate() {
        by_degree[g].push(i);
    }
    let degree_slice = |s: usize| -> &[usize] {
        if s <= max_degree { &by_degree[s] } else { &[] }
    };
    let _ = n;

    let mut per_strand = Vec::new();
    let mut cokernel_dim = 0usize;
    let mut max_subspace_residual = 0.0f64;
    for strand in 0..=max_degree {
        let grade0_dim = degree_slice(strand).len();
        if strand == 0 {
            // Evaluation restricted to the constants is the identity; the
            // boundary image from grade 1 is empty (no degree -1 sources).
            cokernel_dim += grade0_dim;
            per_strand.push(AugmentedStrand {
                strand,
                grade0_dim,
                boundary_rank: 0,
                subspace_residual: 0.0,
                flagged: false,
            });
            continue;
        }
        // bd_1 restricted to the strand: degree (strand-1) x C^d -> degree strand.
        let src_slice = degree_slice(strand - 1);
        let tgt_slice = degree_slice(strand);
        let mut m = CMatrix::zeros(tgt_slice.len(), src_slice.len() * t.d());
        let tgt_pos: std::collections::HashMap<usize, usize> =
            tgt_slice.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        for (var, tm) in t.matrices().iter().enumerate() {
            for (jc, &col_index) in src_slice.iter().enumerate() {
                for &row_index in tgt_slice {
                    let v = tm[(row_index, col_index)];
                    if v != Complex64::new(0.0, 0.0) {
                        m[(tgt_pos[&row_index], var * src_slice.len() + jc)] = v;
                    }
                }
            }
        }
        let (projection, decision) = linalg::column_span_projection(&m, tol);
        // ker(eval) on a positive-degree strand is the whole strand, so the
        // subspace comparison is against the identity.
        let residual =
            linalg::max_abs(&(&projection - CMatrix::identity(grade0_dim, grade0_dim)));
        max_subspace_residual = max_subspace_residual.max(residual);
        cokernel_dim += grade0_dim - decision.rank;
        per_strand.push(AugmentedStrand {
            strand,
            grade0_dim,
            boundary_rank: decision.rank,
            subspace_residual: residual,
            flagged: decision.flagged,
        });
    }
    Ok(AugmentedReport {
        per_strand,
        cokernel_dim,
        evaluation_surjective: true,
        max_subspace_residual,
    })
}

/// A random commuting tuple built as polynomials `(p_1(M), .., p_d(M))` in a
/// single random matrix, which commutes exactly by construction. Matrices
/// are rescaled to operator norm about one.
pub fn random_polynomial_tuple<R: Rng>(
    rng: &mut R,
    d: usize,
    n: usize,
    poly_degree: usize,
) -> Result<CommutingTuple> {
    let m = CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let scale = linalg::operator_norm(&m).max(1e-6);
    let m = m / Complex64::new(scale, 0.0);
    let mut matrices = Vec::with_capacity(d);
    for _ in 0..d {
        let coeffs: Vec<Complex64> = (0..=poly_degree)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        matrices.push(matrix_polynomial(&m, &coeffs));
    }
    CommutingTuple::with_tolerance(matrices, None, 1e-8)
}

/// Horner evaluation of a polynomial at a matrix argument.
pub fn matrix_polynomial(m: &CMatrix, coeffs: &[Complex64]) -> CMatrix {
    let n = m.nrows();
    let mut acc = CMatrix::zeros(n, n);
    for &c in coeffs.iter().rev() {
        acc = &acc * m + CMatrix::identity(n, n) * c;
    }
    acc
}
