//! Polynomial multiplier matrices between free modules, localization at a
//! point, construction and verification of desk-scale free resolutions, and
//! the harness comparing Koszul homology of a module with the localized
//! homology of its resolution.
//!
//! Resolutions here have polynomial entries (Koszul differentials of a point,
//! Taylor complexes of monomial ideals, or user-supplied matrices). They are
//! algebraic representatives, not the partial-isometric maps a dilation
//! construction would produce; every report carries that note. Exactness is
//! certified strand by strand where the maps are graded, and only strands
//! that fit under the cap are asserted; boundary strands are flagged.

use std::sync::Arc;

use num_complex::Complex64;

use crate::basis::{wedge_basis, GradedBasis, MultiIndex, TruncatedSeries};
use crate::error::{Error, Result};
use crate::koszul::{self, strand_homology};
use crate::linalg::{self, CMatrix, CVector, RankDecision};
use crate::moebius::{apply_moebius_to_tuple, multiplication_matrix, MoebiusMap};
use crate::space::{check_in_open_ball, kernel_vector, CommutingTuple, DASpace, DAVector, QuotientModule};

/// Note attached to every comparison and exactness report.
pub const ALGEBRAIC_REPRESENTATIVE_NOTE: &str =
    "resolution maps are algebraic polynomial representatives, not partial isometries; \
     exactness is verified at truncation scale";

/// A `tgt_rank x src_rank` matrix of truncated polynomial entries,
/// implementing a module homomorphism between free modules by pointwise
/// multiplication.
#[derive(Debug, Clone)]
pub struct MultiplierMatrix {
    d: usize,
    cap: usize,
    tgt_rank: usize,
    src_rank: usize,
    /// Row-major entries.
    entries: Vec<TruncatedSeries>,
}

impl MultiplierMatrix {
    pub fn new(
        d: usize,
        cap: usize,
        tgt_rank: usize,
        src_rank: usize,
        entries: Vec<TruncatedSeries>,
    ) -> Result<Self> {
        if entries.len() != tgt_rank * src_rank {
            return Err(Error::ShapeMismatch(format!(
                "expected {} entries, got {}",
                tgt_rank * src_rank,
                entries.len()
            )));
        }
        for e in &entries {
            if e.d() != d {
                return Err(Error::DimensionMismatch { left: d, right: e.d() });
            }
            if e.cap() != cap {
                return Err(Error::CapMismatch { left: cap, right: e.cap() });
            }
        }
        Ok(Self { d, cap, tgt_rank, src_rank, entries })
    }

    pub fn zero(d: usize, cap: usize, tgt_rank: usize, src_rank: usize) -> Self {
        let entries = vec![TruncatedSeries::zero(d, cap); tgt_rank * src_rank];
        Self { d, cap, tgt_rank, src_rank, entries }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn tgt_rank(&self) -> usize {
        self.tgt_rank
    }

    pub fn src_rank(&self) -> usize {
        self.src_rank
    }

    pub fn entry(&self, row: usize, col: usize) -> &TruncatedSeries {
        &self.entries[row * self.src_rank + col]
    }

    pub fn set_entry(&mut self, row: usize, col: usize, series: TruncatedSeries) {
        self.entries[row * self.src_rank + col] = series;
    }

    /// Largest polynomial degree among the entries.
    pub fn entry_degree(&self) -> usize {
        self.entries
            .iter()
            .filter_map(TruncatedSeries::degree)
            .max()
            .unwrap_or(0)
    }

    /// Sum over entries of coefficient l1 norms squared, square-rooted; a
    /// crude multiplier-norm overestimate used in tail bounds.
    pub fn coeff_l1_frobenius(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.coeff_l1().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Entrywise polynomial evaluation at a point of the open ball.
    pub fn localize(&self, point: &[Complex64]) -> Result<CMatrix> {
        if point.len() != self.d {
            return Err(Error::DimensionMismatch { left: self.d, right: point.len() });
        }
        check_in_open_ball(point)?;
        let mut out = CMatrix::zeros(self.tgt_rank, self.src_rank);
        for r in 0..self.tgt_rank {
            for c in 0..self.src_rank {
                out[(r, c)] = self.entry(r, c).evaluate(point);
            }
        }
        Ok(out)
    }

    /// Polynomial matrix product (entry series multiplied and summed at the
    /// shared cap).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.src_rank != other.tgt_rank {
            return Err(Error::ShapeMismatch(format!(
                "composition shape mismatch: {}x{} after {}x{}",
                self.tgt_rank, self.src_rank, other.tgt_rank, other.src_rank
            )));
        }
        let mut out = Self::zero(self.d, self.cap, self.tgt_rank, other.src_rank);
        for r in 0..self.tgt_rank {
            for c in 0..other.src_rank {
                let mut acc = TruncatedSeries::zero(self.d, self.cap);
                for m in 0..self.src_rank {
                    acc = acc.add(&self.entry(r, m).mul(other.entry(m, c))?)?;
                }
                out.set_entry(r, c, acc);
            }
        }
        Ok(out)
    }

    /// Largest coefficient magnitude over all entries.
    pub fn max_abs_coeff(&self) -> f64 {
        self.entries
            .iter()
            .map(TruncatedSeries::max_abs_coeff)
            .fold(0.0, f64::max)
    }

    /// The operator on truncated free modules as one big matrix, blocks over
    /// (target component, source component); overflow dropped at the cap.
    pub fn operator_matrix(&self, space: &DASpace) -> CMatrix {
        let n = space.dim();
        let mut out = CMatrix::zeros(n * self.tgt_rank, n * self.src_rank);
        for r in 0..self.tgt_rank {
            for c in 0..self.src_rank {
                let block = multiplication_matrix(space, space, self.entry(r, c));
                out.view_mut((r * n, c * n), (n, n)).copy_from(&block);
            }
        }
        out
    }
}

/// Apply the multiplier to a vector of space elements: entrywise series
/// multiplication and summation (terms above the cap drop).
pub fn apply_multiplier(phi: &MultiplierMatrix, xi: &[DAVector]) -> Result<Vec<DAVector>> {
    if xi.len() != phi.src_rank() {
        return Err(Error::ShapeMismatch(format!(
            "expected {} components, got {}",
            phi.src_rank(),
            xi.len()
        )));
    }
    let space = xi
        .first()
        .map(|v| v.space().clone())
        .ok_or(Error::EmptyGenerators)?;
    for v in xi {
        if v.space() != &space {
            return Err(Error::SpaceMismatch);
        }
    }
    if space.d() != phi.d() || space.cap() != phi.cap() {
        return Err(Error::CapMismatch { left: space.cap(), right: phi.cap() });
    }
    let mut out = Vec::with_capacity(phi.tgt_rank());
    for r in 0..phi.tgt_rank() {
        let mut acc = TruncatedSeries::zero(phi.d(), phi.cap());
        for (c, v) in xi.iter().enumerate() {
            acc = acc.add(&phi.entry(r, c).mul(&v.to_series())?)?;
        }
        out.push(DAVector::from_series(space.clone(), &acc)?);
    }
    Ok(out)
}

/// Residual and a priori tail bound for the adjoint localization identity
/// `Phi^*(k_lambda (x) eta) = k_lambda (x) Phi(lambda)^* eta` on the
/// truncated free modules.
#[derive(Debug, Clone)]
pub struct AdjointKernelCheck {
    pub residual: f64,
    pub tail_bound: f64,
}

pub fn adjoint_kernel_residual(
    phi: &MultiplierMatrix,
    point: &[Complex64],
    eta: &[Complex64],
    space: &Arc<DASpace>,
) -> Result<AdjointKernelCheck> {
    if eta.len() != phi.tgt_rank() {
        return Err(Error::ShapeMismatch(format!(
            "eta must have {} components, got {}",
            phi.tgt_rank(),
            eta.len()
        )));
    }
    if space.d() != phi.d() || space.cap() != phi.cap() {
        return Err(Error::CapMismatch { left: space.cap(), right: phi.cap() });
    }
    let k = kernel_vector(space, point)?;
    let n = space.dim();
    let w = space.weights();

    // Phi^dagger (k (x) eta), computed per source component with weighted
    // adjoints of the entry multiplication blocks.
    let mut lhs = vec![CVector::zeros(n); phi.src_rank()];
    for (c, slot) in lhs.iter_mut().enumerate() {
        for (r, eta_r) in eta.iter().enumerate() {
            let block = multiplication_matrix(space, space, phi.entry(r, c));
            let adj = linalg::weighted_adjoint(&block, w, w);
            *slot += adj * (k.coeffs() * *eta_r);
        }
    }
    // k (x) Phi(lambda)^H eta
    let local = phi.localize(point)?;
    let eta_vec = CVector::from_column_slice(eta);
    let pulled = local.adjoint() * eta_vec;
    let mut residual_sq = 0.0f64;
    for c in 0..phi.src_rank() {
        let rhs = k.coeffs() * pulled[c];
        let diff = &lhs[c] - rhs;
        residual_sq += (0..n).map(|i| w[i] * diff[i].norm_sqr()).sum::<f64>();
    }
    let residual = residual_sq.sqrt();

    // Tail: the adjoint only sees degrees cap+1 .. cap+p of the kernel tail.
    let p = phi.entry_degree();
    let r = point.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let eta_norm = eta.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let tail = phi.coeff_l1_frobenius()
        * eta_norm
        * (p as f64).sqrt()
        * r.powi(space.cap() as i32 + 1)
        / (1.0 - r * r).sqrt();
    let tail_bound = tail + 1e-12 * (1.0 + phi.coeff_l1_frobenius() * eta_norm);
    Ok(AdjointKernelCheck { residual, tail_bound })
}

/// One sample of the localized-norm bound check.
#[derive(Debug, Clone)]
pub struct NormBoundSample {
    pub point: Vec<Complex64>,
    pub localized_norm: f64,
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct NormBoundReport {
    /// Weighted operator norm of the truncated multiplier.
    pub truncated_norm: f64,
    pub samples: Vec<NormBoundSample>,
    pub passed: bool,
}

/// Verify `||Phi(lambda)|| <= ||Phi_truncated|| + tail` over the samples: the
/// localization of a bounded multiplier is dominated by the multiplier norm,
/// up to the kernel tail lost to truncation.
pub fn multiplier_norm_bound_check(
    phi: &MultiplierMatrix,
    points: &[Vec<Complex64>],
    space: &Arc<DASpace>,
) -> Result<NormBoundReport> {
    if space.d() != phi.d() || space.cap() != phi.cap() {
        return Err(Error::CapMismatch { left: space.cap(), right: phi.cap() });
    }
    let op = phi.operator_matrix(space);
    let n = space.dim();
    let mut w_big_tgt = nalgebra::DVector::zeros(n * phi.tgt_rank());
    let mut w_big_src = nalgebra::DVector::zeros(n * phi.src_rank());
    for r in 0..phi.tgt_rank() {
        for i in 0..n {
            w_big_tgt[r * n + i] = space.weights()[i];
        }
    }
    for c in 0..phi.src_rank() {
        for i in 0..n {
            w_big_src[c * n + i] = space.weights()[i];
        }
    }
    let truncated_norm = linalg::weighted_operator_norm(&op, &w_big_tgt, &w_big_src);
    let p = phi.entry_degree();
    let mut samples = Vec::with_capacity(points.len());
    let mut passed = true;
    for point in points {
        let local = phi.localize(point)?;
        let localized_norm = linalg::operator_norm(&local);
        let r = point.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let tail = phi.coeff_l1_frobenius() * (p as f64).sqrt() * r.powi(space.cap() as i32 + 1)
            / (1.0 - r * r).sqrt();
        let bound = truncated_norm + tail + 1e-10;
        passed &= localized_norm <= bound;
        samples.push(NormBoundSample { point: point.clone(), localized_norm, bound });
    }
    Ok(NormBoundReport { truncated_norm, samples, passed })
}

/// A chain of multiplier matrices `C_0 <- C_1 <- C_2 <- ..` resolving a
/// module, with optional degree shifts making the maps graded.
#[derive(Debug, Clone)]
pub struct ResolutionSpec {
    d: usize,
    cap: usize,
    /// Ranks of the free modules `C_0, C_1, ..`.
    ranks: Vec<usize>,
    /// `maps[i]` is `Phi_(i+1) : C_(i+1) -> C_i`.
    maps: Vec<MultiplierMatrix>,
    /// Degree of each basis element of each module, when the maps are
    /// homogeneous with respect to them.
    shifts: Option<Vec<Vec<usize>>>,
    /// Human-readable description of the resolved module.
    target: String,
}

impl ResolutionSpec {
    pub fn new(
        d: usize,
        cap: usize,
        ranks: Vec<usize>,
        maps: Vec<MultiplierMatrix>,
        shifts: Option<Vec<Vec<usize>>>,
        target: String,
    ) -> Result<Self> {
        if ranks.is_empty() || maps.len() + 1 != ranks.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} ranks with {} maps",
                ranks.len(),
                maps.len()
            )));
        }
        for (i, m) in maps.iter().enumerate() {
            if m.tgt_rank() != ranks[i] || m.src_rank() != ranks[i + 1] {
                return Err(Error::ShapeMismatch(format!(
                    "map {} has shape {}x{}, expected {}x{}",
                    i + 1,
                    m.tgt_rank(),
                    m.src_rank(),
                    ranks[i],
                    ranks[i + 1]
                )));
            }
            if m.d() != d || m.cap() != cap {
                return Err(Error::CapMismatch { left: cap, right: m.cap() });
            }
        }
        if let Some(s) = &shifts {
            if s.len() != ranks.len() || s.iter().zip(&ranks).any(|(v, &r)| v.len() != r) {
                return Err(Error::ShapeMismatch("shift table does not match ranks".into()));
            }
        }
        Ok(Self { d, cap, ranks, maps, shifts, target })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn maps(&self) -> &[MultiplierMatrix] {
        &self.maps
    }

    /// `Phi_k`, 1-based.
    pub fn map(&self, k: usize) -> &MultiplierMatrix {
        &self.maps[k - 1]
    }

    pub fn shifts(&self) -> Option<&[Vec<usize>]> {
        self.shifts.as_deref()
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    /// Whether every entry of every map is homogeneous of the degree imposed
    /// by the shift table.
    pub fn is_graded(&self) -> bool {
        let Some(shifts) = &self.shifts else {
            return false;
        };
        for (i, m) in self.maps.iter().enumerate() {
            let tgt = &shifts[i];
            let src = &shifts[i + 1];
            for (r, tgt_shift) in tgt.iter().enumerate() {
                for (c, src_shift) in src.iter().enumerate() {
                    for (alpha, coeff) in m.entry(r, c).terms() {
                        if coeff.norm() > 0.0 && *src_shift != tgt_shift + alpha.degree() {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// The Koszul-type resolution of the one-dimensional module at `mu`: module
/// at homological degree k is spanned by k-wedges, differentials carry
/// `z_i - mu_i` with alternating signs. Graded when `mu = 0`.
pub fn koszul_resolution_of_point(mu: &[Complex64], d: usize, cap: usize) -> Result<ResolutionSpec> {
    if d == 0 || mu.len() != d {
        return Err(Error::DimensionMismatch { left: d, right: mu.len() });
    }
    check_in_open_ball(mu)?;
    let ranks: Vec<usize> = (0..=d).map(|k| wedge_basis(d, k).len()).collect();
    let mut maps = Vec::with_capacity(d);
    for k in 1..=d {
        let src = wedge_basis(d, k);
        let tgt = wedge_basis(d, k - 1);
        let tgt_pos: std::collections::HashMap<_, usize> =
            tgt.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let mut phi = MultiplierMatrix::zero(d, cap, tgt.len(), src.len());
        for (col, wedge) in src.iter().enumerate() {
            for (sign, var, rest) in wedge.removals() {
                let row = tgt_pos[&rest];
                let mut series = TruncatedSeries::variable(d, cap, var)?;
                series = series.add(&TruncatedSeries::constant(d, cap, -mu[var]))?;
                phi.set_entry(row, col, series.scale(Complex64::new(sign, 0.0)));
            }
        }
        maps.push(phi);
    }
    let at_origin = mu.iter().all(|z| *z == Complex64::new(0.0, 0.0));
    let shifts = at_origin.then(|| {
        (0..=d)
            .map(|k| vec![k; wedge_basis(d, k).len()])
            .collect()
    });
    ResolutionSpec::new(d, cap, ranks, maps, shifts, format!("point module at {mu:?}"))
}

/// The Taylor complex of a monomial ideal: homological degree k is spanned by
/// the k-subsets of the generators, and the differential carries signed lcm
/// ratios. Always a complex; exactness is verified numerically per strand.
pub fn taylor_resolution_monomial(
    generators: &[MultiIndex],
    d: usize,
    cap: usize,
) -> Result<ResolutionSpec> {
    if generators.is_empty() {
        return Err(Error::EmptyGenerators);
    }
    for (index, g) in generators.iter().enumerate() {
        if g.d() != d {
            return Err(Error::DimensionMismatch { left: d, right: g.d() });
        }
        if g.degree() == 0 {
            return Err(Error::ZeroGenerator { index });
        }
    }
    let full_lcm = generators
        .iter()
        .fold(MultiIndex::zero(d), |acc, g| acc.lcm(g));
    if full_lcm.degree() > cap {
        return Err(Error::DegreeOverflow { degree: full_lcm.degree(), cap });
    }
    let r = generators.len();
    let subset_lcm = |wedge: &crate::basis::WedgeIndex| -> MultiIndex {
        wedge
            .indices()
            .iter()
            .fold(MultiIndex::zero(d), |acc, &i| acc.lcm(&generators[i]))
    };
    let ranks: Vec<usize> = (0..=r).map(|k| wedge_basis(r, k).len()).collect();
    let mut shifts: Vec<Vec<usize>> = Vec::with_capacity(r + 1);
    for k in 0..=r {
        shifts.push(
            wedge_basis(r, k)
                .iter()
                .map(|w| subset_lcm(w).degree())
                .collect(),
        );
    }
    let mut maps = Vec::with_capacity(r);
    for k in 1..=r {
        let src = wedge_basis(r, k);
        let tgt = wedge_basis(r, k - 1);
        let tgt_pos: std::collections::HashMap<_, usize> =
            tgt.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let mut phi = MultiplierMatrix::zero(d, cap, tgt.len(), src.len());
        for (col, wedge) in src.iter().enumerate() {
            let lcm_s = subset_lcm(wedge);
            for (sign, _var, rest) in wedge.removals() {
                let row = tgt_pos[&rest];
                let lcm_rest = subset_lcm(&rest);
                let ratio = lcm_s
                    .minus(&lcm_rest)
                    .expect("sub-lcm divides the lcm");
                let series =
                    TruncatedSeries::monomial(d, cap, ratio, Complex64::new(sign, 0.0));
                phi.set_entry(row, col, series);
            }
        }
        maps.push(phi);
    }
    ResolutionSpec::new(
        d,
        cap,
        ranks,
        maps,
        Some(shifts),
        format!("monomial quotient by {} generators", r),
    )
}

/// One strandwise exactness comparison at a stage of the resolution.
#[derive(Debug, Clone)]
pub struct StrandExactness {
    /// Stage i compares `ker Phi_i` with `im Phi_(i+1)`.
    pub stage: usize,
    pub strand: usize,
    pub kernel_dim: usize,
    pub image_rank: usize,
    pub exact: bool,
    /// False when the strand touches the cap; such strands are reported but
    /// never asserted.
    pub complete: bool,
    pub flagged: bool,
}

#[derive(Debug, Clone)]
pub struct ExactnessReport {
    /// Max coefficient of each composite `Phi_i Phi_(i+1)` as a polynomial
    /// matrix.
    pub composite_residuals: Vec<f64>,
    pub composite_ok: bool,
    pub strands: Vec<StrandExactness>,
    /// True when the composites vanish and every complete strand is exact.
    pub passed: bool,
    pub notes: Vec<String>,
}

/// Verify that consecutive maps compose to zero as polynomial matrices and
/// that, strand by strand, the kernel of each map is exactly the image of the
/// next. Strands touching the cap are flagged, not asserted.
pub fn verify_exactness(spec: &ResolutionSpec, tol: f64) -> Result<ExactnessReport> {
    let mut composite_residuals = Vec::new();
    for i in 0..spec.maps().len().saturating_sub(1) {
        let composite = spec.maps()[i].compose(&spec.maps()[i + 1])?;
        composite_residuals.push(composite.max_abs_coeff());
    }
    let composite_ok = composite_residuals.iter().all(|&r| r <= 1e-12);

    let mut strands = Vec::new();
    let mut all_complete_exact = true;
    if spec.is_graded() {
        let shifts = spec.shifts().expect("graded spec has shifts");
        for stage in 1..=spec.maps().len() {
            let next = (stage < spec.maps().len()).then(|| spec.map(stage + 1));
            let tgt_shifts = &shifts[stage - 1];
            let mid_shifts = &shifts[stage];
            let src_shifts = next.map(|_| &shifts[stage + 1]);
            let max_strand = spec.cap() + mid_shifts.iter().copied().min().unwrap_or(0);
            for strand in 0..=max_strand {
                let mid_dim = graded_module_dim(spec.d(), spec.cap(), mid_shifts, strand);
                if mid_dim == 0 {
                    continue;
                }
                let complete = strand_complete(spec.cap(), tgt_shifts, strand)
                    && strand_complete(spec.cap(), mid_shifts, strand)
                    && src_shifts
                        .map(|s| strand_complete(spec.cap(), s, strand))
                        .unwrap_or(true);
                let phi_strand =
                    graded_strand_matrix(spec.map(stage), tgt_shifts, mid_shifts, strand);
                let phi_decision = linalg::rank_with_gap(&phi_strand, tol);
                let kernel_dim = mid_dim - phi_decision.rank;
                let (image_rank, next_flag) = match next {
                    Some(next_map) => {
                        let m = graded_strand_matrix(
                            next_map,
                            mid_shifts,
                            src_shifts.expect("next map has shifts"),
                            strand,
                        );
                        let d = linalg::rank_with_gap(&m, tol);
                        (d.rank, d.flagged)
                    }
                    None => (0, false),
                };
                let exact = kernel_dim == image_rank;
                let flagged = phi_decision.flagged || next_flag;
                if complete && !flagged {
                    all_complete_exact &= exact;
                }
                strands.push(StrandExactness {
                    stage,
                    strand,
                    kernel_dim,
                    image_rank,
                    exact,
                    complete,
                    flagged,
                });
            }
        }
    } else {
        // Ungraded maps: windowed comparison with expanded targets so that no
        // the window itself never overflows. These checks are informational
        // (complete = false): truncation windows genuinely lose syzygies near
        // the cap.
        for stage in 1..=spec.maps().len() {
            let check = windowed_stage_check(spec, stage, tol)?;
            if let Some(c) = check {
                strands.push(c);
            }
        }
    }
    let passed = composite_ok && all_complete_exact;
    Ok(ExactnessReport {
        composite_residuals,
        composite_ok,
        strands,
        passed,
        notes: vec![ALGEBRAIC_REPRESENTATIVE_NOTE.to_string()],
    })
}

fn strand_complete(cap: usize, shifts: &[usize], strand: usize) -> bool {
    shifts
        .iter()
        .all(|&s| strand < s || strand - s <= cap)
}

fn graded_module_dim(d: usize, cap: usize, shifts: &[usize], strand: usize) -> usize {
    shifts
        .iter()
        .map(|&s| {
            if strand < s || strand - s > cap {
                0
            } else {
                homogeneous_dim(d, strand - s)
            }
        })
        .sum()
}

fn homogeneous_dim(d: usize, degree: usize) -> usize {
    // binomial(degree + d - 1, d - 1)
    let mut acc = 1usize;
    for j in 1..d {
        acc = acc * (degree + j) / j;
    }
    acc
}

/// Matrix of one graded map restricted to a strand, with rows and columns
/// enumerated as (component, homogeneous monomial of the matching degree).
fn graded_strand_matrix(
    phi: &MultiplierMatrix,
    tgt_shifts: &[usize],
    src_shifts: &[usize],
    strand: usize,
) -> CMatrix {
    let d = phi.d();
    let basis = GradedBasis::new(d, strand.min(phi.cap())).expect("valid basis");
    type Layout = (Vec<(usize, usize)>, std::collections::HashMap<(usize, usize), usize>);
    let layout = |shifts: &[usize]| -> Layout {
        let mut order = Vec::new();
        for (j, &s) in shifts.iter().enumerate() {
            if strand < s {
                continue;
            }
            let degree = strand - s;
            if degree > basis.cap() {
                continue;
            }
            for i in basis.degree_range(degree) {
                order.push((j, i));
            }
        }
        let pos = order
            .iter()
            .enumerate()
            .map(|(p, &k)| (k, p))
            .collect();
        (order, pos)
    };
    let (src_order, _) = layout(src_shifts);
    let (_, tgt_pos) = layout(tgt_shifts);
    let tgt_len = tgt_pos.len();
    let mut out = CMatrix::zeros(tgt_len, src_order.len());
    for (col, &(j_src, mono_idx)) in src_order.iter().enumerate() {
        let alpha = basis.entry(mono_idx).clone();
        for j_tgt in 0..phi.tgt_rank() {
            for (gamma, coeff) in phi.entry(j_tgt, j_src).terms() {
                let target = alpha.plus(gamma);
                if let Some(t_idx) = basis.index_of(&target) {
                    if let Some(&row) = tgt_pos.get(&(j_tgt, t_idx)) {
                        out[(row, col)] += coeff;
                    }
                }
            }
        }
    }
    out
}

/// Windowed kernel/image comparison for ungraded maps: sources are restricted
/// so that no multiplication overflows the cap.
fn windowed_stage_check(
    spec: &ResolutionSpec,
    stage: usize,
    tol: f64,
) -> Result<Option<StrandExactness>> {
    let p_stage = spec.map(stage).entry_degree();
    let p_next = if stage < spec.maps().len() {
        spec.map(stage + 1).entry_degree()
    } else {
        0
    };
    let Some(mid_cap) = spec.cap().checked_sub(p_stage) else {
        return Ok(None);
    };
    let mid_space = DASpace::new(spec.d(), mid_cap)?;
    let tgt_space = DASpace::new(spec.d(), spec.cap())?;
    // Phi_stage on the windowed middle module, expanded target: kernel.
    let phi = expanded_operator(spec.map(stage), &mid_space, &tgt_space);
    let phi_dec = linalg::rank_with_gap(&phi, tol);
    let kernel_dim = mid_space.dim() * spec.ranks()[stage] - phi_dec.rank;
    let (image_rank, next_flag) = if stage < spec.maps().len() {
        match mid_cap.checked_sub(p_next) {
            Some(src_cap) => {
                let src_space = DASpace::new(spec.d(), src_cap)?;
                let next = expanded_operator(spec.map(stage + 1), &src_space, &mid_space);
                let d = linalg::rank_with_gap(&next, tol);
                (d.rank, d.flagged)
            }
            None => (0, false),
        }
    } else {
        (0, false)
    };
    Ok(Some(StrandExactness {
        stage,
        strand: 0,
        kernel_dim,
        image_rank,
        exact: kernel_dim == image_rank,
        complete: false,
        flagged: phi_dec.flagged || next_flag,
    }))
}

fn expanded_operator(
    phi: &MultiplierMatrix,
    src_space: &DASpace,
    tgt_space: &DASpace,
) -> CMatrix {
    let ns = src_space.dim();
    let nt = tgt_space.dim();
    let mut out = CMatrix::zeros(nt * phi.tgt_rank(), ns * phi.src_rank());
    for r in 0..phi.tgt_rank() {
        for c in 0..phi.src_rank() {
            let block = multiplication_matrix(src_space, tgt_space, phi.entry(r, c));
            out.view_mut((r * nt, c * ns), (nt, ns)).copy_from(&block);
        }
    }
    out
}

/// The localization of a resolution at a point, with the homology of the
/// resulting complex of scalar matrices.
#[derive(Debug, Clone)]
pub struct LocalizedComplex {
    pub point: Vec<Complex64>,
    /// `Phi_k(lambda)` for k = 1..
    pub matrices: Vec<CMatrix>,
    /// `dim ker Phi_k(lambda) - rank Phi_(k+1)(lambda)` for k = 1..
    pub dims: Vec<usize>,
    pub gap_ratios: Vec<f64>,
    pub flagged: bool,
}

/// Localize every map at `lambda` and read off the homology of the localized
/// complex for k >= 1.
pub fn localized_homology(
    spec: &ResolutionSpec,
    point: &[Complex64],
    tol: f64,
) -> Result<LocalizedComplex> {
    let matrices: Vec<CMatrix> = spec
        .maps()
        .iter()
        .map(|m| m.localize(point))
        .collect::<Result<_>>()?;
    let decisions: Vec<RankDecision> =
        matrices.iter().map(|m| linalg::rank_with_gap(m, tol)).collect();
    let k_max = spec.maps().len();
    let mut dims = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let kernel = spec.ranks()[k] - decisions[k - 1].rank;
        let image = if k < k_max { decisions[k].rank } else { 0 };
        dims.push(kernel - image);
    }
    let flagged = decisions.iter().any(|d| d.flagged);
    Ok(LocalizedComplex {
        point: point.to_vec(),
        matrices,
        dims,
        gap_ratios: decisions.iter().map(|d| d.gap_ratio).collect(),
        flagged,
    })
}

/// A module whose Koszul homology can be compared against a localized
/// resolution.
#[derive(Debug, Clone)]
pub enum ResolvedModule {
    /// An explicit commuting tuple (for instance a scalar point module).
    Tuple(CommutingTuple),
    /// A quotient of the truncated space.
    Quotient(QuotientModule),
}

impl ResolvedModule {
    pub fn tuple(&self) -> &CommutingTuple {
        match self {
            ResolvedModule::Tuple(t) => t,
            ResolvedModule::Quotient(q) => q.tuple(),
        }
    }

    fn grading_and_cap(&self) -> Option<(&[usize], usize)> {
        match self {
            ResolvedModule::Tuple(_) => None,
            ResolvedModule::Quotient(q) => q.grading().map(|g| (g, q.parent().cap())),
        }
    }

    /// Koszul homology dimensions for k = 0..=d, strandwise when the module
    /// is graded (summing complete strands), raw otherwise. Errors when a
    /// rank decision fails its gap certificate.
    pub fn koszul_dims(&self, tol: f64) -> Result<Vec<usize>> {
        match self.grading_and_cap() {
            Some((grading, cap)) => {
                let strands = strand_homology(self.tuple(), grading, cap, tol)?;
                let d = self.tuple().d();
                let mut totals = vec![0usize; d + 1];
                for s in &strands {
                    if s.flagged {
                        return Err(Error::GapFlagged {
                            context: format!("strand {} homology", s.strand),
                            gap: s.min_gap_ratio,
                        });
                    }
                    for (k, &dim) in s.dims.iter().enumerate() {
                        totals[k] += dim;
                    }
                }
                Ok(totals)
            }
            None => {
                let complex = koszul::build_koszul(self.tuple())?;
                let report = koszul::homology_dims(&complex, tol);
                if report.flagged {
                    let gap = report.gap_ratios.iter().copied().fold(f64::INFINITY, f64::min);
                    return Err(Error::GapFlagged { context: "koszul homology".into(), gap });
                }
                Ok(report.dims)
            }
        }
    }
}

/// Side-by-side homology dimensions for k >= 1.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub point: Vec<Complex64>,
    /// Koszul homology dims of the (possibly transformed) module, k = 1..
    pub koszul_dims: Vec<usize>,
    /// Localized homology dims of the resolution, k = 1..
    pub localized_dims: Vec<usize>,
    pub matches: Vec<bool>,
    pub all_match: bool,
    pub notes: Vec<String>,
}

fn compare_dims(
    point: Vec<Complex64>,
    koszul_tail: Vec<usize>,
    localized: Vec<usize>,
) -> ComparisonReport {
    let len = koszul_tail.len().max(localized.len());
    let get = |v: &Vec<usize>, i: usize| v.get(i).copied().unwrap_or(0);
    let matches: Vec<bool> = (0..len)
        .map(|i| get(&koszul_tail, i) == get(&localized, i))
        .collect();
    let all_match = matches.iter().all(|&b| b);
    ComparisonReport {
        point,
        koszul_dims: koszul_tail,
        localized_dims: localized,
        matches,
        all_match,
        notes: vec![ALGEBRAIC_REPRESENTATIVE_NOTE.to_string()],
    }
}

/// Compare the Koszul homology of a module with the homology of its
/// resolution localized at the origin, for k >= 1. Refuses gap-flagged rank
/// data on either side.
pub fn compare_local_homology_origin(
    spec: &ResolutionSpec,
    module: &ResolvedModule,
    tol: f64,
) -> Result<ComparisonReport> {
    let origin = vec![Complex64::new(0.0, 0.0); spec.d()];
    let localized = localized_homology(spec, &origin, tol)?;
    if localized.flagged {
        let gap = localized.gap_ratios.iter().copied().fold(f64::INFINITY, f64::min);
        return Err(Error::GapFlagged { context: "localized complex at 0".into(), gap });
    }
    let full = module.koszul_dims(tol)?;
    Ok(compare_dims(origin, full[1..].to_vec(), localized.dims))
}

/// Compare the Koszul homology of the Moebius transform of a module with the
/// homology of the resolution localized at the base point of the transform,
/// for k >= 1.
pub fn compare_local_homology_moebius(
    spec: &ResolutionSpec,
    module: &ResolvedModule,
    map: &MoebiusMap,
    tol: f64,
) -> Result<ComparisonReport> {
    let transformed = apply_moebius_to_tuple(module.tuple(), map)?;
    let localized = localized_homology(spec, map.lambda(), tol)?;
    if localized.flagged {
        let gap = localized.gap_ratios.iter().copied().fold(f64::INFINITY, f64::min);
        return Err(Error::GapFlagged { context: "localized complex".into(), gap });
    }
    let moved = ResolvedModule::Tuple(transformed);
    let full = moved.koszul_dims(tol)?;
    Ok(compare_dims(map.lambda().to_vec(), full[1..].to_vec(), localized.dims))
}

/// Default five-point comparison grid: the origin, two axis points, two
/// generic points, all inside radius 0.7.
pub fn default_point_grid(d: usize) -> Vec<Vec<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    let mut grid = vec![vec![zero; d]];
    let mut axis1 = vec![zero; d];
    axis1[0] = Complex64::new(0.3, 0.0);
    grid.push(axis1);
    let mut axis2 = vec![zero; d];
    axis2[d - 1] = Complex64::new(0.0, 0.45);
    grid.push(axis2);
    let mut generic1 = vec![zero; d];
    for (i, v) in generic1.iter_mut().enumerate() {
        *v = Complex64::new(0.3 / (i + 1) as f64, -0.2 / (i + 1) as f64);
    }
    grid.push(generic1);
    let mut generic2 = vec![zero; d];
    for (i, v) in generic2.iter_mut().enumerate() {
        *v = Complex64::new(-0.15 * (i + 1) as f64 / d as f64, 0.25 / (i + 1) as f64);
    }
    grid.push(generic2);
    grid
}
