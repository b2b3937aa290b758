//! Ball automorphisms, the induced composition operators on the truncated
//! space, row-multiplier checks, Moebius transforms of tuples, and the
//! ergodicity scanner.
//!
//! An automorphism is represented as `u . phi_lambda` with `u` unitary and
//!
//! ```text
//! phi_lambda(z) = (lambda - P z - sqrt(1-|lambda|^2) (z - P z)) / (1 - <z, lambda>)
//! ```
//!
//! where `P` projects onto the line through `lambda`. This map fixes the
//! ball, swaps `0` and `lambda`, is an involution, and satisfies the kernel
//! pairing identity
//!
//! ```text
//! <phi(z), phi(w)> = 1 - (1-|lambda|^2)(1-<z,w>) / ((1-<lambda,w>)(1-<z,lambda>))
//! ```
//!
//! which is the only property the downstream operator identities consume.
//! `lambda = 0` denotes the identity automorphism (composed with `u`).

use std::sync::Arc;

use num_complex::Complex64;

use crate::basis::{geometric_inverse, TruncatedSeries};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::space::{
    check_in_open_ball, kernel_vector, shift_tuple, CommutingTuple, DASpace, DAVector,
};
use crate::tolerances::UNITARY_TOL;

fn ball_inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

fn point_norm_sq(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// A ball automorphism `u . phi_lambda`; `lambda` is the point the map sends
/// to the origin (and its inverse image of the origin).
#[derive(Debug, Clone)]
pub struct MoebiusMap {
    lambda: Vec<Complex64>,
    unitary: CMatrix,
}

impl MoebiusMap {
    pub fn new(lambda: Vec<Complex64>, unitary: CMatrix) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::InvalidDimension);
        }
        check_in_open_ball(&lambda)?;
        let d = lambda.len();
        if unitary.nrows() != d || unitary.ncols() != d {
            return Err(Error::ShapeMismatch(format!(
                "unitary must be {d}x{d}, got {}x{}",
                unitary.nrows(),
                unitary.ncols()
            )));
        }
        let residual = linalg::max_abs(&(unitary.adjoint() * &unitary - CMatrix::identity(d, d)));
        if residual > UNITARY_TOL {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self { lambda, unitary })
    }

    /// `phi_lambda` itself (trivial unitary part).
    pub fn from_lambda(lambda: Vec<Complex64>) -> Result<Self> {
        let d = lambda.len();
        Self::new(lambda, CMatrix::identity(d, d))
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::from_lambda(vec![Complex64::new(0.0, 0.0); d])
    }

    pub fn d(&self) -> usize {
        self.lambda.len()
    }

    /// The base point `phi^{-1}(0)`.
    pub fn lambda(&self) -> &[Complex64] {
        &self.lambda
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn is_identity_base(&self) -> bool {
        point_norm_sq(&self.lambda) == 0.0
    }

    /// Value of the automorphism at a point of the closed ball.
    pub fn eval(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        if z.len() != self.d() {
            return Err(Error::DimensionMismatch { left: self.d(), right: z.len() });
        }
        let norm = point_norm_sq(z).sqrt();
        if norm > 1.0 + 1e-12 {
            return Err(Error::OutsideBall { norm });
        }
        let inner = self.base_eval(z);
        Ok(self.apply_unitary(&inner))
    }

    fn apply_unitary(&self, v: &[Complex64]) -> Vec<Complex64> {
        let d = self.d();
        (0..d)
            .map(|i| (0..d).map(|j| self.unitary[(i, j)] * v[j]).sum())
            .collect()
    }

    fn base_eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        let lam_sq = point_norm_sq(&self.lambda);
        if lam_sq == 0.0 {
            return z.to_vec();
        }
        let s = (1.0 - lam_sq).sqrt();
        let zl = ball_inner(z, &self.lambda);
        let denom = Complex64::new(1.0, 0.0) - zl;
        let proj = zl / lam_sq;
        (0..self.d())
            .map(|i| {
                let p = proj * self.lambda[i];
                (self.lambda[i] - p - Complex64::new(s, 0.0) * (z[i] - p)) / denom
            })
            .collect()
    }

    /// Truncated power series of the coordinate functions.
    pub fn coordinate_series(&self, cap: usize) -> Result<Vec<TruncatedSeries>> {
        let d = self.d();
        let lam_sq = point_norm_sq(&self.lambda);
        let base: Vec<TruncatedSeries> = if lam_sq == 0.0 {
            (0..d)
                .map(|i| TruncatedSeries::variable(d, cap, i))
                .collect::<Result<_>>()?
        } else {
            let s = (1.0 - lam_sq).sqrt();
            let lin_coeffs: Vec<Complex64> = self.lambda.iter().map(Complex64::conj).collect();
            let linear = TruncatedSeries::linear_form(cap, &lin_coeffs)?;
            let geom = geometric_inverse(&linear, cap)?;
            let mut out = Vec::with_capacity(d);
            for i in 0..d {
                // numerator: lambda_i - (1-s) lambda_i <z,lambda>/|lambda|^2 - s z_i
                let mut num = TruncatedSeries::constant(d, cap, self.lambda[i]);
                let scale = -(1.0 - s) / lam_sq;
                num = num.add(&linear.scale(self.lambda[i] * Complex64::new(scale, 0.0)))?;
                num = num.add(
                    &TruncatedSeries::variable(d, cap, i)?.scale(Complex64::new(-s, 0.0)),
                )?;
                out.push(num.mul(&geom)?);
            }
            out
        };
        // mix by the unitary part
        let mut mixed = Vec::with_capacity(d);
        for i in 0..d {
            let mut acc = TruncatedSeries::zero(d, cap);
            for (j, series) in base.iter().enumerate() {
                acc = acc.add(&series.scale(self.unitary[(i, j)]))?;
            }
            mixed.push(acc);
        }
        Ok(mixed)
    }

    /// Truncated series of the normalized kernel factor
    /// `k_lambda / ||k_lambda|| = sqrt(1-|lambda|^2) / (1 - <z,lambda>)`.
    pub fn normalized_kernel_series(&self, cap: usize) -> Result<TruncatedSeries> {
        let d = self.d();
        let lam_sq = point_norm_sq(&self.lambda);
        if lam_sq == 0.0 {
            return Ok(TruncatedSeries::one(d, cap));
        }
        let lin_coeffs: Vec<Complex64> = self.lambda.iter().map(Complex64::conj).collect();
        let linear = TruncatedSeries::linear_form(cap, &lin_coeffs)?;
        let geom = geometric_inverse(&linear, cap)?;
        Ok(geom.scale(Complex64::new((1.0 - lam_sq).sqrt(), 0.0)))
    }
}

/// Residual of the kernel pairing identity at one sample `(z, w)`:
/// `|<phi(z),phi(w)> - (1 - (1-|l|^2)(1-<z,w>)/((1-<l,w>)(1-<z,l>)))|`.
/// Invariant under the unitary part of the map.
pub fn kernel_identity_residual(
    map: &MoebiusMap,
    z: &[Complex64],
    w: &[Complex64],
) -> Result<f64> {
    check_in_open_ball(z)?;
    check_in_open_ball(w)?;
    let fz = map.eval(z)?;
    let fw = map.eval(w)?;
    let lhs = ball_inner(&fz, &fw);
    let lam = map.lambda();
    let lam_sq = point_norm_sq(lam);
    let one = Complex64::new(1.0, 0.0);
    let rhs = one
        - Complex64::new(1.0 - lam_sq, 0.0) * (one - ball_inner(z, w))
            / ((one - ball_inner(lam, w)) * (one - ball_inner(z, lam)));
    Ok((lhs - rhs).norm())
}

/// The operator `xi -> (xi . phi) k_lambda/||k_lambda||`, truncated: columns
/// are the degree `<= expansion_cap` series of the images of the source
/// monomials (degree `<= source_cap`).
#[derive(Debug, Clone)]
pub struct CompositionUnitary {
    map: MoebiusMap,
    source: Arc<DASpace>,
    target: Arc<DASpace>,
    matrix: CMatrix,
}

impl CompositionUnitary {
    pub fn map(&self) -> &MoebiusMap {
        &self.map
    }

    pub fn source(&self) -> &Arc<DASpace> {
        &self.source
    }

    pub fn target(&self) -> &Arc<DASpace> {
        &self.target
    }

    /// Matrix over the monomial bases, target degree `<= expansion_cap` by
    /// source degree `<= source_cap`.
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn source_cap(&self) -> usize {
        self.source.cap()
    }

    pub fn expansion_cap(&self) -> usize {
        self.target.cap()
    }

    /// Image of a source vector, expanded to the target space.
    pub fn apply(&self, xi: &DAVector) -> Result<DAVector> {
        if xi.space() != &self.source {
            return Err(Error::SpaceMismatch);
        }
        DAVector::new(self.target.clone(), &self.matrix * xi.coeffs())
    }

    /// Image of a source vector compressed back to the source cap.
    pub fn apply_compressed(&self, xi: &DAVector) -> Result<DAVector> {
        let full = self.apply(xi)?;
        let coeffs = CVector::from_iterator(
            self.source.dim(),
            full.coeffs().iter().take(self.source.dim()).copied(),
        );
        DAVector::new(self.source.clone(), coeffs)
    }
}

/// Build the truncated composition operator for the map, with source cap `n`
/// and expansion cap `m >= n`.
pub fn build_composition_unitary(
    map: &MoebiusMap,
    n: usize,
    m: usize,
) -> Result<CompositionUnitary> {
    if m < n {
        return Err(Error::ExpansionBelowCap { cap: n, expansion: m });
    }
    let d = map.d();
    let source = DASpace::new(d, n)?;
    let target = DASpace::new(d, m)?;
    let coords = map.coordinate_series(m)?;
    let kernel = map.normalized_kernel_series(m)?;

    // Power series of phi^alpha along the graded order: each entry extends a
    // predecessor by one coordinate factor.
    let mut powers: Vec<TruncatedSeries> = Vec::with_capacity(source.dim());
    powers.push(TruncatedSeries::one(d, m));
    for idx in 1..source.dim() {
        let alpha = source.basis().entry(idx);
        let var = alpha
            .exponents()
            .iter()
            .position(|&e| e > 0)
            .expect("nonconstant monomial");
        let parent = alpha.lowered(var).expect("positive exponent");
        let parent_idx = source
            .basis()
            .index_of(&parent)
            .expect("predecessor is in the basis");
        powers.push(powers[parent_idx].mul(&coords[var])?);
    }

    let mut matrix = CMatrix::zeros(target.dim(), source.dim());
    for (col, power) in powers.iter().enumerate() {
        let series = power.mul(&kernel)?;
        for (alpha, c) in series.terms() {
            if let Some(row) = target.basis().index_of(alpha) {
                matrix[(row, col)] = *c;
            }
        }
    }
    Ok(CompositionUnitary { map: map.clone(), source, target, matrix })
}

/// Weighted unitarity defect on the source block:
/// `|| U^* U - I ||` with the adjoint taken in the weighted metrics.
pub fn unitarity_defect(u: &CompositionUnitary) -> f64 {
    let on = linalg::orthonormal_conjugate(
        u.matrix(),
        u.target().weights(),
        u.source().weights(),
    );
    let gram = on.adjoint() * &on;
    let n = u.source().dim();
    linalg::operator_norm(&(gram - CMatrix::identity(n, n)))
}

/// Maximum value at the base point of the images of the origin-vanishing
/// monomials: the transported analogue of "vanishes at the origin".
pub fn base_point_transport_defect(u: &CompositionUnitary) -> Result<f64> {
    let lambda = u.map().lambda();
    let mut worst = 0.0f64;
    for col in 1..u.source().dim() {
        let mut value = Complex64::new(0.0, 0.0);
        for row in 0..u.target().dim() {
            let c = u.matrix()[(row, col)];
            if c != Complex64::new(0.0, 0.0) {
                value += c * u.target().basis().entry(row).eval(lambda);
            }
        }
        worst = worst.max(value.norm());
    }
    Ok(worst)
}

/// Overlap `|<U 1, khat_lambda>|` between the image of the normalized kernel
/// at the origin and the kernel direction at the base point.
pub fn base_point_overlap(u: &CompositionUnitary) -> Result<f64> {
    let k = kernel_vector(u.target(), u.map().lambda())?;
    let k_norm = k.norm();
    let image = DAVector::new(u.target().clone(), u.matrix().column(0).into_owned())?;
    Ok(image.inner(&k)?.norm() / k_norm)
}

/// Results of the row-multiplier checks for one automorphism.
#[derive(Debug, Clone)]
pub struct RowMoebiusReport {
    /// Worst difference between the two closed forms over the samples.
    pub max_closed_form_residual: f64,
    /// `|| (1 - Phi Phi^*) - P_(k_lambda) ||` on the degree `<= cap` block.
    pub operator_residual: f64,
}

/// Check the two faces of the row-multiplier identity for the coordinate
/// functions of `map`.
///
/// (a) For each sample `(z, w)`, `(1 - <phi(z),phi(w)>) / (1 - <z,w>)` must
/// equal `<k_w, k_l> <k_l, k_z> / ||k_l||^2` in closed form.
/// (b) On the truncated space, `1 - Phi Phi^*` must be the weighted rank-one
/// projection onto the kernel vector at the base point, with the exact
/// normalization `||k_lambda||^2 = 1/(1-|lambda|^2)`.
pub fn row_moebius_check(
    map: &MoebiusMap,
    space: &Arc<DASpace>,
    samples: &[(Vec<Complex64>, Vec<Complex64>)],
    expansion_cap: usize,
) -> Result<RowMoebiusReport> {
    let lam = map.lambda();
    let lam_sq = point_norm_sq(lam);
    let one = Complex64::new(1.0, 0.0);

    let mut max_closed_form_residual = 0.0f64;
    for (z, w) in samples {
        check_in_open_ball(z)?;
        check_in_open_ball(w)?;
        let fz = map.eval(z)?;
        let fw = map.eval(w)?;
        let via_map = (one - ball_inner(&fz, &fw)) / (one - ball_inner(z, w));
        let via_kernels = Complex64::new(1.0 - lam_sq, 0.0)
            / ((one - ball_inner(lam, w)) * (one - ball_inner(z, lam)));
        max_closed_form_residual = max_closed_form_residual.max((via_map - via_kernels).norm());
    }

    // Truncated operator check in orthonormal coordinates. The degree block
    // of Phi Phi^* only involves the top rows of each multiplication matrix:
    // the adjoint lowers degrees, so nothing above the source cap enters.
    let n_dim = space.dim();
    let target = DASpace::new(space.d(), expansion_cap.max(space.cap()))?;
    let coords = map.coordinate_series(target.cap())?;
    let mut block = CMatrix::zeros(n_dim, n_dim);
    for series in &coords {
        let mult = multiplication_matrix(space, &target, series);
        let on = linalg::orthonormal_conjugate(&mult, target.weights(), space.weights());
        let top = on.view((0, 0), (n_dim, on.ncols())).into_owned();
        block += &top * top.adjoint();
    }
    // Rank-one projection onto the kernel direction, exact normalization.
    let mut a = CVector::zeros(n_dim);
    let conj_lambda: Vec<Complex64> = lam.iter().map(Complex64::conj).collect();
    for i in 0..n_dim {
        let alpha = space.basis().entry(i);
        a[i] = Complex64::new(space.multinomial(i).sqrt(), 0.0) * alpha.eval(&conj_lambda);
    }
    let mut residual_matrix = CMatrix::identity(n_dim, n_dim) - block;
    let scale = Complex64::new(1.0 - lam_sq, 0.0);
    for r in 0..n_dim {
        for c in 0..n_dim {
            residual_matrix[(r, c)] -= scale * a[r] * a[c].conj();
        }
    }
    let operator_residual = linalg::operator_norm(&residual_matrix);
    Ok(RowMoebiusReport { max_closed_form_residual, operator_residual })
}

/// Matrix of multiplication by a series, source degree `<= space.cap()`,
/// target degree `<= target.cap()`.
pub fn multiplication_matrix(
    space: &DASpace,
    target: &DASpace,
    series: &TruncatedSeries,
) -> CMatrix {
    let mut out = CMatrix::zeros(target.dim(), space.dim());
    for (col, beta) in space.basis().iter().enumerate() {
        for (alpha, c) in series.terms() {
            if let Some(row) = target.basis().index_of(&alpha.plus(beta)) {
                out[(row, col)] = *c;
            }
        }
    }
    out
}

/// Moebius transform of a tuple by the matrix rational calculus:
/// `phi^i(T) = numerator_i(T) (1 - sum_k conj(lambda_k) T_k)^{-1}`, mixed by
/// the unitary part.
pub fn apply_moebius_to_tuple(tuple: &CommutingTuple, map: &MoebiusMap) -> Result<CommutingTuple> {
    if tuple.d() != map.d() {
        return Err(Error::DimensionMismatch { left: tuple.d(), right: map.d() });
    }
    let d = tuple.d();
    let n = tuple.dim();
    let lam = map.lambda();
    let lam_sq = point_norm_sq(lam);
    let base: Vec<CMatrix> = if lam_sq == 0.0 {
        tuple.matrices().to_vec()
    } else {
        let s = (1.0 - lam_sq).sqrt();
        let mut l = CMatrix::zeros(n, n);
        for (k, t) in tuple.matrices().iter().enumerate() {
            l += t * lam[k].conj();
        }
        let denom = CMatrix::identity(n, n) - &l;
        let denom_inv = denom.try_inverse().ok_or(Error::SingularDenominator)?;
        (0..d)
            .map(|i| {
                let mut num = CMatrix::identity(n, n) * lam[i];
                num -= &l * (lam[i] * Complex64::new((1.0 - s) / lam_sq, 0.0));
                num -= tuple.matrix(i) * Complex64::new(s, 0.0);
                num * &denom_inv
            })
            .collect()
    };
    let mut mixed = Vec::with_capacity(d);
    for i in 0..d {
        let mut acc = CMatrix::zeros(n, n);
        for (j, b) in base.iter().enumerate() {
            acc += b * map.unitary()[(i, j)];
        }
        mixed.push(acc);
    }
    CommutingTuple::new(mixed, tuple.weights().cloned())
}

/// The transformed free module realized at truncation scale: the shift tuple
/// conjugated by the degree block of the composition operator.
///
/// The rational calculus applied to the truncated shift yields compressed
/// multiplication operators whose nonzero constant terms are a boundary
/// artifact: no finite iterate of the purity map vanishes on them. The
/// conjugated tuple is similar to the truncated shift, so it inherits the
/// exact purity cutoff of the free module it models.
pub fn transported_shift_tuple(space: &Arc<DASpace>, map: &MoebiusMap) -> Result<CommutingTuple> {
    let u = build_composition_unitary(map, space.cap(), space.cap())?;
    let block = u.matrix().clone();
    let sigma_min = linalg::smallest_singular_value(&block);
    let sigma_max = linalg::operator_norm(&block);
    if sigma_min <= 1e-10 * sigma_max.max(1.0) {
        return Err(Error::SingularCompression);
    }
    let inv = block.clone().try_inverse().ok_or(Error::SingularCompression)?;
    let shift = shift_tuple(space);
    let matrices: Vec<CMatrix> = shift
        .matrices()
        .iter()
        .map(|s| &block * s * &inv)
        .collect();
    CommutingTuple::with_tolerance(matrices, Some(space.weights().clone()), 1e-9)
}

/// A point and submodule basis element whose transported image leaves the
/// submodule.
#[derive(Debug, Clone)]
pub struct ErgodicityWitness {
    pub lambda: Vec<Complex64>,
    pub basis_index: usize,
    /// Relative distance of the transported element from the submodule.
    pub defect: f64,
}

#[derive(Debug, Clone)]
pub enum ErgodicityOutcome {
    Witness(ErgodicityWitness),
    Exhausted { max_defect: f64 },
}

/// Scan a grid of base points for a submodule element whose image under the
/// composition operator leaves the submodule.
///
/// The submodule is the span of `basis` (need not be orthonormal); it must be
/// proper, nontrivial, and shift-invariant to tolerance. Distances use the
/// weighted metric and the degree `<= cap` compression of the image.
pub fn ergodicity_scan(
    space: &Arc<DASpace>,
    basis: &[DAVector],
    grid: &[Vec<Complex64>],
    expansion_cap: usize,
    threshold: f64,
) -> Result<ErgodicityOutcome> {
    if basis.is_empty() {
        return Err(Error::DegenerateSubmodule);
    }
    for v in basis {
        if v.space() != space {
            return Err(Error::SpaceMismatch);
        }
    }
    let n = space.dim();
    let w = space.weights();
    // Orthonormal-coordinate span matrix.
    let mut span = CMatrix::zeros(n, basis.len());
    for (j, v) in basis.iter().enumerate() {
        for i in 0..n {
            span[(i, j)] = v.coeffs()[i] * Complex64::new(w[i].sqrt(), 0.0);
        }
    }
    let (projection, decision) = linalg::column_span_projection(&span, crate::tolerances::RANK_TOL);
    if decision.rank == 0 || decision.rank >= n {
        return Err(Error::DegenerateSubmodule);
    }
    // Shift invariance of the span, modulo cap overflow.
    let shift = shift_tuple(space).orthonormalized();
    let mut invariance_residual = 0.0f64;
    for s in shift.matrices() {
        let moved = s * &span;
        let outside = &moved - &projection * &moved;
        invariance_residual = invariance_residual.max(linalg::max_abs(&outside));
    }
    if invariance_residual > 1e-8 {
        return Err(Error::NotShiftInvariant { residual: invariance_residual });
    }

    let mut max_defect = 0.0f64;
    for lambda in grid {
        check_in_open_ball(lambda)?;
        if point_norm_sq(lambda) == 0.0 {
            continue; // identity operator cannot produce a witness
        }
        let map = MoebiusMap::from_lambda(lambda.clone())?;
        let u = build_composition_unitary(&map, space.cap(), expansion_cap)?;
        for (j, v) in basis.iter().enumerate() {
            let norm = v.norm();
            if norm == 0.0 {
                continue;
            }
            let image = u.apply_compressed(v)?;
            let mut on = CVector::zeros(n);
            for i in 0..n {
                on[i] = image.coeffs()[i] * Complex64::new(w[i].sqrt(), 0.0);
            }
            let outside = &on - &projection * &on;
            let defect = outside.norm() / norm;
            max_defect = max_defect.max(defect);
            if defect > threshold {
                return Ok(ErgodicityOutcome::Witness(ErgodicityWitness {
                    lambda: lambda.clone(),
                    basis_index: j,
                    defect,
                }));
            }
        }
    }
    Ok(ErgodicityOutcome::Exhausted { max_defect })
}
