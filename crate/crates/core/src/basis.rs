//! Multi-index combinatorics, graded monomial and wedge bases, and truncated
//! multivariate power-series arithmetic.
//!
//! Everything downstream coordinatizes the truncated function space through
//! [`GradedBasis`]: monomials of total degree at most `cap`, ordered
//! degree-major and lexicographically within a degree, so that homogeneous
//! components occupy contiguous index ranges.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Exponent vector of a monomial in `d` variables, with its total degree
/// cached.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    exponents: Vec<usize>,
    degree: usize,
}

impl MultiIndex {
    pub fn new(exponents: Vec<usize>) -> Self {
        let degree = exponents.iter().sum();
        Self { exponents, degree }
    }

    /// The zero multi-index (constant monomial) in `d` variables.
    pub fn zero(d: usize) -> Self {
        Self { exponents: vec![0; d], degree: 0 }
    }

    /// The exponent vector of the variable `z_i` (0-based `i`).
    pub fn unit(d: usize, i: usize) -> Self {
        let mut exponents = vec![0; d];
        exponents[i] = 1;
        Self { exponents, degree: 1 }
    }

    pub fn d(&self) -> usize {
        self.exponents.len()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn exponents(&self) -> &[usize] {
        &self.exponents
    }

    pub fn exponent(&self, i: usize) -> usize {
        self.exponents[i]
    }

    /// Componentwise sum.
    pub fn plus(&self, other: &Self) -> Self {
        debug_assert_eq!(self.d(), other.d());
        let exponents = self
            .exponents
            .iter()
            .zip(&other.exponents)
            .map(|(a, b)| a + b)
            .collect();
        Self { exponents, degree: self.degree + other.degree }
    }

    /// Componentwise difference, `None` unless `other` divides `self`.
    pub fn minus(&self, other: &Self) -> Option<Self> {
        debug_assert_eq!(self.d(), other.d());
        let mut exponents = Vec::with_capacity(self.d());
        for (a, b) in self.exponents.iter().zip(&other.exponents) {
            exponents.push(a.checked_sub(*b)?);
        }
        Some(Self { exponents, degree: self.degree - other.degree })
    }

    /// Exponents raised by one in variable `i`.
    pub fn raised(&self, i: usize) -> Self {
        let mut exponents = self.exponents.clone();
        exponents[i] += 1;
        Self { exponents, degree: self.degree + 1 }
    }

    /// Exponents lowered by one in variable `i`, `None` if already zero there.
    pub fn lowered(&self, i: usize) -> Option<Self> {
        if self.exponents[i] == 0 {
            return None;
        }
        let mut exponents = self.exponents.clone();
        exponents[i] -= 1;
        Some(Self { exponents, degree: self.degree - 1 })
    }

    /// True when `other` divides `self` componentwise.
    pub fn divisible_by(&self, other: &Self) -> bool {
        self.exponents
            .iter()
            .zip(&other.exponents)
            .all(|(a, b)| a >= b)
    }

    /// Componentwise maximum (the exponent of the monomial lcm).
    pub fn lcm(&self, other: &Self) -> Self {
        let exponents: Vec<usize> = self
            .exponents
            .iter()
            .zip(&other.exponents)
            .map(|(a, b)| *a.max(b))
            .collect();
        Self::new(exponents)
    }

    /// Value of the monomial `z^alpha` at a point.
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for (zi, &e) in z.iter().zip(&self.exponents) {
            for _ in 0..e {
                acc *= zi;
            }
        }
        acc
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Graded-lexicographic order: by total degree, then lexicographically on the
/// exponent vector.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| self.exponents.cmp(&other.exponents))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.exponents.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Ordered monomial basis of the truncated polynomial space: all multi-indices
/// of total degree at most `cap` in graded-lex order.
#[derive(Debug, Clone)]
pub struct GradedBasis {
    d: usize,
    cap: usize,
    entries: Vec<MultiIndex>,
    positions: HashMap<Vec<usize>, usize>,
    degree_starts: Vec<usize>,
}

impl GradedBasis {
    pub fn new(d: usize, cap: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension);
        }
        let mut entries = Vec::new();
        let mut degree_starts = Vec::with_capacity(cap + 2);
        for degree in 0..=cap {
            degree_starts.push(entries.len());
            homogeneous_exponents(d, degree, &mut entries);
        }
        degree_starts.push(entries.len());
        let positions = entries
            .iter()
            .enumerate()
            .map(|(i, m)| (m.exponents.clone(), i))
            .collect();
        Ok(Self { d, cap, entries, positions, degree_starts })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, i: usize) -> &MultiIndex {
        &self.entries[i]
    }

    pub fn entries(&self) -> &[MultiIndex] {
        &self.entries
    }

    pub fn index_of(&self, m: &MultiIndex) -> Option<usize> {
        self.positions.get(m.exponents()).copied()
    }

    /// Index range of the homogeneous block of the given degree.
    pub fn degree_range(&self, degree: usize) -> std::ops::Range<usize> {
        if degree > self.cap {
            return self.len()..self.len();
        }
        self.degree_starts[degree]..self.degree_starts[degree + 1]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.entries.iter()
    }
}

fn homogeneous_exponents(d: usize, degree: usize, out: &mut Vec<MultiIndex>) {
    // Lexicographic enumeration of all exponent vectors with the given sum.
    let mut current = vec![0usize; d];
    fill(&mut current, 0, degree, out);

    fn fill(current: &mut Vec<usize>, pos: usize, remaining: usize, out: &mut Vec<MultiIndex>) {
        if pos + 1 == current.len() {
            current[pos] = remaining;
            out.push(MultiIndex::new(current.clone()));
            return;
        }
        for e in 0..=remaining {
            current[pos] = e;
            fill(current, pos + 1, remaining - e, out);
        }
        current[pos] = 0;
    }
}

/// Enumerate the graded monomial basis for `d` variables up to total degree
/// `cap`.
pub fn enumerate_basis(d: usize, cap: usize) -> Result<GradedBasis> {
    GradedBasis::new(d, cap)
}

/// A strictly increasing tuple of variable indices, indexing a basis vector of
/// the k-fold alternating power.
///
/// Indices are 0-based internally.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WedgeIndex {
    indices: Vec<usize>,
}

impl WedgeIndex {
    pub fn new(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices }
    }

    pub fn empty() -> Self {
        Self { indices: Vec::new() }
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// All single removals `(sign, removed variable, remaining wedge)` with
    /// the alternating sign `(-1)^(j+1)` for the j-th slot (1-based).
    pub fn removals(&self) -> impl Iterator<Item = (f64, usize, WedgeIndex)> + '_ {
        self.indices.iter().enumerate().map(move |(j, &var)| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let mut rest = self.indices.clone();
            rest.remove(j);
            (sign, var, WedgeIndex::new(rest))
        })
    }
}

impl fmt::Display for WedgeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e[")?;
        for (i, v) in self.indices.iter().enumerate() {
            if i > 0 {
                write!(f, "^")?;
            }
            write!(f, "{}", v + 1)?;
        }
        write!(f, "]")
    }
}

/// All k-element subsets of `{0, .., d-1}` in lexicographic order.
///
/// Empty for `k > d` (the alternating power is trivial there); the singleton
/// empty wedge for `k = 0`.
pub fn wedge_basis(d: usize, k: usize) -> Vec<WedgeIndex> {
    if k > d {
        return Vec::new();
    }
    if k == 0 {
        return vec![WedgeIndex::empty()];
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    subsets(0, d, k, &mut current, &mut out);
    out
}

fn subsets(start: usize, d: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<WedgeIndex>) {
    if current.len() == k {
        out.push(WedgeIndex::new(current.clone()));
        return;
    }
    let needed = k - current.len();
    for i in start..=(d - needed) {
        current.push(i);
        subsets(i + 1, d, k, current, out);
        current.pop();
    }
}

/// A power series in `d` variables truncated at total degree `cap`, stored
/// sparsely; absent keys are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    d: usize,
    cap: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl TruncatedSeries {
    pub fn zero(d: usize, cap: usize) -> Self {
        Self { d, cap, terms: BTreeMap::new() }
    }

    pub fn one(d: usize, cap: usize) -> Self {
        let mut s = Self::zero(d, cap);
        s.terms.insert(MultiIndex::zero(d), Complex64::new(1.0, 0.0));
        s
    }

    pub fn constant(d: usize, cap: usize, value: Complex64) -> Self {
        let mut s = Self::zero(d, cap);
        if value != Complex64::new(0.0, 0.0) {
            s.terms.insert(MultiIndex::zero(d), value);
        }
        s
    }

    /// The single monomial `coeff * z^alpha`; terms above the cap are dropped.
    pub fn monomial(d: usize, cap: usize, alpha: MultiIndex, coeff: Complex64) -> Self {
        let mut s = Self::zero(d, cap);
        if alpha.degree() <= cap && coeff != Complex64::new(0.0, 0.0) {
            s.terms.insert(alpha, coeff);
        }
        s
    }

    /// The coordinate variable `z_i`.
    pub fn variable(d: usize, cap: usize, i: usize) -> Result<Self> {
        if i >= d {
            return Err(Error::VariableOutOfRange { index: i, d });
        }
        Ok(Self::monomial(d, cap, MultiIndex::unit(d, i), Complex64::new(1.0, 0.0)))
    }

    /// The linear form with the given coefficients on `z_1 .. z_d`.
    pub fn linear_form(cap: usize, coeffs: &[Complex64]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidDimension);
        }
        let d = coeffs.len();
        let mut s = Self::zero(d, cap);
        for (i, &c) in coeffs.iter().enumerate() {
            if c != Complex64::new(0.0, 0.0) && cap >= 1 {
                s.terms.insert(MultiIndex::unit(d, i), c);
            }
        }
        Ok(s)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Complex64 {
        self.terms.get(alpha).copied().unwrap_or_default()
    }

    pub fn set_coeff(&mut self, alpha: MultiIndex, value: Complex64) {
        if alpha.degree() > self.cap {
            return;
        }
        if value == Complex64::new(0.0, 0.0) {
            self.terms.remove(&alpha);
        } else {
            self.terms.insert(alpha, value);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest total degree carrying a nonzero coefficient; `None` when zero.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(MultiIndex::degree).max()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Sum of coefficient magnitudes; an upper bound for the multiplier norm
    /// on the ball.
    pub fn coeff_l1(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Re-truncate to a different cap (terms above the new cap are dropped).
    pub fn with_cap(&self, cap: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(a, _)| a.degree() <= cap)
            .map(|(a, c)| (a.clone(), *c))
            .collect();
        Self { d: self.d, cap, terms }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch { left: self.d, right: other.d });
        }
        if self.cap != other.cap {
            return Err(Error::CapMismatch { left: self.cap, right: other.cap });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (alpha, c) in &other.terms {
            let v = out.coeff(alpha) + c;
            out.set_coeff(alpha.clone(), v);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = Self::zero(self.d, self.cap);
        if factor == Complex64::new(0.0, 0.0) {
            return out;
        }
        for (alpha, c) in &self.terms {
            out.terms.insert(alpha.clone(), c * factor);
        }
        out
    }

    /// Coefficient-wise convolution; products above the cap are dropped.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.d, self.cap);
        for (a, ca) in &self.terms {
            if a.degree() > self.cap {
                continue;
            }
            for (b, cb) in &other.terms {
                if a.degree() + b.degree() > self.cap {
                    break; // terms() iterates in graded order
                }
                let key = a.plus(b);
                let v = out.coeff(&key) + ca * cb;
                out.set_coeff(key, v);
            }
        }
        Ok(out)
    }

    /// `self^n` by repeated multiplication.
    pub fn pow(&self, n: usize) -> Result<Self> {
        let mut out = Self::one(self.d, self.cap);
        for _ in 0..n {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Value of the truncated series at a point.
    pub fn evaluate(&self, z: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(alpha, c)| c * alpha.eval(z))
            .sum()
    }

    /// Complex-conjugated coefficients.
    pub fn conj(&self) -> Self {
        let terms = self.terms.iter().map(|(a, c)| (a.clone(), c.conj())).collect();
        Self { d: self.d, cap: self.cap, terms }
    }
}

/// Truncation of `1/(1 - linear)` as the geometric sum of powers of the
/// linear form, up to total degree `cap`.
pub fn geometric_inverse(linear: &TruncatedSeries, cap: usize) -> Result<TruncatedSeries> {
    if linear.coeff(&MultiIndex::zero(linear.d())) != Complex64::new(0.0, 0.0) {
        return Err(Error::NonzeroConstantTerm);
    }
    if linear.degree().unwrap_or(0) > 1 {
        return Err(Error::NotLinear);
    }
    let l = linear.with_cap(cap);
    let mut out = TruncatedSeries::one(linear.d(), cap);
    let mut power = TruncatedSeries::one(linear.d(), cap);
    for _ in 1..=cap {
        power = power.mul(&l)?;
        if power.is_zero() {
            break;
        }
        out = out.add(&power)?;
    }
    Ok(out)
}

/// Truncated composition: substitute `images[i]` for the variable `z_i` in
/// `poly`, monomial by monomial.
pub fn substitute(
    poly: &TruncatedSeries,
    images: &[TruncatedSeries],
    cap: usize,
) -> Result<TruncatedSeries> {
    if images.len() != poly.d() {
        return Err(Error::DimensionMismatch { left: poly.d(), right: images.len() });
    }
    let out_d = images.first().map(TruncatedSeries::d).unwrap_or(poly.d());
    for image in images {
        if image.d() != out_d {
            return Err(Error::DimensionMismatch { left: out_d, right: image.d() });
        }
        if image.cap() != cap {
            return Err(Error::CapMismatch { left: cap, right: image.cap() });
        }
    }
    // Cache powers of each image up to the largest exponent that occurs.
    let mut max_exp = vec![0usize; poly.d()];
    for (alpha, _) in poly.terms() {
        for (i, &e) in alpha.exponents().iter().enumerate() {
            max_exp[i] = max_exp[i].max(e);
        }
    }
    let mut powers: Vec<Vec<TruncatedSeries>> = Vec::with_capacity(poly.d());
    for (i, image) in images.iter().enumerate() {
        let mut column = vec![TruncatedSeries::one(out_d, cap)];
        for e in 1..=max_exp[i] {
            let next = column[e - 1].mul(image)?;
            column.push(next);
        }
        powers.push(column);
    }
    let mut out = TruncatedSeries::zero(out_d, cap);
    for (alpha, c) in poly.terms() {
        let mut term = TruncatedSeries::constant(out_d, cap, *c);
        for (i, &e) in alpha.exponents().iter().enumerate() {
            if e > 0 {
                term = term.mul(&powers[i][e])?;
            }
        }
        out = out.add(&term)?;
    }
    Ok(out)
}
