//! Cross-module invariants: series algebra laws, the multinomial oracle that
//! pins the inner-product weights, reproducing and adjoint identities, and
//! purity behaviour of the shift tuple.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use arveson::{
    geometric_inverse, kernel_vector, shift_tuple, substitute, weighted_adjoint, CMatrix,
    DASpace, DAVector, MultiIndex, QuotientModule, TruncatedSeries,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A sparse random series for the algebra laws.
fn series_strategy(d: usize, cap: usize) -> impl Strategy<Value = TruncatedSeries> {
    let exps = prop::collection::vec(0usize..=cap, d);
    let term = (exps, -1.0f64..1.0, -1.0f64..1.0);
    prop::collection::vec(term, 0..6).prop_map(move |terms| {
        let mut s = TruncatedSeries::zero(d, cap);
        for (exps, re, im) in terms {
            let alpha = MultiIndex::new(exps);
            if alpha.degree() <= cap {
                let v = s.coeff(&alpha) + c(re, im);
                s.set_coeff(alpha, v);
            }
        }
        s
    })
}

fn max_diff(a: &TruncatedSeries, b: &TruncatedSeries) -> f64 {
    a.sub(b).unwrap().max_abs_coeff()
}

proptest! {
    #[test]
    fn series_mul_is_commutative(
        a in series_strategy(2, 4),
        b in series_strategy(2, 4),
    ) {
        let ab = a.mul(&b).unwrap();
        let ba = b.mul(&a).unwrap();
        prop_assert!(max_diff(&ab, &ba) <= 1e-13);
    }

    #[test]
    fn series_mul_is_associative(
        a in series_strategy(3, 3),
        b in series_strategy(3, 3),
        x in series_strategy(3, 3),
    ) {
        let left = a.mul(&b).unwrap().mul(&x).unwrap();
        let right = a.mul(&b.mul(&x).unwrap()).unwrap();
        prop_assert!(max_diff(&left, &right) <= 1e-13);
    }

    #[test]
    fn geometric_inverse_inverts(
        coeffs in prop::collection::vec(-0.4f64..0.4, 2),
        cap in 1usize..6,
    ) {
        let linear = TruncatedSeries::linear_form(
            cap,
            &[c(coeffs[0], 0.1 * coeffs[1]), c(coeffs[1], -0.2 * coeffs[0])],
        ).unwrap();
        let inv = geometric_inverse(&linear, cap).unwrap();
        let one_minus = TruncatedSeries::one(2, cap).sub(&linear).unwrap();
        let product = inv.mul(&one_minus).unwrap();
        prop_assert!(max_diff(&product, &TruncatedSeries::one(2, cap)) <= 1e-13);
    }

    #[test]
    fn substitute_identity_is_identity(poly in series_strategy(2, 4)) {
        let images = [
            TruncatedSeries::variable(2, 4, 0).unwrap(),
            TruncatedSeries::variable(2, 4, 1).unwrap(),
        ];
        let s = substitute(&poly, &images, 4).unwrap();
        prop_assert!(max_diff(&s, &poly) == 0.0);
    }
}

#[test]
fn basis_round_trip_over_shapes() {
    for (d, cap) in [(1, 6), (2, 5), (3, 4), (4, 3)] {
        let basis = arveson::enumerate_basis(d, cap).unwrap();
        for i in 0..basis.len() {
            assert_eq!(basis.index_of(basis.entry(i)), Some(i));
        }
    }
}

/// Independent multinomial oracle: expand `1/(1 - <z,lambda>)` as the sum of
/// powers of the linear form by repeated series multiplication and match the
/// coefficients of the kernel vector. This pins the weight formula
/// `w_alpha = alpha!/|alpha|!` without going through the weight table.
#[test]
fn kernel_coefficients_match_multinomial_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for d in 1..=3usize {
        let cap = 4;
        let space = DASpace::new(d, cap).unwrap();
        let lambda: Vec<Complex64> = (0..d)
            .map(|_| c(rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4)))
            .collect();
        // sum_n <z,lambda>^n, built only from series multiplication
        let conj: Vec<Complex64> = lambda.iter().map(Complex64::conj).collect();
        let linear = TruncatedSeries::linear_form(cap, &conj).unwrap();
        let mut expansion = TruncatedSeries::one(d, cap);
        let mut power = TruncatedSeries::one(d, cap);
        for _ in 1..=cap {
            power = power.mul(&linear).unwrap();
            expansion = expansion.add(&power).unwrap();
        }
        let k = kernel_vector(&space, &lambda).unwrap();
        for i in 0..space.dim() {
            let alpha = space.basis().entry(i);
            let oracle = expansion.coeff(alpha);
            assert!(
                (k.coeffs()[i] - oracle).norm() <= 1e-14,
                "d={d} alpha={alpha} kernel {} vs oracle {oracle}",
                k.coeffs()[i]
            );
            // the weight is the reciprocal of the multinomial coefficient
            // read off the expansion at a nonvanishing lambda
            let lam_alpha = alpha.eval(&conj);
            if lam_alpha.norm() > 1e-12 {
                let multinomial = (oracle / lam_alpha).re;
                assert!(
                    (space.weights()[i] * multinomial - 1.0).abs() <= 1e-10,
                    "weight mismatch at {alpha}"
                );
            }
        }
    }
}

#[test]
fn reproducing_identity_on_random_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for d in 1..=3usize {
        let cap = 4;
        let space = DASpace::new(d, cap).unwrap();
        for _ in 0..70 {
            let coeffs = nalgebra::DVector::from_fn(space.dim(), |_, _| {
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let xi = DAVector::new(space.clone(), coeffs).unwrap();
            let lambda: Vec<Complex64> = loop {
                let p: Vec<Complex64> = (0..d)
                    .map(|_| c(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)))
                    .collect();
                if p.iter().map(|z| z.norm_sqr()).sum::<f64>() <= 0.81 {
                    break p;
                }
            };
            let k = kernel_vector(&space, &lambda).unwrap();
            let via_inner = xi.inner(&k).unwrap();
            let direct = xi.evaluate(&lambda).unwrap();
            assert!(
                (via_inner - direct).norm() <= 1e-12,
                "d={d}: {via_inner} vs {direct}"
            );
        }
    }
}

#[test]
fn weighted_adjoint_pairs_on_random_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let space = DASpace::new(2, 3).unwrap();
    let n = space.dim();
    for _ in 0..50 {
        let a = CMatrix::from_fn(n, n, |_, _| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let astar = weighted_adjoint(&space, &a).unwrap();
        let xi = DAVector::new(
            space.clone(),
            DVector::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))),
        )
        .unwrap();
        let eta = DAVector::new(
            space.clone(),
            DVector::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))),
        )
        .unwrap();
        let a_xi = DAVector::new(space.clone(), &a * xi.coeffs()).unwrap();
        let astar_eta = DAVector::new(space.clone(), &astar * eta.coeffs()).unwrap();
        let lhs = a_xi.inner(&eta).unwrap();
        let rhs = xi.inner(&astar_eta).unwrap();
        assert!((lhs - rhs).norm() <= 1e-12);
    }
}

/// The defect operator of the shift row is the rank-one projection onto the
/// constants, entry by entry.
#[test]
fn shift_defect_is_projection_onto_constants() {
    for (d, cap) in [(1usize, 5usize), (2, 4), (3, 3)] {
        let space = DASpace::new(d, cap).unwrap();
        let tuple = shift_tuple(&space).orthonormalized();
        let n = space.dim();
        let mut defect = CMatrix::identity(n, n);
        for m in tuple.matrices() {
            defect -= m * m.adjoint();
        }
        for r in 0..n {
            for col in 0..n {
                let expected = if r == 0 && col == 0 { 1.0 } else { 0.0 };
                assert!(
                    (defect[(r, col)] - c(expected, 0.0)).norm() <= 1e-12,
                    "d={d} entry ({r},{col})"
                );
            }
        }
    }
}

#[test]
fn purity_defect_monotone_with_exact_cutoff() {
    for (d, cap) in [(1usize, 4usize), (2, 3)] {
        let space = DASpace::new(d, cap).unwrap();
        let tuple = shift_tuple(&space);
        let mut prev = f64::INFINITY;
        for n in 0..=cap {
            let defect = tuple.purity_defect(n);
            assert!(defect <= prev + 1e-12, "d={d} n={n}");
            assert!(defect > 0.5, "defect should stay near one before the cutoff");
            prev = defect;
        }
        assert_eq!(tuple.purity_defect(cap + 1), 0.0, "d={d}");
    }
}

#[test]
fn monomial_quotient_compressions_commute() {
    let space = DASpace::new(2, 4).unwrap();
    let gen_sets: Vec<Vec<MultiIndex>> = vec![
        vec![MultiIndex::new(vec![1, 1])],
        vec![MultiIndex::new(vec![2, 0]), MultiIndex::new(vec![0, 1])],
        vec![
            MultiIndex::new(vec![2, 0]),
            MultiIndex::new(vec![1, 1]),
            MultiIndex::new(vec![0, 2]),
        ],
        vec![MultiIndex::new(vec![3, 0]), MultiIndex::new(vec![1, 2])],
    ];
    for gens in gen_sets {
        let vectors: Vec<DAVector> = gens
            .iter()
            .map(|g| DAVector::monomial(space.clone(), g).unwrap())
            .collect();
        let q = QuotientModule::new(&space, &vectors).unwrap();
        assert!(q.tuple().commutator_residual() <= 1e-10);
        // complement basis is orthonormal in the weighted metric
        let basis = q.complement_basis();
        for (i, u) in basis.iter().enumerate() {
            for (j, v) in basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                let got = u.inner(v).unwrap();
                assert!((got - c(expected, 0.0)).norm() <= 1e-12);
            }
        }
    }
}

/// The graded basis keeps homogeneous blocks contiguous; the quotient of the
/// space by nothing keeps every monomial.
#[test]
fn space_construction_is_shared(){
    let space = DASpace::new(2, 3).unwrap();
    let other: Arc<DASpace> = space.clone();
    assert!(Arc::ptr_eq(&space, &other));
}

/// The adjoint localization identity holds below its tail bound for a small
/// corpus of polynomial multipliers across sample points of radius up to 0.7.
#[test]
fn adjoint_localization_residual_below_tail_bound() {
    use arveson::{adjoint_kernel_residual, MultiplierMatrix};
    let space = DASpace::new(2, 5).unwrap();
    let mono = |exps: Vec<usize>| {
        TruncatedSeries::monomial(2, 5, MultiIndex::new(exps), c(1.0, 0.0))
    };
    let corpus: Vec<MultiplierMatrix> = vec![
        MultiplierMatrix::new(2, 5, 1, 2, vec![mono(vec![1, 0]), mono(vec![0, 1])]).unwrap(),
        MultiplierMatrix::new(2, 5, 1, 1, vec![mono(vec![1, 1])]).unwrap(),
        MultiplierMatrix::new(
            2,
            5,
            2,
            2,
            vec![
                mono(vec![2, 0]),
                mono(vec![0, 0]).scale(c(0.5, 0.0)),
                mono(vec![1, 1]).add(&mono(vec![0, 1])).unwrap(),
                mono(vec![0, 2]),
            ],
        )
        .unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for phi in &corpus {
        for _ in 0..12 {
            let lambda: Vec<Complex64> = loop {
                let p: Vec<Complex64> = (0..2)
                    .map(|_| c(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)))
                    .collect();
                if p.iter().map(|z| z.norm_sqr()).sum::<f64>() <= 0.49 {
                    break p;
                }
            };
            let eta: Vec<Complex64> = (0..phi.tgt_rank())
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let check = adjoint_kernel_residual(phi, &lambda, &eta, &space).unwrap();
            assert!(
                check.residual <= check.tail_bound,
                "residual {:.3e} above bound {:.3e}",
                check.residual,
                check.tail_bound
            );
        }
    }
}
