//! Property tests over randomly generated algebras and operators.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mvnlab::blockvn::{BlockOperator, BlockVector, FiniteBlockAlgebra, Formula};
use mvnlab::liealg::{default_t_samples, induced_hom_residuals, Nelson, ProductFormula, SkewAdjointOp, Trotter};
use mvnlab::linops::{CMatrix, CVector};
use mvnlab::random::{
    random_bounded_operator, random_finite_algebra, random_matrix, random_skew, random_skew_operator, random_tailed_algebra,
    random_unitary,
};
use mvnlab::tensorcat::Morphism;
use mvnlab::topologies::{measure_dist, set_dist, srt_dist, MetricParams};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn algebra(r: &mut ChaCha8Rng, tailed: bool) -> Arc<FiniteBlockAlgebra> {
    Arc::new(if tailed { random_tailed_algebra(r, 3, 3) } else { random_finite_algebra(r, 3, 3) })
}

/// Skew-Hermitian matrix of operator norm at most 1.
fn unit_skew(r: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let m = random_skew(r, n);
    let norm = m.op_norm().max(1.0);
    m.scale(C64::new(1.0 / norm, 0.0))
}

fn single_skew(m: CMatrix) -> SkewAdjointOp {
    let alg = Arc::new(FiniteBlockAlgebra::single_block(m.dim()));
    SkewAdjointOp::new(BlockOperator::single_block(alg, 0, m).unwrap()).unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| C64::new(a, b)), 1..4)
}

fn close(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-9 * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn srt_is_a_metric(seed in any::<u64>(), tailed in any::<bool>()) {
        let mut r = rng(seed);
        let alg = algebra(&mut r, tailed);
        let ops: Vec<_> = (0..3).map(|_| random_bounded_operator(&mut r, alg.clone())).collect();
        let d = |a, b| srt_dist(a, b, 1e-12).unwrap();
        prop_assert_eq!(d(&ops[0], &ops[0]).value, 0.0);
        let (ab, ba) = (d(&ops[0], &ops[1]), d(&ops[1], &ops[0]));
        prop_assert!((ab.value - ba.value).abs() <= 1e-14 + ab.bound + ba.bound);
        let (ac, bc) = (d(&ops[0], &ops[2]), d(&ops[1], &ops[2]));
        prop_assert!(ac.lower() <= ab.upper() + bc.upper() + 1e-12);
    }

    #[test]
    fn set_and_measure_are_symmetric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = algebra(&mut r, false);
        let (a, b) = (random_bounded_operator(&mut r, alg.clone()), random_bounded_operator(&mut r, alg));
        let params = MetricParams::default();
        prop_assert_eq!(set_dist(&a, &a, &params).unwrap().value, 0.0);
        let (ab, ba) = (set_dist(&a, &b, &params).unwrap(), set_dist(&b, &a, &params).unwrap());
        prop_assert!((ab.value - ba.value).abs() <= 1e-12 + ab.bound + ba.bound);
        prop_assert!(measure_dist(&a, &a).unwrap().upper() <= 1e-12);
        let (ab, ba) = (measure_dist(&a, &b).unwrap(), measure_dist(&b, &a).unwrap());
        prop_assert!((ab.value - ba.value).abs() <= 1e-12 + ab.bound + ba.bound);
    }

    #[test]
    fn formula_arithmetic_is_pointwise(
        rate in -1.0..0.5f64,
        other_rate in -1.0..0.5f64,
        p in coeffs(),
        q in coeffs(),
        s in -3i64..3,
    ) {
        let f = Formula::new(C64::new(rate, 0.0), p);
        let g = Formula::new(C64::new(rate, 0.0), q.clone());
        let h = Formula::new(C64::new(other_rate, 0.3), q);
        let sum = f.add(&g).unwrap();
        let diff = f.sub(&g).unwrap();
        let prod = f.mul(&h);
        let shifted = f.shift(s);
        for k in 3..20 {
            prop_assert!(close(sum.eval(k), f.eval(k) + g.eval(k)));
            prop_assert!(close(diff.eval(k), f.eval(k) - g.eval(k)));
            prop_assert!(close(prod.eval(k), f.eval(k) * h.eval(k)));
            prop_assert!(close(shifted.eval(k), f.eval((k as i64 + s) as usize)));
            prop_assert!(close(f.conj().eval(k), f.eval(k).conj()));
        }
    }

    #[test]
    fn exp_of_skew_is_unitary(seed in any::<u64>(), tailed in any::<bool>(), t in -3.0..3.0f64) {
        let mut r = rng(seed);
        let alg = algebra(&mut r, tailed);
        let x = SkewAdjointOp::new(random_skew_operator(&mut r, alg.clone(), 3)).unwrap();
        let u = x.exp(t).unwrap();
        let one = BlockOperator::identity(alg);
        let residual = u.mul(&u.adjoint()).unwrap().max_block_diff(&one);
        prop_assert!(residual <= 1e-9, "{}", residual);
    }

    #[test]
    fn trotter_error_does_not_grow(seed in any::<u64>(), n in 2usize..4) {
        let mut r = rng(seed);
        let (ma, mb) = (unit_skew(&mut r, n), unit_skew(&mut r, n));
        let oracle = (&ma + &mb).inner().clone().exp();
        let (a, b) = (single_skew(ma), single_skew(mb));
        let errs: Vec<f64> = [16u64, 32, 64, 128]
            .iter()
            .map(|&steps| (Trotter.product(&a, &b, 1.0, steps).unwrap().block(0).inner() - &oracle).norm())
            .collect();
        prop_assert!(errs.windows(2).all(|w| w[1] <= w[0] + 1e-13), "{:?}", errs);
    }

    #[test]
    fn nelson_of_commuting_pair_is_identity(seed in any::<u64>(), alpha in -2.0..2.0f64, steps in 1u64..40) {
        let mut r = rng(seed);
        let m = unit_skew(&mut r, 3);
        let (a, b) = (single_skew(m.clone()), single_skew(m.scale(C64::new(alpha, 0.0))));
        let p = Nelson.product(&a, &b, 0.7, steps).unwrap();
        prop_assert!(p.block(0).diff_frobenius(&CMatrix::identity(3)) <= 1e-10);
    }

    #[test]
    fn conjugation_induces_a_lie_hom(seed in any::<u64>(), alpha in -2.0..2.0f64) {
        let mut r = rng(seed);
        let alg = algebra(&mut r, false);
        let count = alg.block_count().unwrap();
        let w = (0..count).map(|k| random_unitary(&mut r, alg.dim(k))).collect();
        let phi = Morphism::unitary_conjugation(alg.clone(), w).unwrap();
        let x = SkewAdjointOp::new(random_skew_operator(&mut r, alg.clone(), count)).unwrap();
        let y = SkewAdjointOp::new(random_skew_operator(&mut r, alg, count)).unwrap();
        let res = induced_hom_residuals(&phi, &x, &y, alpha, &default_t_samples()).unwrap();
        prop_assert!(res.linearity <= 1e-10 && res.bracket <= 1e-9 && res.exp <= 1e-9, "{:?}", res);
    }

    #[test]
    fn unitary_group_derivative_is_the_generator(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = algebra(&mut r, true);
        let a = random_skew_operator(&mut r, alg.clone(), 2);
        // finitely supported vector, reaching a few blocks into the tail
        let xi = BlockVector::from_parts(
            (0..6)
                .map(|k| {
                    let m = random_matrix(&mut r, alg.dim(k));
                    (k, CVector::from_iterator(alg.dim(k), m.column(0).iter().copied()))
                })
                .collect(),
        );
        let h = 1e-6;
        let moved = a.exp_scaled(h).unwrap().apply(&xi).unwrap().sub(&xi);
        let diff_quot = BlockVector::from_parts(moved.iter().map(|(k, v)| (k, v / C64::new(h, 0.0))).collect());
        let a_xi = a.apply(&xi).unwrap();
        let a2_xi = a.apply(&a_xi).unwrap();
        let err = diff_quot.sub(&a_xi).norm();
        prop_assert!(err <= 1e-4 * (1.0 + a2_xi.norm()), "{} vs {}", err, a2_xi.norm());
    }
}
