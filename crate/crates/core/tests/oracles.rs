//! Worked examples checked against values computed independently here:
//! direct scalar arithmetic, nalgebra's own dense routines, or closed forms.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mvnlab::blockvn::{BlockOperator, BlockVector, FiniteBlockAlgebra, Formula, SupNorm, TailRule};
use mvnlab::liealg::{in_lie_algebra, lie_closure_check, Nelson, ProductFormula, SkewAdjointOp, SubgroupKind, SubgroupSpec, Trotter};
use mvnlab::linops::{self, CMatrix, CVector, I};
use mvnlab::random::{random_bounded_operator, random_hermitian, random_matrix, random_skew, random_unitary};
use mvnlab::tensorcat::{center, central_element, coherence_check, extend_morphism, tensor_op, Morphism};
use mvnlab::topologies::{measure_dist, set_dist, srt_dist, MetricParams};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent dense exponential.
fn expm(m: &CMatrix) -> DMatrix<C64> {
    m.inner().clone().exp()
}

fn dense_dist(a: &CMatrix, b: &DMatrix<C64>) -> f64 {
    (a.inner() - b).norm()
}

fn pauli(which: char) -> CMatrix {
    let (z, one) = (c(0.0, 0.0), c(1.0, 0.0));
    let e = match which {
        'x' => [z, one, one, z],
        'y' => [z, -I, I, z],
        _ => [one, z, z, -one],
    };
    CMatrix::from_rows(2, &e).unwrap()
}

fn single(n: usize) -> Arc<FiniteBlockAlgebra> {
    Arc::new(FiniteBlockAlgebra::single_block(n))
}

fn dyadic() -> Arc<FiniteBlockAlgebra> {
    Arc::new(FiniteBlockAlgebra::dyadic_diagonal())
}

// --- dense linear algebra -------------------------------------------------------

#[test]
fn spectral_reconstruction() {
    let h = random_hermitian(&mut rng(1), 5);
    let dec = linops::hermitian_eig(&h).unwrap();
    assert!(dec.reconstruct().diff_frobenius(&h) <= 1e-9);
}

#[test]
fn exponential_matches_dense_series_and_is_unitary() {
    let a = random_skew(&mut rng(2), 4);
    let u = linops::matrix_exp(&a);
    assert!(dense_dist(&u, &expm(&a)) < 1e-12);
    let residual = (&u * &u.adjoint()).diff_frobenius(&CMatrix::identity(4));
    assert!(residual <= 1e-9);
}

#[test]
fn non_normal_exponential() {
    let a = random_matrix(&mut rng(3), 4);
    assert!(dense_dist(&linops::matrix_exp(&a), &expm(&a)) < 1e-11);
}

#[test]
fn unitary_log_round_trip() {
    let u = random_unitary(&mut rng(4), 3);
    let l = linops::matrix_log_unitary(&u).unwrap();
    assert!(linops::matrix_exp(&l).diff_frobenius(&u) <= 1e-8);
}

#[test]
fn polar_reconstruction() {
    let a = random_matrix(&mut rng(5), 4);
    let (u, p) = linops::polar_decompose(&a);
    assert!((&u * &p).diff_frobenius(&a) <= 1e-9);
}

#[test]
fn cayley_round_trip() {
    let h = random_hermitian(&mut rng(6), 3);
    let u = linops::cayley(&h).unwrap();
    assert!(linops::inverse_cayley(&u).unwrap().diff_frobenius(&h) <= 1e-8);
}

#[test]
fn real_imaginary_recomposition() {
    let a = CMatrix::from_real_rows(2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
    let (re, im) = linops::re_im_split(&a);
    assert_eq!(re, CMatrix::from_real_rows(2, &[1.0, 0.5, 0.5, 1.0]).unwrap());
    // (A - A*)/(2i) = [[0, -i/2], [i/2, 0]]
    assert_eq!(im, CMatrix::from_rows(2, &[c(0.0, 0.0), c(0.0, -0.5), c(0.0, 0.5), c(0.0, 0.0)]).unwrap());
    assert!((&re + &im.scale(I)).diff_frobenius(&a) < 1e-15);
}

// --- block operators ------------------------------------------------------------

fn three_blocks() -> Arc<FiniteBlockAlgebra> {
    Arc::new(FiniteBlockAlgebra::new(vec![2, 3, 1], vec![0.2, 0.5, 0.3], None).unwrap())
}

#[test]
fn trace_is_cyclic() {
    let alg = three_blocks();
    let mut r = rng(7);
    let x = random_bounded_operator(&mut r, alg.clone());
    let y = random_bounded_operator(&mut r, alg);
    let d = x.mul(&y).unwrap().trace().unwrap() - y.mul(&x).unwrap().trace().unwrap();
    assert!(d.norm() <= 1e-12);
}

#[test]
fn trace_is_weighted_normalized_sum() {
    let alg = three_blocks();
    let x = random_bounded_operator(&mut rng(8), alg.clone());
    let mut oracle = c(0.0, 0.0);
    for k in 0..3 {
        let b = x.block(k);
        oracle += b.trace() * alg.weight(k) / b.dim() as f64;
    }
    assert!((x.trace().unwrap() - oracle).norm() < 1e-15);
}

#[test]
fn blockwise_associativity() {
    let alg = Arc::new(FiniteBlockAlgebra::new(vec![1, 2, 3, 2], vec![0.25; 4], None).unwrap());
    let mut r = rng(9);
    let (a, b, cc) =
        (random_bounded_operator(&mut r, alg.clone()), random_bounded_operator(&mut r, alg.clone()), random_bounded_operator(&mut r, alg));
    let lhs = a.mul(&b).unwrap().mul(&cc).unwrap();
    let rhs = a.mul(&b.mul(&cc).unwrap()).unwrap();
    assert!(lhs.max_block_diff(&rhs) <= 1e-11);
}

#[test]
fn exponential_decay_tail_sup() {
    let alg = Arc::new(FiniteBlockAlgebra::new(vec![2], vec![0.5], Some(0.5)).unwrap());
    let prefix = CMatrix::from_real_diagonal(&[0.25, -0.3]);
    let x = BlockOperator::with_formula(alg, vec![prefix], Formula::exponential(c(1.0, 0.0), c(-1.0, 0.0))).unwrap();
    // the tail starts at block 1 with e^{-1}
    assert_eq!(x.sup_norm(), SupNorm::Finite((-1.0f64).exp()));
    assert!(x.is_bounded());
}

#[test]
fn direct_sum_products() {
    let m = Arc::new(FiniteBlockAlgebra::new(vec![2], vec![1.0], None).unwrap());
    let n = Arc::new(FiniteBlockAlgebra::new(vec![3, 1], vec![0.5, 0.5], None).unwrap());
    let mut r = rng(10);
    let (a, cc) = (random_bounded_operator(&mut r, m.clone()), random_bounded_operator(&mut r, m));
    let (b, d) = (random_bounded_operator(&mut r, n.clone()), random_bounded_operator(&mut r, n));
    let lhs = a.direct_sum(0.4, &b).unwrap().mul(&cc.direct_sum(0.4, &d).unwrap()).unwrap();
    let rhs = a.mul(&cc).unwrap().direct_sum(0.4, &b.mul(&d).unwrap()).unwrap();
    assert!(lhs.max_block_diff(&rhs) <= 1e-12);
    assert_eq!(lhs.algebra().explicit_weights(), &[0.4, 0.3, 0.3]);
}

#[test]
fn adjoint_pairing() {
    let alg = three_blocks();
    let mut r = rng(11);
    let a = random_bounded_operator(&mut r, alg.clone());
    let vec_on = |r: &mut ChaCha8Rng| {
        BlockVector::from_parts(
            (0..3)
                .map(|k| {
                    let m = random_matrix(r, alg.dim(k));
                    (k, CVector::from_iterator(alg.dim(k), m.column(0).iter().copied()))
                })
                .collect(),
        )
    };
    let (xi, eta) = (vec_on(&mut r), vec_on(&mut r));
    let lhs = xi.inner(&a.apply(&eta).unwrap());
    let rhs = a.adjoint().apply(&xi).unwrap().inner(&eta);
    assert!((lhs - rhs).norm() <= 1e-12);
}

// --- metrics --------------------------------------------------------------------

#[test]
fn srt_zero_against_one() {
    let alg = single(1);
    let zero = BlockOperator::zero(alg.clone());
    let one = BlockOperator::identity(alg);
    // Re part only: |(0 - i)^{-1} - (1 - i)^{-1}| = |i - (1+i)/2| = √2/2, block weight 1/2
    let oracle = 0.5 * (I - c(1.0, 1.0) / 2.0).norm();
    let d = srt_dist(&zero, &one, 1e-12).unwrap();
    assert!((d.value - oracle).abs() < 1e-15);
    assert!((d.value - 0.35355).abs() < 1e-5);
}

#[test]
fn spike_metrics_closed_form() {
    let alg = dyadic();
    let zero = BlockOperator::zero(alg.clone());
    for n in [1usize, 5, 12, 30] {
        let a = BlockOperator::block_unit(alg.clone(), n, c(n as f64, 0.0)).unwrap();
        let w = 0.5f64.powi(n as i32 + 1);
        let srt = srt_dist(&a, &zero, 1e-12).unwrap();
        let resolvent_gap = ((c(n as f64, -1.0)).inv() - c(0.0, -1.0).inv()).norm();
        assert!((srt.value - w * resolvent_gap).abs() < 1e-15);
        assert!(srt.upper() <= 4.0 * 0.5f64.powi(n as i32));
        // the spike carries trace weight 2^{-(n+1)} and height n > 2^{-(n+1)}
        let rho = measure_dist(&a, &zero).unwrap();
        assert!((rho.value - w).abs() <= rho.bound + 1e-15);
        assert_eq!(a.sup_norm(), SupNorm::Finite(n as f64));
    }
}

#[test]
fn circle_sup_is_two() {
    let alg = single(1);
    let zero = BlockOperator::zero(alg.clone());
    let b = BlockOperator::scalar(alg, c(TAU, 0.0));
    let d = set_dist(&zero, &b, &MetricParams::default()).unwrap();
    // every m >= 1 attains sup |1 - e^{2πit}| = 2 at t = 1/2, summed as Σ 2^{-m}·2 with block weight 1/2
    let oracle: f64 = (1..=16).map(|m| 0.5f64.powi(m) * 2.0).sum::<f64>() * 0.5;
    assert!((d.value - oracle).abs() < 1e-12, "{d:?}");
    assert!(d.value <= 1.0 && d.upper() >= 1.0 - 1e-12);
}

#[test]
fn set_rate_is_one_over_n() {
    let alg = single(3);
    let h = random_hermitian(&mut rng(12), 3);
    let a = BlockOperator::single_block(alg.clone(), 0, h.clone()).unwrap();
    let dist = |n: f64| {
        let an = BlockOperator::single_block(alg.clone(), 0, &h + &CMatrix::scalar(3, c(1.0 / n, 0.0))).unwrap();
        set_dist(&an, &a, &MetricParams::default()).unwrap()
    };
    let (d1, d2) = (dist(100.0), dist(200.0));
    let ratio = d2.value / d1.value;
    assert!((ratio - 0.5).abs() < 0.02, "{ratio}");
    assert!(d2.upper() < d1.upper());
}

#[test]
fn measure_single_block_half() {
    let alg = single(1);
    let x = BlockOperator::scalar(alg.clone(), c(0.5, 0.0));
    let rho = measure_dist(&x, &BlockOperator::zero(alg)).unwrap();
    assert!((rho.value - 0.5).abs() <= rho.bound + 1e-15);
}

#[test]
fn measure_two_blocks_tenth() {
    let alg = Arc::new(FiniteBlockAlgebra::new(vec![1, 1], vec![0.1, 0.9], None).unwrap());
    let x = BlockOperator::new(alg.clone(), vec![CMatrix::scalar(1, c(5.0, 0.0)), CMatrix::zeros(1)], TailRule::Zero).unwrap();
    let rho = measure_dist(&x, &BlockOperator::zero(alg)).unwrap();
    assert!((rho.value - 0.1).abs() <= rho.bound + 1e-15, "{rho:?}");
}

#[test]
fn metric_triangle_inequalities() {
    let alg = three_blocks();
    let mut r = rng(13);
    let ops: Vec<_> = (0..3).map(|_| random_bounded_operator(&mut r, alg.clone())).collect();
    let (x, y, z) = (&ops[0], &ops[1], &ops[2]);
    let srt = |a, b| srt_dist(a, b, 1e-12).unwrap().value;
    assert!(srt(x, z) <= srt(x, y) + srt(y, z) + 1e-12);
    let rho = |a, b| measure_dist(a, b).unwrap();
    let (xz, xy, yz) = (rho(x, z), rho(x, y), rho(y, z));
    assert!(xz.lower() <= xy.upper() + yz.upper() + 1e-12);
}

// --- Lie algebras ---------------------------------------------------------------

#[test]
fn i_sigma_x_leaves_commutant() {
    let alg = single(2);
    let a = SkewAdjointOp::new(BlockOperator::single_block(alg.clone(), 0, pauli('x').scale(I)).unwrap()).unwrap();
    let s = BlockOperator::single_block(alg, 0, pauli('z')).unwrap();
    let spec = SubgroupSpec::new(SubgroupKind::CommutantFixed(vec![s]), 1e-8);
    assert!(!in_lie_algebra(&a, &spec, &[PI / 2.0]).unwrap());
    // e^{iπσx/2} = iσx, and iσx σz ≠ σz iσx
    let u = expm(&pauli('x').scale(c(0.0, PI / 2.0)));
    assert!(dense_dist(&pauli('x').scale(I), &u) < 1e-12);
}

#[test]
fn trotter_halves_against_dense_oracle() {
    let alg = single(2);
    let a = SkewAdjointOp::new(BlockOperator::single_block(alg.clone(), 0, pauli('x').scale(I)).unwrap()).unwrap();
    let b = SkewAdjointOp::new(BlockOperator::single_block(alg, 0, pauli('z').scale(I)).unwrap()).unwrap();
    let oracle = expm(&(&pauli('x') + &pauli('z')).scale(I));
    let err = |n| dense_dist(&Trotter.product(&a, &b, 1.0, n).unwrap().block(0), &oracle);
    for n in [64, 128, 256, 512] {
        let ratio = err(2 * n) / err(n);
        assert!((0.4..=0.6).contains(&ratio), "{n}: {ratio}");
    }
}

#[test]
fn nelson_pauli_against_dense_oracle() {
    let alg = single(2);
    let a = SkewAdjointOp::new(BlockOperator::single_block(alg.clone(), 0, pauli('x').scale(I)).unwrap()).unwrap();
    let b = SkewAdjointOp::new(BlockOperator::single_block(alg, 0, pauli('y').scale(I)).unwrap()).unwrap();
    let t = 0.5;
    // [iσx, iσy] = -(σxσy - σyσx) = -2iσz
    let commutator = &(&pauli('x') * &pauli('y')) - &(&pauli('y') * &pauli('x'));
    assert!(commutator.diff_frobenius(&pauli('z').scale(c(0.0, 2.0))) < 1e-15);
    let oracle = expm(&pauli('z').scale(c(0.0, -2.0 * t)));
    let errs: Vec<f64> =
        [8, 16, 32, 64, 128].iter().map(|&n| dense_dist(&Nelson.product(&a, &b, t, n).unwrap().block(0), &oracle)).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn pauli_pair_closure_with_zero_block() {
    let alg = Arc::new(FiniteBlockAlgebra::new(vec![2, 1], vec![0.5, 0.5], None).unwrap());
    let op = |m: CMatrix| {
        SkewAdjointOp::new(BlockOperator::new(alg.clone(), vec![m.scale(I), CMatrix::zeros(1)], TailRule::Zero).unwrap()).unwrap()
    };
    let spec = SubgroupSpec::new(SubgroupKind::FullUnitary, 1e-8);
    let report = lie_closure_check(&op(pauli('x')), &op(pauli('y')), 2.5, &spec, &mvnlab::liealg::default_t_samples()).unwrap();
    assert!(report.all_pass());
}

// --- tensor products and morphisms ------------------------------------------------

#[test]
fn kronecker_mixed_product() {
    let mut r = rng(14);
    let alg = single(2);
    for _ in 0..10 {
        let ops: Vec<_> = (0..4).map(|_| random_bounded_operator(&mut r, alg.clone())).collect();
        let lhs = tensor_op(&ops[0], &ops[1]).unwrap().mul(&tensor_op(&ops[2], &ops[3]).unwrap()).unwrap();
        let rhs = tensor_op(&ops[0].mul(&ops[2]).unwrap(), &ops[1].mul(&ops[3]).unwrap()).unwrap();
        assert!(lhs.block(0).diff_frobenius(&rhs.block(0)) <= 1e-12);
        let dense = ops[0].block(0).inner().kronecker(ops[1].block(0).inner());
        assert!(dense_dist(&tensor_op(&ops[0], &ops[1]).unwrap().block(0), &dense) == 0.0);
    }
}

#[test]
fn conjugation_of_unbounded_index_operator() {
    let alg = Arc::new(FiniteBlockAlgebra::new(vec![2, 3], vec![0.3, 0.3], Some(0.5)).unwrap());
    let mut r = rng(15);
    let w = vec![random_unitary(&mut r, 2), random_unitary(&mut r, 3)];
    let x = BlockOperator::with_formula(
        alg.clone(),
        vec![random_hermitian(&mut r, 2), random_hermitian(&mut r, 3)],
        Formula::index(),
    )
    .unwrap();
    let phi = Morphism::unitary_conjugation(alg, w.clone()).unwrap();
    let y = extend_morphism(&phi, &x).unwrap();
    for k in 0..2 {
        let oracle = &(&w[k] * &x.block(k)) * &w[k].adjoint();
        assert!(y.block(k).diff_frobenius(&oracle) < 1e-13);
    }
    assert_eq!(y.tail_formula(), Formula::index());
    assert!(!y.is_bounded());
}

#[test]
fn pentagon_on_m2_cubed() {
    let m2 = single(2);
    let report = coherence_check(&m2, &m2, &m2, 0).unwrap();
    assert!(report.all_pass());
    let pentagon = report.rows.iter().find(|r| r.check == "pentagon").unwrap();
    // (M2 ⊗ M2 ⊗ M2) ⊗ M2 has 16 x 16 = 256 matrix coordinates; 64 of them per triple factor
    assert!(pentagon.permutation_size >= 64);
}

#[test]
fn triangle_with_scalars_in_the_middle() {
    let report = coherence_check(&single(2), &single(1), &single(3), 1).unwrap();
    assert!(report.rows.iter().filter(|r| r.check == "triangle").all(|r| r.pass));
}

#[test]
fn weight_preserving_permutation_keeps_trace() {
    let alg = Arc::new(FiniteBlockAlgebra::new(vec![2, 2], vec![0.25, 0.25], Some(0.5)).unwrap());
    let x = BlockOperator::with_formula(
        alg.clone(),
        vec![CMatrix::from_real_diagonal(&[1.0, 2.0]), CMatrix::from_real_diagonal(&[5.0, -1.0])],
        Formula::index(),
    )
    .unwrap();
    let phi = Morphism::block_permutation(alg, vec![1, 0]).unwrap();
    let y = extend_morphism(&phi, &x).unwrap();
    assert_eq!(y.block(0), x.block(1));
    assert_eq!(y.block(1), x.block(0));
    assert_eq!(y.tail_formula(), Formula::index());
    // trace of the truncation to the two swapped blocks
    let cut = |z: &BlockOperator| BlockOperator::new(z.algebra().clone(), z.prefix().to_vec(), TailRule::Zero).unwrap();
    assert!((cut(&y).trace().unwrap() - cut(&x).trace().unwrap()).norm() < 1e-15);
}

#[test]
fn central_elements_commute() {
    let alg = three_blocks();
    assert_eq!(center(&alg).dimension, Some(3));
    let mut r = rng(16);
    let z = central_element(alg.clone(), &[c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0)]).unwrap();
    let x = random_bounded_operator(&mut r, alg);
    let comm = z.commutator(&x).unwrap();
    assert!(comm.sup_norm().finite().unwrap() <= 1e-12);
}
