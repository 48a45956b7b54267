//! Seeded generators for matrices, algebras and block operators.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::blockvn::{BlockOperator, FiniteBlockAlgebra, Formula};
use crate::linops::{self, CMatrix};

/// Entries uniform in the unit square `[-1, 1] + i[-1, 1]`.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let e: Vec<C64> = (0..n * n)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    CMatrix::from_rows(n, &e).expect("n*n entries")
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let m = random_matrix(rng, n);
    (&m + &m.adjoint()).scale(C64::new(0.5, 0.0))
}

pub fn random_skew<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    random_hermitian(rng, n).scale(linops::I)
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    linops::matrix_exp(&random_skew(rng, n).scale(C64::new(2.0, 0.0)))
}

fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Finite algebra with `1..=max_blocks` blocks of size `1..=max_dim` and
/// random positive weights summing to one.
pub fn random_finite_algebra<R: Rng + ?Sized>(rng: &mut R, max_blocks: usize, max_dim: usize) -> FiniteBlockAlgebra {
    let count = rng.random_range(1..=max_blocks);
    let shape: Vec<usize> = (0..count).map(|_| rng.random_range(1..=max_dim)).collect();
    let raw: Vec<f64> = (0..count).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    // put the rounding error on the last block so the sum is 1 to within an ulp
    let head: f64 = weights[..count - 1].iter().sum();
    weights[count - 1] = 1.0 - head;
    FiniteBlockAlgebra::new(shape, weights, None).expect("normalized weights")
}

/// Algebra with an explicit prefix of `1..=max_blocks` blocks and a geometric tail.
pub fn random_tailed_algebra<R: Rng + ?Sized>(rng: &mut R, max_blocks: usize, max_dim: usize) -> FiniteBlockAlgebra {
    let count = rng.random_range(1..=max_blocks);
    let shape: Vec<usize> = (0..count).map(|_| rng.random_range(1..=max_dim)).collect();
    let raw: Vec<f64> = (0..count).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let prefix_mass = rng.random_range(0.3..0.9);
    let weights = raw.iter().map(|w| w / total * prefix_mass).collect();
    let ratio = rng.random_range(0.2..0.8);
    FiniteBlockAlgebra::new(shape, weights, Some(ratio)).expect("prefix mass below one")
}

/// Bounded operator with explicit matrices on every explicit block and a
/// constant tail.
pub fn random_bounded_operator<R: Rng + ?Sized>(rng: &mut R, alg: Arc<FiniteBlockAlgebra>) -> BlockOperator {
    let prefix = (0..alg.explicit_len()).map(|k| random_matrix(rng, alg.dim(k))).collect();
    let tail = if alg.is_finite() { Formula::zero() } else { Formula::constant(random_complex(rng)) };
    BlockOperator::with_formula(alg, prefix, tail).expect("dimensions match")
}

/// Tail formula drawn from the polynomial part of the grammar (degree <= 2);
/// unbounded whenever the degree is positive.
pub fn random_poly_tail<R: Rng + ?Sized>(rng: &mut R) -> Formula {
    let degree = rng.random_range(0..=2);
    Formula::polynomial((0..=degree).map(|_| random_complex(rng)).collect())
}

/// Operator on `alg` with `prefix_len` explicit blocks (capped by the block
/// count) and, on infinite algebras, a random polynomial tail.
pub fn random_operator<R: Rng + ?Sized>(rng: &mut R, alg: Arc<FiniteBlockAlgebra>, prefix_len: usize) -> BlockOperator {
    let len = match alg.block_count() {
        Some(c) => prefix_len.min(c),
        None => prefix_len,
    };
    let prefix = (0..len).map(|k| random_matrix(rng, alg.dim(k))).collect();
    let tail = if alg.is_finite() { Formula::zero() } else { random_poly_tail(rng) };
    BlockOperator::with_formula(alg, prefix, tail).expect("dimensions match")
}

/// Skew-adjoint operator with explicit skew-Hermitian blocks and an
/// imaginary linear tail `i(c0 + c1 k)`.
pub fn random_skew_operator<R: Rng + ?Sized>(rng: &mut R, alg: Arc<FiniteBlockAlgebra>, prefix_len: usize) -> BlockOperator {
    let len = match alg.block_count() {
        Some(c) => prefix_len.min(c),
        None => prefix_len,
    };
    let prefix = (0..len).map(|k| random_skew(rng, alg.dim(k))).collect();
    let tail = if alg.is_finite() {
        Formula::zero()
    } else {
        Formula::polynomial(vec![C64::new(0.0, rng.random_range(-1.0..1.0)), C64::new(0.0, rng.random_range(-1.0..1.0))])
    };
    BlockOperator::with_formula(alg, prefix, tail).expect("dimensions match")
}
