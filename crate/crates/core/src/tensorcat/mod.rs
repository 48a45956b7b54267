//! Tensor products of block algebras and their affiliated operators, the
//! functors between algebras and affiliated rings, and machine checks of the
//! tensor-category coherence axioms.

mod coherence;
mod morphism;

pub use coherence::{coherence_check, CoherenceReport, CoherenceRow, Obj};
pub use morphism::{Morphism, MorphismKind, MORPHISM_TOL};

use std::sync::Arc;

use thiserror::Error;

use crate::blockvn::{BlockError, BlockOperator, FiniteBlockAlgebra};
use crate::linops::CMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum TensorError {
    #[error("tail conflict: {0}")]
    TailConflict(String),
    #[error("bad morphism: {0}")]
    BadMorphism(String),
    #[error(transparent)]
    Block(#[from] BlockError),
}

/// `M ⊗ N` for finite block lists: blocks `(i, j)` in lexicographic order,
/// dimension `n_i m_j`, weight `w_i v_j`.
pub fn tensor_algebra(m: &FiniteBlockAlgebra, n: &FiniteBlockAlgebra) -> Result<FiniteBlockAlgebra, TensorError> {
    if !m.is_finite() || !n.is_finite() {
        return Err(TensorError::TailConflict("tensor products need finitely many blocks".into()));
    }
    let mut shape = Vec::with_capacity(m.explicit_len() * n.explicit_len());
    let mut weights = Vec::with_capacity(shape.capacity());
    for (&di, &wi) in m.shape().iter().zip(m.explicit_weights()) {
        for (&dj, &wj) in n.shape().iter().zip(n.explicit_weights()) {
            shape.push(di * dj);
            weights.push(wi * wj);
        }
    }
    Ok(FiniteBlockAlgebra::new(shape, weights, None)?)
}

/// `A ⊗ B` with blocks `A_i ⊗ B_j`.
pub fn tensor_op(a: &BlockOperator, b: &BlockOperator) -> Result<BlockOperator, TensorError> {
    let alg = Arc::new(tensor_algebra(a.algebra(), b.algebra())?);
    tensor_op_into(alg, a, b)
}

/// `A ⊗ B` placed on an already built tensor algebra (shared across calls).
pub fn tensor_op_into(alg: Arc<FiniteBlockAlgebra>, a: &BlockOperator, b: &BlockOperator) -> Result<BlockOperator, TensorError> {
    let (Some(na), Some(nb)) = (a.block_count(), b.block_count()) else {
        return Err(TensorError::TailConflict("tensor products need finitely many blocks".into()));
    };
    let mut prefix = Vec::with_capacity(na * nb);
    for i in 0..na {
        let ai = a.block(i);
        for j in 0..nb {
            prefix.push(ai.kron(&b.block(j)));
        }
    }
    Ok(BlockOperator::new(alg, prefix, crate::blockvn::TailRule::Zero)?)
}

/// Object of the category of affiliated rings: the *-algebra of all block
/// operators over `algebra`, bounded or not.
#[derive(Clone, Debug, PartialEq)]
pub struct RingDescriptor {
    pub algebra: Arc<FiniteBlockAlgebra>,
}

impl RingDescriptor {
    /// Membership of an operator in the bounded part `R ∩ B(H)`.
    pub fn bounded_part_contains(&self, x: &BlockOperator) -> bool {
        **x.algebra() == *self.algebra && x.is_bounded()
    }
}

/// Morphism of affiliated rings: the unique extension of a blockwise morphism.
#[derive(Clone, Debug, PartialEq)]
pub struct RingMorphism {
    pub descriptor: Morphism,
}

impl RingMorphism {
    pub fn apply(&self, x: &BlockOperator) -> Result<BlockOperator, TensorError> {
        extend_morphism(&self.descriptor, x)
    }

    pub fn then(&self, next: &RingMorphism) -> Result<RingMorphism, TensorError> {
        Ok(RingMorphism { descriptor: self.descriptor.then(&next.descriptor)? })
    }
}

/// `E`: algebra ↦ affiliated ring.
pub fn functor_e(alg: &Arc<FiniteBlockAlgebra>) -> RingDescriptor {
    RingDescriptor { algebra: alg.clone() }
}

/// `F`: ring ↦ bounded part.
pub fn functor_f(ring: &RingDescriptor) -> Arc<FiniteBlockAlgebra> {
    ring.algebra.clone()
}

/// `E` on morphisms.
pub fn functor_e_morphism(phi: &Morphism) -> RingMorphism {
    RingMorphism { descriptor: phi.clone() }
}

/// `F` on morphisms: restriction to bounded operators.
pub fn functor_f_morphism(phi: &RingMorphism) -> Morphism {
    phi.descriptor.clone()
}

/// Extension of `φ` to affiliated operators, applied blockwise to the prefix
/// and to the tail formula.
pub fn extend_morphism(phi: &Morphism, x: &BlockOperator) -> Result<BlockOperator, TensorError> {
    phi.validate()?;
    phi.apply(x)
}

/// The center `⊕_k ℂ 1_{n_k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Center {
    /// Number of blocks; `None` if infinite.
    pub dimension: Option<usize>,
}

pub fn center(alg: &FiniteBlockAlgebra) -> Center {
    Center { dimension: alg.block_count() }
}

/// A factor has trivial center, i.e. exactly one block.
pub fn is_factor(alg: &FiniteBlockAlgebra) -> bool {
    alg.block_count() == Some(1)
}

/// Central element `Σ_k c_k 1_{n_k}` on the first `coeffs.len()` blocks.
pub fn central_element(alg: Arc<FiniteBlockAlgebra>, coeffs: &[num_complex::Complex64]) -> Result<BlockOperator, TensorError> {
    let prefix = coeffs.iter().enumerate().map(|(k, &c)| CMatrix::scalar(alg.dim(k), c)).collect();
    Ok(BlockOperator::new(alg, prefix, crate::blockvn::TailRule::Zero)?)
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64 as C64;

    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn single_blocks_multiply() {
        let t = tensor_algebra(&FiniteBlockAlgebra::single_block(2), &FiniteBlockAlgebra::single_block(3)).unwrap();
        assert_eq!(t, FiniteBlockAlgebra::single_block(6));
    }

    #[test]
    fn weights_multiply() {
        let m = FiniteBlockAlgebra::new(vec![1, 1], vec![0.5, 0.5], None).unwrap();
        let n = FiniteBlockAlgebra::new(vec![1, 1], vec![0.25, 0.75], None).unwrap();
        let t = tensor_algebra(&m, &n).unwrap();
        assert_eq!(t.explicit_weights(), &[0.125, 0.375, 0.125, 0.375]);
    }

    #[test]
    fn trace_is_multiplicative() {
        let m2 = Arc::new(FiniteBlockAlgebra::single_block(2));
        let p = BlockOperator::single_block(m2.clone(), 0, CMatrix::from_real_diagonal(&[1.0, 0.0])).unwrap();
        let pq = tensor_op(&p, &p).unwrap();
        assert_eq!(pq.trace().unwrap(), c(0.25, 0.0));
    }

    #[test]
    fn kronecker_of_diagonals() {
        let a = Arc::new(FiniteBlockAlgebra::single_block(2));
        let b = Arc::new(FiniteBlockAlgebra::single_block(1));
        let x = BlockOperator::single_block(a, 0, CMatrix::from_real_diagonal(&[1.0, 2.0])).unwrap();
        let y = BlockOperator::single_block(b, 0, CMatrix::scalar(1, c(3.0, 0.0))).unwrap();
        assert_eq!(tensor_op(&x, &y).unwrap().block(0), CMatrix::from_real_diagonal(&[3.0, 6.0]));
        let one = tensor_op(&BlockOperator::identity(x.algebra().clone()), &BlockOperator::identity(y.algebra().clone()))
            .unwrap();
        assert_eq!(one, BlockOperator::identity(one.algebra().clone()));
    }

    #[test]
    fn infinite_tail_rejected() {
        let d = FiniteBlockAlgebra::dyadic_diagonal();
        assert!(matches!(tensor_algebra(&d, &d), Err(TensorError::TailConflict(_))));
    }

    #[test]
    fn centers() {
        assert!(is_factor(&FiniteBlockAlgebra::single_block(5)));
        let two = FiniteBlockAlgebra::new(vec![2, 3], vec![0.5, 0.5], None).unwrap();
        assert!(!is_factor(&two));
        assert_eq!(center(&two).dimension, Some(2));
        assert_eq!(center(&FiniteBlockAlgebra::dyadic_diagonal()).dimension, None);
    }

    #[test]
    fn functor_round_trips() {
        let m2 = Arc::new(FiniteBlockAlgebra::single_block(2));
        assert_eq!(functor_f(&functor_e(&m2)), m2);
        let ring = RingDescriptor { algebra: Arc::new(FiniteBlockAlgebra::new(vec![1, 2], vec![0.5, 0.5], None).unwrap()) };
        assert_eq!(functor_e(&functor_f(&ring)), ring);
    }
}
