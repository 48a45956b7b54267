use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::TensorError;
use crate::blockvn::{BlockOperator, FiniteBlockAlgebra};
use crate::linops::{CMatrix, UNITARY_TOL};

/// Tolerance for the unital *-homomorphism checks on matrix units.
pub const MORPHISM_TOL: f64 = 1e-11;

/// Blockwise unital *-homomorphism between block algebras.
#[derive(Clone, Debug, PartialEq)]
pub enum MorphismKind {
    Identity,
    /// Target block `i` is source block `perm[i]` for `i < perm.len()`;
    /// later blocks stay in place.
    BlockPermutation(Vec<usize>),
    /// `X_k ↦ w_k X_k w_k*` on the first `w.len()` blocks.
    UnitaryConjugation(Vec<CMatrix>),
    /// `X_k ↦ X_k ⊗ 1_m`.
    Ampliation(usize),
    /// Applied left to right.
    Composite(Vec<Morphism>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Morphism {
    kind: MorphismKind,
    source: Arc<FiniteBlockAlgebra>,
    target: Arc<FiniteBlockAlgebra>,
}

fn bad(msg: impl Into<String>) -> TensorError {
    TensorError::BadMorphism(msg.into())
}

impl Morphism {
    pub fn identity(alg: Arc<FiniteBlockAlgebra>) -> Self {
        Morphism { kind: MorphismKind::Identity, source: alg.clone(), target: alg }
    }

    /// Reorders the first `perm.len()` blocks. Target weights stay attached to
    /// positions, so the map preserves the trace iff it only swaps blocks of
    /// equal weight.
    pub fn block_permutation(alg: Arc<FiniteBlockAlgebra>, perm: Vec<usize>) -> Result<Self, TensorError> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(bad(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        if let Some(count) = alg.block_count() {
            if n > count {
                return Err(bad(format!("permutation of {n} blocks on an algebra with {count}")));
            }
        }
        let expanded = alg.expanded(n);
        let mut shape = expanded.shape().to_vec();
        for (i, &p) in perm.iter().enumerate() {
            shape[i] = expanded.shape()[p];
        }
        let target = FiniteBlockAlgebra::with_tail_dim(
            shape,
            expanded.explicit_weights().to_vec(),
            expanded.tail_ratio(),
            expanded.tail().map_or(1, |t| t.block_dim),
        )?;
        let target = Arc::new(target);
        let target = if *target == *alg { alg.clone() } else { target };
        let m = Morphism { kind: MorphismKind::BlockPermutation(perm), source: alg, target };
        m.validate()?;
        Ok(m)
    }

    pub fn unitary_conjugation(alg: Arc<FiniteBlockAlgebra>, w: Vec<CMatrix>) -> Result<Self, TensorError> {
        for (k, u) in w.iter().enumerate() {
            if !alg.contains_block(k) || u.dim() != alg.dim(k) {
                return Err(bad(format!("conjugating unitary {k} does not fit the block")));
            }
            let r = u.unitary_residual();
            if r > UNITARY_TOL {
                return Err(bad(format!("conjugating matrix {k} is not unitary (residual {r:.3e})")));
            }
        }
        let m = Morphism { kind: MorphismKind::UnitaryConjugation(w), source: alg.clone(), target: alg };
        m.validate()?;
        Ok(m)
    }

    pub fn ampliation(alg: Arc<FiniteBlockAlgebra>, m: usize) -> Result<Self, TensorError> {
        if m == 0 {
            return Err(bad("ampliation multiplicity must be positive"));
        }
        let target = FiniteBlockAlgebra::with_tail_dim(
            alg.shape().iter().map(|n| n * m).collect(),
            alg.explicit_weights().to_vec(),
            alg.tail_ratio(),
            alg.tail().map_or(1, |t| t.block_dim * m),
        )?;
        let target = if m == 1 { alg.clone() } else { Arc::new(target) };
        let out = Morphism { kind: MorphismKind::Ampliation(m), source: alg, target };
        out.validate()?;
        Ok(out)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Morphism) -> Result<Self, TensorError> {
        if *self.target != *next.source {
            return Err(bad("composition: target and source differ"));
        }
        let mut parts = match &self.kind {
            MorphismKind::Composite(v) => v.clone(),
            _ => vec![self.clone()],
        };
        match &next.kind {
            MorphismKind::Composite(v) => parts.extend(v.iter().cloned()),
            _ => parts.push(next.clone()),
        }
        Ok(Morphism { kind: MorphismKind::Composite(parts), source: self.source.clone(), target: next.target.clone() })
    }

    pub fn kind(&self) -> &MorphismKind {
        &self.kind
    }

    pub fn source(&self) -> &Arc<FiniteBlockAlgebra> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteBlockAlgebra> {
        &self.target
    }

    /// Applies the map blockwise, including to the tail formula. Defined on
    /// every affiliated operator, bounded or not.
    pub fn apply(&self, x: &BlockOperator) -> Result<BlockOperator, TensorError> {
        if **x.algebra() != *self.source {
            return Err(bad("operator does not live on the source algebra"));
        }
        let tail = x.tail_formula();
        match &self.kind {
            MorphismKind::Identity => Ok(x.with_algebra(self.target.clone())?),
            MorphismKind::BlockPermutation(perm) => {
                let y = x.materialized(perm.len());
                let mut prefix = y.prefix().to_vec();
                for (i, &p) in perm.iter().enumerate() {
                    prefix[i] = y.prefix()[p].clone();
                }
                Ok(BlockOperator::with_formula(self.target.clone(), prefix, tail)?)
            }
            MorphismKind::UnitaryConjugation(w) => {
                let y = x.materialized(w.len());
                let prefix = y
                    .prefix()
                    .iter()
                    .enumerate()
                    .map(|(k, m)| match w.get(k) {
                        Some(u) => &(u * m) * &u.adjoint(),
                        None => m.clone(),
                    })
                    .collect();
                Ok(BlockOperator::with_formula(self.target.clone(), prefix, tail)?)
            }
            MorphismKind::Ampliation(m) => {
                let id = CMatrix::identity(*m);
                let prefix = x.prefix().iter().map(|b| b.kron(&id)).collect();
                Ok(BlockOperator::with_formula(self.target.clone(), prefix, tail)?)
            }
            MorphismKind::Composite(parts) => {
                let mut y = x.clone();
                for p in parts {
                    y = p.apply(&y)?;
                }
                Ok(y.with_algebra(self.target.clone())?)
            }
        }
    }

    /// Bounded generators used by [`Morphism::validate`]: the identity and
    /// the matrix units of the first few blocks (including one tail block).
    fn generators(&self) -> Vec<BlockOperator> {
        let alg = &self.source;
        let mut out = vec![BlockOperator::identity(alg.clone())];
        let blocks = match alg.block_count() {
            Some(c) => c,
            None => alg.explicit_len().max(self.touched_blocks()) + 1,
        };
        for k in 0..blocks.min(12) {
            let n = alg.dim(k);
            for (r, c) in [(0, 0), (0, n - 1), (n - 1, 0)] {
                let mut e = vec![C64::new(0.0, 0.0); n * n];
                e[r * n + c] = C64::new(1.0, 0.0);
                let m = CMatrix::from_rows(n, &e).expect("n*n entries");
                if let Ok(op) = BlockOperator::single_block(alg.clone(), k, m) {
                    out.push(op);
                }
            }
        }
        out
    }

    fn touched_blocks(&self) -> usize {
        match &self.kind {
            MorphismKind::BlockPermutation(p) => p.len(),
            MorphismKind::UnitaryConjugation(w) => w.len(),
            MorphismKind::Composite(parts) => parts.iter().map(|p| p.touched_blocks()).max().unwrap_or(0),
            _ => 0,
        }
    }

    /// Unital, *-preserving and multiplicative on matrix units within [`MORPHISM_TOL`].
    pub fn validate(&self) -> Result<(), TensorError> {
        let one = self.apply(&BlockOperator::identity(self.source.clone()))?;
        let target_one = BlockOperator::identity(self.target.clone());
        if one.max_block_diff(&target_one) > MORPHISM_TOL {
            return Err(bad("map is not unital"));
        }
        let gens = self.generators();
        let images: Vec<BlockOperator> = gens.iter().map(|g| self.apply(g)).collect::<Result<_, _>>()?;
        for (g, img) in gens.iter().zip(&images) {
            if self.apply(&g.adjoint())?.max_block_diff(&img.adjoint()) > MORPHISM_TOL {
                return Err(bad("map does not preserve adjoints"));
            }
        }
        for (i, g) in gens.iter().enumerate().skip(1).take(8) {
            for (j, h) in gens.iter().enumerate().skip(1).take(8) {
                let lhs = self.apply(&g.mul(h)?)?;
                let rhs = images[i].mul(&images[j])?;
                if lhs.max_block_diff(&rhs) > MORPHISM_TOL {
                    return Err(bad("map is not multiplicative"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockvn::Formula;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_is_identity() {
        let alg = Arc::new(FiniteBlockAlgebra::dyadic_diagonal());
        let x = BlockOperator::from_formula(alg.clone(), Formula::index());
        assert_eq!(Morphism::identity(alg).apply(&x).unwrap(), x);
    }

    #[test]
    fn permutation_reindexes_tail_operator() {
        let alg = Arc::new(FiniteBlockAlgebra::dyadic_diagonal());
        let x = BlockOperator::from_formula(alg.clone(), Formula::index());
        let phi = Morphism::block_permutation(alg, vec![2, 0, 1]).unwrap();
        let y = phi.apply(&x).unwrap();
        assert_eq!(y.block(0)[(0, 0)], c(2.0, 0.0));
        assert_eq!(y.block(1)[(0, 0)], c(0.0, 0.0));
        assert_eq!(y.block(5)[(0, 0)], c(5.0, 0.0));
    }

    #[test]
    fn equal_weight_permutation_preserves_trace() {
        let alg = Arc::new(FiniteBlockAlgebra::new(vec![1, 1, 2], vec![0.25, 0.25, 0.5], None).unwrap());
        let x = BlockOperator::new(
            alg.clone(),
            vec![CMatrix::scalar(1, c(3.0, 0.0)), CMatrix::scalar(1, c(-1.0, 2.0)), CMatrix::identity(2)],
            crate::blockvn::TailRule::Zero,
        )
        .unwrap();
        let phi = Morphism::block_permutation(alg, vec![1, 0, 2]).unwrap();
        let y = phi.apply(&x).unwrap();
        assert!((y.trace().unwrap() - x.trace().unwrap()).norm() < 1e-15);
    }

    #[test]
    fn non_permutation_rejected() {
        let alg = Arc::new(FiniteBlockAlgebra::dyadic_diagonal());
        assert!(matches!(Morphism::block_permutation(alg, vec![0, 0]), Err(TensorError::BadMorphism(_))));
    }

    #[test]
    fn non_unitary_conjugation_rejected() {
        let alg = Arc::new(FiniteBlockAlgebra::single_block(2));
        let w = CMatrix::from_real_diagonal(&[1.0, 2.0]);
        assert!(matches!(Morphism::unitary_conjugation(alg, vec![w]), Err(TensorError::BadMorphism(_))));
    }

    #[test]
    fn ampliation_kronecker() {
        let alg = Arc::new(FiniteBlockAlgebra::single_block(2));
        let m = CMatrix::from_real_rows(2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let x = BlockOperator::single_block(alg.clone(), 0, m.clone()).unwrap();
        let phi = Morphism::ampliation(alg, 2).unwrap();
        let y = phi.apply(&x).unwrap();
        assert_eq!(y.block(0), m.kron(&CMatrix::identity(2)));
    }
}
