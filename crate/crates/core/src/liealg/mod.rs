//! Lie algebras of strongly closed subgroups of the unitary group of a block
//! algebra: sampled membership, closure under sums, real multiples and
//! brackets, product formulas, induced homomorphisms and the local
//! (non-)injectivity of the exponential map.

mod closure;
mod homomorphism;
mod injectivity;
mod product;

pub use closure::{lie_closure_check, LieReport, LieRow, LIE_HEADER};
pub use homomorphism::{induced_hom_residuals, induced_lie_hom, HomResiduals};
pub use injectivity::{exp_injectivity_probe, period_element, InjectivityReport, Witness, ROUNDTRIP_TOL, WITNESS_COUNT};
pub use product::{error_schedule, Nelson, ProductFormula, ProductRegistry, Trotter};

use std::f64::consts::{E, PI};

use thiserror::Error;

use crate::blockvn::{BlockError, BlockOperator, Formula};
use crate::linops::{CMatrix, HERMITIAN_TOL};
use crate::tensorcat::TensorError;
use crate::topologies::TopologyError;

#[derive(Debug, Error, PartialEq)]
pub enum LieError {
    #[error("operator is not skew-adjoint")]
    NotSkewAdjoint,
    #[error("operator is unbounded")]
    Unbounded,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Default sample times for sampled Lie-algebra membership.
pub fn default_t_samples() -> Vec<f64> {
    let base = [1.0, 0.5, 0.25, PI / 8.0, E / 3.0];
    base.iter().flat_map(|&t| [t, -t]).collect()
}

/// Block operator with `A* = -A`.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewAdjointOp(BlockOperator);

impl SkewAdjointOp {
    pub fn new(op: BlockOperator) -> Result<Self, LieError> {
        if op.is_skew_adjoint(HERMITIAN_TOL) {
            Ok(SkewAdjointOp(op))
        } else {
            Err(LieError::NotSkewAdjoint)
        }
    }

    /// `i·H` for a self-adjoint `H`.
    pub fn from_hermitian(h: &BlockOperator) -> Result<Self, LieError> {
        Self::new(h.scale(crate::linops::I))
    }

    pub fn op(&self) -> &BlockOperator {
        &self.0
    }

    pub fn into_op(self) -> BlockOperator {
        self.0
    }

    /// `e^{tA}`: dense exponential on the prefix, closed form on the tail.
    pub fn exp(&self, t: f64) -> Result<BlockOperator, LieError> {
        Ok(self.0.exp_scaled(t)?)
    }

    pub fn add(&self, other: &SkewAdjointOp) -> Result<SkewAdjointOp, LieError> {
        Ok(SkewAdjointOp(self.0.add(&other.0)?))
    }

    pub fn scale(&self, alpha: f64) -> SkewAdjointOp {
        SkewAdjointOp(self.0.scale_real(alpha))
    }

    /// `[A, B] = AB - BA`, again skew-adjoint.
    pub fn bracket(&self, other: &SkewAdjointOp) -> Result<SkewAdjointOp, LieError> {
        Ok(SkewAdjointOp(self.0.commutator(&other.0)?))
    }
}

/// Strongly closed subgroup of `U(M)` with a decidable membership test.
#[derive(Clone, Debug, PartialEq)]
pub enum SubgroupKind {
    FullUnitary,
    /// Unitaries commuting with every listed bounded operator.
    CommutantFixed(Vec<BlockOperator>),
    /// `det(u_k) = 1` on every block.
    BlockDeterminantOne,
    /// Unitaries diagonal in every block.
    DiagonalUnitaries,
}

impl SubgroupKind {
    pub fn name(&self) -> &'static str {
        match self {
            SubgroupKind::FullUnitary => "full_unitary",
            SubgroupKind::CommutantFixed(_) => "commutant_fixed",
            SubgroupKind::BlockDeterminantOne => "block_determinant_one",
            SubgroupKind::DiagonalUnitaries => "diagonal_unitaries",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubgroupSpec {
    pub kind: SubgroupKind,
    pub tol: f64,
}

impl SubgroupSpec {
    pub fn new(kind: SubgroupKind, tol: f64) -> Self {
        SubgroupSpec { kind, tol }
    }
}

/// Unitarity residual of a tail formula: `| |c| - 1 |` for a constant modulus,
/// infinite otherwise.
fn tail_unitary_residual(f: &Formula) -> f64 {
    if f.rate().re == 0.0 && f.coefficients().len() == 1 {
        (f.coefficients()[0].norm() - 1.0).abs()
    } else {
        f64::INFINITY
    }
}

/// Largest violation of unitarity or of the subgroup predicate.
pub fn group_residual(u: &BlockOperator, spec: &SubgroupSpec) -> Result<f64, LieError> {
    if !u.is_bounded() {
        return Err(LieError::Unbounded);
    }
    // finite algebras are checked block by block, infinite ones on the prefix plus the tail formula
    let (blocks, on_tail) = match u.block_count() {
        Some(c) => (c, false),
        None => (u.prefix_len(), true),
    };
    let mut residual = (0..blocks).map(|k| u.block(k).unitary_residual()).fold(0.0, f64::max);
    if on_tail {
        residual = residual.max(tail_unitary_residual(&u.tail_formula()));
    }
    let kind_residual = match &spec.kind {
        SubgroupKind::FullUnitary => 0.0,
        SubgroupKind::CommutantFixed(ops) => {
            let mut r: f64 = 0.0;
            for s in ops {
                if s.algebra() != u.algebra() {
                    return Err(BlockError::AlgebraMismatch.into());
                }
                let norm = s.sup_norm().finite().ok_or(LieError::Unbounded)?;
                // beyond both prefixes the blocks are scalars, which commute
                let shared = match u.block_count() {
                    Some(c) => c,
                    None => s.prefix_len().max(u.prefix_len()),
                };
                for k in 0..shared {
                    let c = u.block(k).commutator(&s.block(k));
                    r = r.max(c.op_norm() / (1.0 + norm));
                }
            }
            r
        }
        SubgroupKind::BlockDeterminantOne => {
            let mut r = (0..blocks).map(|k| (u.block(k).determinant() - 1.0).norm()).fold(0.0, f64::max);
            if on_tail {
                let d = u.algebra().dim(blocks) as u32;
                let det = u.tail_formula().pow(d);
                r = r.max(match det.constant_value() {
                    Some(c) => (c - 1.0).norm(),
                    None => f64::INFINITY,
                });
            }
            r
        }
        SubgroupKind::DiagonalUnitaries => (0..blocks).map(|k| u.block(k).off_diagonal_norm()).fold(0.0, f64::max),
    };
    Ok(residual.max(kind_residual))
}

pub fn in_group(u: &BlockOperator, spec: &SubgroupSpec) -> Result<bool, LieError> {
    Ok(group_residual(u, spec)? <= spec.tol)
}

/// `(t, residual of e^{tA})` for every sample.
pub fn lie_residuals(a: &SkewAdjointOp, spec: &SubgroupSpec, t_samples: &[f64]) -> Result<Vec<(f64, f64)>, LieError> {
    if t_samples.is_empty() {
        return Err(LieError::BadParameter("no t samples".into()));
    }
    t_samples.iter().map(|&t| Ok((t, group_residual(&a.exp(t)?, spec)?))).collect()
}

/// `e^{tA} ∈ G` for every sampled `t`.
pub fn in_lie_algebra(a: &SkewAdjointOp, spec: &SubgroupSpec, t_samples: &[f64]) -> Result<bool, LieError> {
    Ok(lie_residuals(a, spec, t_samples)?.iter().all(|(_, r)| *r <= spec.tol))
}

/// Skew-Hermitian matrix projected onto the Lie algebra of `kind` on one block
/// (used to generate members): traceless for determinant one, diagonal for
/// the diagonal group.
pub fn project_generator(kind: &SubgroupKind, m: &CMatrix) -> CMatrix {
    match kind {
        SubgroupKind::BlockDeterminantOne => {
            let n = m.dim();
            let shift = m.trace() / n as f64;
            m - &CMatrix::scalar(n, shift)
        }
        SubgroupKind::DiagonalUnitaries => {
            let d: Vec<_> = (0..m.dim()).map(|i| m[(i, i)]).collect();
            CMatrix::from_diagonal(&d)
        }
        _ => m.clone(),
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use num_complex::Complex64 as C64;

    use super::*;
    use crate::blockvn::FiniteBlockAlgebra;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pauli_x() -> CMatrix {
        CMatrix::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn pauli_z() -> CMatrix {
        CMatrix::from_real_diagonal(&[1.0, -1.0])
    }

    fn m2() -> Arc<FiniteBlockAlgebra> {
        Arc::new(FiniteBlockAlgebra::single_block(2))
    }

    fn all_specs(alg: &Arc<FiniteBlockAlgebra>) -> Vec<SubgroupSpec> {
        let s = BlockOperator::single_block(alg.clone(), 0, pauli_z()).unwrap();
        vec![
            SubgroupSpec::new(SubgroupKind::FullUnitary, 1e-8),
            SubgroupSpec::new(SubgroupKind::CommutantFixed(vec![s]), 1e-8),
            SubgroupSpec::new(SubgroupKind::BlockDeterminantOne, 1e-8),
            SubgroupSpec::new(SubgroupKind::DiagonalUnitaries, 1e-8),
        ]
    }

    #[test]
    fn identity_in_every_group() {
        let alg = m2();
        let one = BlockOperator::identity(alg.clone());
        for spec in all_specs(&alg) {
            assert!(in_group(&one, &spec).unwrap(), "{:?}", spec.kind.name());
        }
    }

    #[test]
    fn determinant_of_diag_i_minus_i() {
        let u = BlockOperator::single_block(m2(), 0, CMatrix::from_diagonal(&[c(0.0, 1.0), c(0.0, -1.0)])).unwrap();
        assert!(in_group(&u, &SubgroupSpec::new(SubgroupKind::BlockDeterminantOne, 1e-12)).unwrap());
    }

    #[test]
    fn sigma_x_does_not_commute_with_sigma_z() {
        let alg = m2();
        let u = BlockOperator::single_block(alg.clone(), 0, pauli_x()).unwrap();
        let spec = &all_specs(&alg)[1];
        assert!(!in_group(&u, spec).unwrap());
    }

    #[test]
    fn zero_generator_in_every_lie_algebra() {
        let alg = m2();
        let zero = SkewAdjointOp::new(BlockOperator::zero(alg.clone())).unwrap();
        for spec in all_specs(&alg) {
            assert!(in_lie_algebra(&zero, &spec, &default_t_samples()).unwrap());
        }
    }

    #[test]
    fn diagonal_generator() {
        let alg = m2();
        let a = SkewAdjointOp::new(
            BlockOperator::single_block(alg.clone(), 0, CMatrix::from_diagonal(&[c(0.0, 1.0), c(0.0, 2.0)])).unwrap(),
        )
        .unwrap();
        assert!(in_lie_algebra(&a, &all_specs(&alg)[3], &default_t_samples()).unwrap());
    }

    #[test]
    fn i_sigma_x_leaves_commutant_at_quarter_turn() {
        let alg = m2();
        let a = SkewAdjointOp::new(BlockOperator::single_block(alg.clone(), 0, pauli_x().scale(crate::linops::I)).unwrap())
            .unwrap();
        let spec = &all_specs(&alg)[1];
        let r = lie_residuals(&a, spec, &[PI / 2.0]).unwrap();
        // e^{iπσx/2} = iσx, and ‖[iσx, σz]‖ = 2, normalized by 1 + ‖σz‖ = 2
        assert!((r[0].1 - 1.0).abs() < 1e-12);
        assert!(!in_lie_algebra(&a, spec, &default_t_samples()).unwrap());
    }

    #[test]
    fn unimodular_tail_is_unitary() {
        let alg = Arc::new(FiniteBlockAlgebra::dyadic_diagonal());
        let a = SkewAdjointOp::new(BlockOperator::from_formula(alg, Formula::polynomial(vec![c(0.0, 0.3), c(0.0, 1.0)])))
            .unwrap();
        let spec = SubgroupSpec::new(SubgroupKind::FullUnitary, 1e-12);
        assert!(in_lie_algebra(&a, &spec, &default_t_samples()).unwrap());
        // the determinant on 1x1 tail blocks is the phase itself
        let det = SubgroupSpec::new(SubgroupKind::BlockDeterminantOne, 1e-8);
        assert!(!in_lie_algebra(&a, &det, &default_t_samples()).unwrap());
    }

    #[test]
    fn not_skew_rejected() {
        assert_eq!(SkewAdjointOp::new(BlockOperator::identity(m2())), Err(LieError::NotSkewAdjoint));
    }
}
