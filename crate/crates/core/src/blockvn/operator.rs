use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::formula::{Formula, TailSup};
use super::vector::BlockVector;
use super::{BlockError, FiniteBlockAlgebra};
use crate::linops::{self, CMatrix};

/// How an operator acts on blocks `k >= K`.
#[derive(Clone, Debug, PartialEq)]
pub enum TailRule {
    Zero,
    /// `f(k)·1_{n_k}` for a closed-form scalar `f`.
    Scalar(Formula),
}

impl TailRule {
    pub fn from_formula(f: Formula) -> Self {
        if f.is_zero() {
            TailRule::Zero
        } else {
            TailRule::Scalar(f)
        }
    }

    pub fn formula(&self) -> Formula {
        match self {
            TailRule::Zero => Formula::zero(),
            TailRule::Scalar(f) => f.clone(),
        }
    }
}

/// Supremum of the blockwise operator norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SupNorm {
    Finite(f64),
    Unbounded,
}

impl SupNorm {
    pub fn finite(self) -> Option<f64> {
        match self {
            SupNorm::Finite(x) => Some(x),
            SupNorm::Unbounded => None,
        }
    }
}

/// Block-diagonal operator affiliated with a [`FiniteBlockAlgebra`].
///
/// Blocks `k < K` are explicit matrices; blocks `k >= K` are `f(k)·1`.
/// The operator may be unbounded; finitely supported vectors are always in
/// its domain.
#[derive(Clone)]
pub struct BlockOperator {
    algebra: Arc<FiniteBlockAlgebra>,
    prefix: Vec<CMatrix>,
    tail: TailRule,
}

impl fmt::Debug for BlockOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlockOperator")
            .field("prefix_len", &self.prefix.len())
            .field("prefix", &self.prefix)
            .field("tail", &self.tail)
            .finish()
    }
}

/// Exact equality of the represented operator (after aligning prefixes).
impl PartialEq for BlockOperator {
    fn eq(&self, other: &Self) -> bool {
        if *self.algebra != *other.algebra {
            return false;
        }
        if let Some(count) = self.algebra.block_count() {
            return (0..count).all(|i| self.block(i) == other.block(i));
        }
        let k = self.prefix.len().max(other.prefix.len());
        (0..k).all(|i| self.block(i) == other.block(i)) && self.tail.formula() == other.tail.formula()
    }
}

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

impl BlockOperator {
    pub fn new(algebra: Arc<FiniteBlockAlgebra>, prefix: Vec<CMatrix>, tail: TailRule) -> Result<Self, BlockError> {
        if let Some(count) = algebra.block_count() {
            if prefix.len() > count {
                return Err(BlockError::IndexOutOfRange { index: prefix.len() - 1, count });
            }
        }
        for (k, m) in prefix.iter().enumerate() {
            let expected = algebra.dim(k);
            if m.dim() != expected {
                return Err(BlockError::DimensionMismatch { block: k, expected, found: m.dim() });
            }
            if !m.is_finite() {
                return Err(BlockError::NonFinite { block: k });
            }
        }
        Ok(BlockOperator { algebra, prefix, tail }.normalized())
    }

    pub fn with_formula(algebra: Arc<FiniteBlockAlgebra>, prefix: Vec<CMatrix>, tail: Formula) -> Result<Self, BlockError> {
        Self::new(algebra, prefix, TailRule::from_formula(tail))
    }

    pub fn zero(algebra: Arc<FiniteBlockAlgebra>) -> Self {
        BlockOperator { algebra, prefix: Vec::new(), tail: TailRule::Zero }.normalized()
    }

    pub fn scalar(algebra: Arc<FiniteBlockAlgebra>, c: C64) -> Self {
        BlockOperator { algebra, prefix: Vec::new(), tail: TailRule::from_formula(Formula::constant(c)) }.normalized()
    }

    pub fn identity(algebra: Arc<FiniteBlockAlgebra>) -> Self {
        Self::scalar(algebra, ONE)
    }

    /// Diagonal operator `f(k)·1` on every block.
    pub fn from_formula(algebra: Arc<FiniteBlockAlgebra>, f: Formula) -> Self {
        BlockOperator { algebra, prefix: Vec::new(), tail: TailRule::from_formula(f) }.normalized()
    }

    /// `c·p_k`, where `p_k` is the unit of block `k`.
    pub fn block_unit(algebra: Arc<FiniteBlockAlgebra>, k: usize, c: C64) -> Result<Self, BlockError> {
        if !algebra.contains_block(k) {
            return Err(BlockError::IndexOutOfRange { index: k, count: algebra.explicit_len() });
        }
        let prefix = (0..=k)
            .map(|j| if j == k { CMatrix::scalar(algebra.dim(j), c) } else { CMatrix::zeros(algebra.dim(j)) })
            .collect();
        Self::new(algebra, prefix, TailRule::Zero)
    }

    /// Places `m` on block `k`, zero elsewhere.
    pub fn single_block(algebra: Arc<FiniteBlockAlgebra>, k: usize, m: CMatrix) -> Result<Self, BlockError> {
        if !algebra.contains_block(k) {
            return Err(BlockError::IndexOutOfRange { index: k, count: algebra.explicit_len() });
        }
        let mut prefix: Vec<CMatrix> = (0..k).map(|j| CMatrix::zeros(algebra.dim(j))).collect();
        prefix.push(m);
        Self::new(algebra, prefix, TailRule::Zero)
    }

    /// Finite algebras whose every block is explicit carry no tail.
    fn normalized(mut self) -> Self {
        if let Some(count) = self.algebra.block_count() {
            if self.prefix.len() >= count {
                self.tail = TailRule::Zero;
            }
        }
        self
    }

    pub fn algebra(&self) -> &Arc<FiniteBlockAlgebra> {
        &self.algebra
    }

    pub fn prefix(&self) -> &[CMatrix] {
        &self.prefix
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    pub fn tail(&self) -> &TailRule {
        &self.tail
    }

    pub fn tail_formula(&self) -> Formula {
        self.tail.formula()
    }

    /// Tail formula as seen by blocks that actually exist.
    fn effective_tail(&self) -> Formula {
        match self.algebra.block_count() {
            Some(count) if self.prefix.len() >= count => Formula::zero(),
            _ => self.tail.formula(),
        }
    }

    /// Materialized block `k`.
    pub fn block(&self, k: usize) -> CMatrix {
        match self.prefix.get(k) {
            Some(m) => m.clone(),
            None => CMatrix::scalar(self.algebra.dim(k), self.tail.formula().eval(k)),
        }
    }

    /// Number of blocks that exist, `None` if infinite.
    pub fn block_count(&self) -> Option<usize> {
        self.algebra.block_count()
    }

    /// Same operator with at least `len` explicit blocks (capped at the block count).
    pub fn materialized(&self, len: usize) -> BlockOperator {
        let len = match self.algebra.block_count() {
            Some(c) => len.min(c),
            None => len,
        };
        let mut out = self.clone();
        for k in out.prefix.len()..len {
            let b = self.block(k);
            out.prefix.push(b);
        }
        out.normalized()
    }

    fn check_same_algebra(&self, other: &BlockOperator) -> Result<(), BlockError> {
        if Arc::ptr_eq(&self.algebra, &other.algebra) || *self.algebra == *other.algebra {
            Ok(())
        } else {
            Err(BlockError::AlgebraMismatch)
        }
    }

    /// Blockwise binary operation; an out-of-grammar tail on a finite algebra
    /// is absorbed by materializing every block.
    fn zip_with<F, T>(&self, other: &BlockOperator, block_op: F, tail_op: T) -> Result<BlockOperator, BlockError>
    where
        F: Fn(&CMatrix, &CMatrix) -> CMatrix,
        T: Fn(&Formula, &Formula) -> Result<Formula, BlockError>,
    {
        self.check_same_algebra(other)?;
        let (fa, fb) = (self.tail.formula(), other.tail.formula());
        let tail = match tail_op(&fa, &fb) {
            Ok(f) => (f, None),
            Err(e) => match self.algebra.block_count() {
                Some(count) => (Formula::zero(), Some(count)),
                None => return Err(e),
            },
        };
        let len = tail.1.unwrap_or_else(|| self.prefix.len().max(other.prefix.len()));
        let prefix = (0..len).map(|k| block_op(&self.block(k), &other.block(k))).collect();
        Ok(BlockOperator { algebra: self.algebra.clone(), prefix, tail: TailRule::from_formula(tail.0) }.normalized())
    }

    pub fn add(&self, other: &BlockOperator) -> Result<BlockOperator, BlockError> {
        self.zip_with(other, |a, b| a + b, |f, g| Ok(f.add(g)?))
    }

    pub fn sub(&self, other: &BlockOperator) -> Result<BlockOperator, BlockError> {
        self.zip_with(other, |a, b| a - b, |f, g| Ok(f.sub(g)?))
    }

    pub fn mul(&self, other: &BlockOperator) -> Result<BlockOperator, BlockError> {
        self.zip_with(other, |a, b| a * b, |f, g| Ok(f.mul(g)))
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &BlockOperator) -> Result<BlockOperator, BlockError> {
        self.zip_with(other, |a, b| a.commutator(b), |f, g| Ok(f.mul(g).sub(&g.mul(f))?))
    }

    pub fn scale(&self, c: C64) -> BlockOperator {
        BlockOperator {
            algebra: self.algebra.clone(),
            prefix: self.prefix.iter().map(|m| m.scale(c)).collect(),
            tail: TailRule::from_formula(self.tail.formula().scale(c)),
        }
    }

    pub fn scale_real(&self, c: f64) -> BlockOperator {
        self.scale(C64::new(c, 0.0))
    }

    pub fn adjoint(&self) -> BlockOperator {
        BlockOperator {
            algebra: self.algebra.clone(),
            prefix: self.prefix.iter().map(|m| m.adjoint()).collect(),
            tail: TailRule::from_formula(self.tail.formula().conj()),
        }
    }

    /// Applies `op` to every explicit block and `tail_op` to the tail formula.
    pub fn map_blocks<F, T>(&self, block_op: F, tail_op: T) -> Result<BlockOperator, BlockError>
    where
        F: Fn(usize, &CMatrix) -> CMatrix,
        T: Fn(&Formula) -> Result<Formula, BlockError>,
    {
        let tail = tail_op(&self.tail.formula())?;
        let prefix = self.prefix.iter().enumerate().map(|(k, m)| block_op(k, m)).collect();
        BlockOperator::with_formula(self.algebra.clone(), prefix, tail)
    }

    /// `(Re A, Im A)` blockwise.
    pub fn re_im_split(&self) -> Result<(BlockOperator, BlockOperator), BlockError> {
        let adj = self.adjoint();
        let re = self.add(&adj)?.scale_real(0.5);
        let im = self.sub(&adj)?.scale(C64::new(0.0, -0.5));
        Ok((re, im))
    }

    /// `sup_k ||A_k||`, exact on the tail via the formula's monotonicity.
    pub fn sup_norm(&self) -> SupNorm {
        let prefix_sup = self.prefix.iter().map(|m| m.op_norm()).fold(0.0, f64::max);
        let f = self.effective_tail();
        let start = self.prefix.len();
        let explicit_end = self.algebra.explicit_len().max(start);
        let tail_sup = match self.algebra.block_count() {
            Some(count) => TailSup::Finite(f.sup_abs_range(start, count)),
            None => TailSup::Finite(f.sup_abs_range(start, explicit_end)).max(f.sup_abs_from(explicit_end)),
        };
        match tail_sup {
            TailSup::Finite(t) => SupNorm::Finite(prefix_sup.max(t)),
            TailSup::Unbounded => SupNorm::Unbounded,
        }
    }

    /// Membership in the bounded part `𝔐 = 𝔐̄ ∩ B(𝓗)`.
    pub fn is_bounded(&self) -> bool {
        matches!(self.sup_norm(), SupNorm::Finite(_))
    }

    /// Operator norm of block `k`.
    pub fn block_norm(&self, k: usize) -> f64 {
        match self.prefix.get(k) {
            Some(m) => m.op_norm(),
            None => self.tail.formula().abs_at(k),
        }
    }

    /// `τ(x) = Σ_k w_k tr(x_k)/n_k` with the tail summed in closed form.
    pub fn trace(&self) -> Result<C64, BlockError> {
        if !self.is_bounded() {
            return Err(BlockError::Unbounded);
        }
        let alg = &self.algebra;
        let mut total = C64::new(0.0, 0.0);
        for (k, m) in self.prefix.iter().enumerate() {
            total += m.trace() * (alg.weight(k) / m.dim() as f64);
        }
        let f = self.effective_tail();
        let start = self.prefix.len();
        let explicit_end = match alg.block_count() {
            Some(c) => c,
            None => alg.explicit_len().max(start),
        };
        for k in start..explicit_end {
            total += f.eval(k) * alg.weight(k);
        }
        if let Some(t) = alg.tail() {
            total += f.geometric_sum(explicit_end, alg.weight(explicit_end), t.ratio)?;
        }
        Ok(total)
    }

    /// Blockwise action on a finitely supported vector.
    pub fn apply(&self, v: &BlockVector) -> Result<BlockVector, BlockError> {
        let mut out = Vec::with_capacity(v.support_len());
        for (k, x) in v.iter() {
            let expected = self.algebra.block_dim(k).ok_or(BlockError::IndexOutOfRange {
                index: k,
                count: self.algebra.explicit_len(),
            })?;
            if x.len() != expected {
                return Err(BlockError::DimensionMismatch { block: k, expected, found: x.len() });
            }
            let y = match self.prefix.get(k) {
                Some(m) => m.mul_vec(x),
                None => x * self.tail.formula().eval(k),
            };
            out.push((k, y));
        }
        Ok(BlockVector::from_parts(out))
    }

    /// `θ·A ⊕ (1-θ)·B` on the direct-sum algebra.
    pub fn direct_sum(&self, theta: f64, other: &BlockOperator) -> Result<BlockOperator, BlockError> {
        let algebra = Arc::new(self.algebra.direct_sum(theta, &other.algebra)?);
        let left = self.materialized(self.algebra.explicit_len());
        let offset = left.prefix.len();
        let mut prefix = left.prefix;
        prefix.extend(other.prefix.iter().cloned());
        let tail = other.tail.formula().shift(-(offset as i64));
        BlockOperator::with_formula(algebra, prefix, tail)
    }

    /// Largest blockwise Frobenius deviation; tails compared by the sup of
    /// their difference (infinite if the difference is unbounded or leaves the grammar).
    pub fn max_block_diff(&self, other: &BlockOperator) -> f64 {
        let diff = |i: usize| self.block(i).diff_frobenius(&other.block(i));
        if let Some(count) = self.algebra.block_count() {
            return (0..count).map(diff).fold(0.0, f64::max);
        }
        let k = self.prefix.len().max(other.prefix.len());
        let prefix = (0..k).map(diff).fold(0.0, f64::max);
        let (fa, fb) = (self.tail.formula(), other.tail.formula());
        if fa == fb {
            return prefix;
        }
        let tail = match fa.sub(&fb) {
            Ok(d) => {
                let end = self.algebra.explicit_len().max(k);
                let explicit = (k..end).map(|i| d.abs_at(i) * (self.algebra.dim(i) as f64).sqrt()).fold(0.0, f64::max);
                let dim = (self.algebra.dim(end) as f64).sqrt();
                match d.sup_abs_from(end) {
                    TailSup::Finite(s) => explicit.max(s * dim),
                    TailSup::Unbounded => f64::INFINITY,
                }
            }
            Err(_) => f64::INFINITY,
        };
        prefix.max(tail)
    }

    /// True if every prefix block is skew-Hermitian and the tail is purely imaginary.
    pub fn is_skew_adjoint(&self, tol: f64) -> bool {
        self.prefix.iter().all(|m| m.skew_residual() <= tol * (1.0 + m.frobenius_norm()))
            && self.effective_tail().is_skew(tol)
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.prefix.iter().all(|m| m.hermitian_residual() <= tol * (1.0 + m.frobenius_norm()))
            && self.effective_tail().is_real(tol)
    }

    /// `e^{tA}` blockwise: dense exponential on the prefix, closed form on the tail.
    pub fn exp_scaled(&self, t: f64) -> Result<BlockOperator, BlockError> {
        let tail = match self.effective_tail().exp_scaled(t) {
            Ok(f) => f,
            Err(e) => match self.algebra.block_count() {
                Some(c) => {
                    return self.materialized(c).exp_scaled(t);
                }
                None => return Err(e.into()),
            },
        };
        let prefix = self.prefix.iter().map(|m| linops::matrix_exp(&m.scale(C64::new(t, 0.0)))).collect();
        BlockOperator::with_formula(self.algebra.clone(), prefix, tail)
    }

    /// Integer power `A^n`, blockwise.
    pub fn pow(&self, n: u64) -> BlockOperator {
        let tail = self.tail.formula().pow(n as u32);
        BlockOperator {
            algebra: self.algebra.clone(),
            prefix: self.prefix.iter().map(|m| m.pow(n)).collect(),
            tail: TailRule::from_formula(tail),
        }
        .normalized()
    }

    /// Replaces the algebra with an equal one (e.g. a freshly built copy).
    pub fn with_algebra(&self, algebra: Arc<FiniteBlockAlgebra>) -> Result<BlockOperator, BlockError> {
        if *algebra != *self.algebra {
            return Err(BlockError::AlgebraMismatch);
        }
        BlockOperator::new(algebra, self.prefix.clone(), self.tail.clone())
    }
}
