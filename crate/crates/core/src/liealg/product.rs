//! Product formulas approximating `e^{t(A+B)}` and `e^{t[A,B]}` by products
//! of one-parameter groups. Scalar tails commute, so the tail of every
//! product equals the tail of its limit and only prefix blocks carry error.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use super::{LieError, SkewAdjointOp};
use crate::blockvn::BlockOperator;
use crate::linops::{matrix_exp, CMatrix};
use crate::topologies::{srt_dist, Estimate};

/// One way of approximating a one-parameter group by a product of others.
pub trait ProductFormula: Send + Sync {
    fn name(&self) -> &'static str;

    /// Single-block product at step count `n`.
    fn block_product(&self, a: &CMatrix, b: &CMatrix, t: f64, n: u64) -> CMatrix;

    /// Generator whose exponential at `t` is the limit.
    fn limit_generator(&self, a: &SkewAdjointOp, b: &SkewAdjointOp) -> Result<BlockOperator, LieError>;

    fn check_params(&self, t: f64, n: u64) -> Result<(), LieError> {
        if n == 0 {
            return Err(LieError::BadParameter("n must be at least 1".into()));
        }
        if !t.is_finite() {
            return Err(LieError::BadParameter(format!("t = {t}")));
        }
        Ok(())
    }

    /// The limit `e^{t·G}`.
    fn limit(&self, a: &SkewAdjointOp, b: &SkewAdjointOp, t: f64) -> Result<BlockOperator, LieError> {
        Ok(self.limit_generator(a, b)?.exp_scaled(t)?)
    }

    /// The product at step count `n`: dense on the explicit prefix of either
    /// operator, exact limit tail beyond it.
    fn product(&self, a: &SkewAdjointOp, b: &SkewAdjointOp, t: f64, n: u64) -> Result<BlockOperator, LieError> {
        self.check_params(t, n)?;
        let limit = self.limit(a, b, t)?;
        let len = a.op().prefix_len().max(b.op().prefix_len());
        let len = match limit.block_count() {
            Some(c) => len.min(c),
            None => len,
        };
        let prefix = (0..len).map(|k| self.block_product(&a.op().block(k), &b.op().block(k), t, n)).collect();
        Ok(BlockOperator::with_formula(limit.algebra().clone(), prefix, limit.tail_formula())?)
    }
}

fn exp_times(m: &CMatrix, s: f64) -> CMatrix {
    matrix_exp(&m.scale(C64::new(s, 0.0)))
}

/// `(e^{tA/n} e^{tB/n})^n → e^{t(A+B)}`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Trotter;

impl ProductFormula for Trotter {
    fn name(&self) -> &'static str {
        "trotter"
    }

    fn block_product(&self, a: &CMatrix, b: &CMatrix, t: f64, n: u64) -> CMatrix {
        let s = t / n as f64;
        (&exp_times(a, s) * &exp_times(b, s)).pow(n)
    }

    fn limit_generator(&self, a: &SkewAdjointOp, b: &SkewAdjointOp) -> Result<BlockOperator, LieError> {
        Ok(a.op().add(b.op())?)
    }
}

/// `(e^{-sA} e^{-sB} e^{sA} e^{sB})^{n²}` with `s = √t / n`, so that `n²`
/// factors of size `s²[A,B]` add up to `t[A,B]`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Nelson;

impl ProductFormula for Nelson {
    fn name(&self) -> &'static str {
        "nelson"
    }

    fn check_params(&self, t: f64, n: u64) -> Result<(), LieError> {
        if n == 0 {
            return Err(LieError::BadParameter("n must be at least 1".into()));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(LieError::BadParameter(format!("commutator formula needs t > 0, got {t}")));
        }
        Ok(())
    }

    fn block_product(&self, a: &CMatrix, b: &CMatrix, t: f64, n: u64) -> CMatrix {
        let s = t.sqrt() / n as f64;
        let (ea, eb) = (exp_times(a, s), exp_times(b, s));
        let (ea_inv, eb_inv) = (ea.adjoint(), eb.adjoint());
        let factor = &(&(&ea_inv * &eb_inv) * &ea) * &eb;
        factor.pow(n * n)
    }

    fn limit_generator(&self, a: &SkewAdjointOp, b: &SkewAdjointOp) -> Result<BlockOperator, LieError> {
        Ok(a.op().commutator(b.op())?)
    }
}

/// Product formulas by name.
pub struct ProductRegistry {
    entries: BTreeMap<&'static str, Box<dyn ProductFormula>>,
}

impl ProductRegistry {
    pub fn empty() -> Self {
        ProductRegistry { entries: BTreeMap::new() }
    }

    pub fn standard() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Trotter));
        r.register(Box::new(Nelson));
        r
    }

    pub fn register(&mut self, f: Box<dyn ProductFormula>) {
        self.entries.insert(f.name(), f);
    }

    pub fn get(&self, name: &str) -> Option<&dyn ProductFormula> {
        self.entries.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

/// srt distance from the product to its limit for every `n` of the schedule.
pub fn error_schedule(
    formula: &dyn ProductFormula,
    a: &SkewAdjointOp,
    b: &SkewAdjointOp,
    t: f64,
    schedule: &[u64],
    eps_trunc: f64,
) -> Result<Vec<(u64, Estimate)>, LieError> {
    let limit = formula.limit(a, b, t)?;
    schedule
        .iter()
        .map(|&n| {
            let p = formula.product(a, b, t, n)?;
            Ok((n, srt_dist(&p, &limit, eps_trunc)?))
        })
        .collect()
}
