//! Metrics for the strong resolvent, strong exponential and τ-measure
//! topologies on affiliated block operators, plus the strong operator
//! distance on bounded ones.
//!
//! Every metric evaluates the canonical separating family: all standard basis
//! vectors `e_{k,j}` of block `k`, averaged with weight `1/n_k`, and blocks
//! weighted by `2^{-(k+1)}`. Infinitely many blocks are handled by exact
//! cancellation when both tails agree and by a certified truncation bound
//! otherwise.

mod measure;
mod report;
mod resolvent;
mod unitary_group;

pub use measure::{measure_dist, tau_mass_above};
pub use report::{convergence_report, fmt_float, MetricReport, ReportRow, Verdict, REPORT_HEADER};
pub use resolvent::{sot_dist, srt_dist};
pub use unitary_group::set_dist;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::blockvn::{BlockError, BlockOperator};
use crate::linops::{self, CMatrix, LinalgError};

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("strong operator distance needs bounded operators")]
    Unbounded,
    #[error("operator is not self-adjoint")]
    NotSelfAdjoint,
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

/// A computed distance: the true value lies in `[value - bound, value + bound]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub bound: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate { value: 0.0, bound: 0.0 };

    pub fn upper(&self) -> f64 {
        self.value + self.bound
    }

    pub fn lower(&self) -> f64 {
        (self.value - self.bound).max(0.0)
    }
}

/// Numerical knobs shared by the metrics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricParams {
    /// Target for the block-truncation error.
    pub eps_trunc: f64,
    /// Number of `m`-terms summed in the exponential metric.
    pub m_max: u32,
    /// Requested grid step in `t`; the grid uses `1/ceil(1/t_step)`.
    pub t_step: f64,
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams { eps_trunc: 1e-12, m_max: 16, t_step: 0.01 }
    }
}

impl MetricParams {
    pub fn validate(&self) -> Result<(), TopologyError> {
        if !(self.eps_trunc > 0.0) {
            return Err(TopologyError::BadParameter(format!("eps_trunc = {}", self.eps_trunc)));
        }
        if self.m_max == 0 {
            return Err(TopologyError::BadParameter("m_max must be at least 1".into()));
        }
        if !(self.t_step > 0.0 && self.t_step.is_finite()) {
            return Err(TopologyError::BadParameter(format!("t_step = {}", self.t_step)));
        }
        Ok(())
    }
}

/// A distance on block operators over a common algebra.
pub trait Metric: Send + Sync {
    fn name(&self) -> &'static str;
    fn distance(&self, a: &BlockOperator, b: &BlockOperator) -> Result<Estimate, TopologyError>;
}

pub struct StrongResolvent(pub MetricParams);
pub struct StrongExponential(pub MetricParams);
pub struct MeasureTopology;
pub struct StrongOperator(pub MetricParams);

impl Metric for StrongResolvent {
    fn name(&self) -> &'static str {
        "srt"
    }
    fn distance(&self, a: &BlockOperator, b: &BlockOperator) -> Result<Estimate, TopologyError> {
        srt_dist(a, b, self.0.eps_trunc)
    }
}

impl Metric for StrongExponential {
    fn name(&self) -> &'static str {
        "set"
    }
    fn distance(&self, a: &BlockOperator, b: &BlockOperator) -> Result<Estimate, TopologyError> {
        set_dist(a, b, &self.0)
    }
}

impl Metric for MeasureTopology {
    fn name(&self) -> &'static str {
        "measure"
    }
    fn distance(&self, a: &BlockOperator, b: &BlockOperator) -> Result<Estimate, TopologyError> {
        measure_dist(a, b)
    }
}

impl Metric for StrongOperator {
    fn name(&self) -> &'static str {
        "sot"
    }
    fn distance(&self, a: &BlockOperator, b: &BlockOperator) -> Result<Estimate, TopologyError> {
        sot_dist(a, b, self.0.eps_trunc)
    }
}

/// Metrics registered by name.
pub struct MetricRegistry {
    metrics: Vec<Box<dyn Metric>>,
}

impl MetricRegistry {
    pub fn empty() -> Self {
        MetricRegistry { metrics: Vec::new() }
    }

    /// `srt`, `set`, `measure` and `sot` with the given parameters.
    pub fn standard(params: MetricParams) -> Self {
        let mut r = Self::empty();
        r.register(Box::new(StrongResolvent(params)));
        r.register(Box::new(StrongExponential(params)));
        r.register(Box::new(MeasureTopology));
        r.register(Box::new(StrongOperator(params)));
        r
    }

    /// Adds a metric, replacing any previous one with the same name.
    pub fn register(&mut self, metric: Box<dyn Metric>) {
        self.metrics.retain(|m| m.name() != metric.name());
        self.metrics.push(metric);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Metric, TopologyError> {
        self.metrics
            .iter()
            .find(|m| m.name() == name)
            .map(|m| m.as_ref())
            .ok_or_else(|| TopologyError::UnknownMetric(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.metrics.iter().map(|m| m.name()).collect()
    }
}

/// Weight `2^{-(k+1)}` of block `k` in every metric.
pub fn block_weight(k: usize) -> f64 {
    if k >= 1070 {
        0.0
    } else {
        0.5f64.powi(k as i32 + 1)
    }
}

/// Blocks to visit and the truncation bound for the rest, given that each
/// block contributes at most `per_block` (before its weight).
pub(crate) fn block_plan(a: &BlockOperator, b: &BlockOperator, per_block: f64, eps: f64) -> Result<(usize, f64), TopologyError> {
    if a.algebra() != b.algebra() {
        return Err(BlockError::AlgebraMismatch.into());
    }
    let explicit = a.prefix_len().max(b.prefix_len());
    if let Some(count) = a.block_count() {
        return Ok((count, 0.0));
    }
    if a.tail_formula() == b.tail_formula() {
        return Ok((explicit, 0.0));
    }
    // Σ_{k >= K} 2^{-(k+1)} per_block = per_block 2^{-K}
    let mut end = explicit;
    while per_block * 0.5f64.powi(end as i32) > eps {
        end += 1;
    }
    Ok((end, per_block * 0.5f64.powi(end as i32)))
}

/// `Some(c)` if `m = c·1`.
pub(crate) fn as_scalar(m: &CMatrix) -> Option<C64> {
    let c = m[(0, 0)];
    if m.off_diagonal_norm() == 0.0 && (0..m.dim()).all(|i| m[(i, i)] == c) {
        Some(c)
    } else {
        None
    }
}

/// `(Re x, Im x)` of a block.
pub(crate) fn parts(m: &CMatrix) -> [CMatrix; 2] {
    let (re, im) = linops::re_im_split(m);
    [re, im]
}

/// Sum of column norms, i.e. `Σ_j ‖M e_j‖`.
pub(crate) fn column_norm_sum(m: &CMatrix) -> f64 {
    m.column_iter().map(|c| c.norm()).sum()
}

/// Operator norm of block `k` (the atomic seminorm `p_k`).
pub fn atomic_seminorm(x: &BlockOperator, k: usize) -> f64 {
    x.block_norm(k)
}

/// `max_{k < blocks, j} ‖(f(A_k) - f(B_k)) e_{k,j}‖` for self-adjoint `A`, `B`
/// and a bounded Borel function `f`.
pub fn functional_gap(
    a: &BlockOperator,
    b: &BlockOperator,
    f: &(dyn Fn(f64) -> f64 + Sync),
    blocks: usize,
) -> Result<f64, TopologyError> {
    if a.algebra() != b.algebra() {
        return Err(BlockError::AlgebraMismatch.into());
    }
    let blocks = match a.block_count() {
        Some(c) => blocks.min(c),
        None => blocks,
    };
    let lift = |x: f64| C64::new(f(x), 0.0);
    let mut worst: f64 = 0.0;
    for k in 0..blocks {
        let (ma, mb) = (a.block(k), b.block(k));
        if ma == mb {
            continue;
        }
        let (fa, fb) = match (as_scalar(&ma), as_scalar(&mb)) {
            (Some(x), Some(y)) if x.im == 0.0 && y.im == 0.0 => {
                worst = worst.max((f(x.re) - f(y.re)).abs());
                continue;
            }
            _ => (linops::func_calc(lift, &ma), linops::func_calc(lift, &mb)),
        };
        let diff = &fa.map_err(|_| TopologyError::NotSelfAdjoint)? - &fb.map_err(|_| TopologyError::NotSelfAdjoint)?;
        worst = worst.max(diff.column_iter().map(|c| c.norm()).fold(0.0, f64::max));
    }
    Ok(worst)
}

/// `max_{k < blocks, j} ‖(E_A((lo,hi)) - E_B((lo,hi))) e_{k,j}‖`.
pub fn spectral_projection_gap(
    a: &BlockOperator,
    b: &BlockOperator,
    lo: f64,
    hi: f64,
    blocks: usize,
) -> Result<f64, TopologyError> {
    functional_gap(a, b, &|x| if x > lo && x < hi { 1.0 } else { 0.0 }, blocks)
}

/// Tent function `φ_Λ`: equal to `λ` on `[-Λ, Λ]`, back to zero at `±2Λ`.
pub fn tent(lambda: f64, cap: f64) -> f64 {
    let a = lambda.abs();
    let v = if a <= cap {
        a
    } else if a <= 2.0 * cap {
        2.0 * cap - a
    } else {
        0.0
    };
    v.copysign(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tent_shape() {
        assert_eq!(tent(0.5, 1.0), 0.5);
        assert_eq!(tent(-0.5, 1.0), -0.5);
        assert_eq!(tent(1.5, 1.0), 0.5);
        assert_eq!(tent(-1.5, 1.0), -0.5);
        assert_eq!(tent(3.0, 1.0), 0.0);
        assert_eq!(tent(-2.0, 1.0), 0.0);
    }

    #[test]
    fn registry_lookup() {
        let r = MetricRegistry::standard(MetricParams::default());
        assert_eq!(r.names(), vec!["srt", "set", "measure", "sot"]);
        assert!(r.get("measure").is_ok());
        assert!(matches!(r.get("weak"), Err(TopologyError::UnknownMetric(_))));
    }
}
