use super::BlockError;

/// Infinite run of equal-size blocks with geometric weights.
#[derive(Clone, Debug)]
pub struct GeometricTail {
    pub ratio: f64,
    pub block_dim: usize,
    /// Weight of the first tail block, `(1 - S)(1 - r)` for prefix mass `S`.
    pub first_weight: f64,
}

/// `⊕_k M_{n_k}(ℂ)` with faithful normal tracial state `τ(x) = Σ_k w_k tr(x_k)/n_k`.
///
/// The explicit part lists `(n_k, w_k)`; an optional tail appends infinitely
/// many `d × d` blocks whose weights continue geometrically so that the total
/// mass is exactly one.
#[derive(Clone, Debug)]
pub struct FiniteBlockAlgebra {
    shape: Vec<usize>,
    weights: Vec<f64>,
    tail: Option<GeometricTail>,
}

const MASS_TOL: f64 = 1e-12;
const WEIGHT_EQ_TOL: f64 = 1e-14;

impl FiniteBlockAlgebra {
    /// Validating constructor. With `tail_ratio = Some(r)` the prefix mass must be
    /// below one and the tail carries the remainder; without a tail the prefix
    /// mass must equal one.
    pub fn new(shape: Vec<usize>, weights: Vec<f64>, tail_ratio: Option<f64>) -> Result<Self, BlockError> {
        Self::with_tail_dim(shape, weights, tail_ratio, 1)
    }

    pub fn with_tail_dim(
        shape: Vec<usize>,
        weights: Vec<f64>,
        tail_ratio: Option<f64>,
        tail_dim: usize,
    ) -> Result<Self, BlockError> {
        if shape.len() != weights.len() {
            return Err(BlockError::BadWeights(format!(
                "{} blocks but {} weights",
                shape.len(),
                weights.len()
            )));
        }
        if let Some(k) = shape.iter().position(|&n| n == 0) {
            return Err(BlockError::DimensionMismatch { block: k, expected: 1, found: 0 });
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(BlockError::BadWeights(format!("weight {w} is not positive")));
        }
        let mass: f64 = weights.iter().sum();
        let tail = match tail_ratio {
            None => {
                if (mass - 1.0).abs() > MASS_TOL {
                    return Err(BlockError::BadWeights(format!("total mass {mass} != 1")));
                }
                None
            }
            Some(r) => {
                if !(r > 0.0 && r < 1.0) {
                    return Err(BlockError::BadWeights(format!("tail ratio {r} outside (0, 1)")));
                }
                if tail_dim == 0 {
                    return Err(BlockError::BadWeights("tail blocks need positive dimension".into()));
                }
                let rest = 1.0 - mass;
                if rest <= MASS_TOL {
                    return Err(BlockError::BadWeights(format!(
                        "prefix mass {mass} leaves nothing for the tail"
                    )));
                }
                Some(GeometricTail { ratio: r, block_dim: tail_dim, first_weight: rest * (1.0 - r) })
            }
        };
        Ok(FiniteBlockAlgebra { shape, weights, tail })
    }

    /// `M_n(ℂ)` with `τ = tr/n`.
    pub fn single_block(n: usize) -> Self {
        FiniteBlockAlgebra { shape: vec![n], weights: vec![1.0], tail: None }
    }

    /// `ℓ^∞`-type diagonal algebra: infinitely many `1 × 1` blocks, `w_k = 2^{-(k+1)}`.
    pub fn dyadic_diagonal() -> Self {
        Self::new(Vec::new(), Vec::new(), Some(0.5)).expect("valid dyadic weights")
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn explicit_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn tail(&self) -> Option<&GeometricTail> {
        self.tail.as_ref()
    }

    pub fn tail_ratio(&self) -> Option<f64> {
        self.tail.as_ref().map(|t| t.ratio)
    }

    pub fn explicit_len(&self) -> usize {
        self.shape.len()
    }

    pub fn is_finite(&self) -> bool {
        self.tail.is_none()
    }

    /// `None` when there are infinitely many blocks.
    pub fn block_count(&self) -> Option<usize> {
        if self.tail.is_some() {
            None
        } else {
            Some(self.shape.len())
        }
    }

    pub fn contains_block(&self, k: usize) -> bool {
        self.tail.is_some() || k < self.shape.len()
    }

    /// Block dimension `n_k`. Panics past the last block of a finite algebra.
    pub fn dim(&self, k: usize) -> usize {
        self.block_dim(k).unwrap_or_else(|| panic!("block {k} outside the algebra"))
    }

    pub fn block_dim(&self, k: usize) -> Option<usize> {
        match (self.shape.get(k), &self.tail) {
            (Some(&n), _) => Some(n),
            (None, Some(t)) => Some(t.block_dim),
            (None, None) => None,
        }
    }

    pub fn weight(&self, k: usize) -> f64 {
        match (self.weights.get(k), &self.tail) {
            (Some(&w), _) => w,
            (None, Some(t)) => t.first_weight * t.ratio.powi((k - self.shape.len()) as i32),
            (None, None) => 0.0,
        }
    }

    /// `Σ_{j >= k} w_j`, the trace of the unit of blocks `k, k+1, …`.
    pub fn mass_from(&self, k: usize) -> f64 {
        let explicit: f64 = self.weights.iter().skip(k).sum();
        match &self.tail {
            Some(t) => {
                let start = k.max(self.shape.len());
                explicit + self.weight(start) / (1.0 - t.ratio)
            }
            None => explicit,
        }
    }

    /// Hilbert-space dimension `Σ n_k`; `None` for infinitely many blocks.
    pub fn total_dim(&self) -> Option<usize> {
        self.block_count().map(|_| self.shape.iter().sum())
    }

    /// Vector-space dimension `Σ n_k^2`.
    pub fn algebra_dim(&self) -> Option<usize> {
        self.block_count().map(|_| self.shape.iter().map(|n| n * n).sum())
    }

    /// Same algebra with at least `len` explicit blocks (tail blocks unrolled).
    pub fn expanded(&self, len: usize) -> Self {
        let Some(t) = &self.tail else {
            return self.clone();
        };
        let mut shape = self.shape.clone();
        let mut weights = self.weights.clone();
        for k in self.shape.len()..len {
            shape.push(t.block_dim);
            weights.push(self.weight(k));
        }
        let first_weight = if len > self.shape.len() { self.weight(len) } else { t.first_weight };
        FiniteBlockAlgebra { shape, weights, tail: Some(GeometricTail { first_weight, ..t.clone() }) }
    }

    /// `θ·self ⊕ (1-θ)·other`. Only `other` may carry a tail.
    pub fn direct_sum(&self, theta: f64, other: &FiniteBlockAlgebra) -> Result<Self, BlockError> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(BlockError::BadWeights(format!("mixing fraction {theta} outside (0, 1)")));
        }
        if self.tail.is_some() {
            return Err(BlockError::TailConflict("left summand of a direct sum must be finite".into()));
        }
        let mut shape = self.shape.clone();
        shape.extend_from_slice(&other.shape);
        let mut weights: Vec<f64> = self.weights.iter().map(|w| theta * w).collect();
        weights.extend(other.weights.iter().map(|w| (1.0 - theta) * w));
        let tail = other.tail.as_ref().map(|t| GeometricTail {
            first_weight: (1.0 - theta) * t.first_weight,
            ..t.clone()
        });
        Ok(FiniteBlockAlgebra { shape, weights, tail })
    }
}

/// Semantic equality: same blocks and weights, whichever part is unrolled.
impl PartialEq for FiniteBlockAlgebra {
    fn eq(&self, other: &Self) -> bool {
        if self.tail.is_some() != other.tail.is_some() {
            return false;
        }
        if let (Some(a), Some(b)) = (&self.tail, &other.tail) {
            if a.ratio != b.ratio || a.block_dim != b.block_dim {
                return false;
            }
        } else if self.shape.len() != other.shape.len() {
            return false;
        }
        let len = self.shape.len().max(other.shape.len()) + 1;
        (0..len).all(|k| match (self.block_dim(k), other.block_dim(k)) {
            (Some(x), Some(y)) => {
                x == y && (self.weight(k) - other.weight(k)).abs() <= WEIGHT_EQ_TOL * self.weight(k).max(1e-300)
            }
            (None, None) => true,
            _ => false,
        })
    }
}
