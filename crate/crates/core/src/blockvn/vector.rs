use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use super::{BlockError, FiniteBlockAlgebra};
use crate::linops::CVector;

/// Finitely supported vector in `⊕_k ℂ^{n_k}`, stored block by block.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct BlockVector {
    parts: BTreeMap<usize, CVector>,
}

impl BlockVector {
    pub fn from_parts(parts: Vec<(usize, CVector)>) -> Self {
        let mut map = BTreeMap::new();
        for (k, v) in parts {
            map.insert(k, v);
        }
        BlockVector { parts: map }
    }

    /// Standard basis vector `e_{k,j}`.
    pub fn basis(algebra: &FiniteBlockAlgebra, k: usize, j: usize) -> Result<Self, BlockError> {
        let n = algebra
            .block_dim(k)
            .ok_or(BlockError::IndexOutOfRange { index: k, count: algebra.explicit_len() })?;
        if j >= n {
            return Err(BlockError::IndexOutOfRange { index: j, count: n });
        }
        let mut v = CVector::zeros(n);
        v[j] = C64::new(1.0, 0.0);
        Ok(Self::from_parts(vec![(k, v)]))
    }

    pub fn get(&self, k: usize) -> Option<&CVector> {
        self.parts.get(&k)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &CVector)> {
        self.parts.iter().map(|(k, v)| (*k, v))
    }

    pub fn support_len(&self) -> usize {
        self.parts.len()
    }

    pub fn norm(&self) -> f64 {
        self.parts.values().map(|v| v.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &BlockVector) -> C64 {
        self.parts
            .iter()
            .filter_map(|(k, v)| other.parts.get(k).map(|w| v.dotc(w)))
            .sum()
    }

    pub fn sub(&self, other: &BlockVector) -> BlockVector {
        let mut parts = self.parts.clone();
        for (k, w) in &other.parts {
            parts.entry(*k).and_modify(|v| *v -= w).or_insert_with(|| -w);
        }
        BlockVector { parts }
    }
}
