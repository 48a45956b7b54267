use super::{Estimate, TopologyError};
use crate::blockvn::{BlockError, BlockOperator, Formula};
use crate::linops;

const BISECTION_TOL: f64 = 1e-12;
/// Remaining tail mass left uncounted when a tail difference has to be scanned.
const SCAN_MASS: f64 = 1e-15;

/// Distribution of `|X|` under `τ`: `τ(E_{|X|}((ε, ∞)))` as a function of `ε`.
struct Distribution {
    /// `(w_k / n_k, singular values of X_k)` for the explicit blocks.
    explicit: Vec<(f64, Vec<f64>)>,
    tail: TailMass,
}

enum TailMass {
    None,
    /// Exact geometric tail from block `start` on.
    Exact { formula: Formula, start: usize, w_start: f64, ratio: f64 },
    /// Mass not inspected, counted as lying above every `ε`.
    Pessimistic(f64),
}

impl Distribution {
    fn of(a: &BlockOperator, b: &BlockOperator) -> Result<Self, TopologyError> {
        let alg = a.algebra().clone();
        if *alg != **b.algebra() {
            return Err(BlockError::AlgebraMismatch.into());
        }
        let explicit_of = |range: std::ops::Range<usize>, diff: &dyn Fn(usize) -> crate::linops::CMatrix| {
            range
                .map(|k| {
                    let m = diff(k);
                    (alg.weight(k) / m.dim() as f64, linops::singular_values(&m))
                })
                .collect::<Vec<_>>()
        };
        match a.sub(b) {
            Ok(x) => {
                let end = match alg.block_count() {
                    Some(c) => c,
                    None => x.prefix_len().max(alg.explicit_len()),
                };
                let explicit = explicit_of(0..end, &|k| x.block(k));
                let tail = match alg.tail() {
                    Some(t) => TailMass::Exact {
                        formula: x.tail_formula(),
                        start: end,
                        w_start: alg.weight(end),
                        ratio: t.ratio,
                    },
                    None => TailMass::None,
                };
                Ok(Distribution { explicit, tail })
            }
            Err(BlockError::GrammarOverflow(_)) => {
                // tails with different rates: scan until the rest is negligible
                let mut end = a.prefix_len().max(b.prefix_len()).max(alg.explicit_len());
                while alg.mass_from(end) > SCAN_MASS {
                    end += 1;
                }
                let explicit = explicit_of(0..end, &|k| &a.block(k) - &b.block(k));
                Ok(Distribution { explicit, tail: TailMass::Pessimistic(alg.mass_from(end)) })
            }
            Err(e) => Err(e.into()),
        }
    }

    fn mass_above(&self, eps: f64) -> f64 {
        let mut mass = 0.0;
        for (w, svs) in &self.explicit {
            let count = svs.iter().filter(|&&s| s > eps).count();
            mass += w * count as f64;
        }
        mass + match &self.tail {
            TailMass::None => 0.0,
            TailMass::Exact { formula, start, w_start, ratio } => formula.mass_above(eps, *start, *w_start, *ratio),
            TailMass::Pessimistic(m) => *m,
        }
    }

    fn uncertainty(&self) -> f64 {
        match self.tail {
            TailMass::Pessimistic(m) => m,
            _ => 0.0,
        }
    }
}

/// `ρ(X) = inf{ε > 0 : τ(E_{|X|}((ε, ∞))) <= ε}` for `X = A - B`.
///
/// `ε ↦ τ(E_{|X|}((ε, ∞)))` is non-increasing and right-continuous, and is at
/// most 1, so `ρ ∈ [0, 1]` and bisection applies. After bisection the exact
/// infimum is recovered when it is one of the finitely many candidate
/// breakpoints in the final bracket.
pub fn measure_dist(a: &BlockOperator, b: &BlockOperator) -> Result<Estimate, TopologyError> {
    let dist = Distribution::of(a, b)?;
    let ok = |eps: f64| dist.mass_above(eps) <= eps;
    if ok(0.0) {
        return Ok(Estimate { value: 0.0, bound: dist.uncertainty() });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut candidates = vec![dist.mass_above(hi)];
    for (_, svs) in &dist.explicit {
        candidates.extend(svs.iter().copied().filter(|s| *s > lo && *s <= hi));
    }
    let value = candidates
        .into_iter()
        .filter(|&c| c > lo && c <= hi && ok(c))
        .fold(hi, f64::min);
    Ok(Estimate { value, bound: BISECTION_TOL + dist.uncertainty() })
}

/// `τ(E_{|A - B|}((ε, ∞)))`.
pub fn tau_mass_above(a: &BlockOperator, b: &BlockOperator, eps: f64) -> Result<f64, TopologyError> {
    Ok(Distribution::of(a, b)?.mass_above(eps))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use num_complex::Complex64 as C64;

    use super::*;
    use crate::blockvn::FiniteBlockAlgebra;
    use crate::linops::CMatrix;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zero_distance() {
        let alg = Arc::new(FiniteBlockAlgebra::dyadic_diagonal());
        let a = BlockOperator::from_formula(alg, Formula::index());
        assert_eq!(measure_dist(&a, &a).unwrap().value, 0.0);
    }

    #[test]
    fn half_on_single_block() {
        let alg = Arc::new(FiniteBlockAlgebra::single_block(1));
        let x = BlockOperator::scalar(alg.clone(), c(0.5, 0.0));
        let d = measure_dist(&x, &BlockOperator::zero(alg)).unwrap();
        assert_eq!(d.value, 0.5);
    }

    #[test]
    fn small_block_carries_the_jump() {
        let alg = Arc::new(FiniteBlockAlgebra::new(vec![1, 1], vec![0.1, 0.9], None).unwrap());
        let x = BlockOperator::new(
            alg.clone(),
            vec![CMatrix::scalar(1, c(5.0, 0.0)), CMatrix::zeros(1)],
            crate::blockvn::TailRule::Zero,
        )
        .unwrap();
        let d = measure_dist(&x, &BlockOperator::zero(alg)).unwrap();
        assert_eq!(d.value, 0.1);
    }

    #[test]
    fn spike_has_small_measure_distance() {
        let alg = Arc::new(FiniteBlockAlgebra::dyadic_diagonal());
        let zero = BlockOperator::zero(alg.clone());
        for n in [3usize, 10, 30] {
            let spike = BlockOperator::block_unit(alg.clone(), n, c(n as f64, 0.0)).unwrap();
            let d = measure_dist(&spike, &zero).unwrap();
            assert_eq!(d.value, 0.5f64.powi(n as i32 + 1));
        }
    }

    #[test]
    fn unbounded_tail_against_definition() {
        let alg = Arc::new(FiniteBlockAlgebra::dyadic_diagonal());
        let x = BlockOperator::from_formula(alg.clone(), Formula::index().scale(c(0.01, 0.0)));
        let d = measure_dist(&x, &BlockOperator::zero(alg)).unwrap();
        // mass above ε counts blocks with 0.01 k > ε
        let mass = |eps: f64| (0..4000).filter(|&k| 0.01 * k as f64 > eps).map(|k| 0.5f64.powi(k + 1)).sum::<f64>();
        assert!(mass(d.value) <= d.value + 1e-15);
        assert!(mass(d.value - 1e-9) > d.value - 1e-9);
    }

    #[test]
    fn mixed_rate_tails_use_scan() {
        let alg = Arc::new(FiniteBlockAlgebra::dyadic_diagonal());
        let a = BlockOperator::from_formula(alg.clone(), Formula::exponential(c(1.0, 0.0), c(-1.0, 0.0)));
        let b = BlockOperator::from_formula(alg, Formula::index());
        let d = measure_dist(&a, &b).unwrap();
        assert!(d.bound < 1e-11);
        // |X| is 1 on block 0, 1 - e^{-1} ≈ 0.63 on block 1 and > 1.8 beyond, so
        // the mass above any ε in [0.63, 1) is 1 - 1/4
        assert!((d.value - 0.75).abs() <= d.bound);
    }
}
