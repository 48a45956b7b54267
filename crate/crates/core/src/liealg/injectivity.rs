//! Local injectivity of `exp` on skew-adjoint operators: it holds on the ball
//! of radius π when there are finitely many blocks, and fails near zero when
//! there are infinitely many.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LieError, LieReport, LieRow};
use crate::blockvn::{BlockOperator, FiniteBlockAlgebra, TailRule};
use crate::linops::{matrix_exp, matrix_log_unitary, CMatrix};
use crate::random::random_skew;
use crate::topologies::{srt_dist, Estimate};

/// Relative tolerance for `log(exp X) = X` inside the radius.
pub const ROUNDTRIP_TOL: f64 = 1e-8;

/// Number of witnesses `x_1, ..., x_N` built on algebras with infinitely many blocks.
pub const WITNESS_COUNT: usize = 30;

/// `x_n = 2πi·p_n` with `p_n` the unit of block `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub n: usize,
    /// `exp(x_n) == 1` bit for bit.
    pub exp_is_identity: bool,
    pub srt: Estimate,
    /// `2^{2-n}`.
    pub closed_bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InjectivityReport {
    /// `exp` is injective on `{‖X‖ < radius}`; sampled pairs found no collision.
    Injective { radius: f64, samples: usize, collisions: usize, max_roundtrip: f64 },
    /// Nonzero `x_n → 0` in srt with `exp(x_n) = 1`.
    NotInjective { witnesses: Vec<Witness> },
}

impl InjectivityReport {
    pub fn holds(&self) -> bool {
        match self {
            InjectivityReport::Injective { radius, collisions, .. } => *radius > 0.0 && *collisions == 0,
            InjectivityReport::NotInjective { witnesses } => {
                !witnesses.is_empty() && witnesses.iter().all(|w| w.exp_is_identity && w.srt.upper() <= w.closed_bound)
            }
        }
    }

    pub fn to_rows(&self) -> LieReport {
        let rows = match self {
            InjectivityReport::Injective { radius, max_roundtrip, collisions, .. } => vec![LieRow {
                element: "ball".into(),
                test: "log_exp_roundtrip".into(),
                t: *radius,
                pass: *collisions == 0,
                residual: *max_roundtrip,
            }],
            InjectivityReport::NotInjective { witnesses } => witnesses
                .iter()
                .flat_map(|w| {
                    let element = format!("x_{}", w.n);
                    [
                        LieRow {
                            element: element.clone(),
                            test: "exp_is_identity".into(),
                            t: w.n as f64,
                            pass: w.exp_is_identity,
                            residual: if w.exp_is_identity { 0.0 } else { 1.0 },
                        },
                        LieRow {
                            element,
                            test: "srt_to_zero".into(),
                            t: w.n as f64,
                            pass: w.srt.upper() <= w.closed_bound,
                            residual: w.srt.upper(),
                        },
                    ]
                })
                .collect(),
        };
        LieReport { rows }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        self.to_rows().write_csv(out)
    }
}

fn witness(alg: &Arc<FiniteBlockAlgebra>, n: usize) -> Result<Witness, LieError> {
    let x = BlockOperator::block_unit(alg.clone(), n, C64::new(0.0, TAU))?;
    let exp_is_identity = x.exp_scaled(1.0)? == BlockOperator::identity(alg.clone());
    let srt = srt_dist(&x, &BlockOperator::zero(alg.clone()), 1e-12)?;
    Ok(Witness { n, exp_is_identity, srt, closed_bound: 2f64.powi(2 - n as i32) })
}

/// Probes `exp` near zero. Finite algebras get `samples` random skew-adjoint
/// operators of norm below π checked against the principal logarithm;
/// infinite algebras get the witness sequence.
pub fn exp_injectivity_probe(alg: &Arc<FiniteBlockAlgebra>, samples: usize, seed: u64) -> Result<InjectivityReport, LieError> {
    let Some(count) = alg.block_count() else {
        let witnesses = (1..=WITNESS_COUNT).map(|n| witness(alg, n)).collect::<Result<_, _>>()?;
        return Ok(InjectivityReport::NotInjective { witnesses });
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut collisions = 0;
    let mut max_roundtrip: f64 = 0.0;
    for _ in 0..samples {
        let blocks: Vec<CMatrix> = (0..count).map(|k| random_skew(&mut rng, alg.dim(k))).collect();
        let norm = blocks.iter().map(CMatrix::op_norm).fold(0.0, f64::max);
        if norm == 0.0 {
            continue;
        }
        let target = rng.random_range(0.0..0.99) * PI;
        let mut residual: f64 = 0.0;
        for b in &blocks {
            let x = b.scale(C64::new(target / norm, 0.0));
            let back = matrix_log_unitary(&matrix_exp(&x)).map_err(crate::blockvn::BlockError::from)?;
            residual = residual.max(back.diff_frobenius(&x) / (1.0 + x.frobenius_norm()));
        }
        max_roundtrip = max_roundtrip.max(residual);
        if residual > ROUNDTRIP_TOL {
            collisions += 1;
        }
    }
    Ok(InjectivityReport::Injective { radius: PI, samples, collisions, max_roundtrip })
}

/// `2πi·p_k` as an operator, a nonzero element with `exp = 1`.
pub fn period_element(alg: Arc<FiniteBlockAlgebra>, k: usize) -> Result<BlockOperator, LieError> {
    let m = CMatrix::scalar(alg.dim(k), C64::new(0.0, TAU));
    let mut prefix: Vec<CMatrix> = (0..k).map(|j| CMatrix::zeros(alg.dim(j))).collect();
    prefix.push(m);
    Ok(BlockOperator::new(alg, prefix, TailRule::Zero)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_scalar_block_is_injective() {
        let alg = Arc::new(FiniteBlockAlgebra::single_block(1));
        let r = exp_injectivity_probe(&alg, 200, 1).unwrap();
        assert!(r.holds());
        assert!(matches!(r, InjectivityReport::Injective { radius, .. } if radius == PI));
    }

    #[test]
    fn two_blocks_have_no_collisions() {
        let alg = Arc::new(FiniteBlockAlgebra::new(vec![2, 3], vec![0.4, 0.6], None).unwrap());
        let r = exp_injectivity_probe(&alg, 300, 2).unwrap();
        let InjectivityReport::Injective { collisions, max_roundtrip, .. } = r else { panic!() };
        assert_eq!(collisions, 0);
        assert!(max_roundtrip < ROUNDTRIP_TOL);
    }

    #[test]
    fn dyadic_witnesses() {
        let alg = Arc::new(FiniteBlockAlgebra::dyadic_diagonal());
        let r = exp_injectivity_probe(&alg, 0, 0).unwrap();
        assert!(r.holds());
        let InjectivityReport::NotInjective { witnesses } = &r else { panic!() };
        // only the imaginary part differs, on block n: |(2π - i)^{-1} - (-i)^{-1}|
        let per_block = (C64::new(TAU, -1.0).inv() - C64::new(0.0, -1.0).inv()).norm();
        for w in witnesses {
            let oracle = per_block * 2f64.powi(-(w.n as i32) - 1);
            assert!((w.srt.value - oracle).abs() < 1e-15 && w.srt.bound == 0.0, "{w:?}");
            assert!(w.exp_is_identity);
        }
    }

    #[test]
    fn period_element_exponentiates_to_one() {
        let alg = Arc::new(FiniteBlockAlgebra::new(vec![2, 3], vec![0.4, 0.6], None).unwrap());
        let x = period_element(alg.clone(), 1).unwrap();
        assert_eq!(x.exp_scaled(1.0).unwrap(), BlockOperator::identity(alg));
    }
}
