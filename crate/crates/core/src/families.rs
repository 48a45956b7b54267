//! Bundled operator sequences with known limiting behavior, used by the
//! topology comparisons and the spectral checks.
//!
//! Every family is deterministic: random blocks come from a fixed per-family
//! seed.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::blockvn::{BlockOperator, FiniteBlockAlgebra, Formula};
use crate::linops::{matrix_exp, unit_phase, CMatrix, I};
use crate::random::{random_hermitian, random_matrix};

/// A sequence `(index, A_index)` and the candidate limit.
#[derive(Clone, Debug)]
pub struct Family {
    pub name: &'static str,
    pub sequence: Vec<(u64, BlockOperator)>,
    pub limit: BlockOperator,
    /// Whether the sequence converges to `limit`.
    pub converges: bool,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn linear(n: usize) -> Vec<u64> {
    (1..=n as u64).collect()
}

/// `2^0, 2^1, ..., 2^max_exp`.
fn dyadic(max_exp: u32) -> Vec<u64> {
    (0..=max_exp).map(|j| 1u64 << j).collect()
}

fn dyadic_alg() -> Arc<FiniteBlockAlgebra> {
    Arc::new(FiniteBlockAlgebra::dyadic_diagonal())
}

fn finite_alg() -> Arc<FiniteBlockAlgebra> {
    Arc::new(FiniteBlockAlgebra::new(vec![3, 2, 1], vec![0.5, 0.3, 0.2], None).expect("weights sum to one"))
}

/// `M_2 ⊕ M_3` followed by a geometric tail of scalar blocks.
fn tailed_alg() -> Arc<FiniteBlockAlgebra> {
    Arc::new(FiniteBlockAlgebra::new(vec![2, 3], vec![0.25, 0.25], Some(0.5)).expect("prefix mass below one"))
}

fn single(n: usize) -> Arc<FiniteBlockAlgebra> {
    Arc::new(FiniteBlockAlgebra::single_block(n))
}

/// The diagonal operator `k` on block `k`.
fn index_op(alg: &Arc<FiniteBlockAlgebra>) -> BlockOperator {
    BlockOperator::from_formula(alg.clone(), Formula::index())
}

fn spike(alg: &Arc<FiniteBlockAlgebra>, k: usize, value: C64) -> BlockOperator {
    BlockOperator::block_unit(alg.clone(), k, value).expect("block exists")
}

fn ops(alg: &Arc<FiniteBlockAlgebra>, blocks: Vec<CMatrix>, tail: Formula) -> BlockOperator {
    BlockOperator::with_formula(alg.clone(), blocks, tail).expect("block dimensions match the algebra")
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_blocks(seed: u64, alg: &FiniteBlockAlgebra, hermitian: bool) -> Vec<CMatrix> {
    let mut r = rng(seed);
    (0..alg.explicit_len())
        .map(|k| if hermitian { random_hermitian(&mut r, alg.dim(k)) } else { random_matrix(&mut r, alg.dim(k)) })
        .collect()
}

/// `A_n = A + B/n` blockwise on the explicit prefix, same tail.
fn perturbation(name: &'static str, alg: Arc<FiniteBlockAlgebra>, seed: u64, hermitian: bool, tail: Formula, schedule: Vec<u64>) -> Family {
    let a = random_blocks(seed, &alg, hermitian);
    let b = random_blocks(seed + 1, &alg, hermitian);
    let limit = ops(&alg, a.clone(), tail.clone());
    let sequence = schedule
        .into_iter()
        .map(|n| {
            let blocks = a.iter().zip(&b).map(|(x, y)| x + &y.scale(real(1.0 / n as f64))).collect();
            (n, ops(&alg, blocks, tail.clone()))
        })
        .collect();
    Family { name, sequence, limit, converges: true }
}

/// `A_n = u_n A u_n*` with `u_n = e^{iH/n}` on every explicit block.
fn conjugation_drift(name: &'static str, alg: Arc<FiniteBlockAlgebra>, seed: u64, hermitian: bool, tail: Formula, schedule: Vec<u64>) -> Family {
    let a = random_blocks(seed, &alg, hermitian);
    let h = random_blocks(seed + 1, &alg, true);
    let limit = ops(&alg, a.clone(), tail.clone());
    let sequence = schedule
        .into_iter()
        .map(|n| {
            let blocks = a
                .iter()
                .zip(&h)
                .map(|(x, g)| {
                    let u = matrix_exp(&g.scale(I / n as f64));
                    let m = &(&u * x) * &u.adjoint();
                    if hermitian {
                        (&m + &m.adjoint()).scale(real(0.5))
                    } else {
                        m
                    }
                })
                .collect();
            (n, ops(&alg, blocks, tail.clone()))
        })
        .collect();
    Family { name, sequence, limit, converges: true }
}

/// The ten convergent families of the topology comparison.
pub fn convergent_families() -> Vec<Family> {
    let d = dyadic_alg();
    let k = index_op(&d);
    let zero = BlockOperator::zero(d.clone());
    let mut out = Vec::new();

    // n on block n: unbounded in sup norm, converging to zero
    out.push(Family {
        name: "spike",
        sequence: linear(40).into_iter().map(|n| (n, spike(&d, n as usize, real(n as f64)))).collect(),
        limit: zero.clone(),
        converges: true,
    });
    out.push(Family {
        name: "spike_over_index",
        sequence: linear(40)
            .into_iter()
            .map(|n| (n, k.add(&spike(&d, n as usize, real(n as f64))).expect("same algebra")))
            .collect(),
        limit: k.clone(),
        converges: true,
    });
    out.push(Family {
        name: "imaginary_spike",
        sequence: linear(40).into_iter().map(|n| (n, spike(&d, n as usize, c(0.0, -(n as f64))))).collect(),
        limit: zero.clone(),
        converges: true,
    });
    // the index operator cut off after n blocks
    out.push(Family {
        name: "truncation",
        sequence: linear(40)
            .into_iter()
            .map(|n| (n, ops(&d, (0..n).map(|j| CMatrix::scalar(1, real(j as f64))).collect(), Formula::zero())))
            .collect(),
        limit: k.clone(),
        converges: true,
    });
    // (1 + 2^{-n}) k: the difference is unbounded for every n
    out.push(Family {
        name: "relative_scaling",
        sequence: linear(40)
            .into_iter()
            .map(|n| (n, k.scale_real(1.0 + 0.5f64.powi(n as i32))))
            .collect(),
        limit: k.clone(),
        converges: true,
    });
    // e^{k/2}/n: unbounded, converges in measure only for n in the hundred thousands
    out.push(Family {
        name: "exponential_decay",
        sequence: dyadic(28)
            .into_iter()
            .map(|n| (n, BlockOperator::from_formula(d.clone(), Formula::exponential(real(1.0 / n as f64), real(0.5)))))
            .collect(),
        limit: zero,
        converges: true,
    });
    out.push(perturbation("vanishing_perturbation", finite_alg(), 11, false, Formula::zero(), dyadic(24)));
    out.push(conjugation_drift("conjugation_drift", finite_alg(), 13, false, Formula::zero(), dyadic(24)));
    out.push(conjugation_drift("conjugation_over_index", tailed_alg(), 15, true, Formula::index(), dyadic(24)));

    // prefix fixed, tail k + 1/n
    let t = tailed_alg();
    let blocks = random_blocks(17, &t, false);
    out.push(Family {
        name: "tail_constant_drift",
        sequence: dyadic(24)
            .into_iter()
            .map(|n| (n, ops(&t, blocks.clone(), Formula::polynomial(vec![real(1.0 / n as f64), real(1.0)]))))
            .collect(),
        limit: ops(&t, blocks, Formula::index()),
        converges: true,
    });
    out
}

/// Five families that stay away from the candidate limit.
pub fn divergent_families() -> Vec<Family> {
    let d = dyadic_alg();
    let k = index_op(&d);
    let mut out = Vec::new();
    out.push(Family {
        name: "escaping_spike",
        sequence: linear(40).into_iter().map(|n| (n, spike(&d, 0, real(n as f64)))).collect(),
        limit: BlockOperator::zero(d.clone()),
        converges: false,
    });
    out.push(Family {
        name: "tail_shift",
        sequence: linear(40)
            .into_iter()
            .map(|n| (n, BlockOperator::from_formula(d.clone(), Formula::polynomial(vec![real(1.0 + 1.0 / n as f64), real(1.0)]))))
            .collect(),
        limit: k.clone(),
        converges: false,
    });
    out.push(Family {
        name: "doubled_index",
        sequence: linear(40).into_iter().map(|n| (n, k.scale_real(2.0 + 1.0 / n as f64))).collect(),
        limit: k,
        converges: false,
    });

    // A + (1/2 + 1/n)·1 on a finite algebra
    let f = finite_alg();
    let a = random_blocks(21, &f, false);
    let limit = ops(&f, a.clone(), Formula::zero());
    out.push(Family {
        name: "constant_offset",
        sequence: linear(40)
            .into_iter()
            .map(|n| {
                let shift = 0.5 + 1.0 / n as f64;
                let blocks = a.iter().map(|x| x + &CMatrix::scalar(x.dim(), real(shift))).collect();
                (n, ops(&f, blocks, Formula::zero()))
            })
            .collect(),
        limit,
        converges: false,
    });

    // σz conjugated by a fixed Hadamard rotation is σx, plus a vanishing term
    let m2 = single(2);
    let sz = CMatrix::from_real_diagonal(&[1.0, -1.0]);
    let sx = CMatrix::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2");
    out.push(Family {
        name: "fixed_rotation",
        sequence: linear(40)
            .into_iter()
            .map(|n| (n, ops(&m2, vec![&sx + &sz.scale(real(1.0 / n as f64))], Formula::zero())))
            .collect(),
        limit: ops(&m2, vec![sz], Formula::zero()),
        converges: false,
    });
    out
}

fn normalized(m: &CMatrix, norm: f64) -> CMatrix {
    m.scale(real(norm / m.op_norm()))
}

/// Ten families with every operator of sup norm at most 2, half converging.
pub fn bounded_families() -> Vec<Family> {
    let d = dyadic_alg();
    let f = finite_alg();
    let zero_d = BlockOperator::zero(d.clone());
    let mut out = Vec::new();

    out.push(Family {
        name: "moving_projection",
        sequence: linear(40).into_iter().map(|n| (n, spike(&d, n as usize, real(1.0)))).collect(),
        limit: zero_d.clone(),
        converges: true,
    });
    out.push(Family {
        name: "moving_pair",
        sequence: linear(40)
            .into_iter()
            .map(|n| {
                let pair = spike(&d, n as usize, real(2.0)).add(&spike(&d, n as usize + 1, c(0.0, -1.0))).expect("same algebra");
                (n, pair)
            })
            .collect(),
        limit: zero_d.clone(),
        converges: true,
    });
    let b: Vec<CMatrix> = random_blocks(31, &f, false).iter().map(|m| normalized(m, 2.0)).collect();
    out.push(Family {
        name: "shrinking_blocks",
        sequence: dyadic(24)
            .into_iter()
            .map(|n| (n, ops(&f, b.iter().map(|m| m.scale(real(1.0 / n as f64))).collect(), Formula::zero())))
            .collect(),
        limit: BlockOperator::zero(f.clone()),
        converges: true,
    });
    let h: Vec<CMatrix> = random_blocks(33, &f, true);
    out.push(Family {
        name: "unitary_flow",
        sequence: dyadic(24)
            .into_iter()
            .map(|n| (n, ops(&f, h.iter().map(|g| matrix_exp(&g.scale(I / n as f64))).collect(), Formula::zero())))
            .collect(),
        limit: BlockOperator::identity(f.clone()),
        converges: true,
    });
    out.push(Family {
        name: "phase_tail",
        sequence: dyadic(24)
            .into_iter()
            .map(|n| (n, BlockOperator::from_formula(d.clone(), Formula::constant(unit_phase(1.0 / n as f64)))))
            .collect(),
        limit: BlockOperator::identity(d.clone()),
        converges: true,
    });

    out.push(Family {
        name: "fixed_projection",
        sequence: linear(40)
            .into_iter()
            .map(|n| (n, spike(&d, 0, real(1.0)).add(&spike(&d, n as usize, real(1.0))).expect("same algebra")))
            .collect(),
        limit: zero_d,
        converges: false,
    });
    let m2 = single(2);
    let hadamard = CMatrix::from_real_rows(2, &[1.0, 1.0, 1.0, -1.0]).expect("2x2").scale(real(0.5f64.sqrt()));
    let sz = CMatrix::from_real_diagonal(&[1.0, -1.0]);
    out.push(Family {
        name: "rotated_unitary",
        sequence: linear(40).into_iter().map(|n| (n, ops(&m2, vec![hadamard.clone()], Formula::zero()))).collect(),
        limit: ops(&m2, vec![sz], Formula::zero()),
        converges: false,
    });
    out.push(Family {
        name: "tail_sign",
        sequence: linear(40)
            .into_iter()
            .map(|n| {
                let flip = BlockOperator::from_formula(d.clone(), Formula::constant(real(-1.0)));
                (n, flip.add(&spike(&d, 0, real(1.0 / n as f64))).expect("same algebra"))
            })
            .collect(),
        limit: BlockOperator::identity(d.clone()),
        converges: false,
    });
    let unit: Vec<CMatrix> = random_blocks(35, &f, false).iter().map(|m| normalized(m, 1.0)).collect();
    out.push(Family {
        name: "half_scale",
        sequence: linear(40)
            .into_iter()
            .map(|n| (n, ops(&f, unit.iter().map(|m| m.scale(real(0.5 + 1.0 / n as f64))).collect(), Formula::zero())))
            .collect(),
        limit: ops(&f, unit, Formula::zero()),
        converges: false,
    });
    // (1 + 1/n) E_31 against E_13
    let e13 = CMatrix::from_real_rows(3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).expect("3x3");
    out.push(Family {
        name: "nilpotent_shift",
        sequence: linear(40)
            .into_iter()
            .map(|n| (n, ops(&single(3), vec![e13.adjoint().scale(real(1.0 + 1.0 / n as f64))], Formula::zero())))
            .collect(),
        limit: ops(&single(3), vec![e13], Formula::zero()),
        converges: false,
    });
    out
}

/// Five self-adjoint families converging blockwise.
pub fn spectral_families() -> Vec<Family> {
    let d = dyadic_alg();
    let k = index_op(&d);
    let mut out = Vec::new();
    out.push(perturbation("hermitian_perturbation", finite_alg(), 41, true, Formula::zero(), dyadic(24)));
    out.push(Family {
        name: "index_shift",
        sequence: dyadic(24)
            .into_iter()
            .map(|n| (n, BlockOperator::from_formula(d.clone(), Formula::polynomial(vec![real(1.0 / n as f64), real(1.0)]))))
            .collect(),
        limit: k,
        converges: true,
    });
    out.push(Family {
        name: "self_adjoint_spike",
        sequence: linear(40).into_iter().map(|n| (n, spike(&d, n as usize, real(n as f64)))).collect(),
        limit: BlockOperator::zero(d.clone()),
        converges: true,
    });
    out.push(conjugation_drift("hermitian_conjugation", finite_alg(), 43, true, Formula::zero(), dyadic(24)));

    let t = tailed_alg();
    let a = random_blocks(45, &t, true);
    let b = random_blocks(46, &t, true);
    out.push(Family {
        name: "tailed_hermitian",
        sequence: dyadic(24)
            .into_iter()
            .map(|n| {
                let s = 1.0 / n as f64;
                let blocks = a.iter().zip(&b).map(|(x, y)| x + &y.scale(real(s))).collect();
                (n, ops(&t, blocks, Formula::polynomial(vec![real(0.0), real(1.0 + s)])))
            })
            .collect(),
        limit: ops(&t, a, Formula::index()),
        converges: true,
    });
    out
}

/// Every bundled family, looked up by name.
pub fn family_by_name(name: &str) -> Option<Family> {
    convergent_families()
        .into_iter()
        .chain(divergent_families())
        .chain(bounded_families())
        .chain(spectral_families())
        .find(|f| f.name == name)
}

pub fn family_names() -> Vec<&'static str> {
    convergent_families()
        .iter()
        .chain(&divergent_families())
        .chain(&bounded_families())
        .chain(&spectral_families())
        .map(|f| f.name)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(convergent_families().len(), 10);
        assert_eq!(divergent_families().len(), 5);
        assert_eq!(bounded_families().len(), 10);
        assert_eq!(spectral_families().len(), 5);
    }

    #[test]
    fn names_unique() {
        let mut names = family_names();
        let before = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), before);
    }

    #[test]
    fn bounded_families_stay_in_ball() {
        for f in bounded_families() {
            for (_, a) in f.sequence.iter().chain([(0, f.limit.clone())].iter()) {
                let s = a.sup_norm().finite().expect("bounded");
                assert!(s <= 2.0 + 1e-12, "{}: {s}", f.name);
            }
        }
    }

    #[test]
    fn spectral_families_are_self_adjoint() {
        for f in spectral_families() {
            assert!(f.limit.is_self_adjoint(1e-12), "{}", f.name);
            assert!(f.sequence.iter().all(|(_, a)| a.is_self_adjoint(1e-12)), "{}", f.name);
        }
    }
}
