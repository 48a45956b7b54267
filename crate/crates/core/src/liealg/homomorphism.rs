//! Lie-algebra homomorphisms induced by blockwise *-homomorphisms.

use super::{LieError, SkewAdjointOp};
use crate::tensorcat::Morphism;

/// `Φ(X)`: the morphism applied blockwise to `X`. Since `φ(e^{tX}) = e^{tΦ(X)}`
/// this is the derivative of `φ` on the unitary group.
pub fn induced_lie_hom(phi: &Morphism, x: &SkewAdjointOp) -> Result<SkewAdjointOp, LieError> {
    phi.validate()?;
    SkewAdjointOp::new(phi.apply(x.op())?)
}

/// Largest deviations from the homomorphism identities.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HomResiduals {
    /// `max_t ‖φ(e^{tX}) - e^{tΦ(X)}‖` blockwise.
    pub exp: f64,
    /// `‖Φ([X,Y]) - [Φ(X),Φ(Y)]‖`.
    pub bracket: f64,
    /// `‖Φ(X + αY) - Φ(X) - αΦ(Y)‖`.
    pub linearity: f64,
}

pub fn induced_hom_residuals(
    phi: &Morphism,
    x: &SkewAdjointOp,
    y: &SkewAdjointOp,
    alpha: f64,
    t_samples: &[f64],
) -> Result<HomResiduals, LieError> {
    let (fx, fy) = (induced_lie_hom(phi, x)?, induced_lie_hom(phi, y)?);
    let mut exp: f64 = 0.0;
    for &t in t_samples {
        let lhs = phi.apply(&x.exp(t)?)?;
        exp = exp.max(lhs.max_block_diff(&fx.exp(t)?));
    }
    let bracket = induced_lie_hom(phi, &x.bracket(y)?)?.op().max_block_diff(fx.bracket(&fy)?.op());
    let combo = induced_lie_hom(phi, &x.add(&y.scale(alpha))?)?;
    let linearity = combo.op().max_block_diff(fx.add(&fy.scale(alpha))?.op());
    Ok(HomResiduals { exp, bracket, linearity })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use num_complex::Complex64 as C64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::blockvn::{BlockOperator, FiniteBlockAlgebra, TailRule};
    use crate::liealg::default_t_samples;
    use crate::linops::{CMatrix, I};
    use crate::random::{random_skew, random_unitary};

    fn setup() -> (Arc<FiniteBlockAlgebra>, SkewAdjointOp, SkewAdjointOp) {
        let alg = Arc::new(FiniteBlockAlgebra::new(vec![2, 3], vec![0.25, 0.75], None).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut op = || {
            SkewAdjointOp::new(
                BlockOperator::new(alg.clone(), vec![random_skew(&mut rng, 2), random_skew(&mut rng, 3)], TailRule::Zero)
                    .unwrap(),
            )
            .unwrap()
        };
        let (x, y) = (op(), op());
        (alg, x, y)
    }

    #[test]
    fn identity_induces_identity() {
        let (alg, x, _) = setup();
        assert_eq!(induced_lie_hom(&Morphism::identity(alg), &x).unwrap(), x);
    }

    #[test]
    fn conjugation_is_equivariant() {
        let (alg, x, y) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let w = vec![random_unitary(&mut rng, 2), random_unitary(&mut rng, 3)];
        let phi = Morphism::unitary_conjugation(alg, w).unwrap();
        let r = induced_hom_residuals(&phi, &x, &y, 0.3, &default_t_samples()).unwrap();
        assert!(r.exp < 1e-9 && r.bracket < 1e-10 && r.linearity < 1e-10, "{r:?}");
    }

    #[test]
    fn ampliation_matches_kronecker_oracle() {
        let (alg, x, y) = setup();
        let phi = Morphism::ampliation(alg, 2).unwrap();
        let lhs = induced_lie_hom(&phi, &x.bracket(&y).unwrap()).unwrap();
        let one = CMatrix::identity(2);
        for k in 0..2 {
            let oracle = x.op().block(k).commutator(&y.op().block(k)).kron(&one);
            assert!(lhs.op().block(k).diff_frobenius(&oracle) < 1e-12);
        }
        let r = induced_hom_residuals(&phi, &x, &y, -1.5, &default_t_samples()).unwrap();
        assert!(r.exp < 1e-9 && r.bracket < 1e-12, "{r:?}");
    }

    #[test]
    fn permutation_swaps_blocks() {
        let alg = Arc::new(FiniteBlockAlgebra::new(vec![1, 1], vec![0.5, 0.5], None).unwrap());
        let x = SkewAdjointOp::new(
            BlockOperator::new(
                alg.clone(),
                vec![CMatrix::scalar(1, I), CMatrix::scalar(1, C64::new(0.0, 2.0))],
                TailRule::Zero,
            )
            .unwrap(),
        )
        .unwrap();
        let phi = Morphism::block_permutation(alg, vec![1, 0]).unwrap();
        let fx = induced_lie_hom(&phi, &x).unwrap();
        assert_eq!(fx.op().block(0), x.op().block(1));
    }
}
