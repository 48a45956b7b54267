//! Associativity and unit constraints as explicit coordinate permutations.
//!
//! A coordinate of a (possibly nested) tensor product of block algebras is a
//! matrix entry `(row, col)` of one of its blocks. Rows carry labels: the
//! sequence of factor rows `(factor slot, block, row)` they were built from.
//! Structural isomorphisms only rebracket factors and drop unit factors, so
//! they preserve these leaf sequences; each one is therefore the permutation
//! sending a coordinate's position in the source to the position of the same
//! label in the target. Pentagon and triangle become equalities of integer
//! permutations.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{tensor_algebra, tensor_op_into, TensorError};
use crate::blockvn::{BlockOperator, FiniteBlockAlgebra};
use crate::random::random_bounded_operator;

const NATURALITY_TOL: f64 = 1e-12;
const MAX_FACTORS: usize = 4;

/// Object in the tensor category: a bracketing of factors.
#[derive(Clone, Debug)]
pub enum Obj {
    Unit,
    /// A factor with its slot number (distinguishes repeated factors).
    Factor(u8, Arc<FiniteBlockAlgebra>),
    Tensor(Box<Obj>, Box<Obj>),
}

impl Obj {
    pub fn tensor(a: Obj, b: Obj) -> Obj {
        Obj::Tensor(Box::new(a), Box::new(b))
    }

    pub fn algebra(&self) -> Result<FiniteBlockAlgebra, TensorError> {
        match self {
            Obj::Unit => Ok(FiniteBlockAlgebra::single_block(1)),
            Obj::Factor(_, a) => Ok((**a).clone()),
            Obj::Tensor(x, y) => tensor_algebra(&x.algebra()?, &y.algebra()?),
        }
    }

    /// Row labels of every block, in block order.
    fn row_labels(&self) -> Vec<Vec<RowLabel>> {
        match self {
            Obj::Unit => vec![vec![RowLabel::default()]],
            Obj::Factor(slot, a) => (0..a.explicit_len())
                .map(|k| (0..a.dim(k)).map(|r| RowLabel::leaf(*slot, k, r)).collect())
                .collect(),
            Obj::Tensor(x, y) => {
                let (lx, ly) = (x.row_labels(), y.row_labels());
                let mut out = Vec::with_capacity(lx.len() * ly.len());
                for bx in &lx {
                    for by in &ly {
                        let mut rows = Vec::with_capacity(bx.len() * by.len());
                        for rx in bx {
                            for ry in by {
                                rows.push(rx.concat(ry));
                            }
                        }
                        out.push(rows);
                    }
                }
                out
            }
        }
    }

    /// Coordinate labels in position order (block, then row-major).
    fn coordinates(&self) -> Vec<(RowLabel, RowLabel)> {
        let mut out = Vec::new();
        for rows in self.row_labels() {
            for r in &rows {
                for c in &rows {
                    out.push((*r, *c));
                }
            }
        }
        out
    }

    /// Operator obtained by substituting `ops[slot]` for each factor.
    fn operator(&self, ops: &[BlockOperator]) -> Result<BlockOperator, TensorError> {
        match self {
            Obj::Unit => Ok(BlockOperator::identity(Arc::new(FiniteBlockAlgebra::single_block(1)))),
            Obj::Factor(slot, _) => Ok(ops[*slot as usize].clone()),
            Obj::Tensor(x, y) => {
                let (a, b) = (x.operator(ops)?, y.operator(ops)?);
                tensor_op_into(Arc::new(self.algebra()?), &a, &b)
            }
        }
    }

    fn describe(&self) -> String {
        match self {
            Obj::Unit => "C".into(),
            Obj::Factor(_, a) => format!("{:?}", a.shape()),
            Obj::Tensor(x, y) => format!("({} x {})", x.describe(), y.describe()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
struct RowLabel {
    leaves: [u32; MAX_FACTORS],
    len: u8,
}

impl RowLabel {
    fn leaf(slot: u8, block: usize, row: usize) -> Self {
        let mut leaves = [0; MAX_FACTORS];
        leaves[0] = (slot as u32) << 24 | (block as u32) << 12 | row as u32;
        RowLabel { leaves, len: 1 }
    }

    fn concat(&self, other: &RowLabel) -> Self {
        let mut out = *self;
        for i in 0..other.len as usize {
            out.leaves[out.len as usize] = other.leaves[i];
            out.len += 1;
        }
        out
    }
}

/// Structural morphism of the category.
#[derive(Clone, Debug)]
pub enum Arrow {
    Id,
    /// `(X ⊗ Y) ⊗ Z → X ⊗ (Y ⊗ Z)`
    Assoc,
    /// `1 ⊗ X → X`
    LeftUnit,
    /// `X ⊗ 1 → X`
    RightUnit,
    Tensor(Box<Arrow>, Box<Arrow>),
}

impl Arrow {
    fn tensor(a: Arrow, b: Arrow) -> Arrow {
        Arrow::Tensor(Box::new(a), Box::new(b))
    }

    /// Codomain for the given domain; `None` if the arrow does not apply.
    pub fn target(&self, src: &Obj) -> Option<Obj> {
        match (self, src) {
            (Arrow::Id, x) => Some(x.clone()),
            (Arrow::Assoc, Obj::Tensor(xy, z)) => match &**xy {
                Obj::Tensor(x, y) => Some(Obj::tensor((**x).clone(), Obj::tensor((**y).clone(), (**z).clone()))),
                _ => None,
            },
            (Arrow::LeftUnit, Obj::Tensor(u, x)) if matches!(**u, Obj::Unit) => Some((**x).clone()),
            (Arrow::RightUnit, Obj::Tensor(x, u)) if matches!(**u, Obj::Unit) => Some((**x).clone()),
            (Arrow::Tensor(f, g), Obj::Tensor(x, y)) => Some(Obj::tensor(f.target(x)?, g.target(y)?)),
            _ => None,
        }
    }

    /// Position map `source coordinate -> target coordinate`.
    pub fn permutation(&self, src: &Obj) -> Result<(Vec<usize>, Obj), TensorError> {
        let tgt = self
            .target(src)
            .ok_or_else(|| TensorError::BadMorphism(format!("{self:?} does not apply to {}", src.describe())))?;
        let index: HashMap<(RowLabel, RowLabel), usize> =
            tgt.coordinates().into_iter().enumerate().map(|(i, l)| (l, i)).collect();
        let src_coords = src.coordinates();
        if src_coords.len() != index.len() {
            return Err(TensorError::BadMorphism("coordinate counts differ".into()));
        }
        let perm = src_coords
            .iter()
            .map(|l| index.get(l).copied().ok_or_else(|| TensorError::BadMorphism("label missing in target".into())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((perm, tgt))
    }
}

/// Permutation of a chain of arrows applied left to right, plus its codomain.
fn chain(src: &Obj, arrows: &[Arrow]) -> Result<(Vec<usize>, Obj), TensorError> {
    let mut obj = src.clone();
    let mut total: Vec<usize> = (0..src.coordinates().len()).collect();
    for a in arrows {
        let (p, next) = a.permutation(&obj)?;
        total = total.iter().map(|&i| p[i]).collect();
        obj = next;
    }
    Ok((total, obj))
}

fn coordinates_of(op: &BlockOperator) -> Vec<C64> {
    let mut out = Vec::new();
    for m in op.prefix() {
        for r in 0..m.dim() {
            for c in 0..m.dim() {
                out.push(m[(r, c)]);
            }
        }
    }
    out
}

/// `max_p |y[perm[p]] - x[p]|` for the images of `ops` under `arrow`.
fn naturality_residual(src: &Obj, arrow: &Arrow, ops: &[BlockOperator]) -> Result<(usize, f64), TensorError> {
    let (perm, tgt) = arrow.permutation(src)?;
    let x = coordinates_of(&src.operator(ops)?);
    let y = coordinates_of(&tgt.operator(ops)?);
    let r = perm.iter().enumerate().map(|(p, &q)| (y[q] - x[p]).norm()).fold(0.0, f64::max);
    Ok((perm.len(), r))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoherenceRow {
    pub check: String,
    pub shapes: String,
    pub permutation_size: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct CoherenceReport {
    pub rows: Vec<CoherenceRow>,
}

impl CoherenceReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["check", "shapes", "permutation_size", "verdict"])?;
        for r in &self.rows {
            w.write_record([
                r.check.as_str(),
                r.shapes.as_str(),
                &r.permutation_size.to_string(),
                if r.pass { "pass" } else { "fail" },
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Naturality of the associator and unitors on random operators, the
/// pentagon on `(M, N, P, M)` and the triangle on `(M, N)` and `(N, P)`.
pub fn coherence_check(
    m: &Arc<FiniteBlockAlgebra>,
    n: &Arc<FiniteBlockAlgebra>,
    p: &Arc<FiniteBlockAlgebra>,
    seed: u64,
) -> Result<CoherenceReport, TensorError> {
    for a in [m, n, p] {
        if !a.is_finite() {
            return Err(TensorError::TailConflict("coherence checks need finitely many blocks".into()));
        }
    }
    let shapes = format!("{:?}x{:?}x{:?}", m.shape(), n.shape(), p.shape()).replace(' ', "");
    let f = |slot: u8, a: &Arc<FiniteBlockAlgebra>| Obj::Factor(slot, a.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ops: Vec<BlockOperator> =
        [m, n, p, m].iter().map(|a| random_bounded_operator(&mut rng, (*a).clone())).collect();
    let mut rows = Vec::new();
    let mut push = |check: &str, size: usize, pass: bool| {
        rows.push(CoherenceRow { check: check.into(), shapes: shapes.clone(), permutation_size: size, pass });
    };

    let mnp = Obj::tensor(Obj::tensor(f(0, m), f(1, n)), f(2, p));
    let (size, r) = naturality_residual(&mnp, &Arrow::Assoc, &ops)?;
    push("associator_naturality", size, r <= NATURALITY_TOL);
    let (size, r) = naturality_residual(&Obj::tensor(Obj::Unit, f(0, m)), &Arrow::LeftUnit, &ops)?;
    push("left_unitor_naturality", size, r <= NATURALITY_TOL);
    let (size, r) = naturality_residual(&Obj::tensor(f(0, m), Obj::Unit), &Arrow::RightUnit, &ops)?;
    push("right_unitor_naturality", size, r <= NATURALITY_TOL);

    // ((MN)P)Q: α_{MN,P,Q} then α_{M,N,PQ}  vs  (α⊗1), α_{M,NP,Q}, (1⊗α)
    let quad = Obj::tensor(Obj::tensor(Obj::tensor(f(0, m), f(1, n)), f(2, p)), f(3, m));
    let (lhs, lt) = chain(&quad, &[Arrow::Assoc, Arrow::Assoc])?;
    let (rhs, rt) = chain(
        &quad,
        &[
            Arrow::tensor(Arrow::Assoc, Arrow::Id),
            Arrow::Assoc,
            Arrow::tensor(Arrow::Id, Arrow::Assoc),
        ],
    )?;
    push("pentagon", lhs.len(), lhs == rhs && lt.describe() == rt.describe());

    for (x, y) in [(m, n), (n, p)] {
        // (X ⊗ 1) ⊗ Y → X ⊗ Y: ρ⊗1 vs (1⊗λ)∘α
        let tri = Obj::tensor(Obj::tensor(f(0, x), Obj::Unit), f(1, y));
        let (lhs, _) = chain(&tri, &[Arrow::tensor(Arrow::RightUnit, Arrow::Id)])?;
        let (rhs, _) = chain(&tri, &[Arrow::Assoc, Arrow::tensor(Arrow::Id, Arrow::LeftUnit)])?;
        push("triangle", lhs.len(), lhs == rhs);
    }
    Ok(CoherenceReport { rows })
}
