//! Closure of sampled Lie-algebra membership under sums, real multiples and
//! brackets.

use std::io::Write;

use super::{lie_residuals, LieError, SkewAdjointOp, SubgroupSpec};
use crate::topologies::fmt_float;

pub const LIE_HEADER: [&str; 5] = ["element", "test", "t", "verdict", "residual"];

#[derive(Clone, Debug, PartialEq)]
pub struct LieRow {
    pub element: String,
    pub test: String,
    pub t: f64,
    pub pass: bool,
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LieReport {
    pub rows: Vec<LieRow>,
}

impl LieReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn extend(&mut self, other: LieReport) {
        self.rows.extend(other.rows);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(LIE_HEADER)?;
        for r in &self.rows {
            let verdict = if r.pass { "pass" } else { "fail" };
            w.write_record([r.element.as_str(), r.test.as_str(), &fmt_float(r.t), verdict, &fmt_float(r.residual)])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn membership_rows(
    element: &str,
    x: &SkewAdjointOp,
    spec: &SubgroupSpec,
    t_samples: &[f64],
) -> Result<Vec<LieRow>, LieError> {
    let test = format!("in_lie_algebra:{}", spec.kind.name());
    Ok(lie_residuals(x, spec, t_samples)?
        .into_iter()
        .map(|(t, residual)| LieRow { element: element.into(), test: test.clone(), t, pass: residual <= spec.tol, residual })
        .collect())
}

/// Checks that `A + B`, `αA`, `-A` and `[A, B]` lie in `Lie(G)` whenever `A`
/// and `B` do.
pub fn lie_closure_check(
    a: &SkewAdjointOp,
    b: &SkewAdjointOp,
    alpha: f64,
    spec: &SubgroupSpec,
    t_samples: &[f64],
) -> Result<LieReport, LieError> {
    for (name, x) in [("A", a), ("B", b)] {
        let rows = membership_rows(name, x, spec, t_samples)?;
        if let Some(bad) = rows.iter().find(|r| !r.pass) {
            return Err(LieError::PreconditionFailed(format!(
                "{name} is not in Lie({}): residual {} at t = {}",
                spec.kind.name(),
                bad.residual,
                bad.t
            )));
        }
    }
    let elements = [
        ("sum", a.add(b)?),
        ("scalar", a.scale(alpha)),
        ("negation", a.scale(-1.0)),
        ("bracket", a.bracket(b)?),
    ];
    let mut report = LieReport::default();
    for (name, x) in &elements {
        report.rows.extend(membership_rows(name, x, spec, t_samples)?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use num_complex::Complex64 as C64;

    use super::*;
    use crate::blockvn::{BlockOperator, FiniteBlockAlgebra};
    use crate::liealg::{default_t_samples, SubgroupKind};
    use crate::linops::{CMatrix, I};

    fn alg() -> Arc<FiniteBlockAlgebra> {
        Arc::new(FiniteBlockAlgebra::new(vec![2, 1], vec![0.5, 0.5], None).unwrap())
    }

    fn skew_on_first(m: CMatrix) -> SkewAdjointOp {
        let alg = alg();
        SkewAdjointOp::new(BlockOperator::new(alg, vec![m.scale(I), CMatrix::zeros(1)], crate::blockvn::TailRule::Zero).unwrap())
            .unwrap()
    }

    #[test]
    fn pauli_pair_closes_in_full_unitary() {
        let x = CMatrix::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let y = CMatrix::from_rows(2, &[C64::new(0.0, 0.0), -I, I, C64::new(0.0, 0.0)]).unwrap();
        let spec = SubgroupSpec::new(SubgroupKind::FullUnitary, 1e-8);
        let report = lie_closure_check(&skew_on_first(x), &skew_on_first(y), 0.7, &spec, &default_t_samples()).unwrap();
        assert!(report.all_pass());
        assert_eq!(report.rows.len(), 4 * default_t_samples().len());
    }

    #[test]
    fn diagonal_bracket_vanishes() {
        let a = skew_on_first(CMatrix::from_real_diagonal(&[1.0, 2.0]));
        let b = skew_on_first(CMatrix::from_real_diagonal(&[-3.0, 0.5]));
        assert_eq!(a.bracket(&b).unwrap().op().sup_norm().finite(), Some(0.0));
        let spec = SubgroupSpec::new(SubgroupKind::DiagonalUnitaries, 1e-8);
        assert!(lie_closure_check(&a, &b, -2.0, &spec, &default_t_samples()).unwrap().all_pass());
    }

    #[test]
    fn outside_generator_fails_precondition() {
        let x = CMatrix::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let spec = SubgroupSpec::new(SubgroupKind::DiagonalUnitaries, 1e-8);
        let a = skew_on_first(x);
        let r = lie_closure_check(&a, &a, 1.0, &spec, &default_t_samples());
        assert!(matches!(r, Err(LieError::PreconditionFailed(_))));
    }

    #[test]
    fn csv_header_and_rows() {
        let mut report = LieReport::default();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "element,test,t,verdict,residual\n");
        report.rows.push(LieRow { element: "sum".into(), test: "x".into(), t: 0.5, pass: true, residual: 0.0 });
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2);
    }
}
