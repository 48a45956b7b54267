use std::io::Write;

use rayon::prelude::*;

use super::{measure_dist, set_dist, sot_dist, srt_dist, Estimate, MetricParams, TopologyError};
use crate::blockvn::BlockOperator;

/// Distances of one sequence element to the limit.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub index: u64,
    pub srt: Estimate,
    pub set: Estimate,
    pub measure: Estimate,
    /// `None` when either operator is unbounded.
    pub sot: Option<Estimate>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Converging,
    NotConverging,
    /// The metric is undefined somewhere in the last quartile.
    Undefined,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct MetricReport {
    pub rows: Vec<ReportRow>,
}

pub const REPORT_HEADER: [&str; 8] = ["index", "srt", "srt_bound", "set", "set_bound", "measure", "sot", "sot_bound"];

impl MetricReport {
    /// The last `ceil(len/4)` rows.
    fn last_quartile(&self) -> &[ReportRow] {
        let q = self.rows.len().div_ceil(4);
        &self.rows[self.rows.len() - q..]
    }

    fn verdict_by(&self, threshold: f64, pick: impl Fn(&ReportRow) -> Option<Estimate>) -> Verdict {
        let tail = self.last_quartile();
        if tail.is_empty() {
            return Verdict::NotConverging;
        }
        let mut all_below = true;
        for row in tail {
            match pick(row) {
                Some(e) => all_below &= e.upper() < threshold,
                None => return Verdict::Undefined,
            }
        }
        if all_below {
            Verdict::Converging
        } else {
            Verdict::NotConverging
        }
    }

    /// Converging iff every last-quartile value, plus its bound, is below `threshold`.
    pub fn verdicts(&self, threshold: f64) -> [(&'static str, Verdict); 4] {
        [
            ("srt", self.verdict_by(threshold, |r| Some(r.srt))),
            ("set", self.verdict_by(threshold, |r| Some(r.set))),
            ("measure", self.verdict_by(threshold, |r| Some(r.measure))),
            ("sot", self.verdict_by(threshold, |r| r.sot)),
        ]
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(REPORT_HEADER)?;
        for r in &self.rows {
            let (sot, sot_bound) = match r.sot {
                Some(e) => (e.value, e.bound),
                None => (f64::NAN, f64::NAN),
            };
            let fields = [
                r.index.to_string(),
                fmt_float(r.srt.value),
                fmt_float(r.srt.bound),
                fmt_float(r.set.value),
                fmt_float(r.set.bound),
                fmt_float(r.measure.value),
                fmt_float(sot),
                fmt_float(sot_bound),
            ];
            w.write_record(&fields)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x}")
}

/// Evaluates all four metrics for every `(index, A_n)` against `limit`.
///
/// Rows are computed in parallel and assembled in input order.
pub fn convergence_report(
    sequence: &[(u64, BlockOperator)],
    limit: &BlockOperator,
    params: &MetricParams,
) -> Result<MetricReport, TopologyError> {
    params.validate()?;
    let rows = sequence
        .par_iter()
        .map(|(index, a)| {
            let sot = match sot_dist(a, limit, params.eps_trunc) {
                Ok(e) => Some(e),
                Err(TopologyError::Unbounded) => None,
                Err(e) => return Err(e),
            };
            Ok(ReportRow {
                index: *index,
                srt: srt_dist(a, limit, params.eps_trunc)?,
                set: set_dist(a, limit, params)?,
                measure: measure_dist(a, limit)?,
                sot,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MetricReport { rows })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use num_complex::Complex64 as C64;

    use super::*;
    use crate::blockvn::FiniteBlockAlgebra;

    #[test]
    fn constant_sequence_is_zero() {
        let alg = Arc::new(FiniteBlockAlgebra::dyadic_diagonal());
        let a = BlockOperator::block_unit(alg, 2, C64::new(3.0, 1.0)).unwrap();
        let seq: Vec<_> = (1..5).map(|n| (n, a.clone())).collect();
        let r = convergence_report(&seq, &a, &MetricParams::default()).unwrap();
        for row in &r.rows {
            assert_eq!(row.srt, Estimate::ZERO);
            assert_eq!(row.set, Estimate::ZERO);
            assert_eq!(row.measure.value, 0.0);
            assert_eq!(row.sot.unwrap(), Estimate::ZERO);
        }
        assert!(r.verdicts(1e-6).iter().all(|(_, v)| *v == Verdict::Converging));
    }

    #[test]
    fn csv_shape() {
        let mut buf = Vec::new();
        MetricReport::default().write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "index,srt,srt_bound,set,set_bound,measure,sot,sot_bound\n");
        let row = ReportRow {
            index: 3,
            srt: Estimate { value: 0.1, bound: 1e-12 },
            set: Estimate::ZERO,
            measure: Estimate::ZERO,
            sot: None,
        };
        let mut buf = Vec::new();
        MetricReport { rows: vec![row] }.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "3,0.1,0.000000000001,0,0,0,NaN,NaN");
    }
}
