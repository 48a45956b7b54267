//! Seeded property suites over the whole library. Each suite produces a
//! verdict, a one-line summary and a table of per-case results; the
//! acceptance tests and the command-line runner share them.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::blockvn::{BlockError, BlockOperator, FiniteBlockAlgebra, TailRule};
use crate::families::{bounded_families, convergent_families, divergent_families, spectral_families, Family};
use crate::liealg::{
    default_t_samples, error_schedule, exp_injectivity_probe, lie_closure_check, project_generator, LieError,
    SkewAdjointOp, SubgroupKind, SubgroupSpec, Nelson, Trotter,
};
use crate::linops::{hermitian_eig, CMatrix, I};
use crate::random::{
    random_bounded_operator, random_finite_algebra, random_operator, random_skew, random_tailed_algebra,
    random_unitary,
};
use crate::tensorcat::{
    coherence_check, extend_morphism, functor_e, functor_e_morphism, functor_f, functor_f_morphism, tensor_algebra,
    tensor_op_into, Morphism, RingMorphism, TensorError,
};
use crate::topologies::{
    convergence_report, fmt_float, functional_gap, spectral_projection_gap, tent, MetricParams, MetricReport, TopologyError,
    REPORT_HEADER,
};

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

/// Overrides shared by every suite; `None` keeps the suite's default.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteParams {
    pub seed: u64,
    pub tol: Option<f64>,
    pub n_schedule: Option<Vec<u64>>,
    pub t_values: Option<Vec<f64>>,
}

impl SuiteParams {
    fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    fn schedule_or(&self, default: &[u64]) -> Vec<u64> {
        self.n_schedule.clone().unwrap_or_else(|| default.to_vec())
    }

    fn t_or(&self, default: f64) -> f64 {
        self.t_values.as_ref().and_then(|v| v.first().copied()).unwrap_or(default)
    }

    fn seeded(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(salt))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub summary: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl SuiteOutcome {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn verdict(pass: bool) -> String {
    if pass { "pass" } else { "fail" }.to_string()
}

/// A property suite, selectable by name.
pub trait Suite: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, params: &SuiteParams) -> Result<SuiteOutcome, SuiteError>;
}

pub struct SuiteRegistry {
    entries: BTreeMap<&'static str, Box<dyn Suite>>,
}

impl SuiteRegistry {
    pub fn empty() -> Self {
        SuiteRegistry { entries: BTreeMap::new() }
    }

    pub fn standard() -> Self {
        let mut r = Self::empty();
        let all: Vec<Box<dyn Suite>> = vec![
            Box::new(StarAlgebra),
            Box::new(TopologyCoConvergence),
            Box::new(BoundedBall),
            Box::new(TrotterRate),
            Box::new(NelsonConvergence),
            Box::new(LieClosure),
            Box::new(SpectralConvergence),
            Box::new(ExpInjectivity),
            Box::new(TensorLaws),
            Box::new(FunctorIsomorphism),
        ];
        for s in all {
            r.register(s);
        }
        r
    }

    pub fn register(&mut self, suite: Box<dyn Suite>) {
        self.entries.insert(suite.name(), suite);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Suite> {
        self.entries.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

/// Blocks on which two operators are compared: all of them on finite
/// algebras, otherwise the explicit prefixes plus a few tail blocks.
fn compared_blocks(ops: &[&BlockOperator]) -> usize {
    match ops[0].block_count() {
        Some(c) => c,
        None => ops.iter().map(|o| o.prefix_len()).max().unwrap_or(0) + 8,
    }
}

/// `max_k ‖x_k - y_k‖ / scale_k` over the compared blocks, zero where the blocks agree exactly.
fn relative_gap(x: &BlockOperator, y: &BlockOperator, scale: impl Fn(usize) -> f64) -> f64 {
    (0..compared_blocks(&[x, y]))
        .map(|k| {
            let d = x.block(k).diff_frobenius(&y.block(k));
            if d == 0.0 {
                0.0
            } else {
                d / scale(k)
            }
        })
        .fold(0.0, f64::max)
}

fn fro(x: &BlockOperator, k: usize) -> f64 {
    x.block(k).frobenius_norm()
}

// --- *-algebra laws -----------------------------------------------------------

pub struct StarAlgebra;

/// Relative residuals of the *-algebra laws on one triple.
pub fn star_algebra_residuals(a: &BlockOperator, b: &BlockOperator, c: &BlockOperator) -> Result<[(&'static str, f64); 6], SuiteError> {
    let ab = a.mul(b)?;
    let assoc = relative_gap(&ab.mul(c)?, &a.mul(&b.mul(c)?)?, |k| fro(a, k) * fro(b, k) * fro(c, k));
    let bc = b.add(c)?;
    let left = relative_gap(&a.mul(&bc)?, &ab.add(&a.mul(c)?)?, |k| fro(a, k) * fro(&bc, k).max(fro(b, k) + fro(c, k)));
    let right = relative_gap(&bc.mul(a)?, &b.mul(a)?.add(&c.mul(a)?)?, |k| fro(a, k) * (fro(b, k) + fro(c, k)));
    let star_mul = relative_gap(&ab.adjoint(), &b.adjoint().mul(&a.adjoint())?, |k| fro(a, k) * fro(b, k));
    let star_add = relative_gap(&a.add(b)?.adjoint(), &a.adjoint().add(&b.adjoint())?, |k| fro(a, k) + fro(b, k));
    let lambda = C64::new(0.3, -1.7);
    let star_scale = relative_gap(&a.scale(lambda).adjoint(), &a.adjoint().scale(lambda.conj()), |k| lambda.norm() * fro(a, k));
    // (A*)* = A is checked exactly by the caller
    Ok([
        ("associativity", assoc),
        ("left_distributivity", left),
        ("right_distributivity", right),
        ("adjoint_of_product", star_mul),
        ("adjoint_of_sum", star_add),
        ("adjoint_of_multiple", star_scale),
    ])
}

impl Suite for StarAlgebra {
    fn name(&self) -> &'static str {
        "star_algebra"
    }

    fn run(&self, params: &SuiteParams) -> Result<SuiteOutcome, SuiteError> {
        let tol = params.tol_or(1e-11);
        let trials = 200;
        let mut rng = params.seeded(1);
        let mut rows = Vec::new();
        let mut worst: f64 = 0.0;
        let mut pass = true;
        for trial in 0..trials {
            let alg = Arc::new(if trial % 2 == 0 {
                random_finite_algebra(&mut rng, 8, 6)
            } else {
                random_tailed_algebra(&mut rng, 4, 6)
            });
            let op = |rng: &mut ChaCha8Rng| {
                let len = rng.random_range(0..=8);
                random_operator(rng, alg.clone(), len)
            };
            let (a, b, c) = (op(&mut rng), op(&mut rng), op(&mut rng));
            let mut laws = star_algebra_residuals(&a, &b, &c)?.to_vec();
            laws.push(("double_adjoint", if a.adjoint().adjoint() == a { 0.0 } else { f64::INFINITY }));
            for (law, r) in laws {
                worst = worst.max(r);
                let ok = r <= tol;
                pass &= ok;
                rows.push(vec![trial.to_string(), law.to_string(), fmt_float(r), verdict(ok)]);
            }
        }
        Ok(SuiteOutcome {
            name: self.name(),
            pass,
            summary: format!("{trials} triples, worst relative residual {worst:.2e} (tolerance {tol:.0e})"),
            header: vec!["trial", "law", "residual", "verdict"],
            rows,
        })
    }
}

// --- topology comparisons ---------------------------------------------------

/// How a metric column behaves over the last quartile of a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    /// Every value plus bound is below the convergence threshold.
    Converging,
    /// Every value minus bound is above the separation threshold.
    Separated,
    Inconclusive,
    Undefined,
}

impl Trend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Trend::Converging => "converging",
            Trend::Separated => "separated",
            Trend::Inconclusive => "inconclusive",
            Trend::Undefined => "undefined",
        }
    }
}

pub const CONVERGENCE_THRESHOLD: f64 = 1e-3;
pub const SEPARATION_THRESHOLD: f64 = 1e-2;

/// Trends of the `srt`, `set`, `measure` and `sot` columns.
pub fn trends(report: &MetricReport, converge_below: f64, separate_above: f64) -> [(&'static str, Trend); 4] {
    let q = report.rows.len().div_ceil(4);
    let tail = &report.rows[report.rows.len() - q..];
    let classify = |pick: &dyn Fn(&crate::topologies::ReportRow) -> Option<crate::topologies::Estimate>| {
        let picked: Option<Vec<_>> = tail.iter().map(pick).collect();
        match picked {
            None => Trend::Undefined,
            Some(v) if v.is_empty() => Trend::Inconclusive,
            Some(v) if v.iter().all(|e| e.upper() < converge_below) => Trend::Converging,
            Some(v) if v.iter().all(|e| e.value - e.bound > separate_above) => Trend::Separated,
            Some(_) => Trend::Inconclusive,
        }
    };
    [
        ("srt", classify(&|r| Some(r.srt))),
        ("set", classify(&|r| Some(r.set))),
        ("measure", classify(&|r| Some(r.measure))),
        ("sot", classify(&|r| r.sot)),
    ]
}

/// One CSV row per report index, led by the family name.
pub fn family_rows(name: &str, report: &MetricReport) -> Vec<Vec<String>> {
    report
        .rows
        .iter()
        .map(|r| {
            let (sot, sot_bound) = r.sot.map_or((f64::NAN, f64::NAN), |e| (e.value, e.bound));
            vec![
                name.to_string(),
                r.index.to_string(),
                fmt_float(r.srt.value),
                fmt_float(r.srt.bound),
                fmt_float(r.set.value),
                fmt_float(r.set.bound),
                fmt_float(r.measure.value),
                fmt_float(sot),
                fmt_float(sot_bound),
            ]
        })
        .collect()
}

pub fn family_header() -> Vec<&'static str> {
    let mut h = vec!["family"];
    h.extend(REPORT_HEADER);
    h
}

fn reports(families: &[Family], params: &MetricParams) -> Result<Vec<MetricReport>, SuiteError> {
    families
        .par_iter()
        .map(|f| convergence_report(&f.sequence, &f.limit, params).map_err(SuiteError::from))
        .collect()
}

pub struct TopologyCoConvergence;

impl Suite for TopologyCoConvergence {
    fn name(&self) -> &'static str {
        "topology_coconvergence"
    }

    fn run(&self, params: &SuiteParams) -> Result<SuiteOutcome, SuiteError> {
        let threshold = params.tol_or(CONVERGENCE_THRESHOLD);
        let families: Vec<Family> = convergent_families().into_iter().chain(divergent_families()).collect();
        let reps = reports(&families, &MetricParams::default())?;
        let mut rows = Vec::new();
        let mut failures = Vec::new();
        for (f, rep) in families.iter().zip(&reps) {
            rows.extend(family_rows(f.name, rep));
            let want = if f.converges { Trend::Converging } else { Trend::Separated };
            for (metric, trend) in &trends(rep, threshold, SEPARATION_THRESHOLD)[..3] {
                if *trend != want {
                    failures.push(format!("{}:{metric}={}", f.name, trend.as_str()));
                }
            }
        }
        let summary = if failures.is_empty() {
            format!("{} convergent and {} divergent families agree in srt, set and measure", 10, 5)
        } else {
            format!("disagreements: {}", failures.join(", "))
        };
        Ok(SuiteOutcome { name: self.name(), pass: failures.is_empty(), summary, header: family_header(), rows })
    }
}

pub struct BoundedBall;

impl Suite for BoundedBall {
    fn name(&self) -> &'static str {
        "bounded_ball"
    }

    fn run(&self, params: &SuiteParams) -> Result<SuiteOutcome, SuiteError> {
        let threshold = params.tol_or(CONVERGENCE_THRESHOLD);
        let families = bounded_families();
        let reps = reports(&families, &MetricParams::default())?;
        let mut rows = Vec::new();
        let mut failures = Vec::new();
        for (f, rep) in families.iter().zip(&reps) {
            let t = trends(rep, threshold, SEPARATION_THRESHOLD);
            let (srt, sot) = (t[0].1, t[3].1);
            let want = if f.converges { Trend::Converging } else { Trend::Separated };
            let ok = srt == sot && srt == want;
            if !ok {
                failures.push(format!("{}: srt {} sot {}", f.name, srt.as_str(), sot.as_str()));
            }
            rows.push(vec![f.name.to_string(), srt.as_str().into(), sot.as_str().into(), verdict(ok)]);
        }
        let summary = if failures.is_empty() {
            format!("srt and sot agree on all {} norm-bounded families", families.len())
        } else {
            format!("disagreements: {}", failures.join(", "))
        };
        Ok(SuiteOutcome { name: self.name(), pass: failures.is_empty(), summary, header: vec!["family", "srt", "sot", "verdict"], rows })
    }
}

// --- product formulas -----------------------------------------------------------

fn skew_on(alg: &Arc<FiniteBlockAlgebra>, m: CMatrix) -> Result<SkewAdjointOp, SuiteError> {
    Ok(SkewAdjointOp::new(BlockOperator::new(alg.clone(), vec![m], TailRule::Zero)?)?)
}

pub struct TrotterRate;

impl Suite for TrotterRate {
    fn name(&self) -> &'static str {
        "trotter_rate"
    }

    fn run(&self, params: &SuiteParams) -> Result<SuiteOutcome, SuiteError> {
        let schedule = params.schedule_or(&[64, 128, 256, 512]);
        if schedule.is_empty() || schedule.contains(&0) {
            return Err(SuiteError::BadParameter("the n schedule needs positive entries".into()));
        }
        let t = params.t_or(1.0);
        let commuting_tol = params.tol_or(1e-12);
        let alg = Arc::new(FiniteBlockAlgebra::single_block(4));
        let eps = MetricParams::default().eps_trunc;
        let mut rng = params.seeded(4);
        let mut rows = Vec::new();
        let mut pass = true;
        let mut ratios_seen = Vec::new();
        for pair in 0..20 {
            let a = skew_on(&alg, random_skew(&mut rng, 4))?;
            let b = skew_on(&alg, random_skew(&mut rng, 4))?;
            let doubled: Vec<u64> = schedule.iter().flat_map(|&n| [n, 2 * n]).collect();
            let errs = error_schedule(&Trotter, &a, &b, t, &doubled, eps)?;
            let ratio = errs.chunks(2).map(|p| p[1].1.value / p[0].1.value).sum::<f64>() / schedule.len() as f64;
            let ok = (0.4..=0.6).contains(&ratio);
            pass &= ok;
            ratios_seen.push(ratio);
            rows.push(vec!["generic".into(), pair.to_string(), fmt_float(ratio), verdict(ok)]);
        }
        let mut worst_commuting: f64 = 0.0;
        for pair in 0..20 {
            // A and B diagonal in a common random basis
            let w = random_unitary(&mut rng, 4);
            let diag = |rng: &mut ChaCha8Rng| {
                let d: Vec<C64> = (0..4).map(|_| C64::new(0.0, rng.random_range(-2.0..2.0))).collect();
                &(&w * &CMatrix::from_diagonal(&d)) * &w.adjoint()
            };
            let (ma, mb) = (diag(&mut rng), diag(&mut rng));
            let skew_part = |m: &CMatrix| (m - &m.adjoint()).scale(C64::new(0.5, 0.0));
            let a = skew_on(&alg, skew_part(&ma))?;
            let b = skew_on(&alg, skew_part(&mb))?;
            let err = error_schedule(&Trotter, &a, &b, t, &[1], eps)?[0].1.upper();
            worst_commuting = worst_commuting.max(err);
            let ok = err <= commuting_tol;
            pass &= ok;
            rows.push(vec!["commuting".into(), pair.to_string(), fmt_float(err), verdict(ok)]);
        }
        let (lo, hi) = ratios_seen.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
        Ok(SuiteOutcome {
            name: self.name(),
            pass,
            summary: format!("doubling ratios in [{lo:.4}, {hi:.4}], commuting error at n = 1 at most {worst_commuting:.2e}"),
            header: vec!["pair_kind", "pair", "value", "verdict"],
            rows,
        })
    }
}

fn pauli(which: char) -> CMatrix {
    let (z, one) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    let e = match which {
        'x' => [z, one, one, z],
        'y' => [z, -I, I, z],
        _ => [one, z, z, -one],
    };
    CMatrix::from_rows(2, &e).expect("2x2")
}

pub struct NelsonConvergence;

impl Suite for NelsonConvergence {
    fn name(&self) -> &'static str {
        "nelson"
    }

    fn run(&self, params: &SuiteParams) -> Result<SuiteOutcome, SuiteError> {
        let schedule = params.schedule_or(&[8, 16, 32, 64, 128]);
        let t = params.t_or(0.5);
        let final_tol = params.tol_or(1e-2);
        let eps = MetricParams::default().eps_trunc;
        let mut rng = params.seeded(5);
        let m2 = Arc::new(FiniteBlockAlgebra::single_block(2));
        let m3 = Arc::new(FiniteBlockAlgebra::single_block(3));
        let mut pairs = vec![("pauli_xy".to_string(), skew_on(&m2, pauli('x').scale(I))?, skew_on(&m2, pauli('y').scale(I))?)];
        for p in 0..10 {
            pairs.push((format!("seeded_{p}"), skew_on(&m3, random_skew(&mut rng, 3))?, skew_on(&m3, random_skew(&mut rng, 3))?));
        }
        let mut rows = Vec::new();
        let mut pass = true;
        let mut worst_final: f64 = 0.0;
        for (name, a, b) in &pairs {
            let errs = error_schedule(&Nelson, a, b, t, &schedule, eps)?;
            let monotone = errs.windows(2).all(|w| w[1].1.value < w[0].1.value);
            let last = errs.last().map_or(f64::INFINITY, |e| e.1.upper());
            worst_final = worst_final.max(last);
            let ok = monotone && last <= final_tol;
            pass &= ok;
            for (n, e) in &errs {
                rows.push(vec![name.clone(), n.to_string(), fmt_float(e.value), fmt_float(e.bound), verdict(ok)]);
            }
        }
        Ok(SuiteOutcome {
            name: self.name(),
            pass,
            summary: format!("{} pairs, worst error at the last n {worst_final:.2e} (tolerance {final_tol:.0e})", pairs.len()),
            header: vec!["pair", "n", "srt", "srt_bound", "verdict"],
            rows,
        })
    }
}

// --- Lie closure ------------------------------------------------------------------

/// `Σ_λ E_λ X E_λ` over the eigenspaces of the Hermitian `s`: the part of `x`
/// commuting with `s`.
fn project_commutant(x: &CMatrix, s: &CMatrix) -> Result<CMatrix, SuiteError> {
    let dec = hermitian_eig(s).map_err(BlockError::from)?;
    let n = s.dim();
    let v = dec.basis.inner();
    let mut out = CMatrix::zeros(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (dec.eigenvalues[end] - dec.eigenvalues[start]).abs() < 1e-9 {
            end += 1;
        }
        let cols = v.columns(start, end - start).into_owned();
        let p = CMatrix::try_from(&cols * cols.adjoint()).map_err(BlockError::from)?;
        out = &out + &(&(&p * x) * &p);
        start = end;
    }
    Ok(out)
}

/// Random member of `Lie(G)` on a finite algebra.
fn random_generator(rng: &mut ChaCha8Rng, alg: &Arc<FiniteBlockAlgebra>, kind: &SubgroupKind) -> Result<SkewAdjointOp, SuiteError> {
    let count = alg.block_count().expect("finite algebra");
    let mut blocks = Vec::with_capacity(count);
    for k in 0..count {
        let x = random_skew(rng, alg.dim(k));
        let x = match kind {
            SubgroupKind::CommutantFixed(ops) => {
                let mut y = x;
                for s in ops {
                    y = project_commutant(&y, &s.block(k))?;
                }
                y
            }
            other => project_generator(other, &x),
        };
        blocks.push(x);
    }
    Ok(SkewAdjointOp::new(BlockOperator::new(alg.clone(), blocks, TailRule::Zero)?)?)
}

pub struct LieClosure;

impl LieClosure {
    pub fn algebra() -> Arc<FiniteBlockAlgebra> {
        Arc::new(FiniteBlockAlgebra::new(vec![2, 3, 1], vec![0.5, 0.3, 0.2], None).expect("weights sum to one"))
    }

    pub fn specs(alg: &Arc<FiniteBlockAlgebra>, tol: f64) -> Vec<SubgroupSpec> {
        let s = BlockOperator::new(
            alg.clone(),
            vec![
                CMatrix::from_real_diagonal(&[1.0, -1.0]),
                CMatrix::from_real_diagonal(&[1.0, 1.0, 2.0]),
                CMatrix::from_real_diagonal(&[3.0]),
            ],
            TailRule::Zero,
        )
        .expect("shapes match");
        vec![
            SubgroupSpec::new(SubgroupKind::FullUnitary, tol),
            SubgroupSpec::new(SubgroupKind::CommutantFixed(vec![s]), tol),
            SubgroupSpec::new(SubgroupKind::BlockDeterminantOne, tol),
            SubgroupSpec::new(SubgroupKind::DiagonalUnitaries, tol),
        ]
    }
}

impl Suite for LieClosure {
    fn name(&self) -> &'static str {
        "lie_closure"
    }

    fn run(&self, params: &SuiteParams) -> Result<SuiteOutcome, SuiteError> {
        let tol = params.tol_or(1e-8);
        let t_samples = params.t_values.clone().unwrap_or_else(default_t_samples);
        let alg = Self::algebra();
        let mut rng = params.seeded(6);
        let mut rows = Vec::new();
        let mut pass = true;
        let mut worst: f64 = 0.0;
        for spec in Self::specs(&alg, tol) {
            for pair in 0..20 {
                let a = random_generator(&mut rng, &alg, &spec.kind)?;
                let b = random_generator(&mut rng, &alg, &spec.kind)?;
                let alpha = rng.random_range(-3.0..3.0);
                let report = lie_closure_check(&a, &b, alpha, &spec, &t_samples)?;
                pass &= report.all_pass();
                worst = worst.max(report.max_residual());
                for r in report.rows {
                    rows.push(vec![
                        spec.kind.name().to_string(),
                        pair.to_string(),
                        r.element,
                        r.test,
                        fmt_float(r.t),
                        verdict(r.pass),
                        fmt_float(r.residual),
                    ]);
                }
            }
        }
        Ok(SuiteOutcome {
            name: self.name(),
            pass,
            summary: format!("4 subgroup kinds x 20 pairs, worst group residual {worst:.2e} (tolerance {tol:.0e})"),
            header: vec!["kind", "pair", "element", "test", "t", "verdict", "residual"],
            rows,
        })
    }
}

// --- spectral convergence -------------------------------------------------------

/// Blocks whose canonical vectors are probed in the spectral checks.
pub const SPECTRAL_BLOCKS: usize = 16;

/// Interval endpoints off the spectrum of `a` on the probed blocks: from
/// below the spectrum to the middle of its widest gap.
pub fn off_spectrum_interval(a: &BlockOperator) -> Result<(f64, f64), SuiteError> {
    let blocks = a.block_count().map_or(SPECTRAL_BLOCKS, |c| c.min(SPECTRAL_BLOCKS));
    let mut eig = Vec::new();
    for k in 0..blocks {
        eig.extend(hermitian_eig(&a.block(k)).map_err(BlockError::from)?.eigenvalues);
    }
    eig.sort_by(f64::total_cmp);
    let lo = eig[0] - 0.5;
    let hi = eig
        .windows(2)
        .max_by(|x, y| (x[1] - x[0]).total_cmp(&(y[1] - y[0])))
        .filter(|w| w[1] - w[0] > 1e-6)
        .map_or(eig[eig.len() - 1] + 0.5, |w| 0.5 * (w[0] + w[1]));
    Ok((lo, hi))
}

pub struct SpectralConvergence;

impl Suite for SpectralConvergence {
    fn name(&self) -> &'static str {
        "spectral_convergence"
    }

    fn run(&self, params: &SuiteParams) -> Result<SuiteOutcome, SuiteError> {
        let tol = params.tol_or(1e-6);
        let functions: [(&str, &(dyn Fn(f64) -> f64 + Sync)); 3] = [
            ("tent", &|x| tent(x, 2.0)),
            ("arctan", &|x: f64| x.atan()),
            ("lorentzian", &|x: f64| 1.0 / (1.0 + x * x)),
        ];
        let mut rows = Vec::new();
        let mut pass = true;
        let mut worst: f64 = 0.0;
        for f in spectral_families() {
            let (_, last) = f.sequence.last().expect("nonempty family");
            let mut record = |test: String, gap: f64| {
                let ok = gap < tol;
                pass &= ok;
                worst = worst.max(gap);
                rows.push(vec![f.name.to_string(), test, fmt_float(gap), verdict(ok)]);
            };
            for (name, func) in &functions {
                record(name.to_string(), functional_gap(last, &f.limit, *func, SPECTRAL_BLOCKS)?);
            }
            let (lo, hi) = off_spectrum_interval(&f.limit)?;
            record(format!("projection({lo},{hi})"), spectral_projection_gap(last, &f.limit, lo, hi, SPECTRAL_BLOCKS)?);
        }
        Ok(SuiteOutcome {
            name: self.name(),
            pass,
            summary: format!("5 families, worst gap at the last index {worst:.2e} (tolerance {tol:.0e})"),
            header: vec!["family", "test", "gap", "verdict"],
            rows,
        })
    }
}

// --- exponential map ------------------------------------------------------------

pub struct ExpInjectivity;

impl ExpInjectivity {
    pub fn algebras(rng: &mut ChaCha8Rng) -> Vec<(String, Arc<FiniteBlockAlgebra>)> {
        let mut out = vec![
            ("m1".to_string(), Arc::new(FiniteBlockAlgebra::single_block(1))),
            ("m2+m3".to_string(), Arc::new(FiniteBlockAlgebra::new(vec![2, 3], vec![0.5, 0.5], None).expect("valid"))),
        ];
        for i in 0..3 {
            out.push((format!("random_{i}"), Arc::new(random_finite_algebra(rng, 4, 4))));
        }
        out.push(("dyadic".to_string(), Arc::new(FiniteBlockAlgebra::dyadic_diagonal())));
        out.push((
            "m2+m3+tail".to_string(),
            Arc::new(FiniteBlockAlgebra::new(vec![2, 3], vec![0.25, 0.25], Some(0.5)).expect("valid")),
        ));
        out
    }
}

impl Suite for ExpInjectivity {
    fn name(&self) -> &'static str {
        "exp_injectivity"
    }

    fn run(&self, params: &SuiteParams) -> Result<SuiteOutcome, SuiteError> {
        let mut rng = params.seeded(8);
        let mut rows = Vec::new();
        let mut pass = true;
        let mut notes = Vec::new();
        for (i, (name, alg)) in Self::algebras(&mut rng).into_iter().enumerate() {
            let report = exp_injectivity_probe(&alg, 200, params.seed.wrapping_add(i as u64))?;
            pass &= report.holds() && alg.is_finite() == matches!(report, crate::liealg::InjectivityReport::Injective { .. });
            notes.push(format!("{name}:{}", if alg.is_finite() { "injective" } else { "witnessed" }));
            for r in report.to_rows().rows {
                rows.push(vec![name.clone(), r.element, r.test, fmt_float(r.t), verdict(r.pass), fmt_float(r.residual)]);
            }
        }
        Ok(SuiteOutcome {
            name: self.name(),
            pass,
            summary: notes.join(" "),
            header: vec!["algebra", "element", "test", "t", "verdict", "residual"],
            rows,
        })
    }
}

// --- tensor products ------------------------------------------------------------

/// Every block shape of total dimension at most `max_total`.
pub fn small_shapes(max_total: usize) -> Vec<Vec<usize>> {
    fn compositions(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        (1..=n)
            .flat_map(|first| {
                compositions(n - first).into_iter().map(move |mut rest| {
                    rest.insert(0, first);
                    rest
                })
            })
            .collect()
    }
    (1..=max_total).flat_map(compositions).collect()
}

fn uniform(shape: &[usize]) -> Arc<FiniteBlockAlgebra> {
    let n = shape.len();
    let mut w = vec![1.0 / n as f64; n];
    let head: f64 = w[..n - 1].iter().sum();
    w[n - 1] = 1.0 - head;
    Arc::new(FiniteBlockAlgebra::new(shape.to_vec(), w, None).expect("uniform weights"))
}

/// Residuals of the Kronecker laws for operators `a, a2` on `M` and `b, b2` on `N`.
pub fn kronecker_residuals(
    a: &BlockOperator,
    a2: &BlockOperator,
    b: &BlockOperator,
    b2: &BlockOperator,
) -> Result<[(&'static str, f64); 4], SuiteError> {
    let alg = Arc::new(tensor_algebra(a.algebra(), b.algebra())?);
    let t = |x: &BlockOperator, y: &BlockOperator| tensor_op_into(alg.clone(), x, y);
    let (ab, a2b2) = (t(a, b)?, t(a2, b2)?);
    let nb = b.block_count().expect("finite");
    let scale = |x: &BlockOperator, y: &BlockOperator, k: usize| fro(x, k / nb) * fro(y, k % nb);
    let mult = relative_gap(&ab.mul(&a2b2)?, &t(&a.mul(a2)?, &b.mul(b2)?)?, |k| scale(a, b, k) * scale(a2, b2, k));
    let star = relative_gap(&ab.adjoint(), &t(&a.adjoint(), &b.adjoint())?, |k| scale(a, b, k));
    let add = relative_gap(&t(&a.add(a2)?, b)?, &ab.add(&t(a2, b)?)?, |k| (fro(a, k / nb) + fro(a2, k / nb)) * fro(b, k % nb));
    let ta = ab.trace()?;
    let tb = a.trace()? * b.trace()?;
    let trace = if ta == tb { 0.0 } else { (ta - tb).norm() / (fro(a, 0).max(1.0) * fro(b, 0).max(1.0)) };
    Ok([("product", mult), ("adjoint", star), ("sum", add), ("trace", trace)])
}

pub struct TensorLaws;

impl Suite for TensorLaws {
    fn name(&self) -> &'static str {
        "tensor_laws"
    }

    fn run(&self, params: &SuiteParams) -> Result<SuiteOutcome, SuiteError> {
        let tol = params.tol_or(1e-12);
        let mut rng = params.seeded(9);
        let mut rows = Vec::new();
        let mut pass = true;
        let mut worst: f64 = 0.0;
        for pair in 0..100 {
            let m = Arc::new(random_finite_algebra(&mut rng, 3, 3));
            let n = Arc::new(random_finite_algebra(&mut rng, 3, 3));
            let a = random_bounded_operator(&mut rng, m.clone());
            let a2 = random_bounded_operator(&mut rng, m);
            let b = random_bounded_operator(&mut rng, n.clone());
            let b2 = random_bounded_operator(&mut rng, n);
            for (law, r) in kronecker_residuals(&a, &a2, &b, &b2)? {
                let ok = r <= tol;
                pass &= ok;
                worst = worst.max(r);
                rows.push(vec![format!("kronecker_{law}"), format!("pair_{pair}"), fmt_float(r), verdict(ok)]);
            }
        }
        let shapes = small_shapes(4);
        let count = shapes.len();
        let triples: Vec<(usize, usize, usize)> = (0..count)
            .flat_map(|i| (0..count).flat_map(move |j| (0..count).map(move |k| (i, j, k))))
            .filter(|&(i, j, k)| {
                let total = |s: &Vec<usize>| s.iter().sum::<usize>();
                total(&shapes[i]) * total(&shapes[j]) * total(&shapes[k]) <= 64
            })
            .collect();
        let reports: Vec<_> = triples
            .par_iter()
            .enumerate()
            .map(|(idx, &(i, j, k))| {
                coherence_check(&uniform(&shapes[i]), &uniform(&shapes[j]), &uniform(&shapes[k]), params.seed.wrapping_add(idx as u64))
            })
            .collect::<Result<_, _>>()?;
        let mut coherence_failures = 0;
        for rep in &reports {
            for r in &rep.rows {
                if !r.pass {
                    coherence_failures += 1;
                }
                rows.push(vec![r.check.clone(), r.shapes.clone(), r.permutation_size.to_string(), verdict(r.pass)]);
            }
        }
        pass &= coherence_failures == 0;
        Ok(SuiteOutcome {
            name: self.name(),
            pass,
            summary: format!(
                "100 Kronecker pairs, worst residual {worst:.2e}; {} shape triples, {coherence_failures} coherence failures",
                triples.len()
            ),
            header: vec!["check", "case", "value", "verdict"],
            rows,
        })
    }
}

// --- functors -----------------------------------------------------------------

/// The four morphism kinds on `alg`.
pub fn sample_morphisms(rng: &mut ChaCha8Rng, alg: &Arc<FiniteBlockAlgebra>) -> Result<Vec<Morphism>, SuiteError> {
    let n = alg.explicit_len().max(2).min(alg.block_count().unwrap_or(usize::MAX));
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let w = (0..alg.explicit_len()).map(|k| random_unitary(rng, alg.dim(k))).collect();
    Ok(vec![
        Morphism::identity(alg.clone()),
        Morphism::block_permutation(alg.clone(), perm)?,
        Morphism::unitary_conjugation(alg.clone(), w)?,
        Morphism::ampliation(alg.clone(), 2)?,
    ])
}

/// `φ` against `x*`, `x + y`, `xy` and `λx`.
pub fn star_commutation_residuals(phi: &Morphism, x: &BlockOperator, y: &BlockOperator) -> Result<[(&'static str, f64); 4], SuiteError> {
    let (fx, fy) = (extend_morphism(phi, x)?, extend_morphism(phi, y)?);
    let lambda = C64::new(-0.7, 2.1);
    let adj = relative_gap(&extend_morphism(phi, &x.adjoint())?, &fx.adjoint(), |k| 1.0 + fro(&fx, k));
    let add = relative_gap(&extend_morphism(phi, &x.add(y)?)?, &fx.add(&fy)?, |k| 1.0 + fro(&fx, k) + fro(&fy, k));
    let mul = relative_gap(&extend_morphism(phi, &x.mul(y)?)?, &fx.mul(&fy)?, |k| 1.0 + fro(&fx, k) * fro(&fy, k));
    let scale = relative_gap(&extend_morphism(phi, &x.scale(lambda))?, &fx.scale(lambda), |k| 1.0 + lambda.norm() * fro(&fx, k));
    Ok([("adjoint", adj), ("sum", add), ("product", mul), ("scalar", scale)])
}

pub struct FunctorIsomorphism;

impl Suite for FunctorIsomorphism {
    fn name(&self) -> &'static str {
        "functor_isomorphism"
    }

    fn run(&self, params: &SuiteParams) -> Result<SuiteOutcome, SuiteError> {
        let tol = params.tol_or(1e-11);
        let mut rng = params.seeded(10);
        let mut rows = Vec::new();
        let mut pass = true;
        let mut worst: f64 = 0.0;
        for case in 0..20 {
            let alg = Arc::new(if case % 2 == 0 {
                random_finite_algebra(&mut rng, 4, 4)
            } else {
                random_tailed_algebra(&mut rng, 3, 4)
            });
            let ring = functor_e(&alg);
            let objects = functor_f(&ring) == alg && functor_e(&functor_f(&ring)) == ring;
            pass &= objects;
            rows.push(vec![case.to_string(), "objects".into(), "identity_functors".into(), fmt_float(0.0), verdict(objects)]);
            for phi in sample_morphisms(&mut rng, &alg)? {
                let kind = format!("{:?}", phi.kind()).split(['(', ' ']).next().unwrap_or("").to_lowercase();
                let ring_phi = functor_e_morphism(&phi);
                let arrows = functor_f_morphism(&ring_phi) == phi
                    && functor_e_morphism(&functor_f_morphism(&ring_phi)) == ring_phi
                    && ring_phi == RingMorphism { descriptor: phi.clone() };
                pass &= arrows;
                rows.push(vec![case.to_string(), kind.clone(), "identity_functors".into(), fmt_float(0.0), verdict(arrows)]);
                let len_x = rng.random_range(0..=4);
                let len_y = rng.random_range(0..=4);
                let x = random_operator(&mut rng, alg.clone(), len_x);
                let y = random_operator(&mut rng, alg.clone(), len_y);
                for (op, r) in star_commutation_residuals(&phi, &x, &y)? {
                    let ok = r <= tol;
                    pass &= ok;
                    worst = worst.max(r);
                    rows.push(vec![case.to_string(), kind.clone(), op.to_string(), fmt_float(r), verdict(ok)]);
                }
            }
        }
        Ok(SuiteOutcome {
            name: self.name(),
            pass,
            summary: format!("20 algebras x 4 morphism kinds, worst star-operation residual {worst:.2e} (tolerance {tol:.0e})"),
            header: vec!["case", "morphism", "check", "residual", "verdict"],
            rows,
        })
    }
}
