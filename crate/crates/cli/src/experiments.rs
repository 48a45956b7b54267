//! One experiment per command, registered by command name. Without inputs a
//! command runs its library suites; with `--input` (or `--family`) it checks
//! the same properties on user-supplied operators.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::config::{Command, ExperimentConfig};
use crate::CliError;
use mvnlab::blockvn::io::read_operator_file;
use mvnlab::blockvn::{BlockOperator, FiniteBlockAlgebra};
use mvnlab::families::family_by_name;
use mvnlab::liealg::{
    default_t_samples, error_schedule, exp_injectivity_probe, lie_closure_check, ProductRegistry, SkewAdjointOp,
    SubgroupKind, SubgroupSpec,
};
use mvnlab::suites::{
    family_header, family_rows, star_algebra_residuals, trends, SuiteOutcome, SuiteRegistry, Trend, CONVERGENCE_THRESHOLD,
    SEPARATION_THRESHOLD,
};
use mvnlab::tensorcat::coherence_check;
use mvnlab::topologies::{convergence_report, fmt_float, MetricParams};

/// A rendered CSV artifact.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub csv: Vec<u8>,
}

impl Table {
    pub fn from_records(name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<Table, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let csv = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        Ok(Table { name: name.into(), csv })
    }

    fn from_writer(name: &str, write: impl FnOnce(&mut Vec<u8>) -> Result<(), csv::Error>) -> Result<Table, CliError> {
        let mut csv = Vec::new();
        write(&mut csv)?;
        Ok(Table { name: name.into(), csv })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutcome {
    pub pass: bool,
    pub tables: Vec<Table>,
    /// `(module, message)` lines for stderr.
    pub notes: Vec<(String, String)>,
}

impl RunOutcome {
    fn single(pass: bool, table: Table, module: &str, note: String) -> RunOutcome {
        RunOutcome { pass, tables: vec![table], notes: vec![(module.into(), note)] }
    }
}

pub trait Experiment: Send + Sync {
    fn command(&self) -> Command;
    /// Library suites run when no inputs are given.
    fn suites(&self) -> &'static [&'static str];
    fn run(&self, cfg: &ExperimentConfig) -> Result<RunOutcome, CliError>;
}

pub struct ExperimentRegistry {
    entries: BTreeMap<Command, Box<dyn Experiment>>,
}

impl ExperimentRegistry {
    pub fn empty() -> Self {
        ExperimentRegistry { entries: BTreeMap::new() }
    }

    pub fn standard() -> Self {
        let mut r = Self::empty();
        let all: Vec<Box<dyn Experiment>> = vec![
            Box::new(OpsCheck),
            Box::new(TopologyCompare),
            Box::new(ProductRun { command: Command::Trotter, formula: "trotter", schedule: &[64, 128, 256, 512], t: 1.0 }),
            Box::new(ProductRun { command: Command::Nelson, formula: "nelson", schedule: &[8, 16, 32, 64, 128], t: 0.5 }),
            Box::new(LieClosureRun),
            Box::new(TensorLaws),
            Box::new(ExpInjectivity),
        ];
        for e in all {
            r.register(e);
        }
        r
    }

    pub fn register(&mut self, e: Box<dyn Experiment>) {
        self.entries.insert(e.command(), e);
    }

    pub fn get(&self, command: Command) -> Option<&dyn Experiment> {
        self.entries.get(&command).map(|b| b.as_ref())
    }

    pub fn commands(&self) -> Vec<Command> {
        self.entries.keys().copied().collect()
    }

    pub fn run(&self, cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
        let e = self
            .get(cfg.command)
            .ok_or_else(|| CliError::Config(format!("no experiment registered for `{}`", cfg.command.name())))?;
        e.run(cfg)
    }
}

fn read_op(path: &Path) -> Result<BlockOperator, CliError> {
    read_operator_file(path)
        .map(|p| p.into_operator())
        .map_err(|source| CliError::Input { path: path.display().to_string(), source })
}

fn read_algebra(path: &Path) -> Result<Arc<FiniteBlockAlgebra>, CliError> {
    read_operator_file(path)
        .map(|p| p.algebra().clone())
        .map_err(|source| CliError::Input { path: path.display().to_string(), source })
}

fn expect_inputs(cfg: &ExperimentConfig, n: usize, what: &str) -> Result<(), CliError> {
    if cfg.inputs.len() != n {
        return Err(CliError::Config(format!(
            "{} takes {n} {what} file(s) with --input, got {}",
            cfg.command.name(),
            cfg.inputs.len()
        )));
    }
    Ok(())
}

fn verdict(pass: bool) -> String {
    if pass { "pass" } else { "fail" }.to_string()
}

fn suite_table(o: &SuiteOutcome) -> Result<Table, CliError> {
    Table::from_writer(o.name, |buf| o.write_csv(buf))
}

/// Runs the selected suites (in parallel; output order follows `available`).
fn run_suites(cfg: &ExperimentConfig, available: &[&'static str]) -> Result<RunOutcome, CliError> {
    for s in &cfg.suites {
        if !available.contains(&s.as_str()) {
            return Err(CliError::Config(format!(
                "suite `{s}` is not part of {} (available: {})",
                cfg.command.name(),
                available.join(", ")
            )));
        }
    }
    let chosen: Vec<&str> =
        available.iter().copied().filter(|s| cfg.suites.is_empty() || cfg.suites.iter().any(|c| c == s)).collect();
    let registry = SuiteRegistry::standard();
    let params = cfg.suite_params();
    let outcomes: Vec<SuiteOutcome> = chosen
        .par_iter()
        .map(|name| {
            let suite = registry.get(name).ok_or_else(|| CliError::Config(format!("unknown suite `{name}`")))?;
            suite.run(&params).map_err(CliError::from)
        })
        .collect::<Result<_, _>>()?;
    let mut out = RunOutcome { pass: true, ..Default::default() };
    for o in &outcomes {
        out.pass &= o.pass;
        out.tables.push(suite_table(o)?);
        out.notes.push((o.name.to_string(), format!("{}: {}", verdict(o.pass), o.summary)));
    }
    Ok(out)
}

// --- commands ---------------------------------------------------------------------

pub struct OpsCheck;

impl Experiment for OpsCheck {
    fn command(&self) -> Command {
        Command::OpsCheck
    }

    fn suites(&self) -> &'static [&'static str] {
        &["star_algebra"]
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
        if cfg.inputs.is_empty() {
            return run_suites(cfg, self.suites());
        }
        expect_inputs(cfg, 3, "operator")?;
        let ops = cfg.inputs.iter().map(|p| read_op(p)).collect::<Result<Vec<_>, _>>()?;
        let tol = cfg.tol.unwrap_or(1e-11);
        let residuals = star_algebra_residuals(&ops[0], &ops[1], &ops[2]).map_err(CliError::from)?;
        let pass = residuals.iter().all(|(_, r)| *r <= tol);
        let rows: Vec<Vec<String>> = residuals.iter().map(|(law, r)| vec![law.to_string(), fmt_float(*r), verdict(*r <= tol)]).collect();
        let worst = residuals.iter().map(|(_, r)| *r).fold(0.0, f64::max);
        Ok(RunOutcome::single(
            pass,
            Table::from_records("ops", &["law", "residual", "verdict"], &rows)?,
            "blockvn",
            format!("{}: worst relative residual {worst:.2e} (tolerance {tol:.0e})", verdict(pass)),
        ))
    }
}

pub struct TopologyCompare;

impl TopologyCompare {
    fn family(cfg: &ExperimentConfig, name: &str) -> Result<RunOutcome, CliError> {
        let f = family_by_name(name).ok_or_else(|| {
            CliError::Config(format!("unknown family `{name}` (available: {})", mvnlab::families::family_names().join(", ")))
        })?;
        let report = convergence_report(&f.sequence, &f.limit, &MetricParams::default()).map_err(mvnlab::suites::SuiteError::from)?;
        let want = if f.converges { Trend::Converging } else { Trend::Separated };
        let mut rows = Vec::new();
        let mut pass = true;
        let mut notes = Vec::new();
        for (metric, trend) in trends(&report, cfg.tol.unwrap_or(CONVERGENCE_THRESHOLD), SEPARATION_THRESHOLD) {
            // sot only exists along norm-bounded sequences
            let ok = trend == want || (metric == "sot" && trend == Trend::Undefined);
            pass &= ok;
            notes.push(format!("{metric}={}", trend.as_str()));
            rows.push(vec![f.name.to_string(), metric.to_string(), trend.as_str().into(), want.as_str().into(), verdict(ok)]);
        }
        let tables = vec![
            Table::from_records(f.name, &family_header(), &family_rows(f.name, &report))?,
            Table::from_records("trends", &["family", "metric", "trend", "expected", "verdict"], &rows)?,
        ];
        let note = format!("{}: {} expected {}: {}", verdict(pass), f.name, want.as_str(), notes.join(" "));
        Ok(RunOutcome { pass, tables, notes: vec![("topologies".into(), note)] })
    }
}

impl Experiment for TopologyCompare {
    fn command(&self) -> Command {
        Command::TopologyCompare
    }

    fn suites(&self) -> &'static [&'static str] {
        &["topology_coconvergence", "bounded_ball", "spectral_convergence"]
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
        if !cfg.inputs.is_empty() {
            return Err(CliError::Config("topology-compare selects bundled sequences with --family, not --input".into()));
        }
        match &cfg.family {
            Some(name) => Self::family(cfg, name),
            None => run_suites(cfg, self.suites()),
        }
    }
}

/// Trotter or Nelson: the library suite, or the error schedule of a given pair.
pub struct ProductRun {
    command: Command,
    formula: &'static str,
    schedule: &'static [u64],
    t: f64,
}

impl Experiment for ProductRun {
    fn command(&self) -> Command {
        self.command
    }

    fn suites(&self) -> &'static [&'static str] {
        match self.command {
            Command::Nelson => &["nelson"],
            _ => &["trotter_rate"],
        }
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
        if cfg.inputs.is_empty() {
            return run_suites(cfg, self.suites());
        }
        expect_inputs(cfg, 2, "skew-adjoint operator")?;
        let a = SkewAdjointOp::new(read_op(&cfg.inputs[0])?)?;
        let b = SkewAdjointOp::new(read_op(&cfg.inputs[1])?)?;
        let registry = ProductRegistry::standard();
        let formula = registry.get(self.formula).ok_or_else(|| CliError::Config(format!("no product formula `{}`", self.formula)))?;
        let schedule = cfg.n_schedule.clone().unwrap_or_else(|| self.schedule.to_vec());
        let ts = cfg.t_values.clone().unwrap_or_else(|| vec![self.t]);
        let per_t = ts
            .par_iter()
            .map(|&t| error_schedule(formula, &a, &b, t, &schedule, 1e-12).map(|errs| (t, errs)))
            .collect::<Result<Vec<_>, _>>()?;
        let mut rows = Vec::new();
        let mut pass = true;
        let mut last_errors = Vec::new();
        for (t, errs) in &per_t {
            // errors may only shrink as n grows; `--tol` also caps the last one
            let mut ok = errs.windows(2).all(|w| w[1].1.value <= w[0].1.value + 1e-12);
            if let (Some(tol), Some((_, last))) = (cfg.tol, errs.last()) {
                ok &= last.upper() <= tol;
            }
            pass &= ok;
            last_errors.push(format!("t={t}: {:.2e}", errs.last().map_or(0.0, |e| e.1.value)));
            for (n, e) in errs {
                rows.push(vec![fmt_float(*t), n.to_string(), fmt_float(e.value), fmt_float(e.bound), verdict(ok)]);
            }
        }
        Ok(RunOutcome::single(
            pass,
            Table::from_records(self.formula, &["t", "n", "error", "error_bound", "verdict"], &rows)?,
            "liealg",
            format!("{}: {} error at the last n, {}", verdict(pass), self.formula, last_errors.join(", ")),
        ))
    }
}

pub struct LieClosureRun;

impl LieClosureRun {
    fn subgroup(cfg: &ExperimentConfig, tol: f64) -> Result<SubgroupSpec, CliError> {
        let kind = match cfg.subgroup.as_deref().unwrap_or("full_unitary") {
            "full_unitary" => SubgroupKind::FullUnitary,
            "block_determinant_one" => SubgroupKind::BlockDeterminantOne,
            "diagonal_unitaries" => SubgroupKind::DiagonalUnitaries,
            "commutant_fixed" => {
                if cfg.commutant.is_empty() {
                    return Err(CliError::Config("commutant_fixed needs at least one --commutant operator".into()));
                }
                SubgroupKind::CommutantFixed(cfg.commutant.iter().map(|p| read_op(p)).collect::<Result<_, _>>()?)
            }
            other => return Err(CliError::Config(format!("unknown subgroup `{other}`"))),
        };
        Ok(SubgroupSpec::new(kind, tol))
    }
}

impl Experiment for LieClosureRun {
    fn command(&self) -> Command {
        Command::LieClosure
    }

    fn suites(&self) -> &'static [&'static str] {
        &["lie_closure"]
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
        if cfg.inputs.is_empty() {
            return run_suites(cfg, self.suites());
        }
        expect_inputs(cfg, 2, "skew-adjoint operator")?;
        let a = SkewAdjointOp::new(read_op(&cfg.inputs[0])?)?;
        let b = SkewAdjointOp::new(read_op(&cfg.inputs[1])?)?;
        let tol = cfg.tol.unwrap_or(1e-8);
        let spec = Self::subgroup(cfg, tol)?;
        let t_samples = cfg.t_values.clone().unwrap_or_else(default_t_samples);
        let report = lie_closure_check(&a, &b, cfg.alpha.unwrap_or(1.0), &spec, &t_samples)?;
        let pass = report.all_pass();
        Ok(RunOutcome::single(
            pass,
            Table::from_writer("lie_closure", |buf| report.write_csv(buf))?,
            "liealg",
            format!("{}: {} closure, worst residual {:.2e}", verdict(pass), spec.kind.name(), report.max_residual()),
        ))
    }
}

pub struct TensorLaws;

impl Experiment for TensorLaws {
    fn command(&self) -> Command {
        Command::TensorLaws
    }

    fn suites(&self) -> &'static [&'static str] {
        &["tensor_laws", "functor_isomorphism"]
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
        if cfg.inputs.is_empty() {
            return run_suites(cfg, self.suites());
        }
        expect_inputs(cfg, 3, "algebra")?;
        let algs = cfg.inputs.iter().map(|p| read_algebra(p)).collect::<Result<Vec<_>, _>>()?;
        let report = coherence_check(&algs[0], &algs[1], &algs[2], cfg.seed)?;
        let pass = report.all_pass();
        Ok(RunOutcome::single(
            pass,
            Table::from_writer("coherence", |buf| report.write_csv(buf))?,
            "tensorcat",
            format!("{}: {} coherence checks", verdict(pass), report.rows.len()),
        ))
    }
}

pub struct ExpInjectivity;

impl Experiment for ExpInjectivity {
    fn command(&self) -> Command {
        Command::ExpInjectivity
    }

    fn suites(&self) -> &'static [&'static str] {
        &["exp_injectivity"]
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
        if cfg.inputs.is_empty() {
            return run_suites(cfg, self.suites());
        }
        expect_inputs(cfg, 1, "algebra")?;
        let alg = read_algebra(&cfg.inputs[0])?;
        let report = exp_injectivity_probe(&alg, 200, cfg.seed)?;
        let pass = report.holds();
        let what = if alg.is_finite() { "injective near zero" } else { "period witnesses accumulate at zero" };
        Ok(RunOutcome::single(
            pass,
            Table::from_writer("exp_injectivity", |buf| report.write_csv(buf))?,
            "liealg",
            format!("{}: {what}", verdict(pass)),
        ))
    }
}
