//! Convergence studies: both bases per level, conditioning, errors, orders.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::assembly::{
    assemble_full, assemble_matrix_free, assemble_nodal, compose_solution, AssemblyOptions,
    ProblemSpec, Solution,
};
use crate::basis2d::build_augmented_set;
use crate::error::{Error, Result};
use crate::geometry::Side;
use crate::solver::{
    condition_number, solve_cg, solve_direct, solve_gmres, ConditionMode, Conditioning,
    SolveReport, DENSE_LIMIT,
};
use crate::sparse::CsrMatrix;

use super::config::{CondSetting, SolverKind, StudyConfig};
use super::errors::{compute_errors, order, ErrorPair};
use super::plot::error_plot;
use super::registry::registry_get;

/// Relative residual of the reference solve.
pub const REFERENCE_TOLERANCE: f64 = 1e-10;
const REFERENCE_MAX_ITER: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    /// Truncated wavelet basis plus the functions added near the interface.
    Augmented,
    /// Nodal hats of the uniform level-J grid; the same space as the
    /// truncated wavelet basis.
    Standard,
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisKind::Augmented => "augmented",
            BasisKind::Standard => "standard",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Timings {
    pub assembly: f64,
    pub conditioning: f64,
    pub solve: f64,
    pub errors: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub level: u32,
    pub basis: BasisKind,
    pub unknowns: usize,
    pub conditioning: Option<Conditioning>,
    pub errors: Option<ErrorPair>,
    pub l2_order: Option<f64>,
    pub h1_order: Option<f64>,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
    pub timings: Timings,
    /// Set when the row failed; the other measurements may be missing.
    pub failure: Option<String>,
}

impl StudyRow {
    fn new(level: u32, basis: BasisKind) -> Self {
        Self {
            level,
            basis,
            unknowns: 0,
            conditioning: None,
            errors: None,
            l2_order: None,
            h1_order: None,
            iterations: None,
            residual: None,
            timings: Timings::default(),
            failure: None,
        }
    }

    pub fn kappa(&self) -> Option<f64> {
        self.conditioning.map(|c| c.kappa)
    }
}

#[derive(Debug, Clone)]
pub struct StudyOutcome {
    /// One block per configured basis, each by increasing level.
    pub rows: Vec<StudyRow>,
    /// `max a / min a`, the coefficient contrast.
    pub contrast: f64,
    pub reference_level: Option<u32>,
}

impl StudyOutcome {
    pub fn block(&self, basis: BasisKind) -> impl Iterator<Item = &StudyRow> {
        self.rows.iter().filter(move |r| r.basis == basis)
    }

    pub fn row(&self, basis: BasisKind, level: u32) -> Option<&StudyRow> {
        self.block(basis).find(|r| r.level == level)
    }
}

type Truth<'a> = Box<dyn Fn(Side, f64, f64) -> (f64, [f64; 2]) + 'a>;

fn secs(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

fn options(cfg: &StudyConfig) -> AssemblyOptions {
    AssemblyOptions {
        quad_order: cfg.quad_order,
        level_guard: cfg.level_guard,
    }
}

fn conditioning(matrix: &CsrMatrix, setting: CondSetting) -> Result<Option<Conditioning>> {
    let mode = match setting {
        CondSetting::Off => return Ok(None),
        CondSetting::Dense if matrix.nrows <= DENSE_LIMIT => ConditionMode::Dense,
        CondSetting::Dense => {
            log::info!(
                "{} unknowns exceed the dense limit; using Lanczos",
                matrix.nrows
            );
            ConditionMode::Iterative
        }
        CondSetting::Iter => ConditionMode::Iterative,
    };
    condition_number(matrix, mode).map(Some)
}

fn solve(matrix: &CsrMatrix, rhs: &[f64], cfg: &StudyConfig) -> Result<SolveReport> {
    let report = match cfg.solver {
        SolverKind::Direct => solve_direct(matrix, rhs)?,
        SolverKind::Gmres => solve_gmres(matrix, rhs, cfg.tol, cfg.max_iter)?,
    };
    if !report.converged {
        log::warn!(
            "{:?} stopped at relative residual {:.3e} after {:?} iterations",
            report.method,
            report.residual,
            report.iterations
        );
    }
    Ok(report)
}

/// Augmented-basis solution at `cfg.reference_level`, solved matrix-free.
pub fn reference_solution(problem: &ProblemSpec, cfg: &StudyConfig) -> Result<Solution> {
    let level = cfg.reference_level;
    let set = build_augmented_set(cfg.coarse_level, level, &problem.curve)?;
    log::info!("reference level {level}: {} unknowns", set.len());
    let (sys, lifting) = assemble_matrix_free(problem, &set, &options(cfg))?;
    let report = solve_cg(
        &sys,
        &sys.rhs,
        &sys.diagonal,
        REFERENCE_TOLERANCE,
        REFERENCE_MAX_ITER,
    )?;
    log::info!(
        "reference solve: {:?} iterations, residual {:.3e}",
        report.iterations,
        report.residual
    );
    if !report.converged {
        return Err(Error::Config(format!(
            "reference solve stalled at residual {:.3e}",
            report.residual
        )));
    }
    Ok(Solution {
        field: sys.transform.field(sys.mesh(), &report.coeffs),
        lifting: Some(lifting),
    })
}

fn run_augmented(
    problem: &ProblemSpec,
    level: u32,
    cfg: &StudyConfig,
    truth: &Truth,
    row: &mut StudyRow,
) -> Result<()> {
    let t = Instant::now();
    let set = build_augmented_set(cfg.coarse_level, level, &problem.curve)?;
    row.unknowns = set.len();
    let mut asm = assemble_full(problem, &set, &options(cfg))?;
    asm.system.normalize(cfg.normalization)?;
    row.timings.assembly = secs(t);

    let t = Instant::now();
    row.conditioning = conditioning(&asm.system.matrix, cfg.cond)?;
    row.timings.conditioning = secs(t);

    let t = Instant::now();
    let report = solve(&asm.system.matrix, &asm.system.rhs, cfg)?;
    row.iterations = report.iterations;
    row.residual = Some(report.residual);
    let coeffs = asm.system.level_coefficients(&report.coeffs);
    let u = compose_solution(&coeffs, &set, &asm.mesh, Some(&asm.lifting))?;
    row.timings.solve = secs(t);

    let t = Instant::now();
    row.errors = Some(compute_errors(
        &problem.curve,
        cfg.error_grid_level,
        |s, x, y| u.eval_side(s, x, y),
        truth,
    ));
    row.timings.errors = secs(t);
    Ok(())
}

fn run_standard(
    problem: &ProblemSpec,
    level: u32,
    cfg: &StudyConfig,
    truth: &Truth,
    row: &mut StudyRow,
) -> Result<()> {
    let t = Instant::now();
    let sys = assemble_nodal(problem, level, &options(cfg))?;
    row.unknowns = sys.rhs.len();
    row.timings.assembly = secs(t);

    let t = Instant::now();
    row.conditioning = conditioning(&sys.matrix, cfg.cond)?;
    row.timings.conditioning = secs(t);

    let t = Instant::now();
    let report = solve(&sys.matrix, &sys.rhs, cfg)?;
    row.iterations = report.iterations;
    row.residual = Some(report.residual);
    let u = sys.solution(&report.coeffs)?;
    row.timings.solve = secs(t);

    let t = Instant::now();
    row.errors = Some(compute_errors(
        &problem.curve,
        cfg.error_grid_level,
        |s, x, y| u.eval_side(s, x, y),
        truth,
    ));
    row.timings.errors = secs(t);
    Ok(())
}

fn fill_orders(rows: &mut [StudyRow]) {
    for k in 1..rows.len() {
        let (prev, cur) = (&rows[k - 1], &rows[k]);
        let (Some(ep), Some(ec)) = (prev.errors, cur.errors) else {
            continue;
        };
        if prev.level + 1 != cur.level || prev.failure.is_some() || cur.failure.is_some() {
            continue;
        }
        let (np, nc) = (prev.unknowns, cur.unknowns);
        rows[k].l2_order = Some(order(ep.rel_l2, ec.rel_l2, np, nc));
        rows[k].h1_order = Some(order(ep.rel_h1, ec.rel_h1, np, nc));
    }
}

/// Runs the study for a registered example; writes the artifacts when
/// `cfg.out` is set.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyOutcome> {
    cfg.validate()?;
    let problem = registry_get(&cfg.example)?;
    run_study_for(&problem, cfg)
}

pub fn run_study_for(problem: &ProblemSpec, cfg: &StudyConfig) -> Result<StudyOutcome> {
    cfg.validate()?;
    problem.validate()?;
    let (lo, hi) = problem.coefficient_range(cfg.error_grid_level);
    let mut outcome = StudyOutcome {
        rows: Vec::new(),
        contrast: hi / lo,
        reference_level: None,
    };
    if !cfg.is_empty() {
        let reference;
        let truth: Truth = match &problem.exact {
            Some(exact) => {
                Box::new(move |s, x, y| ((exact.value.on(s))(x, y), (exact.gradient.on(s))(x, y)))
            }
            None => {
                if cfg.reference_level <= cfg.j_max || cfg.reference_level > cfg.level_guard {
                    return Err(Error::Config(format!(
                        "reference_level {} must exceed j_max {} and not exceed the guard {}",
                        cfg.reference_level, cfg.j_max, cfg.level_guard
                    )));
                }
                reference = reference_solution(problem, cfg)?;
                outcome.reference_level = Some(cfg.reference_level);
                Box::new(|s, x, y| reference.eval_side(s, x, y))
            }
        };
        for &basis in &cfg.bases {
            let mut block = Vec::new();
            for level in cfg.levels() {
                let mut row = StudyRow::new(level, basis);
                let run = match basis {
                    BasisKind::Augmented => run_augmented(problem, level, cfg, &truth, &mut row),
                    BasisKind::Standard => run_standard(problem, level, cfg, &truth, &mut row),
                };
                if let Err(e) = run {
                    log::error!("{} J={level} {basis}: {e}", problem.name);
                    row.failure = Some(e.to_string());
                }
                log::info!(
                    "{} J={level} {basis}: N={} errors={:?} kappa={:?}",
                    problem.name,
                    row.unknowns,
                    row.errors,
                    row.kappa()
                );
                block.push(row);
            }
            fill_orders(&mut block);
            outcome.rows.extend(block);
        }
    }
    if let Some(dir) = &cfg.out {
        write_artifacts(&outcome, cfg, dir)?;
    }
    Ok(outcome)
}

#[derive(Serialize)]
struct TableRecord {
    #[serde(rename = "J")]
    level: u32,
    #[serde(rename = "NJ")]
    unknowns: usize,
    kappa: Option<f64>,
    rel_l2: Option<f64>,
    l2_order: Option<f64>,
    rel_h1: Option<f64>,
    h1_order: Option<f64>,
    basis: BasisKind,
}

#[derive(Serialize)]
struct DetailRecord {
    #[serde(rename = "J")]
    level: u32,
    basis: BasisKind,
    iterations: Option<usize>,
    residual: Option<f64>,
    sigma_min: Option<f64>,
    sigma_max: Option<f64>,
    assembly_s: f64,
    conditioning_s: f64,
    solve_s: f64,
    errors_s: f64,
    failure: Option<String>,
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// The results table in the documented CSV schema.
pub fn table_csv(rows: &[StudyRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    // an empty study still gets its header line
    if rows.is_empty() {
        w.write_record([
            "J", "NJ", "kappa", "rel_l2", "l2_order", "rel_h1", "h1_order", "basis",
        ])
        .map_err(csv_error)?;
    }
    for r in rows {
        w.serialize(TableRecord {
            level: r.level,
            unknowns: r.unknowns,
            kappa: r.kappa(),
            rel_l2: r.errors.map(|e| e.rel_l2),
            l2_order: r.l2_order,
            rel_h1: r.errors.map(|e| e.rel_h1),
            h1_order: r.h1_order,
            basis: r.basis,
        })
        .map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn details_csv(rows: &[StudyRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(DetailRecord {
            level: r.level,
            basis: r.basis,
            iterations: r.iterations,
            residual: r.residual,
            sigma_min: r.conditioning.map(|c| c.sigma_min),
            sigma_max: r.conditioning.map(|c| c.sigma_max),
            assembly_s: r.timings.assembly,
            conditioning_s: r.timings.conditioning,
            solve_s: r.timings.solve,
            errors_s: r.timings.errors,
            failure: r.failure.clone(),
        })
        .map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `study.csv`, `details.csv`, `errors.svg` and the effective
/// `config.toml` into `dir`.
pub fn write_artifacts(outcome: &StudyOutcome, cfg: &StudyConfig, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("study.csv"), table_csv(&outcome.rows)?)?;
    std::fs::write(dir.join("details.csv"), details_csv(&outcome.rows)?)?;
    std::fs::write(
        dir.join("errors.svg"),
        error_plot(&cfg.example, &outcome.rows),
    )?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(level: u32, n: usize, l2: f64, h1: f64) -> StudyRow {
        let mut r = StudyRow::new(level, BasisKind::Augmented);
        r.unknowns = n;
        r.errors = Some(ErrorPair {
            rel_l2: l2,
            rel_h1: h1,
        });
        r
    }

    #[test]
    fn orders_need_a_previous_row() {
        let mut rows = vec![
            row(4, 100, 0.1, 0.2),
            row(5, 400, 0.025, 0.1),
            row(6, 1600, 0.01, 0.05),
        ];
        rows[2].failure = Some("x".into());
        fill_orders(&mut rows);
        assert_eq!(rows[0].l2_order, None);
        assert!((rows[1].l2_order.unwrap() - 2.0).abs() < 1e-14);
        assert!((rows[1].h1_order.unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(rows[2].l2_order, None);
    }

    #[test]
    fn csv_schema() {
        let mut rows = vec![row(4, 2345, 0.164, 0.4), row(5, 10401, 0.0375, 0.2)];
        fill_orders(&mut rows);
        let text = table_csv(&rows).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("J,NJ,kappa,rel_l2,l2_order,rel_h1,h1_order,basis")
        );
        assert_eq!(lines.next(), Some("4,2345,,0.164,,0.4,,augmented"));
        let second: Vec<_> = lines.next().unwrap().split(',').collect();
        assert_eq!(second[0], "5");
        assert!((second[4].parse::<f64>().unwrap() - 1.98).abs() < 5e-3);
        assert_eq!(
            table_csv(&[]).unwrap(),
            "J,NJ,kappa,rel_l2,l2_order,rel_h1,h1_order,basis\n"
        );
    }

    #[test]
    fn empty_range_gives_empty_table() {
        let dir = std::env::temp_dir().join(format!("wavegal-empty-{}", std::process::id()));
        let cfg = StudyConfig {
            j_min: 5,
            j_max: 4,
            out: Some(dir.clone()),
            ..Default::default()
        };
        let outcome = run_study(&cfg).unwrap();
        assert!(outcome.rows.is_empty());
        let text = std::fs::read_to_string(dir.join("study.csv")).unwrap();
        assert_eq!(text.lines().count(), 1);
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn unknown_example_is_an_error() {
        let cfg = StudyConfig {
            example: "nope".into(),
            ..Default::default()
        };
        assert!(matches!(run_study(&cfg), Err(Error::UnknownExample(_))));
    }
}
