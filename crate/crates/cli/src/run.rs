//! `isomono run`: a lattice trajectory in divisor or factor coordinates.

use std::path::PathBuf;

use clap::ValueEnum;
use serde::Serialize;

use isomono::flows::{check_residuals, divisor_trajectory, factor_trajectory, factor_trajectory_residual, Schedule};
use isomono::io::{matrix_to_rows, Entry};
use isomono::{CMatrix, DivisorState, FactorState, LatticePoint, Variant};

use crate::config::{Representation, System};
use crate::error::{CliError, CliResult};
use crate::output::{emit, matrix_header, push_matrix_rows, to_json, Format};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Right divisors `B_i(k)`.
    Divisor,
    /// Factors `C_i(l)` of `A(z) = A_0(z − C_1)⋯(z − C_n)`.
    Factor,
}

pub struct RunArgs {
    pub mode: Mode,
    pub target: LatticePoint,
    /// Bound on the per-step equation residuals.
    pub tol: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct StateRecord {
    pub k: Vec<i64>,
    pub matrices: Vec<Vec<Vec<Entry>>>,
}

#[derive(Debug, Serialize)]
pub struct RunResiduals {
    /// Largest normalized residual of the lattice equations checked at each step.
    pub equations: f64,
    /// Number of equation instances checked.
    pub checked: usize,
    /// Largest distance between a computed spectrum and its shift-rule value.
    pub spectrum: f64,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub mode: Mode,
    pub variant: Variant,
    pub target: Vec<i64>,
    pub tolerance: f64,
    pub states: Vec<StateRecord>,
    pub residuals: RunResiduals,
    pub passed: bool,
}

fn record(k: &LatticePoint, mats: &[CMatrix]) -> StateRecord {
    StateRecord { k: k.0.clone(), matrices: mats.iter().map(matrix_to_rows).collect() }
}

fn spectrum_scale(groups: &[Vec<isomono::Complex64>]) -> f64 {
    groups.iter().flatten().map(|z| z.norm()).fold(1.0, f64::max)
}

/// Divisor trajectory along the default schedule; the lattice equations are
/// checked on the unit cube of every visited point.
fn divisor_run(sys: &System, target: &LatticePoint) -> CliResult<(Vec<StateRecord>, RunResiduals)> {
    let tol = &sys.tol;
    let start = match &sys.representation {
        Representation::Divisors(b) => DivisorState::new(sys.a0.clone(), b.clone(), sys.groups.clone(), sys.variant, tol),
        _ => DivisorState::from_polynomial(&sys.polynomial, sys.groups.clone(), sys.variant, tol),
    }
    .map_err(|e| CliError::Validation(e.to_string()))?;
    let path = divisor_trajectory(&start, target, Schedule::DiagonalFirst, tol).map_err(CliError::from_run)?;
    let mut res = RunResiduals { equations: 0.0, checked: 0, spectrum: 0.0 };
    for s in &path {
        let cube = s.unit_cube(tol).map_err(|e| CliError::from_run(e.at(&s.k)))?;
        let rep = check_residuals(&cube, &s.a0, s.variant, tol).map_err(CliError::from_run)?;
        res.equations = res.equations.max(rep.max());
        res.checked += rep.sum_rule.count + rep.product_rule.count + rep.twist_rule.count + rep.exchange_rule.count;
        let scale = spectrum_scale(&s.current_groups().groups);
        res.spectrum = res.spectrum.max(s.spectrum_error(tol).map_err(CliError::from_run)? / scale);
    }
    Ok((path.iter().map(|s| record(&s.k, &s.b)).collect(), res))
}

/// Factor trajectory one `F_j^{±1}` at a time; each move is checked against
/// its window identity.
fn factor_run(sys: &System, target: &LatticePoint) -> CliResult<(Vec<StateRecord>, RunResiduals)> {
    let tol = &sys.tol;
    let start = match &sys.representation {
        Representation::Factors(c) => FactorState::new(sys.a0.clone(), c.clone(), sys.groups.clone(), sys.variant, tol),
        _ => FactorState::from_polynomial(&sys.polynomial, sys.groups.clone(), sys.variant, tol),
    }
    .map_err(|e| CliError::Validation(e.to_string()))?;
    let path = factor_trajectory(&start, target, tol).map_err(CliError::from_run)?;
    let window = factor_trajectory_residual(&path, tol).map_err(CliError::from_run)?;
    let mut spectrum: f64 = 0.0;
    for s in &path {
        let scale = spectrum_scale(&(0..s.n()).map(|i| s.expected_spectrum(i)).collect::<Vec<_>>());
        spectrum = spectrum.max(s.spectrum_error(tol).map_err(CliError::from_run)? / scale);
    }
    let res = RunResiduals { equations: window.max, checked: window.count, spectrum };
    Ok((path.iter().map(|s| record(&s.l, &s.c)).collect(), res))
}

pub fn run(sys: &System, args: &RunArgs) -> CliResult<RunReport> {
    if args.target.len() != sys.groups.groups.len() {
        return Err(CliError::Validation(format!(
            "target {} has {} coordinates, the system has n = {}",
            args.target,
            args.target.len(),
            sys.groups.groups.len()
        )));
    }
    let (states, residuals) = match args.mode {
        Mode::Divisor => divisor_run(sys, &args.target)?,
        Mode::Factor => factor_run(sys, &args.target)?,
    };
    let passed = residuals.equations <= args.tol && residuals.spectrum <= sys.tol.spectrum_match;
    Ok(RunReport {
        mode: args.mode,
        variant: sys.variant,
        target: args.target.0.clone(),
        tolerance: args.tol,
        states,
        residuals,
        passed,
    })
}

pub fn render(report: &RunReport, format: Format) -> String {
    match format {
        Format::Json => to_json(report),
        Format::Csv => {
            let mut out = matrix_header(report.target.len());
            out.push('\n');
            for s in &report.states {
                let mats: Vec<CMatrix> = s
                    .matrices
                    .iter()
                    .map(|rows| isomono::io::matrix_from_rows(rows).expect("recorded matrices are square"))
                    .collect();
                push_matrix_rows(&mut out, Some(&LatticePoint(s.k.clone())), &mats, 1);
            }
            out
        }
    }
}

/// Runs, writes the trajectory, and fails with a tolerance error if any
/// per-step residual exceeded its bound. The trajectory is written either way.
pub fn execute(sys: &System, args: &RunArgs) -> CliResult<()> {
    let start = std::time::Instant::now();
    let report = run(sys, args)?;
    emit(args.out.as_ref(), &render(&report, args.format))?;
    eprintln!(
        "{} states in {:.3}s; equation residual {:.3e} over {} checks, spectrum drift {:.3e}",
        report.states.len(),
        start.elapsed().as_secs_f64(),
        report.residuals.equations,
        report.residuals.checked,
        report.residuals.spectrum
    );
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Tolerance(format!(
            "equation residual {:.3e} (bound {:.1e}), spectrum drift {:.3e} (bound {:.1e})",
            report.residuals.equations, args.tol, report.residuals.spectrum, sys.tol.spectrum_match
        )))
    }
}
