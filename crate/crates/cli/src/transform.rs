//! `isomono transform`: the lattice action with prescribed root and exponent shifts.

use serde::Serialize;

use isomono::flows::{certify, schlesinger_action, ActionCertificate};
use isomono::MatrixPolynomial;

use crate::config::{System, SystemConfig};
use crate::error::{CliError, CliResult};
use crate::output::{push_matrix_rows, to_json, Format};

#[derive(Debug, Serialize)]
pub struct TransformReport {
    /// The transformed system in coefficient form; loadable as a configuration.
    pub system: SystemConfig,
    pub kappa: Vec<i64>,
    pub delta: Vec<i64>,
    pub certificate: ActionCertificate,
    /// Number of elementary multipliers composed.
    pub moves: usize,
    #[serde(skip)]
    pub polynomial: MatrixPolynomial,
}

/// Bounds on the certificate entries: root matching, exponent shifts, `A_0` change.
pub const CERTIFICATE_BOUNDS: [f64; 3] = [1e-6, 1e-8, 1e-12];

pub fn transform(sys: &System, kappa: &[i64], delta: &[i64]) -> CliResult<TransformReport> {
    let tol = &sys.tol;
    let outcome = schlesinger_action(&sys.polynomial, kappa, delta, tol).map_err(CliError::from_run)?;
    let certificate = certify(&sys.polynomial, &outcome.polynomial, kappa, delta, tol).map_err(CliError::from_run)?;
    let mut system = SystemConfig::from_polynomial(&outcome.polynomial, sys.variant);
    system.tolerances = Some(sys.tol);
    Ok(TransformReport {
        system,
        kappa: kappa.to_vec(),
        delta: delta.to_vec(),
        certificate,
        moves: outcome.moves.len(),
        polynomial: outcome.polynomial,
    })
}

/// JSON carries the certificate; CSV holds only the coefficients, block 0 being `A_0`.
pub fn render(report: &TransformReport, format: Format) -> String {
    match format {
        Format::Json => to_json(report),
        Format::Csv => {
            let mut out = String::from("block,row,col,re,im\n");
            push_matrix_rows(&mut out, None, report.polynomial.coeffs(), 0);
            out
        }
    }
}

pub fn verdict(report: &TransformReport, tol: Option<f64>) -> CliResult<()> {
    let c = &report.certificate;
    let values = [c.root_shift_error, c.exponent_shift_error, c.leading_change];
    let names = ["root shift", "exponent shift", "A0 change"];
    let failed: Vec<String> = values
        .iter()
        .zip(CERTIFICATE_BOUNDS)
        .zip(names)
        .filter_map(|((&v, b), name)| {
            let bound = tol.unwrap_or(b);
            (!(v <= bound)).then(|| format!("{name} {v:.3e} > {bound:.1e}"))
        })
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Tolerance(failed.join(", ")))
    }
}
