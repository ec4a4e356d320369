//! The Schlesinger equations and a fixed-step RK4 integrator along polylines.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, commutator, CMatrix};
use crate::tolerance::Tolerances;

use super::{check_poles, ContinuousSystem};

/// Step length (in pole-space distance) used by the harnesses.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Subdivision depth after which a step is given up on.
const MAX_DEPTH: u32 = 24;

/// `d[j][l] = ∂𝓑_l/∂x_j`.
///
/// Off the diagonal `[𝓑_j, 𝓑_l]/(x_j − x_l)`; on it
/// `Σ_{l≠j} [𝓑_j, 𝓑_l]/(x_l − x_j) − [𝓑_j, 𝓑_∞]`.
pub fn schlesinger_rhs(sys: &ContinuousSystem, tol: &Tolerances) -> Result<Vec<Vec<CMatrix>>> {
    check_poles(&sys.x, tol)?;
    Ok(rhs(sys.b_inf.as_ref(), &sys.b, &sys.x))
}

fn rhs(b_inf: Option<&CMatrix>, b: &[CMatrix], x: &[Complex64]) -> Vec<Vec<CMatrix>> {
    let n = b.len();
    let m = b[0].nrows();
    let mut d = vec![vec![CMatrix::zeros(m, m); n]; n];
    for j in 0..n {
        let mut diag = match b_inf {
            Some(binf) => -commutator(&b[j], binf),
            None => CMatrix::zeros(m, m),
        };
        for l in 0..n {
            if l == j {
                continue;
            }
            let c = commutator(&b[j], &b[l]);
            diag += &c / (x[l] - x[j]);
            d[j][l] = c / (x[j] - x[l]);
        }
        d[j][j] = diag;
    }
    d
}

/// `d𝓑_l/ds` when the poles move with velocity `v`.
fn velocity(b_inf: Option<&CMatrix>, b: &[CMatrix], x: &[Complex64], v: &[Complex64]) -> Vec<CMatrix> {
    let d = rhs(b_inf, b, x);
    let m = b[0].nrows();
    (0..b.len())
        .map(|l| {
            d.iter()
                .zip(v)
                .fold(CMatrix::zeros(m, m), |acc, (dj, &vj)| if vj == Complex64::new(0.0, 0.0) { acc } else { acc + &dj[l] * vj })
        })
        .collect()
}

fn axpy(y: &[CMatrix], h: f64, k: &[CMatrix]) -> Vec<CMatrix> {
    y.iter().zip(k).map(|(a, b)| a + b * Complex64::new(h, 0.0)).collect()
}

fn state_norm(y: &[CMatrix]) -> f64 {
    y.iter().map(|a| a.norm_squared()).sum::<f64>().sqrt()
}

fn state_gap(a: &[CMatrix], b: &[CMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_squared()).sum::<f64>().sqrt()
}

/// Counters from [`integrate_with_report`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct IntegrationReport {
    /// Accepted steps.
    pub steps: usize,
    /// Steps that were split because the halving monitor disagreed.
    pub refinements: usize,
    /// Largest eigenvalue drift of any residue, measured after each segment.
    pub spectral_drift: f64,
}

struct Segment<'a> {
    b_inf: Option<&'a CMatrix>,
    start: &'a [Complex64],
    dir: Vec<Complex64>,
}

impl Segment<'_> {
    fn poles(&self, s: f64) -> Vec<Complex64> {
        self.start.iter().zip(&self.dir).map(|(p, d)| p + d * s).collect()
    }

    fn f(&self, s: f64, y: &[CMatrix]) -> Vec<CMatrix> {
        velocity(self.b_inf, y, &self.poles(s), &self.dir)
    }

    fn rk4(&self, s: f64, h: f64, y: &[CMatrix]) -> Vec<CMatrix> {
        let k1 = self.f(s, y);
        let k2 = self.f(s + h / 2.0, &axpy(y, h / 2.0, &k1));
        let k3 = self.f(s + h / 2.0, &axpy(y, h / 2.0, &k2));
        let k4 = self.f(s + h, &axpy(y, h, &k3));
        y.iter()
            .enumerate()
            .map(|(l, a)| a + (&k1[l] + (&k2[l] + &k3[l]) * Complex64::new(2.0, 0.0) + &k4[l]) * Complex64::new(h / 6.0, 0.0))
            .collect()
    }

    /// One step with the halving monitor, subdividing until it is satisfied.
    fn step(&self, s: f64, h: f64, y: Vec<CMatrix>, depth: u32, tol: &Tolerances, report: &mut IntegrationReport) -> Result<Vec<CMatrix>> {
        let full = self.rk4(s, h, &y);
        let mid = self.rk4(s, h / 2.0, &y);
        let halves = self.rk4(s + h / 2.0, h / 2.0, &mid);
        let gap = state_gap(&full, &halves);
        if gap.is_finite() && gap <= tol.ode_step * (1.0 + state_norm(&halves)) {
            report.steps += 1;
            return Ok(halves);
        }
        if depth >= MAX_DEPTH {
            return Err(Error::Integration {
                at: s,
                reason: format!("step halving does not converge (discrepancy {gap:.3e}); a pole of the solution is likely near"),
            });
        }
        report.refinements += 1;
        let y = self.step(s, h / 2.0, y, depth + 1, tol, report)?;
        self.step(s + h / 2.0, h / 2.0, y, depth + 1, tol, report)
    }
}

/// Smallest `|a + s b|` for `s ∈ [0, 1]`.
fn min_on_segment(a: Complex64, b: Complex64) -> f64 {
    let bb = b.norm_sqr();
    let s = if bb == 0.0 { 0.0 } else { (-(a.conj() * b).re / bb).clamp(0.0, 1.0) };
    (a + b * s).norm()
}

/// Moves the poles along the polyline `sys.x → path[0] → path[1] → …`.
pub fn integrate(sys: &ContinuousSystem, path: &[Vec<Complex64>], step: f64, tol: &Tolerances) -> Result<ContinuousSystem> {
    Ok(integrate_with_report(sys, path, step, tol)?.0)
}

pub fn integrate_with_report(
    sys: &ContinuousSystem,
    path: &[Vec<Complex64>],
    step: f64,
    tol: &Tolerances,
) -> Result<(ContinuousSystem, IntegrationReport)> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::input("integration step must be positive"));
    }
    let n = sys.n();
    let spectra0 = sys.spectra()?;
    let scale = spectra0.iter().flatten().map(|z| z.norm()).fold(1.0, f64::max);
    let mut report = IntegrationReport::default();
    let mut x = sys.x.clone();
    let mut y = sys.b.clone();
    let mut offset = 0.0;
    for target in path {
        if target.len() != n {
            return Err(Error::Dimension(format!("path point has {} coordinates, expected {n}", target.len())));
        }
        let dir: Vec<Complex64> = target.iter().zip(&x).map(|(t, p)| t - p).collect();
        for i in 0..n {
            for j in (i + 1)..n {
                if min_on_segment(x[i] - x[j], dir[i] - dir[j]) < tol.pole_separation {
                    return Err(Error::Integration { at: offset, reason: format!("poles {} and {} collide on the path", i + 1, j + 1) });
                }
            }
        }
        let length = dir.iter().map(|d| d.norm()).fold(0.0, f64::max);
        if length > 0.0 {
            let count = (length / step).ceil().max(1.0) as usize;
            let h = 1.0 / count as f64;
            let seg = Segment { b_inf: sys.b_inf.as_ref(), start: &x, dir: dir.clone() };
            for k in 0..count {
                y = seg
                    .step(k as f64 * h, h, y, 0, tol, &mut report)
                    .map_err(|e| match e {
                        Error::Integration { at, reason } => Error::Integration { at: offset + at, reason },
                        other => other,
                    })?;
            }
            let mut drift: f64 = 0.0;
            for (b, s0) in y.iter().zip(&spectra0) {
                drift = drift.max(linalg::match_spectra(s0, &linalg::eigenvalues(b)?, tol.spectrum_ambiguity)?);
            }
            report.spectral_drift = report.spectral_drift.max(drift);
            if drift > tol.spectrum_match * scale {
                return Err(Error::Integration { at: offset + 1.0, reason: format!("eigenvalue drift {drift:.3e} exceeds tolerance") });
            }
        }
        x = target.clone();
        offset += 1.0;
    }
    Ok((ContinuousSystem { b_inf: sys.b_inf.clone(), b: y, x }, report))
}
