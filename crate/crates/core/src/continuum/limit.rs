//! Embedding of a Fuchsian system into difference systems and the comparison
//! of the lattice flow with the Schlesinger equations as `ε → 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::{divisor_flow, DivisorState, FactorState};
use crate::io;
use crate::lattice::LatticePoint;
use crate::linalg::{self, c, identity, CMatrix};
use crate::matpoly::{Congruence, SpectrumGroups};
use crate::refactor::Variant;
use crate::tolerance::Tolerances;

use super::ode::{integrate, schlesinger_rhs, DEFAULT_STEP};
use super::ContinuousSystem;

/// Scale `ε` and anchors `y_i` of the embedding `C_i = y_i/ε − 𝓑_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub epsilon: f64,
    #[serde(with = "io::complex_list")]
    pub y: Vec<Complex64>,
}

impl EmbeddingConfig {
    pub fn validate(&self, n: usize, tol: &Tolerances) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::input("epsilon must be positive"));
        }
        if self.y.len() != n {
            return Err(Error::Dimension(format!("{} anchors for {n} residues", self.y.len())));
        }
        super::check_poles(&self.y, tol)
    }

    /// The same anchors at `ε / 2^h`.
    pub fn halved(&self, h: u32) -> Self {
        EmbeddingConfig { epsilon: self.epsilon / f64::from(1u32 << h), y: self.y.clone() }
    }
}

fn leading(sys: &ContinuousSystem, eps: f64) -> CMatrix {
    let m = sys.m();
    match &sys.b_inf {
        Some(binf) => identity(m) + binf * c(eps, 0.0),
        None => identity(m),
    }
}

/// `y_i/ε − 𝓑_i` with its spectral groups `y_i/ε − Sp(𝓑_i)`.
fn shifted(sys: &ContinuousSystem, cfg: &EmbeddingConfig, tol: &Tolerances) -> Result<(Vec<CMatrix>, SpectrumGroups)> {
    cfg.validate(sys.n(), tol)?;
    let m = sys.m();
    let mats = sys
        .b
        .iter()
        .zip(&cfg.y)
        .map(|(b, &y)| linalg::scalar(m, y / cfg.epsilon) - b)
        .collect();
    let groups = sys
        .spectra()?
        .iter()
        .zip(&cfg.y)
        .map(|(t, &y)| t.iter().map(|t| y / cfg.epsilon - t).collect())
        .collect();
    let groups = SpectrumGroups::new(groups, Congruence::Additive, tol)?;
    Ok((mats, groups))
}

/// Factor coordinates `C_i = y_i/ε − 𝓑_i`, `A_0 = I + ε𝓑_∞`.
pub fn embed(sys: &ContinuousSystem, cfg: &EmbeddingConfig, tol: &Tolerances) -> Result<FactorState> {
    let (c, groups) = shifted(sys, cfg, tol)?;
    FactorState::new(leading(sys, cfg.epsilon), c, groups, Variant::Difference, tol)
}

/// Divisor coordinates `B_i(0) = y_i/ε − 𝓑_i`, `A_0 = I + ε𝓑_∞`.
pub fn embed_divisors(sys: &ContinuousSystem, cfg: &EmbeddingConfig, tol: &Tolerances) -> Result<DivisorState> {
    let (b, groups) = shifted(sys, cfg, tol)?;
    DivisorState::new(leading(sys, cfg.epsilon), b, groups, Variant::Difference, tol)
}

/// `y_i/ε − M_i`, inverting the embedding for matrices `M_i` near `y_i/ε`.
pub fn extract(mats: &[CMatrix], cfg: &EmbeddingConfig) -> Vec<CMatrix> {
    mats.iter()
        .zip(&cfg.y)
        .map(|(a, &y)| linalg::scalar(a.nrows(), y / cfg.epsilon) - a)
        .collect()
}

/// One `ε` of [`limit_compare`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitLevel {
    pub epsilon: f64,
    /// `(⌊x_1/ε⌋, …, ⌊x_n/ε⌋)`.
    pub k: LatticePoint,
    /// `‖B_i(k) + (x_i − y_i)/ε + 𝓑_i(y − x)‖_F` per `i`; empty on failure.
    pub errors: Vec<f64>,
    /// Why the lattice flow stopped, if it did.
    pub failure: Option<String>,
}

impl LimitLevel {
    /// Largest per-index error, NaN when the level failed.
    pub fn max_error(&self) -> f64 {
        if self.failure.is_some() {
            return f64::NAN;
        }
        self.errors.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitTable {
    /// The continuous solution at the moved poles `y − x`.
    pub reference: ContinuousSystem,
    pub levels: Vec<LimitLevel>,
}

impl LimitTable {
    /// `error(ε)/error(ε/2)` of the largest per-index error, for consecutive levels.
    pub fn ratios(&self) -> Vec<f64> {
        self.levels.windows(2).map(|w| w[0].max_error() / w[1].max_error()).collect()
    }

    /// `(ε, i, error)` rows, `i` 1-based.
    pub fn rows(&self) -> Vec<(f64, usize, f64)> {
        self.levels
            .iter()
            .flat_map(|l| l.errors.iter().enumerate().map(move |(i, &e)| (l.epsilon, i + 1, e)))
            .collect()
    }
}

/// The lattice point `⌊x/ε⌋`, robust to `x/ε` landing a rounding error below an integer.
fn lattice_target(x: &[f64], eps: f64) -> LatticePoint {
    LatticePoint(x.iter().map(|&xi| (xi / eps + 1e-9).floor() as i64).collect())
}

/// Runs the divisor flow from `B_i(0) = y_i/ε − 𝓑_i` to `⌊x/ε⌋` and the
/// Schlesinger equations from poles `y` to `y − x`, for `ε = cfg.ε / 2^h`,
/// `h = 0, …, halvings`.
///
/// The continuous system is placed at the anchors `y` before integrating, so
/// `sys.x` is not used. When `x_i/ε` is not an integer the floor leaves an
/// `O(1)` offset in the error; targets on the `ε` grid avoid it.
pub fn limit_compare(sys: &ContinuousSystem, cfg: &EmbeddingConfig, x_target: &[f64], halvings: u32, tol: &Tolerances) -> Result<LimitTable> {
    let n = sys.n();
    if x_target.len() != n {
        return Err(Error::Dimension(format!("target has {} coordinates, expected {n}", x_target.len())));
    }
    cfg.validate(n, tol)?;
    let start = sys.at_poles(&cfg.y);
    let end: Vec<Complex64> = cfg.y.iter().zip(x_target).map(|(y, &x)| y - x).collect();
    let reference = integrate(&start, &[end], DEFAULT_STEP, tol)?;
    let mut levels = Vec::new();
    for h in 0..=halvings {
        let level = cfg.halved(h);
        let eps = level.epsilon;
        let k = lattice_target(x_target, eps);
        let outcome = embed_divisors(&start, &level, tol).and_then(|s| divisor_flow(&s, &k, tol));
        let (errors, failure) = match outcome {
            Ok(state) => {
                let errors = (0..n)
                    .map(|i| {
                        let shift = (c(x_target[i], 0.0) - cfg.y[i]) / eps;
                        (&state.b[i] + linalg::scalar(sys.m(), shift) + &reference.b[i]).norm()
                    })
                    .collect();
                (errors, None)
            }
            Err(e) => (Vec::new(), Some(e.to_string())),
        };
        levels.push(LimitLevel { epsilon: eps, k, errors, failure });
    }
    Ok(LimitTable { reference, levels })
}

/// `max_i ‖(𝓑_i(e_j) − 𝓑_i(0)) + ε ∂𝓑_i/∂x_j‖_F` where `𝓑_i(k) = y_i/ε − k_i − B_i(k)`.
///
/// One lattice step in direction `j` moves the poles by `−ε e_j`, so the
/// increment matches `−ε` times the Schlesinger right-hand side at `y` up to `O(ε²)`.
pub fn step_consistency(sys: &ContinuousSystem, cfg: &EmbeddingConfig, j: usize, tol: &Tolerances) -> Result<f64> {
    let n = sys.n();
    if j >= n {
        return Err(Error::input(format!("direction {} out of range 1..={n}", j + 1)));
    }
    let start = sys.at_poles(&cfg.y);
    let d = schlesinger_rhs(&start, tol)?;
    let s0 = embed_divisors(&start, cfg, tol)?;
    let s1 = s0.step(1 << j, tol)?;
    let m = sys.m();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let before = linalg::scalar(m, cfg.y[i] / cfg.epsilon) - &s0.b[i];
        let after = linalg::scalar(m, cfg.y[i] / cfg.epsilon - f64::from(u8::from(i == j))) - &s1.b[i];
        worst = worst.max((after - before + &d[j][i] * c(cfg.epsilon, 0.0)).norm());
    }
    Ok(worst)
}
