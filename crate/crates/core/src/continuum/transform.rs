//! Elementary Schlesinger transformations of the Fuchsian system and their
//! comparison with the discrete elementary moves of the embedded difference system.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::multiplier::{elementary_blocks, elementary_down, elementary_up};
use crate::io;
use crate::linalg::{self, c, identity, unit, CMatrix};
use crate::matpoly::{matrix_eigenvector, Congruence, MatrixPolynomial, SpectrumGroups};
use crate::tolerance::Tolerances;

use super::limit::EmbeddingConfig;
use super::ContinuousSystem;

/// One elementary transformation: the eigenvalue `value` of residue `group`
/// moves by `+1` (`raise`) or `−1`, and exponent `row` at infinity by the opposite amount.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementaryData {
    pub group: usize,
    #[serde(with = "io::complex")]
    pub value: Complex64,
    pub row: usize,
    pub raise: bool,
}

/// The transformed system and the blocks of its multiplier.
///
/// Raising: `𝓡(ζ) = (ζ − x_g)E + 𝓡_0`, `𝓡^{-1}(ζ) = I − E + 𝓡_1/(ζ − x_g)`.
/// Lowering: `𝓡(ζ) = I − E + 𝓡_1ᵗ/(ζ − x_g)`, `𝓡^{-1}(ζ) = (ζ − x_g)E + 𝓡_0ᵗ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousTransform {
    pub system: ContinuousSystem,
    pub data: ElementaryData,
    pub r0: CMatrix,
    pub r1: CMatrix,
}

impl ContinuousTransform {
    fn pole(&self) -> Complex64 {
        self.system.x[self.data.group]
    }

    pub fn multiplier(&self, zeta: Complex64) -> CMatrix {
        let m = self.r0.nrows();
        let e = unit(m, self.data.row);
        let d = zeta - self.pole();
        if self.data.raise {
            &e * d + &self.r0
        } else {
            identity(m) - &e + self.r1.transpose() / d
        }
    }

    pub fn multiplier_inverse(&self, zeta: Complex64) -> CMatrix {
        let m = self.r0.nrows();
        let e = unit(m, self.data.row);
        let d = zeta - self.pole();
        if self.data.raise {
            identity(m) - &e + &self.r1 / d
        } else {
            &e * d + self.r0.transpose()
        }
    }

    /// `d𝓡/dζ`.
    pub fn multiplier_derivative(&self, zeta: Complex64) -> CMatrix {
        let m = self.r0.nrows();
        if self.data.raise {
            unit(m, self.data.row)
        } else {
            let d = zeta - self.pole();
            -self.r1.transpose() / (d * d)
        }
    }
}

/// `𝓨̂_1` of the formal solution at infinity, off-diagonal part:
/// `(𝓨̂_1)_{kl} = (Σ𝓑)_{kl}/(s_l − s_k)`.
pub fn formal_yhat1(sys: &ContinuousSystem) -> Result<CMatrix> {
    let binf = sys
        .b_inf
        .as_ref()
        .ok_or_else(|| Error::Unsupported("elementary transformations need a diagonal B_inf".into()))?;
    let m = sys.m();
    let sum = sys.b.iter().fold(CMatrix::zeros(m, m), |acc, b| acc + b);
    Ok(CMatrix::from_fn(m, m, |k, l| if k == l { c(0.0, 0.0) } else { sum[(k, l)] / (binf[(l, l)] - binf[(k, k)]) }))
}

fn check_data(sys: &ContinuousSystem, data: &ElementaryData) -> Result<()> {
    if data.group >= sys.n() {
        return Err(Error::input(format!("group {} out of range 1..={}", data.group + 1, sys.n())));
    }
    if data.row >= sys.m() {
        return Err(Error::input(format!("row {} out of range 1..={}", data.row + 1, sys.m())));
    }
    Ok(())
}

/// The elementary Schlesinger transformation of a system with diagonal `𝓑_∞`.
///
/// Residues at `x_l ≠ x_g` are `𝓡(x_l) 𝓑_l 𝓡^{-1}(x_l)`. The residue at `x_g`
/// is the full residue of `𝓡'𝓡^{-1} + 𝓡𝓑𝓡^{-1}`; for raising it reads
/// `𝓡_0 H 𝓡_1 + E𝓡_1 + E𝓑_g𝓡_1 + 𝓡_0𝓑_g(I − E)` with
/// `H = 𝓑_∞ + Σ_{k≠g} 𝓑_k/(x_g − x_k)`.
pub fn continuous_transform(sys: &ContinuousSystem, data: &ElementaryData, tol: &Tolerances) -> Result<ContinuousTransform> {
    check_data(sys, data)?;
    let (g, i) = (data.group, data.row);
    let m = sys.m();
    let yhat = formal_yhat1(sys)?;
    let bg = &sys.b[g];
    let (v, q) = if data.raise {
        (matrix_eigenvector(bg, data.value, tol)?, yhat)
    } else {
        (matrix_eigenvector(&bg.transpose(), data.value, tol)?, -yhat.transpose())
    };
    if v[i].norm() <= tol.pivot {
        return Err(Error::genericity(format!(
            "coordinate {} of the eigenvector of residue {} at {} vanishes",
            i + 1,
            g + 1,
            data.value
        )));
    }
    let (r0, r1) = elementary_blocks(&v, &q, i);
    let e = unit(m, i);
    let id = identity(m);
    let xg = sys.x[g];
    let mut h = sys.b_inf.clone().expect("checked by formal_yhat1");
    for (k, (b, &x)) in sys.b.iter().zip(&sys.x).enumerate() {
        if k != g {
            h += b / (xg - x);
        }
    }
    let (r0t, r1t) = (r0.transpose(), r1.transpose());
    let b = sys
        .b
        .iter()
        .enumerate()
        .map(|(l, bl)| {
            if l == g {
                if data.raise {
                    &r0 * &h * &r1 + &e * &r1 + &e * bl * &r1 + &r0 * bl * (&id - &e)
                } else {
                    &r1t * &h * &r0t - &r1t * &e + (&id - &e) * bl * &r0t + &r1t * bl * &e
                }
            } else {
                let d = sys.x[l] - xg;
                if data.raise {
                    (&e * d + &r0) * bl * (&id - &e + &r1 / d)
                } else {
                    (&id - &e + &r1t / d) * bl * (&e * d + &r0t)
                }
            }
        })
        .collect();
    let system = ContinuousSystem { b_inf: sys.b_inf.clone(), b, x: sys.x.clone() };
    Ok(ContinuousTransform { system, data: *data, r0, r1 })
}

/// Composes the `m` transformations that move every eigenvalue of residue
/// `group` by `±1` (row `j` for the `j`-th eigenvalue) and returns the largest
/// deviation from `𝓑_g ± I`, other residues unchanged.
pub fn unit_shift_check(sys: &ContinuousSystem, group: usize, raise: bool, tol: &Tolerances) -> Result<f64> {
    if group >= sys.n() {
        return Err(Error::input(format!("group {} out of range 1..={}", group + 1, sys.n())));
    }
    let m = sys.m();
    let values = linalg::eigenvalues(&sys.b[group])?;
    let mut cur = sys.clone();
    for (row, &value) in values.iter().enumerate() {
        let data = ElementaryData { group, value, row, raise };
        cur = continuous_transform(&cur, &data, tol)?.system;
    }
    let sign = if raise { 1.0 } else { -1.0 };
    Ok(cur
        .b
        .iter()
        .zip(&sys.b)
        .enumerate()
        .map(|(l, (new, old))| {
            let expect = if l == group { old + identity(m) * c(sign, 0.0) } else { old.clone() };
            (new - expect).norm()
        })
        .fold(0.0, f64::max))
}

/// One `ε` of [`transform_limit_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformLevel {
    pub epsilon: f64,
    /// `‖Δ B̃_l Δ^{-1} − x_l/ε + 𝓑̃_l‖_F` per `l`.
    pub errors: Vec<f64>,
    /// `‖ε^{E} R_0 − 𝓡_0‖_F`.
    pub r0_error: f64,
    /// `‖ε R_1 ε^{−E} − 𝓡_1‖_F`.
    pub r1_error: f64,
    pub failure: Option<String>,
}

impl TransformLevel {
    /// Largest per-divisor error, NaN when the level failed.
    pub fn max_error(&self) -> f64 {
        if self.failure.is_some() {
            return f64::NAN;
        }
        self.errors.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformReport {
    pub continuous: ContinuousTransform,
    pub levels: Vec<TransformLevel>,
}

fn decreasing(values: impl Iterator<Item = f64>) -> bool {
    let v: Vec<f64> = values.collect();
    !v.is_empty() && v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[1] < w[0])
}

impl TransformReport {
    pub fn divisors_decrease(&self) -> bool {
        decreasing(self.levels.iter().map(TransformLevel::max_error))
    }

    pub fn blocks_decrease(&self) -> bool {
        decreasing(self.levels.iter().map(|l| l.r0_error)) && decreasing(self.levels.iter().map(|l| l.r1_error))
    }
}

fn discrete_level(
    sys: &ContinuousSystem,
    cfg: &EmbeddingConfig,
    data: &ElementaryData,
    target: &ContinuousTransform,
    tol: &Tolerances,
) -> Result<TransformLevel> {
    let eps = cfg.epsilon;
    let (m, g, i) = (sys.m(), data.group, data.row);
    let binf = sys.b_inf.as_ref().expect("checked by the continuous transform");
    let a0 = identity(m) + binf * c(eps, 0.0);
    let b: Vec<CMatrix> = sys.b.iter().zip(&sys.x).map(|(bk, &x)| linalg::scalar(m, x / eps) - bk).collect();
    let groups: Vec<Vec<Complex64>> = sys
        .spectra()?
        .iter()
        .zip(&sys.x)
        .map(|(t, &x)| t.iter().map(|t| x / eps - t).collect())
        .collect();
    let groups = SpectrumGroups::new(groups, Congruence::Additive, tol)?;
    let a = MatrixPolynomial::from_right_divisors(&a0, &b, &groups, tol)?;
    let root = sys.x[g] / eps - data.value;
    let (mult, moved) = if data.raise { elementary_down(&a, root, i, tol)? } else { elementary_up(&a, root, i, tol)? };
    let mut new_groups = groups.groups.clone();
    let slot = new_groups[g]
        .iter()
        .enumerate()
        .min_by(|p, q| (p.1 - root).norm().total_cmp(&(q.1 - root).norm()))
        .map(|(s, _)| s)
        .expect("nonempty group");
    new_groups[g][slot] = if data.raise { root - 1.0 } else { root + 1.0 };
    let scale = |p: f64| {
        let mut d = identity(m);
        d[(i, i)] = c(p, 0.0);
        d
    };
    let (delta, delta_inv) = if data.raise { (scale(eps), scale(1.0 / eps)) } else { (scale(1.0 / eps), scale(eps)) };
    let errors = new_groups
        .iter()
        .enumerate()
        .map(|(l, grp)| {
            let bt = moved.right_divisor(grp, tol)?;
            let conj = &delta * bt * &delta_inv;
            Ok((conj - linalg::scalar(m, sys.x[l] / eps) + &target.system.b[l]).norm())
        })
        .collect::<Result<Vec<_>>>()?;
    let (s, s_inv) = (scale(eps), scale(1.0 / eps));
    let r1 = mult.r1.as_ref().expect("elementary moves record R_1");
    let r0_error = (&s * &mult.r0 - &target.r0).norm();
    let r1_error = (r1 * &s_inv * c(eps, 0.0) - &target.r1).norm();
    Ok(TransformLevel { epsilon: eps, errors, r0_error, r1_error, failure: None })
}

/// Compares the continuous elementary transformation with the discrete one of
/// `A(z, ε)`, the polynomial with leading coefficient `I + ε𝓑_∞` and right
/// divisors `z − (y_k/ε − 𝓑_k)`, for `ε = cfg.ε / 2^h`, `h = 0, …, halvings`.
///
/// The continuous system is placed at the anchors `y` first.
pub fn transform_limit_check(
    sys: &ContinuousSystem,
    cfg: &EmbeddingConfig,
    data: &ElementaryData,
    halvings: u32,
    tol: &Tolerances,
) -> Result<TransformReport> {
    cfg.validate(sys.n(), tol)?;
    let placed = sys.at_poles(&cfg.y);
    let continuous = continuous_transform(&placed, data, tol)?;
    let levels = (0..=halvings)
        .map(|h| {
            let level = cfg.halved(h);
            discrete_level(&placed, &level, data, &continuous, tol).unwrap_or_else(|e| TransformLevel {
                epsilon: level.epsilon,
                errors: Vec::new(),
                r0_error: f64::NAN,
                r1_error: f64::NAN,
                failure: Some(e.to_string()),
            })
        })
        .collect();
    Ok(TransformReport { continuous, levels })
}
