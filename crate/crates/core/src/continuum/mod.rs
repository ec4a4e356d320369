//! Classical Schlesinger equations for Fuchsian systems
//! `d𝓨/dζ = (𝓑_∞ + Σ 𝓑_k/(ζ − x_k)) 𝓨`, and harnesses comparing them with the
//! lattice flows of a difference system in a scaling limit.

mod limit;
mod ode;
mod transform;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::linalg::{self, CMatrix};
use crate::matpoly::{congruent, Congruence};
use crate::tolerance::Tolerances;

pub use limit::{embed, embed_divisors, extract, limit_compare, step_consistency, EmbeddingConfig, LimitLevel, LimitTable};
pub use ode::{integrate, integrate_with_report, schlesinger_rhs, IntegrationReport, DEFAULT_STEP};
pub use transform::{
    continuous_transform, formal_yhat1, transform_limit_check, unit_shift_check, ContinuousTransform, ElementaryData, TransformLevel, TransformReport,
};

/// Residues `𝓑_k` at poles `x_k`, with an optional diagonal `𝓑_∞`.
///
/// Without `𝓑_∞` the system is purely Fuchsian and the `[𝓑_j, 𝓑_∞]` terms of
/// the deformation equations drop out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousSystem {
    #[serde(with = "io::option_matrix", default, skip_serializing_if = "Option::is_none")]
    pub b_inf: Option<CMatrix>,
    #[serde(with = "io::matrix_list")]
    pub b: Vec<CMatrix>,
    #[serde(with = "io::complex_list")]
    pub x: Vec<Complex64>,
}

impl ContinuousSystem {
    pub fn new(b_inf: Option<CMatrix>, b: Vec<CMatrix>, x: Vec<Complex64>, tol: &Tolerances) -> Result<Self> {
        let sys = ContinuousSystem { b_inf, b, x };
        sys.validate(tol)?;
        Ok(sys)
    }

    pub fn m(&self) -> usize {
        self.b.first().map_or(0, |b| b.nrows())
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    /// Shapes, distinct poles, diagonal `𝓑_∞` with distinct entries, and
    /// residues whose eigenvalues pairwise avoid integer differences.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let m = self.m();
        if self.b.is_empty() || m == 0 || self.b.iter().any(|b| b.shape() != (m, m)) {
            return Err(Error::Dimension("residues must be nonempty square matrices of one size".into()));
        }
        if self.x.len() != self.b.len() {
            return Err(Error::Dimension(format!("{} poles for {} residues", self.x.len(), self.b.len())));
        }
        check_poles(&self.x, tol)?;
        if let Some(binf) = &self.b_inf {
            if binf.shape() != (m, m) {
                return Err(Error::Dimension("B_inf must match the residues in size".into()));
            }
            let off = (0..m)
                .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| binf[(i, j)].norm())
                .fold(0.0, f64::max);
            if off > 1e-14 * binf.norm().max(1.0) {
                return Err(Error::input("B_inf must be diagonal"));
            }
            for i in 0..m {
                for j in (i + 1)..m {
                    if (binf[(i, i)] - binf[(j, j)]).norm() <= tol.spectrum_ambiguity {
                        return Err(Error::genericity(format!("B_inf has the repeated entry {}", binf[(i, i)])));
                    }
                }
            }
        }
        for (k, spec) in self.spectra()?.iter().enumerate() {
            for (i, &a) in spec.iter().enumerate() {
                for &b in &spec[i + 1..] {
                    if let Some(why) = congruent(a, b, Congruence::Additive, tol) {
                        return Err(Error::genericity(format!("eigenvalues {a} and {b} of residue {} {why}", k + 1)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Eigenvalues of each residue, sorted.
    pub fn spectra(&self) -> Result<Vec<Vec<Complex64>>> {
        self.b.iter().map(linalg::eigenvalues).collect()
    }

    /// The same residues placed at other poles.
    pub fn at_poles(&self, x: &[Complex64]) -> Self {
        ContinuousSystem { b_inf: self.b_inf.clone(), b: self.b.clone(), x: x.to_vec() }
    }

    /// `𝓑(ζ)`.
    pub fn coefficient(&self, zeta: Complex64) -> CMatrix {
        let m = self.m();
        let mut out = self.b_inf.clone().unwrap_or_else(|| CMatrix::zeros(m, m));
        for (b, &x) in self.b.iter().zip(&self.x) {
            out += b / (zeta - x);
        }
        out
    }
}

fn check_poles(x: &[Complex64], tol: &Tolerances) -> Result<()> {
    for (i, a) in x.iter().enumerate() {
        for (j, b) in x.iter().enumerate().skip(i + 1) {
            if (a - b).norm() < tol.pole_separation {
                return Err(Error::genericity(format!("poles {} and {} coincide ({a} vs {b})", i + 1, j + 1)));
            }
        }
    }
    Ok(())
}
