//! System configuration files.
//!
//! A configuration fixes `A_0` and exactly one of the coefficient, right-divisor
//! or factor representations of `A(z) = A_0 z^n + A_1 z^{n-1} + … + A_n`. A
//! configuration with only `m`, `n` and `seed` stands for the random generic
//! system drawn from that seed.

use std::path::Path;

use serde::{Deserialize, Serialize};

use isomono::io::{matrix_from_rows, matrix_to_rows, Entry};
use isomono::linalg::{eigenvalues, sort_spectrum};
use isomono::random::RandomSystem;
use isomono::{CMatrix, Complex64, MatrixPolynomial, SpectrumGroups, Tolerances, Variant};

use crate::error::{CliError, CliResult};

type Rows = Vec<Vec<Entry>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "A0", default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<Rows>,
    /// `A_1, …, A_n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<Rows>>,
    /// Right divisors `B_1, …, B_n` at `k = 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divisors: Option<Vec<Rows>>,
    /// Factors `C_1, …, C_n` with `A(z) = A_0(z − C_1)⋯(z − C_n)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<Rows>>,
    /// Eigenvalue groups, one per divisor; derived from the data when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<Vec<Entry>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

/// The representation a configuration was given in, as matrices.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    Coefficients(Vec<CMatrix>),
    Divisors(Vec<CMatrix>),
    Factors(Vec<CMatrix>),
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct System {
    pub a0: CMatrix,
    pub representation: Representation,
    pub polynomial: MatrixPolynomial,
    pub groups: SpectrumGroups,
    pub variant: Variant,
    pub tol: Tolerances,
    pub seed: Option<u64>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn load_err(e: isomono::Error) -> CliError {
    CliError::Validation(e.to_string())
}

fn matrices(name: &str, list: &[Rows], m: usize, n: usize) -> CliResult<Vec<CMatrix>> {
    if list.len() != n {
        return Err(invalid(format!("{name}: expected {n} matrices, got {}", list.len())));
    }
    list.iter()
        .enumerate()
        .map(|(i, rows)| {
            let a = matrix_from_rows(rows).map_err(|e| invalid(format!("{name}[{}]: {e}", i + 1)))?;
            if a.nrows() != m {
                return Err(invalid(format!("{name}[{}]: expected {m}x{m}, got {}x{}", i + 1, a.nrows(), a.ncols())));
            }
            Ok(a)
        })
        .collect()
}

fn spectra(mats: &[CMatrix]) -> CliResult<Vec<Vec<Complex64>>> {
    mats.iter()
        .map(|b| {
            let mut s = eigenvalues(b).map_err(load_err)?;
            sort_spectrum(&mut s);
            Ok(s)
        })
        .collect()
}

impl SystemConfig {
    /// Configuration of the random generic system for `seed`.
    pub fn random(m: usize, n: usize, seed: u64) -> Self {
        SystemConfig {
            m,
            n,
            a0: None,
            coefficients: None,
            divisors: None,
            factors: None,
            groups: None,
            variant: None,
            seed: Some(seed),
            tolerances: None,
        }
    }

    /// Configuration holding the coefficients of `a`.
    pub fn from_polynomial(a: &MatrixPolynomial, variant: Variant) -> Self {
        SystemConfig {
            m: a.m(),
            n: a.degree(),
            a0: Some(matrix_to_rows(a.leading())),
            coefficients: Some(a.coeffs()[1..].iter().map(matrix_to_rows).collect()),
            divisors: None,
            factors: None,
            groups: None,
            variant: Some(variant),
            seed: None,
            tolerances: None,
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses a configuration, or the `system` member of a `transform` output.
    pub fn parse(text: &str) -> CliResult<Self> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum File {
            Plain(SystemConfig),
            Wrapped { system: SystemConfig },
        }
        match serde_json::from_str::<File>(text) {
            Ok(File::Plain(c) | File::Wrapped { system: c }) => Ok(c),
            // The untagged error hides the cause; report the plain parse error instead.
            Err(_) => serde_json::from_str::<SystemConfig>(text).map_err(|e| invalid(format!("bad configuration: {e}"))),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    /// Checks shapes, the single-representation rule, invertibility of `A_0`
    /// and non-congruence of the eigenvalue groups. `variant` overrides the
    /// configured variant.
    pub fn resolve(&self, variant: Option<Variant>) -> CliResult<System> {
        let (m, n) = (self.m, self.n);
        if m == 0 || n == 0 {
            return Err(invalid("m and n must be positive"));
        }
        let variant = variant.or(self.variant).unwrap_or_default();
        let tol = self.tolerances.unwrap_or_default();
        let given = [self.coefficients.is_some(), self.divisors.is_some(), self.factors.is_some()];
        let count = given.iter().filter(|&&g| g).count();
        if count == 0 {
            let seed = self
                .seed
                .ok_or_else(|| invalid("configuration needs one of coefficients, divisors, factors, or a seed"))?;
            if self.a0.is_some() || self.groups.is_some() {
                return Err(invalid("a seeded configuration draws A0 and the groups itself"));
            }
            let sys = RandomSystem::generate(seed, m, n, variant.congruence());
            return Ok(System {
                a0: sys.a0.clone(),
                representation: Representation::Factors(sys.factors),
                polynomial: sys.polynomial,
                groups: sys.groups,
                variant,
                tol,
                seed: Some(seed),
            });
        }
        if count > 1 {
            return Err(invalid("give exactly one of coefficients, divisors, factors"));
        }
        let a0 = matrix_from_rows(self.a0.as_ref().ok_or_else(|| invalid("A0 is required"))?)
            .map_err(|e| invalid(format!("A0: {e}")))?;
        if a0.nrows() != m {
            return Err(invalid(format!("A0: expected {m}x{m}, got {}x{}", a0.nrows(), a0.ncols())));
        }
        let (representation, polynomial, derived) = if let Some(list) = &self.coefficients {
            let coeffs = matrices("coefficients", list, m, n)?;
            let mut all = vec![a0.clone()];
            all.extend(coeffs.iter().cloned());
            let poly = MatrixPolynomial::new(all).map_err(load_err)?;
            let mut roots = poly.eigenvalues(&tol).map_err(load_err)?;
            sort_spectrum(&mut roots);
            let derived = SpectrumGroups::default_grouping(roots, m, variant.congruence()).groups;
            (Representation::Coefficients(coeffs), Some(poly), derived)
        } else if let Some(list) = &self.divisors {
            let b = matrices("divisors", list, m, n)?;
            let derived = spectra(&b)?;
            (Representation::Divisors(b), None, derived)
        } else {
            let c = matrices("factors", self.factors.as_ref().expect("one representation"), m, n)?;
            let derived = spectra(&c)?;
            let poly = MatrixPolynomial::from_factors(&a0, &c);
            (Representation::Factors(c), Some(poly), derived)
        };
        let groups = match &self.groups {
            Some(g) => {
                if g.len() != n || g.iter().any(|x| x.len() != m) {
                    return Err(invalid(format!("groups: expected {n} groups of {m} values")));
                }
                g.iter().map(|x| x.iter().map(|&e| e.into()).collect()).collect()
            }
            None => derived,
        };
        let groups = SpectrumGroups::new(groups, variant.congruence(), &tol).map_err(load_err)?;
        isomono::linalg::inverse_checked(&a0, 1.0 / tol.singular_leading, "A0").map_err(load_err)?;
        let polynomial = match (polynomial, &representation) {
            (Some(p), _) => p,
            (None, Representation::Divisors(b)) => {
                MatrixPolynomial::from_right_divisors(&a0, b, &groups, &tol).map_err(load_err)?
            }
            (None, _) => unreachable!("only divisors are reconstructed"),
        };
        Ok(System { a0, representation, polynomial, groups, variant, tol, seed: self.seed })
    }
}
