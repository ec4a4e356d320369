//! Seeded generation of generic test systems.
//!
//! Entries are uniform in the square `[−1, 1] + [−1, 1]i`. Eigenvalue groups are
//! resampled until every pair keeps a distance of at least [`MARGIN`] from
//! congruence, so instances stay away from the exceptional sets.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::continuum::ContinuousSystem;
use crate::error::Result;
use crate::linalg::{self, c, CMatrix};
use crate::matpoly::{Congruence, MatrixPolynomial, SpectrumGroups};
use crate::tolerance::Tolerances;

/// Smallest distance from congruence for generated eigenvalues.
pub const MARGIN: f64 = 0.1;

/// Largest condition number accepted for a generated eigenvector basis.
const BASIS_COND: f64 = 30.0;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex<R: Rng>(rng: &mut R) -> Complex64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn matrix<R: Rng>(rng: &mut R, m: usize) -> CMatrix {
    CMatrix::from_fn(m, m, |_, _| complex(rng))
}

/// Distance of the pair `(a, b)` from being congruent.
pub fn congruence_gap(a: Complex64, b: Complex64, congruence: Congruence) -> f64 {
    match congruence {
        Congruence::Additive => {
            let d = a - b;
            (d - d.re.round()).norm()
        }
        Congruence::Multiplicative { q } => {
            let k = ((a / b).norm().ln() / q.norm().ln()).round();
            let lo = (a - b * q.powf(k)).norm();
            let hi = (a - b * q.powf(k + 1.0)).norm().min((a - b * q.powf(k - 1.0)).norm());
            lo.min(hi) / a.norm().max(b.norm())
        }
        Congruence::Distinct => (a - b).norm(),
    }
}

/// A value whose congruence gap to every entry of `taken` is at least [`MARGIN`].
fn admissible_value<R: Rng>(rng: &mut R, taken: &[Complex64], congruence: Congruence) -> Complex64 {
    loop {
        let z = match congruence {
            Congruence::Multiplicative { .. } => {
                Complex64::from_polar(rng.random_range(0.5..1.5), rng.random_range(0.0..std::f64::consts::TAU))
            }
            _ => complex(rng),
        };
        if taken.iter().all(|&t| congruence_gap(z, t, congruence) >= MARGIN) {
            return z;
        }
    }
}

/// `n` groups of `m` values, pairwise at least [`MARGIN`] from congruence.
pub fn groups<R: Rng>(rng: &mut R, m: usize, n: usize, congruence: Congruence) -> SpectrumGroups {
    let mut all = Vec::with_capacity(m * n);
    for _ in 0..m * n {
        let z = admissible_value(rng, &all, congruence);
        all.push(z);
    }
    SpectrumGroups::unchecked(all.chunks(m).map(|g| g.to_vec()).collect(), congruence)
}

/// Diagonal leading coefficient whose eigenvalue ratios are far from real.
///
/// Phases are drawn from disjoint windows of width `0.6π/m`, so any two differ
/// by at least `0.4π/m` and by at most `π(m − 0.4)/m`.
pub fn leading<R: Rng>(rng: &mut R, m: usize) -> CMatrix {
    let values: Vec<Complex64> = (0..m)
        .map(|k| {
            let phase = (k as f64 + rng.random_range(0.2..0.8)) * std::f64::consts::PI / m as f64;
            Complex64::from_polar(rng.random_range(0.5..1.5), phase)
        })
        .collect();
    linalg::diag(&values)
}

/// A matrix with the given spectrum and a well-conditioned eigenvector basis.
pub fn with_spectrum<R: Rng>(rng: &mut R, spectrum: &[Complex64]) -> CMatrix {
    let m = spectrum.len();
    loop {
        let v = matrix(rng, m);
        if linalg::condition_number(&v) > BASIS_COND {
            continue;
        }
        let v_inv = v.clone().try_inverse().expect("conditioned basis");
        return &v * linalg::diag(spectrum) * v_inv;
    }
}

/// A generic system `A(z) = A_0(z − C_1)⋯(z − C_n)` with its grouping.
#[derive(Debug, Clone)]
pub struct RandomSystem {
    pub a0: CMatrix,
    pub groups: SpectrumGroups,
    pub factors: Vec<CMatrix>,
    pub polynomial: MatrixPolynomial,
}

impl RandomSystem {
    /// Draws a system whose factorization and right divisors both pass the
    /// default genericity checks; redraws otherwise.
    pub fn generate(seed: u64, m: usize, n: usize, congruence: Congruence) -> Self {
        let mut rng = rng(seed);
        let tol = Tolerances::default();
        loop {
            let a0 = leading(&mut rng, m);
            let groups = groups(&mut rng, m, n, congruence);
            let factors: Vec<CMatrix> = groups.groups.iter().map(|g| with_spectrum(&mut rng, g)).collect();
            let polynomial = MatrixPolynomial::from_factors(&a0, &factors);
            if Self::is_generic(&polynomial, &groups, &tol).is_ok() {
                return RandomSystem { a0, groups, factors, polynomial };
            }
        }
    }

    fn is_generic(p: &MatrixPolynomial, groups: &SpectrumGroups, tol: &Tolerances) -> Result<()> {
        for g in &groups.groups {
            let b = p.right_divisor(g, tol)?;
            if linalg::condition_number(&b) > 1e6 {
                return Err(crate::error::Error::genericity("badly conditioned divisor"));
            }
        }
        p.factorize(groups, tol)?;
        Ok(())
    }
}

/// A Fuchsian system with `n` residues of size `m`, diagonal `𝓑_∞` and poles
/// pairwise at least `0.5` apart.
///
/// All residue eigenvalues together keep the [`MARGIN`] from integer differences.
pub fn continuous_system(seed: u64, m: usize, n: usize) -> ContinuousSystem {
    let mut rng = rng(seed);
    let tol = Tolerances::default();
    loop {
        let spectra = groups(&mut rng, m, n, Congruence::Additive);
        let b = spectra.groups.iter().map(|g| with_spectrum(&mut rng, g)).collect();
        let s: Vec<Complex64> = (0..m).map(|k| c(k as f64 - (m as f64 - 1.0) / 2.0, 0.0) + complex(&mut rng) * 0.3).collect();
        let mut x: Vec<Complex64> = Vec::with_capacity(n);
        while x.len() < n {
            let z = complex(&mut rng) * 1.5;
            if x.iter().all(|p| (p - z).norm() >= 0.5) {
                x.push(z);
            }
        }
        if let Ok(sys) = ContinuousSystem::new(Some(linalg::diag(&s)), b, x, &tol) {
            return sys;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let a = RandomSystem::generate(7, 2, 2, Congruence::Additive);
        let b = RandomSystem::generate(7, 2, 2, Congruence::Additive);
        assert_eq!(a.polynomial, b.polynomial);
        let all = a.groups.all();
        for (i, &x) in all.iter().enumerate() {
            for &y in &all[i + 1..] {
                assert!(congruence_gap(x, y, Congruence::Additive) >= MARGIN);
            }
        }
    }

    #[test]
    fn leading_ratios_are_not_real() {
        let mut r = rng(3);
        let a0 = leading(&mut r, 3);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!((a0[(i, i)] / a0[(j, j)]).im.abs() > 1e-3);
                }
            }
        }
    }
}
