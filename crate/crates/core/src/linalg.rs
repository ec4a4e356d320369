//! Small dense complex linear algebra used throughout the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(m: usize) -> CMatrix {
    CMatrix::identity(m, m)
}

pub fn scalar(m: usize, s: Complex64) -> CMatrix {
    CMatrix::from_diagonal_element(m, m, s)
}

pub fn diag(values: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_column_slice(values))
}

/// Builds an `m×m` matrix from row-major real entries.
pub fn real_matrix(m: usize, rows: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(m, m, rows.iter().map(|&x| c(x, 0.0)))
}

/// The m×m matrix unit `E_i` (0-based).
pub fn unit(m: usize, i: usize) -> CMatrix {
    let mut e = CMatrix::zeros(m, m);
    e[(i, i)] = ONE;
    e
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.norm()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// `‖a − b‖_F / max(1, ‖a‖_F, ‖b‖_F)`.
pub fn rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / 1f64.max(a.norm()).max(b.norm())
}

pub fn trace(a: &CMatrix) -> Complex64 {
    a.trace()
}

pub fn is_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Total order used for deterministic spectrum listings: real part, then imaginary part.
pub fn cmp_complex(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

pub fn sort_spectrum(values: &mut [Complex64]) {
    values.sort_by(cmp_complex);
}

/// Eigenvalues of a square matrix (complex Schur form), sorted.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension("eigenvalues of a non-square matrix".into()));
    }
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = a
        .clone()
        .try_schur(f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Inconsistent {
            what: "Schur iteration did not converge".into(),
            residual: f64::NAN,
        })?;
    let (_, t) = schur.unpack();
    let mut ev: Vec<Complex64> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    sort_spectrum(&mut ev);
    Ok(ev)
}

/// Singular values (descending) and the right singular vector of the smallest one.
pub fn smallest_right_singular(a: &CMatrix) -> (Vec<f64>, CVector) {
    let n = a.ncols();
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let last = *order.last().expect("non-empty matrix");
    // Row `last` of V^H is the conjugate of the wanted column of V.
    let v = CVector::from_iterator(n, (0..n).map(|j| v_t[(last, j)].conj()));
    (sigma, v)
}

/// Unit-norm vector whose first coordinate of largest modulus is real positive.
pub fn normalize_phase(v: &CVector) -> CVector {
    let norm = v.norm();
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, z) in v.iter().enumerate() {
        // Coordinates within a relative 1e-12 count as ties; the first one wins.
        if z.norm() > best_abs * (1.0 + 1e-12) {
            best = i;
            best_abs = z.norm();
        }
    }
    let phase = if best_abs > 0.0 { v[best].conj() / best_abs } else { ONE };
    v.map(|z| z * phase / norm)
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// 2-norm condition number; infinite for singular input.
pub fn condition_number(a: &CMatrix) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Inverse that fails with a genericity violation above the condition threshold.
pub fn inverse_checked(a: &CMatrix, max_cond: f64, what: &str) -> Result<CMatrix> {
    let cond = condition_number(a);
    if !(cond < max_cond) {
        return Err(Error::genericity(format!(
            "{what} is numerically singular (condition number {cond:.3e})"
        )));
    }
    a.clone().try_inverse().ok_or_else(|| {
        Error::genericity(format!("{what} is singular"))
    })
}

/// Solves `a x = b` by LU; fails when `a` is singular within the condition threshold.
pub fn solve_checked(a: &CMatrix, b: &CMatrix, max_cond: f64, what: &str) -> Result<CMatrix> {
    let cond = condition_number(a);
    if !(cond < max_cond) {
        return Err(Error::genericity(format!(
            "{what} is numerically singular (condition number {cond:.3e})"
        )));
    }
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::genericity(format!("{what} is singular")))
}

/// Greedy nearest-neighbour matching of two spectra.
///
/// Returns the largest matched distance. Fails when a candidate has two
/// unmatched partners closer than `ambiguity` to each other and to it, since
/// then the pairing is not determined.
pub fn match_spectra(expected: &[Complex64], actual: &[Complex64], ambiguity: f64) -> Result<f64> {
    if expected.len() != actual.len() {
        return Err(Error::Dimension(format!(
            "spectra of sizes {} and {}",
            expected.len(),
            actual.len()
        )));
    }
    let mut free: Vec<bool> = vec![true; actual.len()];
    let mut worst: f64 = 0.0;
    for e in expected {
        let mut cands: Vec<(f64, usize)> = actual
            .iter()
            .enumerate()
            .filter(|(j, _)| free[*j])
            .map(|(j, a)| ((a - e).norm(), j))
            .collect();
        cands.sort_by(|x, y| x.0.total_cmp(&y.0));
        let (d0, j0) = cands[0];
        if let Some(&(d1, _)) = cands.get(1) {
            if d1 - d0 < ambiguity && d1 < ambiguity {
                return Err(Error::genericity(format!(
                    "ambiguous spectrum matching near {e}"
                )));
            }
        }
        free[j0] = false;
        worst = worst.max(d0);
    }
    Ok(worst)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            out.view_mut((i * br, j * bc), (br, bc)).copy_from(&(b * s));
        }
    }
    out
}

/// Integer power of a square matrix (negative powers through the inverse).
pub fn matrix_power(a: &CMatrix, inv: &CMatrix, k: i64) -> CMatrix {
    let base = if k >= 0 { a } else { inv };
    let mut out = identity(a.nrows());
    for _ in 0..k.unsigned_abs() {
        out = &out * base;
    }
    out
}
