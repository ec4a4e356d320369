//! Matrix polynomials `A(z) = A_0 z^n + A_1 z^{n-1} + … + A_n` over complex scalars.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::linalg::{
    self, c, identity, normalize_phase, smallest_right_singular, CMatrix, CVector, ONE, ZERO,
};
use crate::tolerance::Tolerances;

/// Coefficients are stored in descending order: `coeffs[k]` multiplies `z^{n-k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr", into = "PolyRepr")]
pub struct MatrixPolynomial {
    coeffs: Vec<CMatrix>,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    m: usize,
    n: usize,
    #[serde(with = "io::matrix_list")]
    coeffs: Vec<CMatrix>,
}

impl TryFrom<PolyRepr> for MatrixPolynomial {
    type Error = Error;
    fn try_from(r: PolyRepr) -> Result<Self> {
        if r.coeffs.len() != r.n + 1 {
            return Err(Error::input(format!(
                "degree {} needs {} coefficients, got {}",
                r.n,
                r.n + 1,
                r.coeffs.len()
            )));
        }
        let p = MatrixPolynomial::new(r.coeffs)?;
        if p.m() != r.m {
            return Err(Error::Dimension(format!("declared m={} but matrices are {}×{}", r.m, p.m(), p.m())));
        }
        Ok(p)
    }
}

impl From<MatrixPolynomial> for PolyRepr {
    fn from(p: MatrixPolynomial) -> Self {
        PolyRepr { m: p.m(), n: p.degree(), coeffs: p.coeffs }
    }
}

impl MatrixPolynomial {
    pub fn new(coeffs: Vec<CMatrix>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::input("a matrix polynomial needs at least one coefficient"))?;
        let m = first.nrows();
        if m == 0 {
            return Err(Error::input("matrix dimension must be positive"));
        }
        for (k, a) in coeffs.iter().enumerate() {
            if a.nrows() != m || a.ncols() != m {
                return Err(Error::Dimension(format!(
                    "coefficient {k} is {}×{}, expected {m}×{m}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            if !linalg::is_finite(a) {
                return Err(Error::input(format!("coefficient {k} has non-finite entries")));
            }
        }
        Ok(MatrixPolynomial { coeffs })
    }

    pub fn constant(a0: CMatrix) -> Self {
        MatrixPolynomial { coeffs: vec![a0] }
    }

    /// `A_0 (z − B)`.
    pub fn linear(a0: &CMatrix, b: &CMatrix) -> Self {
        MatrixPolynomial { coeffs: vec![a0.clone(), -(a0 * b)] }
    }

    /// `A_0 (z − C_1)(z − C_2)⋯(z − C_n)`.
    pub fn from_factors(a0: &CMatrix, factors: &[CMatrix]) -> Self {
        factors
            .iter()
            .fold(Self::constant(a0.clone()), |acc, ci| acc.mul_linear_right(ci))
    }

    pub fn m(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &CMatrix {
        &self.coeffs[k]
    }

    pub fn leading(&self) -> &CMatrix {
        &self.coeffs[0]
    }

    /// Frobenius norm of the stacked coefficients.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|a| a.norm_squared()).sum::<f64>().sqrt()
    }

    /// Largest coefficient-wise Frobenius difference relative to `max(1, ‖self‖)`.
    pub fn rel_distance(&self, other: &Self) -> f64 {
        if self.degree() != other.degree() || self.m() != other.m() {
            return f64::INFINITY;
        }
        let diff = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm_squared())
            .sum::<f64>()
            .sqrt();
        diff / self.norm().max(1.0)
    }

    /// Horner evaluation of `Σ A_k z^{n−k}`.
    pub fn evaluate(&self, z: Complex64) -> CMatrix {
        let mut acc = self.coeffs[0].clone();
        for a in &self.coeffs[1..] {
            acc = acc * z + a;
        }
        acc
    }

    pub fn transpose(&self) -> Self {
        MatrixPolynomial { coeffs: self.coeffs.iter().map(|a| a.transpose()).collect() }
    }

    pub fn scale_left(&self, s: &CMatrix) -> Self {
        MatrixPolynomial { coeffs: self.coeffs.iter().map(|a| s * a).collect() }
    }

    pub fn scale_right(&self, s: &CMatrix) -> Self {
        MatrixPolynomial { coeffs: self.coeffs.iter().map(|a| a * s).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let m = self.m();
        let deg = self.degree() + other.degree();
        let mut out = vec![CMatrix::zeros(m, m); deg + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        MatrixPolynomial { coeffs: out }
    }

    /// Sum with coefficients aligned at the constant term.
    pub fn add(&self, other: &Self) -> Self {
        let (long, short) = if self.degree() >= other.degree() { (self, other) } else { (other, self) };
        let offset = long.degree() - short.degree();
        let mut coeffs = long.coeffs.clone();
        for (k, b) in short.coeffs.iter().enumerate() {
            coeffs[offset + k] += b;
        }
        MatrixPolynomial { coeffs }
    }

    /// `A(z)·(z − B)`.
    pub fn mul_linear_right(&self, b: &CMatrix) -> Self {
        let m = self.m();
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(self.coeffs[0].clone());
        for k in 1..=self.degree() {
            out.push(&self.coeffs[k] - &self.coeffs[k - 1] * b);
        }
        out.push(-(&self.coeffs[self.degree()] * b));
        debug_assert_eq!(out[0].nrows(), m);
        MatrixPolynomial { coeffs: out }
    }

    /// `(z − B)·A(z)`.
    pub fn mul_linear_left(&self, b: &CMatrix) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(self.coeffs[0].clone());
        for k in 1..=self.degree() {
            out.push(&self.coeffs[k] - b * &self.coeffs[k - 1]);
        }
        out.push(-(b * &self.coeffs[self.degree()]));
        MatrixPolynomial { coeffs: out }
    }

    /// `A(z + s)`.
    pub fn shift(&self, s: Complex64) -> Self {
        let n = self.degree();
        let m = self.m();
        let mut out = vec![CMatrix::zeros(m, m); n + 1];
        // A(z+s) = Σ_p A_{n−p} (z+s)^p, (z+s)^p = Σ_q C(p,q) s^{p−q} z^q.
        for p in 0..=n {
            let a = &self.coeffs[n - p];
            let mut binom = 1.0;
            for q in (0..=p).rev() {
                // binom = C(p, q), walking q downward from p.
                let w = s.powu((p - q) as u32) * binom;
                out[n - q] += a * w;
                binom *= q as f64 / (p - q + 1) as f64;
            }
        }
        MatrixPolynomial { coeffs: out }
    }

    /// Right division by `z − B`: `A(z) = Q(z)(z − B) + R`, returning `(Q, R)`.
    ///
    /// The remainder equals `A_0Bⁿ + A_1B^{n−1} + … + A_n`.
    pub fn divide_right(&self, b: &CMatrix) -> (Self, CMatrix) {
        let n = self.degree();
        if n == 0 {
            return (Self::constant(CMatrix::zeros(self.m(), self.m())), self.coeffs[0].clone());
        }
        let mut q = Vec::with_capacity(n);
        q.push(self.coeffs[0].clone());
        for k in 1..n {
            let next = &self.coeffs[k] + &q[k - 1] * b;
            q.push(next);
        }
        let rem = &self.coeffs[n] + &q[n - 1] * b;
        (MatrixPolynomial { coeffs: q }, rem)
    }

    /// Left division by `z − B`: `A(z) = (z − B)Q(z) + R`.
    pub fn divide_left(&self, b: &CMatrix) -> (Self, CMatrix) {
        let (q, r) = self.transpose().divide_right(&b.transpose());
        (q.transpose(), r.transpose())
    }

    /// Drops leading coefficients, returning the dropped part's relative size.
    pub(crate) fn truncate_leading(&self, count: usize) -> (Self, f64) {
        let dropped = self.coeffs[..count]
            .iter()
            .map(|a| a.norm_squared())
            .sum::<f64>()
            .sqrt();
        (
            MatrixPolynomial { coeffs: self.coeffs[count..].to_vec() },
            dropped / self.norm().max(1.0),
        )
    }

    /// Coefficients of the scalar polynomial `det A(z)`, descending, degree `mn`.
    ///
    /// Interpolated from `mn + 1` samples on the unit circle by a discrete Fourier
    /// transform; the leading coefficient is `det A_0` by construction.
    pub fn det_poly(&self) -> Vec<Complex64> {
        self.det_poly_with_radius(1.0)
    }

    /// As [`det_poly`](Self::det_poly) with samples on the circle `|z| = radius`.
    pub fn det_poly_with_radius(&self, radius: f64) -> Vec<Complex64> {
        let deg = self.m() * self.degree();
        let count = deg + 1;
        let samples: Vec<Complex64> = (0..count)
            .map(|k| {
                let z = Complex64::from_polar(radius, 2.0 * PI * k as f64 / count as f64);
                self.evaluate(z).determinant()
            })
            .collect();
        let mut ascending: Vec<Complex64> = (0..count)
            .map(|j| {
                let sum: Complex64 = samples
                    .iter()
                    .enumerate()
                    .map(|(k, s)| {
                        let angle = -2.0 * PI * ((j * k) % count) as f64 / count as f64;
                        s * Complex64::from_polar(1.0, angle)
                    })
                    .sum();
                sum / (count as f64 * radius.powi(j as i32))
            })
            .collect();
        ascending[deg] = self.coeffs[0].determinant();
        ascending.reverse();
        ascending
    }

    fn check_leading(&self, tol: &Tolerances) -> Result<()> {
        let a0 = &self.coeffs[0];
        let det = a0.determinant().norm();
        let scale = a0.norm().max(f64::MIN_POSITIVE).powi(self.m() as i32);
        if !(det > tol.singular_leading * scale) {
            return Err(Error::SingularLeading { det_abs: det });
        }
        Ok(())
    }

    /// The `mn` roots of `det A(z)`, sorted by real then imaginary part.
    ///
    /// Computed as eigenvalues of the block companion matrix of the monic
    /// polynomial `A_0^{-1} A(z)`.
    pub fn eigenvalues(&self, tol: &Tolerances) -> Result<Vec<Complex64>> {
        self.check_leading(tol)?;
        let (m, n) = (self.m(), self.degree());
        if n == 0 {
            return Ok(Vec::new());
        }
        let lu = self.coeffs[0].clone().lu();
        let mut comp = CMatrix::zeros(m * n, m * n);
        for k in 1..=n {
            let ak = lu.solve(&self.coeffs[k]).ok_or(Error::SingularLeading { det_abs: 0.0 })?;
            comp.view_mut((0, (k - 1) * m), (m, m)).copy_from(&(-ak));
        }
        for k in 1..n {
            comp.view_mut((k * m, (k - 1) * m), (m, m)).copy_from(&identity(m));
        }
        linalg::eigenvalues(&comp)
    }

    /// Unit kernel vector of `A(a)` for a simple root `a`, with its first
    /// coordinate of largest modulus made real positive.
    pub fn pencil_eigenvector(&self, a: Complex64, tol: &Tolerances) -> Result<CVector> {
        kernel_vector(&self.evaluate(a), a, tol)
    }

    /// Unit vector `w` with `Aᵗ(a) w = 0`.
    pub fn left_kernel_vector(&self, a: Complex64, tol: &Tolerances) -> Result<CVector> {
        kernel_vector(&self.evaluate(a).transpose(), a, tol)
    }

    /// The matrix `B` with `z − B` a right divisor of `A(z)` and `Sp(B) = group`.
    pub fn right_divisor(&self, group: &[Complex64], tol: &Tolerances) -> Result<CMatrix> {
        if group.len() != self.m() {
            return Err(Error::Dimension(format!(
                "a divisor group needs {} eigenvalues, got {}",
                self.m(),
                group.len()
            )));
        }
        let vectors = group
            .iter()
            .map(|&a| self.pencil_eigenvector(a, tol))
            .collect::<Result<Vec<_>>>()?;
        let b = divisor_from_eigenpairs(group, &vectors, tol)?;
        let residual = self.verify_divisor(&b);
        if residual > tol.identity {
            return Err(Error::Inconsistent { what: "right divisor identity".into(), residual });
        }
        Ok(b)
    }

    /// `‖A_0Bⁿ + A_1B^{n−1} + … + A_n‖_F / (‖A‖·(1 + ‖B‖)ⁿ)`.
    pub fn verify_divisor(&self, b: &CMatrix) -> f64 {
        let (_, rem) = self.divide_right(b);
        let scale = self.norm() * (1.0 + b.norm()).powi(self.degree() as i32);
        rem.norm() / scale.max(f64::MIN_POSITIVE)
    }

    /// Rebuilds `A(z)` with leading coefficient `a0` from its `n` right divisors.
    ///
    /// The monic part is built one divisor at a time: with `Â` already having
    /// `z − B_1, …, z − B_{i−1}` as right divisors, the vectors `w_j = Â(a_j)v_j`
    /// for the eigenpairs `(a_j, v_j)` of `B_i` define `X = W diag(a) W^{-1}` and
    /// `(z − X)Â(z)` acquires `z − B_i` as well.
    pub fn from_right_divisors(
        a0: &CMatrix,
        divisors: &[CMatrix],
        groups: &SpectrumGroups,
        tol: &Tolerances,
    ) -> Result<Self> {
        let m = a0.nrows();
        if groups.groups.len() != divisors.len() {
            return Err(Error::Dimension(format!(
                "{} divisors but {} eigenvalue groups",
                divisors.len(),
                groups.groups.len()
            )));
        }
        let mut monic = Self::constant(identity(m));
        for (b, group) in divisors.iter().zip(&groups.groups) {
            if b.nrows() != m || b.ncols() != m || group.len() != m {
                return Err(Error::Dimension("divisor shape does not match A0".into()));
            }
            let mut w = CMatrix::zeros(m, m);
            for (j, &a) in group.iter().enumerate() {
                let v = matrix_eigenvector(b, a, tol)?;
                w.set_column(j, &(monic.evaluate(a) * v));
            }
            let w_inv = linalg::inverse_checked(&w, tol.eigvec_cond, "intermediate vector set Â(a_j)v_j")?;
            let x = &w * linalg::diag(group) * w_inv;
            monic = monic.mul_linear_left(&x);
        }
        let out = monic.scale_left(a0);
        for (i, b) in divisors.iter().enumerate() {
            let residual = out.verify_divisor(b);
            if residual > tol.identity {
                return Err(Error::Inconsistent {
                    what: format!("reconstructed polynomial does not have divisor {}", i + 1),
                    residual,
                });
            }
        }
        Ok(out)
    }

    /// Writes `A(z) = A_0(z − C_1)⋯(z − C_n)` with `Sp(C_i)` the `i`-th group.
    ///
    /// `C_n` is the right divisor for the last group; the rest come from the quotient.
    pub fn factorize(&self, groups: &SpectrumGroups, tol: &Tolerances) -> Result<Vec<CMatrix>> {
        self.check_leading(tol)?;
        if groups.groups.len() != self.degree() {
            return Err(Error::Dimension(format!(
                "degree {} polynomial needs {} groups, got {}",
                self.degree(),
                self.degree(),
                groups.groups.len()
            )));
        }
        let mut rest = self.clone();
        let mut factors = vec![CMatrix::zeros(self.m(), self.m()); self.degree()];
        for i in (0..self.degree()).rev() {
            let b = rest.right_divisor(&groups.groups[i], tol)?;
            let (q, rem) = rest.divide_right(&b);
            let residual = rem.norm() / rest.norm().max(1.0);
            if residual > tol.identity {
                return Err(Error::Inconsistent { what: "right division remainder".into(), residual });
            }
            factors[i] = b;
            rest = q;
        }
        Ok(factors)
    }

    /// Characteristic exponents `d_i = (A_1)_{ii}/ρ_i + n/2`.
    pub fn formal_exponents(&self, tol: &Tolerances) -> Result<Vec<Complex64>> {
        let reduced = reduced_exponents(&self.coeffs, tol)?;
        let half = self.degree() as f64 / 2.0;
        Ok(reduced.into_iter().map(|d| d + half).collect())
    }

    /// Formal solution data at infinity up to order `order`.
    ///
    /// `z^{−n}A(z)` is expanded as the finite series `Σ A_k z^{−k}` and the
    /// degree-0 recursion of [`formal_series_reduced`] is run on it; `d` is
    /// then shifted by `n/2`.
    pub fn formal_series(&self, order: usize, tol: &Tolerances) -> Result<FormalSolutionData> {
        let mut data = formal_series_reduced(&self.coeffs, order, tol)?;
        let half = self.degree() as f64 / 2.0;
        data.d = data.reduced_d.iter().map(|d| d + half).collect();
        Ok(data)
    }
}

fn kernel_vector(mat: &CMatrix, a: Complex64, tol: &Tolerances) -> Result<CVector> {
    let m = mat.nrows();
    let (sigma, v) = smallest_right_singular(mat);
    let top = sigma[0];
    let ratio = if top > 0.0 { sigma[m - 1] / top } else { 0.0 };
    if ratio > tol.root_residual {
        return Err(Error::RootMismatch { value: a, ratio });
    }
    if m >= 2 && sigma[m - 2] <= tol.simple_root * top {
        return Err(Error::genericity(format!(
            "{a} is not a simple eigenvalue: A({a}) has a kernel of dimension > 1"
        )));
    }
    Ok(normalize_phase(&v))
}

/// Eigenvector of a constant matrix `b` for the simple eigenvalue `a`.
pub fn matrix_eigenvector(b: &CMatrix, a: Complex64, tol: &Tolerances) -> Result<CVector> {
    let shifted = b - linalg::scalar(b.nrows(), a);
    kernel_vector(&shifted, a, tol)
}

/// `B = V diag(a) V^{-1}` from eigenpairs; depends only on the eigenlines.
pub fn divisor_from_eigenpairs(values: &[Complex64], vectors: &[CVector], tol: &Tolerances) -> Result<CMatrix> {
    let m = values.len();
    let mut v = CMatrix::zeros(m, m);
    for (j, col) in vectors.iter().enumerate() {
        v.set_column(j, col);
    }
    let v_inv = linalg::inverse_checked(&v, tol.eigvec_cond, "eigenvector matrix")?;
    Ok(&v * linalg::diag(values) * v_inv)
}

/// How two spectral values are considered congruent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Congruence {
    /// `a − b ∈ ℤ`.
    Additive,
    /// `a / b ∈ q^ℤ`.
    Multiplicative {
        #[serde(with = "io::complex")]
        q: Complex64,
    },
    /// Only coincidence matters.
    Distinct,
}

/// `n` groups of `m` eigenvalues each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumGroups {
    #[serde(with = "io::complex_groups")]
    pub groups: Vec<Vec<Complex64>>,
    pub congruence: Congruence,
}

impl SpectrumGroups {
    /// Validated constructor; fails naming the first offending pair.
    pub fn new(groups: Vec<Vec<Complex64>>, congruence: Congruence, tol: &Tolerances) -> Result<Self> {
        let g = SpectrumGroups { groups, congruence };
        g.validate(tol)?;
        Ok(g)
    }

    /// Groups without the congruence checks (for internal bookkeeping).
    pub fn unchecked(groups: Vec<Vec<Complex64>>, congruence: Congruence) -> Self {
        SpectrumGroups { groups, congruence }
    }

    /// Sorts by real then imaginary part and chunks into groups of `m`.
    pub fn default_grouping(mut values: Vec<Complex64>, m: usize, congruence: Congruence) -> Self {
        linalg::sort_spectrum(&mut values);
        SpectrumGroups { groups: values.chunks(m).map(|c| c.to_vec()).collect(), congruence }
    }

    pub fn all(&self) -> Vec<Complex64> {
        self.groups.iter().flatten().copied().collect()
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        if let Some(m) = self.groups.first().map(Vec::len) {
            if self.groups.iter().any(|g| g.len() != m) {
                return Err(Error::Dimension("eigenvalue groups of unequal size".into()));
            }
        }
        let all = self.all();
        for (i, &a) in all.iter().enumerate() {
            for &b in &all[i + 1..] {
                if let Some(reason) = congruent(a, b, self.congruence, tol) {
                    return Err(Error::genericity(format!("eigenvalues {a} and {b} {reason}")));
                }
            }
        }
        Ok(())
    }
}

/// Why `a` and `b` count as congruent, if they do.
pub fn congruent(a: Complex64, b: Complex64, congruence: Congruence, tol: &Tolerances) -> Option<String> {
    let scale = 1f64.max(a.norm()).max(b.norm());
    if (a - b).norm() <= tol.spectrum_ambiguity * scale {
        return Some("coincide".into());
    }
    match congruence {
        Congruence::Additive => {
            let d = a - b;
            let k = d.re.round();
            if (d - k).norm() <= tol.congruence {
                return Some(format!("differ by the integer {k}"));
            }
        }
        Congruence::Multiplicative { q } => {
            if a.norm() == 0.0 || b.norm() == 0.0 {
                return Some("include zero, which is not admissible for q-shifts".into());
            }
            let k = ((a / b).norm().ln() / q.norm().ln()).round();
            if k.is_finite() && (a - b * q.powf(k)).norm() <= tol.congruence * scale {
                return Some(format!("differ by the factor q^{k}"));
            }
        }
        Congruence::Distinct => {}
    }
    None
}

/// Formal solution `Ŷ(z) ρ^z z^{d}` data at infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormalSolutionData {
    #[serde(with = "io::complex_list")]
    pub rho: Vec<Complex64>,
    /// Exponents in the convention `ρ_i(d_i − n/2) = (A_1)_{ii}`.
    #[serde(with = "io::complex_list")]
    pub d: Vec<Complex64>,
    /// Exponents `(A_1)_{ii}/ρ_i` of the degree-0 system `z^{−n}A(z)`.
    #[serde(with = "io::complex_list")]
    pub reduced_d: Vec<Complex64>,
    /// `Ŷ_1, …, Ŷ_K`.
    #[serde(with = "io::matrix_list")]
    pub yhat: Vec<CMatrix>,
    pub order: usize,
    /// Residual of the coefficient identity at orders `1..=K`.
    pub order_residuals: Vec<f64>,
}

enum Leading {
    DistinctDiagonal,
    IdentityDiagonalA1,
}

fn classify_leading(series: &[CMatrix], tol: &Tolerances) -> Result<Leading> {
    let a0 = &series[0];
    let m = a0.nrows();
    let scale = a0.norm().max(f64::MIN_POSITIVE);
    let off = |a: &CMatrix| {
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    if off(a0) > tol.identity * scale {
        return Err(Error::Unsupported("formal solution requires a diagonal leading coefficient".into()));
    }
    let rho: Vec<Complex64> = (0..m).map(|i| a0[(i, i)]).collect();
    if rho.iter().any(|r| r.norm() <= tol.pivot * scale) {
        return Err(Error::SingularLeading { det_abs: 0.0 });
    }
    let distinct = (0..m).all(|i| (i + 1..m).all(|j| (rho[i] - rho[j]).norm() > tol.spectrum_ambiguity * scale));
    if distinct {
        return Ok(Leading::DistinctDiagonal);
    }
    let is_identity = rho.iter().all(|r| (r - ONE).norm() <= tol.identity);
    let a1_diag = series.get(1).is_none_or(|a1| off(a1) <= tol.identity * a1.norm().max(1.0));
    if is_identity && a1_diag {
        return Ok(Leading::IdentityDiagonalA1);
    }
    Err(Error::Unsupported(
        "formal solution requires distinct diagonal ρ, or A_0 = I with diagonal A_1".into(),
    ))
}

/// Exponents `(M_1)_{ii}/ρ_i` of the degree-0 system `Σ M_k z^{−k}`.
pub fn reduced_exponents(series: &[CMatrix], tol: &Tolerances) -> Result<Vec<Complex64>> {
    classify_leading(series, tol)?;
    let m = series[0].nrows();
    Ok((0..m)
        .map(|i| series.get(1).map_or(ZERO, |a1| a1[(i, i)] / series[0][(i, i)]))
        .collect())
}

/// Generalized binomial coefficient `C(x, s)` for complex `x`.
pub(crate) fn binom(x: Complex64, s: usize) -> Complex64 {
    let mut out = ONE;
    for t in 0..s {
        out *= (x - t as f64) / (t + 1) as f64;
    }
    out
}

/// Formal solution of the degree-0 system `Y(z+1) = M(z) Y(z)`, `M(z) = Σ_k M_k z^{−k}`.
///
/// With `w = 1/z`, `Ŷ(z+1)Λ(z) = M(z)Ŷ(z)` where `Λ(z) = M_0 diag((1+w)^{d_i})`,
/// and `Ŷ(z+1) = Σ_j Ŷ_j w^j (1+w)^{−j}`. Matching the coefficient of `w^l`
/// fixes the off-diagonal part of `Ŷ_l` and the diagonal part of `Ŷ_{l−1}`
/// (distinct `ρ`), or all of `Ŷ_{l−1}` (`M_0 = I`, diagonal `M_1`).
pub fn formal_series_reduced(series: &[CMatrix], order: usize, tol: &Tolerances) -> Result<FormalSolutionData> {
    if order < 1 {
        return Err(Error::input("formal series order must be at least 1"));
    }
    if series.is_empty() {
        return Err(Error::input("empty coefficient series"));
    }
    let kind = classify_leading(series, tol)?;
    let a0 = &series[0];
    let m = a0.nrows();
    let zero = CMatrix::zeros(m, m);
    let coeff = |k: usize| series.get(k).unwrap_or(&zero);
    let rho: Vec<Complex64> = (0..m).map(|i| a0[(i, i)]).collect();
    let d: Vec<Complex64> = (0..m).map(|i| coeff(1)[(i, i)] / rho[i]).collect();
    let lambda = |s: usize| -> CMatrix {
        let dg: Vec<Complex64> = d.iter().map(|&di| binom(di, s)).collect();
        a0 * linalg::diag(&dg)
    };
    let lambdas: Vec<CMatrix> = (0..=order + 1).map(lambda).collect();

    let mut y: Vec<CMatrix> = vec![zero.clone(); order + 2];
    y[0] = identity(m);

    // G_l collects the terms of order l that involve only Ŷ_0..Ŷ_{l−2}.
    let g = |y: &[CMatrix], l: usize| -> CMatrix {
        let mut out = zero.clone();
        for j in 0..=l.saturating_sub(2) {
            if l < 2 {
                break;
            }
            out += coeff(l - j) * &y[j];
            for r in 0..=(l - j) {
                let b = binom(c(-(j as f64), 0.0), r);
                if b != ZERO {
                    out -= &y[j] * &lambdas[l - j - r] * b;
                }
            }
        }
        out
    };

    match kind {
        Leading::DistinctDiagonal => {
            for p in 0..m {
                for q in 0..m {
                    if p != q {
                        y[1][(p, q)] = coeff(1)[(p, q)] / (rho[q] - rho[p]);
                    }
                }
            }
            for l in 2..=order + 1 {
                let gl = g(&y, l);
                let prev = l - 1;
                for p in 0..m {
                    let mut acc = gl[(p, p)];
                    for s in 0..m {
                        if s != p {
                            acc += coeff(1)[(p, s)] * y[prev][(s, p)];
                        }
                    }
                    y[prev][(p, p)] = -acc / (prev as f64 * rho[p]);
                }
                if l <= order {
                    let h = &gl - &y[prev] * &lambdas[1] + &y[prev] * a0 * c(prev as f64, 0.0) + coeff(1) * &y[prev];
                    for p in 0..m {
                        for q in 0..m {
                            if p != q {
                                y[l][(p, q)] = h[(p, q)] / (rho[q] - rho[p]);
                            }
                        }
                    }
                }
            }
        }
        Leading::IdentityDiagonalA1 => {
            for l in 2..=order + 1 {
                let gl = g(&y, l);
                let prev = l - 1;
                for p in 0..m {
                    for q in 0..m {
                        let den = d[q] - d[p] - prev as f64;
                        if den.norm() <= tol.congruence {
                            return Err(Error::genericity(format!(
                                "resonant exponents {} and {} differ by {prev}",
                                d[q], d[p]
                            )));
                        }
                        y[prev][(p, q)] = gl[(p, q)] / den;
                    }
                }
            }
        }
    }

    let scale = series.iter().map(|a| a.norm()).fold(1.0, f64::max);
    let mut order_residuals = Vec::with_capacity(order);
    for l in 1..=order {
        let mut lhs = zero.clone();
        for j in 0..=l {
            for r in 0..=(l - j) {
                let b = binom(c(-(j as f64), 0.0), r);
                if b != ZERO {
                    lhs += &y[j] * &lambdas[l - j - r] * b;
                }
            }
        }
        let mut rhs = zero.clone();
        for k in 0..=l {
            rhs += coeff(k) * &y[l - k];
        }
        let yscale = y[..=l].iter().map(|a| a.norm()).fold(1.0, f64::max);
        let res = (lhs - rhs).norm() / (scale * yscale);
        if res > tol.identity {
            return Err(Error::Inconsistent { what: format!("formal identity at order {l}"), residual: res });
        }
        order_residuals.push(res);
    }

    y.truncate(order + 1);
    y.remove(0);
    Ok(FormalSolutionData {
        rho,
        d: d.clone(),
        reduced_d: d,
        yhat: y,
        order,
        order_residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, real_matrix};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn shift_matches_evaluation() {
        let p = MatrixPolynomial::new(vec![
            real_matrix(2, &[1., 2., 0., 1.]),
            real_matrix(2, &[0., 1., 3., 0.]),
            real_matrix(2, &[2., 0., 1., 5.]),
        ])
        .unwrap();
        let s = c(0.5, -1.0);
        let z = c(0.3, 0.7);
        let lhs = p.shift(s).evaluate(z);
        let rhs = p.evaluate(z + s);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn divide_right_reconstructs() {
        let p = MatrixPolynomial::new(vec![
            real_matrix(2, &[1., 2., 0., 1.]),
            real_matrix(2, &[0., 1., 3., 0.]),
            real_matrix(2, &[2., 0., 1., 5.]),
        ])
        .unwrap();
        let b = real_matrix(2, &[0.5, 1., -1., 2.]);
        let (q, r) = p.divide_right(&b);
        let z = c(1.3, 0.2);
        let back = q.evaluate(z) * (linalg::scalar(2, z) - &b) + r;
        assert!((back - p.evaluate(z)).norm() < 1e-12);
        let (ql, rl) = p.divide_left(&b);
        let back = (linalg::scalar(2, z) - &b) * ql.evaluate(z) + rl;
        assert!((back - p.evaluate(z)).norm() < 1e-12);
    }

    #[test]
    fn binomials() {
        assert_eq!(binom(c(5.0, 0.0), 2), c(10.0, 0.0));
        assert_eq!(binom(c(-2.0, 0.0), 3), c(-4.0, 0.0));
        assert_eq!(binom(c(0.0, 0.0), 1), ZERO);
    }

    #[test]
    fn exponents_of_identity_case() {
        let a = MatrixPolynomial::new(vec![identity(2), diag(&[c(0.3, 0.0), c(-0.2, 0.1)])]).unwrap();
        let d = a.formal_exponents(&tol()).unwrap();
        assert!((d[0] - c(0.8, 0.0)).norm() < 1e-15);
        assert!((d[1] - c(0.3, 0.1)).norm() < 1e-15);
    }

    #[test]
    fn congruence_detection() {
        let t = tol();
        assert!(congruent(c(0.2, 0.1), c(-1.8, 0.1), Congruence::Additive, &t).is_some());
        assert!(congruent(c(0.2, 0.1), c(-1.8, 0.3), Congruence::Additive, &t).is_none());
        let q = Congruence::Multiplicative { q: c(0.7, 0.0) };
        assert!(congruent(c(0.49, 0.0), c(1.0, 0.0), q, &t).is_some());
        assert!(congruent(c(0.0, 0.49), c(1.0, 0.0), q, &t).is_none());
    }
}
