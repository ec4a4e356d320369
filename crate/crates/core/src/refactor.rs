//! Refactorization of products of linear factors `z − Q`.
//!
//! `(z − X)(z − Y) = (z − S)(z − T)` with `Sp(S) = Sp(Y)`, `Sp(T) = Sp(X)` is
//! the elementary exchange; permutations are words in such exchanges, and the
//! sequence flows `F_l` move one factor across a window of `n` neighbours.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::linalg::{self, c, identity, kron, CMatrix};
use crate::matpoly::{Congruence, MatrixPolynomial, SpectrumGroups};
use crate::tolerance::Tolerances;

/// How factor `k + n` of a bi-infinite sequence is obtained from factor `k`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Variant {
    /// `Q_{k+n} = I + A_0 Q_k A_0^{-1}`.
    #[default]
    Difference,
    /// `Q_{k+n} = q A_0 Q_k A_0^{-1}`.
    Q {
        #[serde(with = "io::complex")]
        q: Complex64,
    },
    /// `Q_{k+n} = A_0 Q_k A_0^{-1}`; `n`-periodic when `A_0 = I`.
    Autonomous,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Difference => write!(f, "difference"),
            Variant::Q { q } if q.im == 0.0 => write!(f, "q={}", q.re),
            Variant::Q { q } => write!(f, "q={q}"),
            Variant::Autonomous => write!(f, "autonomous"),
        }
    }
}

impl FromStr for Variant {
    type Err = String;

    /// `difference`, `autonomous`, or `q=VALUE` with a real or complex (`0.7+0.1i`) value.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        match s {
            "difference" => Ok(Variant::Difference),
            "autonomous" => Ok(Variant::Autonomous),
            _ => {
                let value = s
                    .strip_prefix("q=")
                    .ok_or_else(|| format!("unknown variant {s:?}; expected difference, q=VALUE or autonomous"))?;
                let q: Complex64 = value.parse().map_err(|_| format!("bad q value {value:?}"))?;
                Variant::q(q)
            }
        }
    }
}

impl Variant {
    /// Checked q-variant; `q` must be nonzero with `|q| ≠ 1`.
    pub fn q(q: Complex64) -> std::result::Result<Self, String> {
        if !(q.norm() > 0.0) || (q.norm() - 1.0).abs() < 1e-12 || !q.re.is_finite() || !q.im.is_finite() {
            return Err(format!("q must be finite, nonzero and off the unit circle, got {q}"));
        }
        Ok(Variant::Q { q })
    }

    pub fn congruence(&self) -> Congruence {
        match *self {
            Variant::Difference => Congruence::Additive,
            Variant::Q { q } => Congruence::Multiplicative { q },
            Variant::Autonomous => Congruence::Distinct,
        }
    }

    /// Spectrum of a type after `k` unit steps of its flow.
    pub fn shift_value(&self, a: Complex64, k: i64) -> Complex64 {
        match *self {
            Variant::Difference => a - k as f64,
            Variant::Q { q } => a * q.powi(-(k as i32)),
            Variant::Autonomous => a,
        }
    }

    pub fn shift_values(&self, values: &[Complex64], k: i64) -> Vec<Complex64> {
        values.iter().map(|&a| self.shift_value(a, k)).collect()
    }

    /// `τ^μ(Q)` for the twist of this variant.
    pub fn twist(&self, q_mat: &CMatrix, a0: &CMatrix, a0_inv: &CMatrix, mu: i64) -> CMatrix {
        if mu == 0 {
            return q_mat.clone();
        }
        let p = linalg::matrix_power(a0, a0_inv, mu);
        let p_inv = linalg::matrix_power(a0, a0_inv, -mu);
        let conj = &p * q_mat * &p_inv;
        match *self {
            Variant::Difference => conj + linalg::scalar(q_mat.nrows(), c(mu as f64, 0.0)),
            Variant::Q { q } => conj * q.powi(mu as i32),
            Variant::Autonomous => conj,
        }
    }
}

/// A linear factor `z − Q` together with its type `Sp(Q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFactor {
    pub q: CMatrix,
    pub spectrum: Vec<Complex64>,
}

impl LinearFactor {
    pub fn new(q: CMatrix) -> Result<Self> {
        let spectrum = linalg::eigenvalues(&q)?;
        Ok(LinearFactor { q, spectrum })
    }

    pub fn evaluate(&self, z: Complex64) -> CMatrix {
        linalg::scalar(self.q.nrows(), z) - &self.q
    }
}

/// Solves `YΛ − ΛX = I` through the Kronecker form `(I⊗Y − Xᵗ⊗I) vec Λ = vec I`.
pub fn sylvester(x: &CMatrix, y: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let m = x.nrows();
    let id = identity(m);
    let k = kron(&id, y) - kron(&x.transpose(), &id);
    let rhs = CMatrix::from_column_slice(m * m, 1, identity(m).as_slice());
    let sol = linalg::solve_checked(&k, &rhs, tol.conjugator_cond, "Sylvester operator (spectra of X and Y overlap)")?;
    Ok(CMatrix::from_column_slice(m, m, sol.as_slice()))
}

/// `(z − X)(z − Y) = (z − S)(z − T)` with `Sp(S) = Sp(Y)`, `Sp(T) = Sp(X)`:
/// `S = X + Λ^{-1}`, `T = Y − Λ^{-1}` where `YΛ − ΛX = I`.
pub fn swap_adjacent(x: &CMatrix, y: &CMatrix, tol: &Tolerances) -> Result<(CMatrix, CMatrix)> {
    check_pair(x, y)?;
    let lambda = sylvester(x, y, tol)?;
    let inv = linalg::inverse_checked(&lambda, tol.conjugator_cond, "Sylvester solution Λ")?;
    Ok((x + &inv, y - &inv))
}

/// Closed form for `2×2` blocks:
/// `S = (X+Y−tr Y) Y (X+Y−tr Y)^{-1}`, `T = (X+Y−tr X)^{-1} X (X+Y−tr X)`.
pub fn swap_adjacent_2x2(x: &CMatrix, y: &CMatrix, tol: &Tolerances) -> Result<(CMatrix, CMatrix)> {
    check_pair(x, y)?;
    if x.nrows() != 2 {
        return Err(Error::Unsupported("the closed-form exchange is for 2×2 matrices".into()));
    }
    let sum = x + y;
    let gs = &sum - linalg::scalar(2, y.trace());
    let gt = &sum - linalg::scalar(2, x.trace());
    let gs_inv = linalg::inverse_checked(&gs, tol.conjugator_cond, "X + Y − tr Y")?;
    let gt_inv = linalg::inverse_checked(&gt, tol.conjugator_cond, "X + Y − tr X")?;
    Ok((&gs * y * gs_inv, gt_inv * x * &gt))
}

/// Exchange through the divisor calculus: `T` is the right divisor of the
/// quadratic `(z − X)(z − Y)` for the eigenvalues of `X`, and `S = X + Y − T`.
pub fn swap_via_eigen(x: &CMatrix, y: &CMatrix, tol: &Tolerances) -> Result<(CMatrix, CMatrix)> {
    check_pair(x, y)?;
    let m = x.nrows();
    let quad = MatrixPolynomial::from_factors(&identity(m), &[x.clone(), y.clone()]);
    let group = linalg::eigenvalues(x)?;
    let t = quad.right_divisor(&group, tol)?;
    Ok((x + y - &t, t))
}

fn check_pair(x: &CMatrix, y: &CMatrix) -> Result<()> {
    if x.nrows() != x.ncols() || x.shape() != y.shape() {
        return Err(Error::Dimension("exchange needs two square matrices of equal size".into()));
    }
    Ok(())
}

/// Applies adjacent exchanges at the given positions (0-based: position `p`
/// exchanges factors `p` and `p + 1`).
pub fn apply_word(factors: &[CMatrix], word: &[usize], tol: &Tolerances) -> Result<Vec<CMatrix>> {
    let mut cur = factors.to_vec();
    for &p in word {
        if p + 1 >= cur.len() {
            return Err(Error::input(format!("exchange position {p} out of range")));
        }
        let (s, t) = swap_adjacent(&cur[p], &cur[p + 1], tol)?;
        cur[p] = s;
        cur[p + 1] = t;
    }
    Ok(cur)
}

fn check_permutation(sigma: &[usize]) -> Result<()> {
    let mut seen = vec![false; sigma.len()];
    for &s in sigma {
        if s >= sigma.len() || seen[s] {
            return Err(Error::input(format!("{sigma:?} is not a permutation")));
        }
        seen[s] = true;
    }
    Ok(())
}

/// Bubble-sort reduced word bringing type `sigma[i]` to position `i`.
pub fn bubble_word(sigma: &[usize]) -> Vec<usize> {
    // rank[t] = target position of the factor of type t.
    let mut rank = vec![0; sigma.len()];
    for (pos, &t) in sigma.iter().enumerate() {
        rank[t] = pos;
    }
    let mut at: Vec<usize> = (0..sigma.len()).collect();
    let mut word = Vec::new();
    let mut changed = true;
    while changed {
        changed = false;
        for p in 0..sigma.len().saturating_sub(1) {
            if rank[at[p]] > rank[at[p + 1]] {
                at.swap(p, p + 1);
                word.push(p);
                changed = true;
            }
        }
    }
    word
}

/// Refactors `Π(z − X_i)` as `Π(z − Y_{σ(i)})` with `Sp(Y_i) = Sp(X_i)`.
///
/// `sigma[i] = σ(i)` (0-based). The result is indexed by type: entry `t` is
/// `Y_t`, which sits at position `σ^{-1}(t)` of the new product.
pub fn permute_product(factors: &[CMatrix], sigma: &[usize], tol: &Tolerances) -> Result<Vec<CMatrix>> {
    if sigma.len() != factors.len() {
        return Err(Error::Dimension("permutation length differs from the number of factors".into()));
    }
    check_permutation(sigma)?;
    let word = bubble_word(sigma);
    let arranged = apply_word(factors, &word, tol)?;
    let mut by_type = vec![CMatrix::zeros(0, 0); sigma.len()];
    for (pos, &t) in sigma.iter().enumerate() {
        by_type[t] = arranged[pos].clone();
    }
    Ok(by_type)
}

/// Monic product `Π (z − Q_i)` evaluated at `z`.
pub fn eval_product(factors: &[CMatrix], z: Complex64) -> CMatrix {
    let m = factors[0].nrows();
    factors
        .iter()
        .fold(identity(m), |acc, q| acc * (linalg::scalar(m, z) - q))
}

/// Largest relative mismatch of two monic products `Π(z − P_i)` and `Π(z − Q_i)`
/// over `2·m·N + 1` points on the circle `|z| = 1 + max‖·‖`.
pub fn product_identity_residual(lhs: &[CMatrix], rhs: &[CMatrix]) -> f64 {
    let m = lhs[0].nrows();
    let count = 2 * m * lhs.len().max(rhs.len()) + 1;
    let radius = 1.0 + lhs.iter().chain(rhs).map(|q| q.norm()).fold(0.0, f64::max);
    (0..count)
        .map(|k| {
            let z = Complex64::from_polar(radius, 2.0 * PI * (k as f64 + 0.5) / count as f64);
            let p = eval_product(lhs, z);
            let q = eval_product(rhs, z);
            (&p - &q).norm() / (p.norm() + q.norm()).max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}

/// A bi-infinite twisted sequence of linear factors, stored by its base period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSequence {
    #[serde(with = "io::matrix_list")]
    base: Vec<CMatrix>,
    #[serde(with = "io::matrix")]
    a0: CMatrix,
    #[serde(with = "io::matrix")]
    a0_inv: CMatrix,
    variant: Variant,
    /// Types of the base factors, kept by exact bookkeeping.
    #[serde(with = "io::complex_groups")]
    types: Vec<Vec<Complex64>>,
}

impl FactorSequence {
    /// Builds the sequence `p_{i+μn} = z − τ^μ(C_i)`; types are the base spectra.
    pub fn new(a0: CMatrix, base: Vec<CMatrix>, variant: Variant, tol: &Tolerances) -> Result<Self> {
        let types = base
            .iter()
            .map(linalg::eigenvalues)
            .collect::<Result<Vec<_>>>()?;
        Self::with_types(a0, base, types, variant, tol)
    }

    /// As [`new`](Self::new) with the base types supplied (and cross-checked).
    pub fn with_types(
        a0: CMatrix,
        base: Vec<CMatrix>,
        types: Vec<Vec<Complex64>>,
        variant: Variant,
        tol: &Tolerances,
    ) -> Result<Self> {
        if base.is_empty() {
            return Err(Error::input("a factor sequence needs at least one base factor"));
        }
        let m = a0.nrows();
        if base.iter().any(|b| b.shape() != (m, m)) || types.len() != base.len() {
            return Err(Error::Dimension("base factors must match A0 in size".into()));
        }
        let a0_inv = linalg::inverse_checked(&a0, 1.0 / tol.singular_leading, "A0")?;
        for (b, t) in base.iter().zip(&types) {
            let actual = linalg::eigenvalues(b)?;
            let gap = linalg::match_spectra(t, &actual, tol.spectrum_ambiguity)?;
            if gap > tol.spectrum_match * t.iter().map(|z| z.norm()).fold(1.0, f64::max) {
                return Err(Error::Inconsistent { what: "declared factor type".into(), residual: gap });
            }
        }
        SpectrumGroups::new(types.clone(), variant.congruence(), tol)?;
        Ok(FactorSequence { base, a0, a0_inv, variant, types })
    }

    pub fn n(&self) -> usize {
        self.base.len()
    }

    pub fn m(&self) -> usize {
        self.a0.nrows()
    }

    pub fn base(&self) -> &[CMatrix] {
        &self.base
    }

    pub fn a0(&self) -> &CMatrix {
        &self.a0
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn types(&self) -> &[Vec<Complex64>] {
        &self.types
    }

    /// `Q_k` for any `k ∈ ℤ` (1-based like the base `C_1..C_n`).
    pub fn factor(&self, k: i64) -> CMatrix {
        let n = self.n() as i64;
        let mu = (k - 1).div_euclid(n);
        let r = (k - 1).rem_euclid(n) as usize;
        self.variant.twist(&self.base[r], &self.a0, &self.a0_inv, mu)
    }

    /// Type of factor `k`.
    pub fn factor_type(&self, k: i64) -> Vec<Complex64> {
        let n = self.n() as i64;
        let mu = (k - 1).div_euclid(n);
        let r = (k - 1).rem_euclid(n) as usize;
        self.variant.shift_values(&self.types[r], -mu)
    }

    /// `A_0 (z − C_1)⋯(z − C_n)`.
    pub fn polynomial(&self) -> MatrixPolynomial {
        MatrixPolynomial::from_factors(&self.a0, &self.base)
    }

    fn normalize_index(&self, l: i64) -> usize {
        ((l - 1).rem_euclid(self.n() as i64) + 1) as usize
    }

    fn rebuild(&self, window_start: usize, window: Vec<CMatrix>, window_types: Vec<Vec<Complex64>>) -> Self {
        // `window` holds factors window_start..window_start+n−1 of the new sequence;
        // indices above n are brought back to the base period by τ^{-1}.
        let n = self.n();
        let mut base = vec![CMatrix::zeros(0, 0); n];
        let mut types = vec![Vec::new(); n];
        for (offset, (q, t)) in window.into_iter().zip(window_types).enumerate() {
            let k = window_start + offset;
            if k <= n {
                base[k - 1] = q;
                types[k - 1] = t;
            } else {
                base[k - n - 1] = self.variant.twist(&q, &self.a0, &self.a0_inv, -1);
                types[k - n - 1] = self.variant.shift_values(&t, 1);
            }
        }
        FactorSequence { base, a0: self.a0.clone(), a0_inv: self.a0_inv.clone(), variant: self.variant, types }
    }

    /// The flow `F_l`: `p_l p_{l+1}⋯p_{l+n−1} = q_{l+1}⋯q_{l+n}` with `q_{l+n}` of the type of `p_l`.
    pub fn flow(&self, l: i64, tol: &Tolerances) -> Result<Self> {
        let l = self.normalize_index(l);
        let n = self.n();
        let mut window: Vec<CMatrix> = (0..n).map(|o| self.factor((l + o) as i64)).collect();
        let mut types: Vec<Vec<Complex64>> = (0..n).map(|o| self.factor_type((l + o) as i64)).collect();
        for p in 0..n.saturating_sub(1) {
            let (s, t) = swap_adjacent(&window[p], &window[p + 1], tol)?;
            window[p] = s;
            window[p + 1] = t;
            types.swap(p, p + 1);
        }
        Ok(self.rebuild(l + 1, window, types))
    }

    /// The inverse of [`flow`](Self::flow): moves `q_{l+n}` back to the front.
    pub fn inverse_flow(&self, l: i64, tol: &Tolerances) -> Result<Self> {
        let l = self.normalize_index(l);
        let n = self.n();
        let mut window: Vec<CMatrix> = (1..=n).map(|o| self.factor((l + o) as i64)).collect();
        let mut types: Vec<Vec<Complex64>> = (1..=n).map(|o| self.factor_type((l + o) as i64)).collect();
        for p in (0..n.saturating_sub(1)).rev() {
            let (s, t) = swap_adjacent(&window[p], &window[p + 1], tol)?;
            window[p] = s;
            window[p + 1] = t;
            types.swap(p, p + 1);
        }
        Ok(self.rebuild(l, window, types))
    }

    /// Applies `F_l` (positive `count`) or `F_l^{-1}` (negative) `|count|` times.
    pub fn flow_power(&self, l: i64, count: i64, tol: &Tolerances) -> Result<Self> {
        let mut cur = self.clone();
        for _ in 0..count.unsigned_abs() {
            cur = if count > 0 { cur.flow(l, tol)? } else { cur.inverse_flow(l, tol)? };
        }
        Ok(cur)
    }

    /// Rearranges every period so that position `σ(i)` carries the type of position `i`.
    ///
    /// `sigma` is 0-based: `sigma[i] = σ(i)`.
    pub fn pi_action(&self, sigma: &[usize], tol: &Tolerances) -> Result<Self> {
        if sigma.len() != self.n() {
            return Err(Error::Dimension("permutation must act on the n base positions".into()));
        }
        check_permutation(sigma)?;
        // Position j receives type σ^{-1}(j).
        let mut inv = vec![0; sigma.len()];
        for (i, &s) in sigma.iter().enumerate() {
            inv[s] = i;
        }
        let by_type = permute_product(&self.base, &inv, tol)?;
        let mut base = vec![CMatrix::zeros(0, 0); self.n()];
        let mut types = vec![Vec::new(); self.n()];
        for (i, &s) in sigma.iter().enumerate() {
            base[s] = by_type[i].clone();
            types[s] = self.types[i].clone();
        }
        Ok(FactorSequence { base, a0: self.a0.clone(), a0_inv: self.a0_inv.clone(), variant: self.variant, types })
    }

    /// Monic product of factors `start..start+len−1`.
    pub fn window(&self, start: i64, len: usize) -> Vec<CMatrix> {
        (0..len as i64).map(|o| self.factor(start + o)).collect()
    }

    /// Largest mismatch between stored types and re-extracted spectra.
    pub fn type_drift(&self, tol: &Tolerances) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (b, t) in self.base.iter().zip(&self.types) {
            let actual = linalg::eigenvalues(b)?;
            worst = worst.max(linalg::match_spectra(t, &actual, tol.spectrum_ambiguity)?);
        }
        Ok(worst)
    }

    /// Entrywise distance to another sequence's base, relative to `max(1, ‖base‖)`.
    pub fn distance(&self, other: &Self) -> f64 {
        self.base
            .iter()
            .zip(&other.base)
            .map(|(a, b)| linalg::rel_diff(a, b))
            .fold(0.0, f64::max)
    }

    /// Conjugates every factor by the positive diagonal `D` that balances the
    /// off-diagonal row and column mass of `C_1, …, C_n` together.
    ///
    /// When `A_0` is diagonal, `D` commutes with it, so this is a symmetry of
    /// every variant: types, `det(A(z) − wI)` and the flows (up to the same
    /// conjugation) are unchanged. Long autonomous orbits drift along this
    /// non-compact direction; balancing keeps their entries bounded.
    pub fn balanced(&self) -> Result<(Self, Vec<f64>)> {
        let m = self.m();
        let off = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| self.a0[(i, j)].norm())
            .fold(0.0, f64::max);
        if off > 0.0 {
            return Err(Error::Unsupported("diagonal balancing needs a diagonal A0".into()));
        }
        let mut d = vec![1.0; m];
        let mut base = self.base.clone();
        // Osborne iteration on the stacked factors.
        for _ in 0..100 {
            let mut converged = true;
            for i in 0..m {
                let (mut row, mut col) = (0.0, 0.0);
                for b in &base {
                    for j in (0..m).filter(|&j| j != i) {
                        row += b[(i, j)].norm_sqr();
                        col += b[(j, i)].norm_sqr();
                    }
                }
                if row == 0.0 || col == 0.0 {
                    continue;
                }
                let f = (col / row).sqrt().sqrt();
                if (f - 1.0).abs() > 1e-3 {
                    converged = false;
                }
                d[i] *= f;
                for b in &mut base {
                    for j in 0..m {
                        b[(i, j)] *= f;
                        b[(j, i)] /= f;
                    }
                }
            }
            if converged {
                break;
            }
        }
        let out = FactorSequence { base, a0: self.a0.clone(), a0_inv: self.a0_inv.clone(), variant: self.variant, types: self.types.clone() };
        Ok((out, d))
    }
}

/// Residual of `q_i^j p_j = p_j^i q_i` with `p = F_{i+1}∘⋯∘F_j(q)`, for `0 < j − i < n`.
pub fn exchange_residual(q: &FactorSequence, i: i64, j: i64, tol: &Tolerances) -> Result<f64> {
    if !(0 < j - i && j - i < q.n() as i64) {
        return Err(Error::input(format!("exchange identity needs 0 < j − i < n, got i = {i}, j = {j}")));
    }
    let mut p = q.clone();
    for l in ((i + 1)..=j).rev() {
        p = p.flow(l, tol)?;
    }
    let lhs = [q.flow(j, tol)?.factor(i), p.factor(j)];
    let rhs = [p.flow(i, tol)?.factor(j), q.factor(i)];
    Ok(product_identity_residual(&lhs, &rhs))
}

/// Largest relative entry gap between `F_l∘F_{l+1}∘⋯∘F_{l+n−1}(p)` and the
/// shifted sequence `p_{k−n}`, over one period.
pub fn telescope_residual(p: &FactorSequence, l: i64, tol: &Tolerances) -> Result<f64> {
    let n = p.n() as i64;
    let mut cur = p.clone();
    for idx in (l..l + n).rev() {
        cur = cur.flow(idx, tol)?;
    }
    Ok((1..=n)
        .map(|k| linalg::rel_diff(&cur.factor(k), &p.factor(k - n)))
        .fold(0.0, f64::max))
}

/// Coefficients of the spectral curve `det(A(z) − wI) = Σ c_{ij} z^i w^j`.
///
/// Returned as a `(mn+1) × (m+1)` grid indexed `[i][j]`, interpolated from a
/// two-dimensional grid of samples on unit circles.
pub fn spectral_curve(a: &MatrixPolynomial) -> Vec<Vec<Complex64>> {
    let m = a.m();
    let nz = m * a.degree() + 1;
    let nw = m + 1;
    let mut samples = vec![vec![Complex64::new(0.0, 0.0); nw]; nz];
    for (p, row) in samples.iter_mut().enumerate() {
        let z = Complex64::from_polar(1.0, 2.0 * PI * p as f64 / nz as f64);
        let az = a.evaluate(z);
        for (q, s) in row.iter_mut().enumerate() {
            let w = Complex64::from_polar(1.0, 2.0 * PI * q as f64 / nw as f64);
            *s = (&az - linalg::scalar(m, w)).determinant();
        }
    }
    let mut out = vec![vec![Complex64::new(0.0, 0.0); nw]; nz];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (p, srow) in samples.iter().enumerate() {
                for (q, s) in srow.iter().enumerate() {
                    let angle = -2.0 * PI * (((i * p) % nz) as f64 / nz as f64 + ((j * q) % nw) as f64 / nw as f64);
                    acc += s * Complex64::from_polar(1.0, angle);
                }
            }
            *slot = acc / (nz * nw) as f64;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, real_matrix};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn scalar_exchange() {
        let x = real_matrix(1, &[0.0]);
        let y = real_matrix(1, &[1.0]);
        let lambda = sylvester(&x, &y, &tol()).unwrap();
        assert!((lambda[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        let (s, t) = swap_adjacent(&x, &y, &tol()).unwrap();
        assert!((s[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(t[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn commuting_diagonal_exchange() {
        let x = diag(&[c(1., 0.), c(2., 0.)]);
        let y = diag(&[c(5., 0.), c(6., 0.)]);
        for f in [swap_adjacent, swap_adjacent_2x2, swap_via_eigen] {
            let (s, t) = f(&x, &y, &tol()).unwrap();
            assert!((s - &y).norm() < 1e-12);
            assert!((t - &x).norm() < 1e-12);
        }
    }

    #[test]
    fn bubble_word_sorts() {
        assert!(bubble_word(&[0, 1, 2]).is_empty());
        assert_eq!(bubble_word(&[1, 0]), vec![0]);
        assert_eq!(bubble_word(&[2, 1, 0]).len(), 3);
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("difference".parse::<Variant>().unwrap(), Variant::Difference);
        assert_eq!("autonomous".parse::<Variant>().unwrap(), Variant::Autonomous);
        assert_eq!("q=0.7".parse::<Variant>().unwrap(), Variant::Q { q: c(0.7, 0.0) });
        assert!("q=1".parse::<Variant>().is_err());
        assert!("shift".parse::<Variant>().is_err());
        assert_eq!(Variant::Q { q: c(0.7, 0.0) }.to_string(), "q=0.7");
    }

    #[test]
    fn factor_indexing_follows_twist() {
        let a0 = diag(&[c(2., 0.), c(1., 0.)]);
        let base = vec![diag(&[c(0.1, 0.), c(0.3, 0.)]), diag(&[c(0.5, 0.2), c(0.7, 0.)])];
        let seq = FactorSequence::new(a0, base.clone(), Variant::Difference, &tol()).unwrap();
        assert_eq!(seq.factor(1), base[0]);
        let shifted = seq.factor(3);
        assert!((shifted - (&base[0] + identity(2))).norm() < 1e-15);
        let back = seq.factor(-1);
        assert!((back - (&base[0] - identity(2))).norm() < 1e-15);
    }

    #[test]
    fn single_factor_flow_is_twist() {
        let a0 = real_matrix(2, &[1., 1., 0., 2.]);
        let c1 = real_matrix(2, &[0.3, 1., 0.2, -0.4]);
        let seq = FactorSequence::new(a0.clone(), vec![c1.clone()], Variant::Difference, &tol()).unwrap();
        let next = seq.flow(1, &tol()).unwrap();
        let expect = a0.clone().try_inverse().unwrap() * &c1 * &a0 - identity(2);
        assert!((&next.base()[0] - expect).norm() < 1e-12);
        let back = next.inverse_flow(1, &tol()).unwrap();
        assert!((&back.base()[0] - c1).norm() < 1e-12);
    }
}
