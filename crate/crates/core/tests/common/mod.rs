//! Independent oracles shared by the integration suites.
//!
//! Nothing here calls into the algorithms under test except for building inputs.

#![allow(dead_code)]

use isomono::linalg::{c, identity, CMatrix, ONE, ZERO};
use isomono::{Complex64, MatrixPolynomial};

/// Determinant by cofactor expansion along the first row.
pub fn cofactor_det(a: &CMatrix) -> Complex64 {
    let m = a.nrows();
    match m {
        0 => ONE,
        1 => a[(0, 0)],
        _ => (0..m)
            .map(|j| {
                let minor = a.clone().remove_row(0).remove_column(j);
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                a[(0, j)] * cofactor_det(&minor) * sign
            })
            .sum(),
    }
}

/// Ascending coefficients of a polynomial product.
fn poly_mul(p: &[Complex64], q: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

fn poly_add(p: &[Complex64], q: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; p.len().max(q.len())];
    for (i, a) in p.iter().enumerate() {
        out[i] += a;
    }
    for (i, b) in q.iter().enumerate() {
        out[i] += b;
    }
    out
}

/// Descending coefficients of `det A(z)` by symbolic cofactor expansion over
/// polynomial entries.
pub fn symbolic_det(a: &MatrixPolynomial) -> Vec<Complex64> {
    let m = a.m();
    let n = a.degree();
    // entries[i][j] = ascending coefficients of A(z)_{ij}
    let entries: Vec<Vec<Vec<Complex64>>> = (0..m)
        .map(|i| (0..m).map(|j| (0..=n).map(|k| a.coeff(n - k)[(i, j)]).collect()).collect())
        .collect();
    fn det(e: &[Vec<Vec<Complex64>>], rows: &[usize], cols: &[usize]) -> Vec<Complex64> {
        if rows.len() == 1 {
            return e[rows[0]][cols[0]].clone();
        }
        let mut acc = vec![ZERO];
        for (jj, &j) in cols.iter().enumerate() {
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != j).collect();
            let mut term = poly_mul(&e[rows[0]][j], &det(e, &rows[1..], &rest));
            if jj % 2 == 1 {
                term.iter_mut().for_each(|t| *t = -*t);
            }
            acc = poly_add(&acc, &term);
        }
        acc
    }
    let idx: Vec<usize> = (0..m).collect();
    let mut asc = det(&entries, &idx, &idx);
    asc.resize(m * n + 1, ZERO);
    asc.reverse();
    asc
}

/// Roots of a scalar polynomial (descending coefficients) by Durand–Kerner.
pub fn durand_kerner(desc: &[Complex64]) -> Vec<Complex64> {
    let lead = desc[0];
    let monic: Vec<Complex64> = desc.iter().map(|x| x / lead).collect();
    let deg = monic.len() - 1;
    let eval = |z: Complex64| monic.iter().fold(ZERO, |acc, &a| acc * z + a);
    let bound = 1.0 + monic[1..].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let seed = c(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32) * bound).collect();
    for _ in 0..2000 {
        let mut moved: f64 = 0.0;
        for i in 0..deg {
            let mut den = ONE;
            for j in 0..deg {
                if i != j {
                    den *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / den;
            roots[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 * bound {
            break;
        }
    }
    // Newton polish on the original polynomial.
    let d_eval = |z: Complex64| {
        monic
            .iter()
            .enumerate()
            .take(deg)
            .fold(ZERO, |acc, (k, &a)| acc * z + a * (deg - k) as f64)
    };
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let d = d_eval(*r);
            if d.norm() > 0.0 {
                *r -= eval(*r) / d;
            }
        }
    }
    roots
}

/// Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one_way = |x: &[Complex64], y: &[Complex64]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// `log Γ(z+1) − log Γ(z)` expansions are avoided: for real `z` and complex `d`,
/// `(1 + 1/z)^d − 1` computed as `expm1(d · ln1p(1/z))` without cancellation.
pub fn pow_ratio_minus_one(z: f64, d: Complex64) -> Complex64 {
    let w = 1.0 / z;
    let l = d * w.ln_1p();
    // expm1 for complex argument: e^l − 1 = expm1(re)·cis(im) + (cis(im) − 1)
    let cis = Complex64::from_polar(1.0, l.im);
    let cis_m1 = c(-2.0 * (l.im / 2.0).sin().powi(2), l.im.sin());
    c(l.re.exp_m1(), 0.0) * cis + cis_m1
}

/// Residual of the formal identity `Ŷ(z+1) Λ(z) = z^{−n} A(z) Ŷ(z)` for the
/// degree-0 reduction, where `Λ(z) = diag(ρ_i (1 + 1/z)^{d_i})` and `Ŷ` is
/// truncated after `yhat.len()` terms.
///
/// The identity is rearranged so that the leading `O(1)` parts cancel
/// analytically: with `Ŷ = I + E(z)`, `Λ = A_0 + L(z)`, `M(z) = z^{−n}A(z) − A_0`,
/// the residual is `E(z+1)A_0 + L + E(z+1)L − M − M E(z) − A_0 E(z)`.
pub fn formal_residual(a: &MatrixPolynomial, rho: &[Complex64], d: &[Complex64], yhat: &[CMatrix], z: f64) -> f64 {
    let m = a.m();
    let e_at = |t: f64| {
        let mut acc = CMatrix::zeros(m, m);
        for (k, y) in yhat.iter().enumerate() {
            acc += y * c(t.powi(-(k as i32 + 1)), 0.0);
        }
        acc
    };
    let a0 = CMatrix::from_diagonal(&isomono::CVector::from_column_slice(rho));
    let l = CMatrix::from_diagonal(&isomono::CVector::from_iterator(
        m,
        (0..m).map(|i| rho[i] * pow_ratio_minus_one(z, d[i])),
    ));
    let mut mz = CMatrix::zeros(m, m);
    for k in 1..=a.degree() {
        mz += a.coeff(k) * c(z.powi(-(k as i32)), 0.0);
    }
    let e0 = e_at(z);
    let e1 = e_at(z + 1.0);
    let r = &e1 * &a0 + &l + &e1 * &l - &mz - &mz * &e0 - &a0 * &e0;
    r.norm()
}

pub fn max_entry_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn ident(m: usize) -> CMatrix {
    identity(m)
}
