//! Rational multipliers `R(z)` and the elementary gauge moves
//! `A(z) ↦ R(z+1) A(z) R^{-1}(z)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, identity, unit, CMatrix, CVector, ONE};
use crate::matpoly::MatrixPolynomial;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplierKind {
    /// `z − B`.
    Divisor,
    /// `E_i(z − a) + R_0`; root `a ↦ a − 1`, `d_i ↦ d_i + 1`.
    ElementaryDown,
    /// Transposed inverse of the down form; root `a ↦ a + 1`, `d_i ↦ d_i − 1`.
    ElementaryUp,
    /// `I + R_0/(z − a_j − 1)`; `a_i ↦ a_i − 1`, `a_j ↦ a_j + 1`.
    PairedRoots,
    /// `E_i z + R_0`; `d_i ↦ d_i + 1`, `d_j ↦ d_j − 1`.
    PairedExponents,
}

/// `R(z) = N(z)/(z − pole)` (or `N(z)` without a pole) with a closed-form inverse
/// of the same shape and `det R(z) = Π(z − zeros)/Π(z − poles)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Multiplier {
    pub kind: MultiplierKind,
    numerator: MatrixPolynomial,
    pole: Option<Complex64>,
    inverse: Option<(MatrixPolynomial, Option<Complex64>)>,
    pub det_zeros: Vec<Complex64>,
    pub det_poles: Vec<Complex64>,
    /// The constant block `R_0` of the closed form; for up moves the block
    /// `R_0'` of the transposed elementary multiplier.
    pub r0: CMatrix,
    /// `R_1` (resp. `R_1'`) of the elementary forms, `R_0^{-1}` for paired exponents.
    pub r1: Option<CMatrix>,
}

impl Multiplier {
    pub fn divisor(b: &CMatrix, spectrum: Vec<Complex64>) -> Self {
        let m = b.nrows();
        Multiplier {
            kind: MultiplierKind::Divisor,
            numerator: MatrixPolynomial::linear(&identity(m), b),
            pole: None,
            inverse: None,
            det_zeros: spectrum,
            det_poles: Vec::new(),
            r0: -b,
            r1: None,
        }
    }

    pub fn numerator(&self) -> &MatrixPolynomial {
        &self.numerator
    }

    pub fn pole(&self) -> Option<Complex64> {
        self.pole
    }

    pub fn evaluate(&self, z: Complex64) -> CMatrix {
        let n = self.numerator.evaluate(z);
        match self.pole {
            Some(p) => n / (z - p),
            None => n,
        }
    }

    /// Closed-form inverse where available, a dense inverse otherwise.
    pub fn evaluate_inverse(&self, z: Complex64) -> Option<CMatrix> {
        match &self.inverse {
            Some((num, pole)) => {
                let n = num.evaluate(z);
                Some(match pole {
                    Some(p) => n / (z - p),
                    None => n,
                })
            }
            None => self.evaluate(z).try_inverse(),
        }
    }

    pub fn det_formula(&self, z: Complex64) -> Complex64 {
        let num: Complex64 = self.det_zeros.iter().map(|a| z - a).product();
        let den: Complex64 = self.det_poles.iter().map(|a| z - a).product();
        num / den
    }

    /// Largest `‖R(z)R^{-1}(z) − I‖_F` over the given points.
    pub fn inverse_residual(&self, points: &[Complex64]) -> f64 {
        let m = self.numerator.m();
        points
            .iter()
            .map(|&z| match self.evaluate_inverse(z) {
                Some(inv) => (self.evaluate(z) * inv - identity(m)).norm(),
                None => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }

    /// Largest relative mismatch between `det R(z)` and the recorded formula.
    pub fn det_residual(&self, points: &[Complex64]) -> f64 {
        points
            .iter()
            .map(|&z| {
                let f = self.det_formula(z);
                (self.evaluate(z).determinant() - f).norm() / f.norm().max(1e-300)
            })
            .fold(0.0, f64::max)
    }
}

/// A composition `R_k(z)⋯R_1(z)` of multipliers, the latest on the left.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MultiplierChain {
    pub steps: Vec<Multiplier>,
}

impl MultiplierChain {
    pub fn push(&mut self, r: Multiplier) {
        self.steps.push(r);
    }

    pub fn evaluate(&self, z: Complex64, m: usize) -> CMatrix {
        self.steps.iter().fold(identity(m), |acc, r| r.evaluate(z) * acc)
    }

    /// The product as a matrix polynomial, when it is one.
    ///
    /// Numerators are multiplied out, each pole is divided away (its remainder
    /// must vanish) and vanishing leading coefficients are dropped.
    pub fn polynomial(&self, m: usize, tol: &Tolerances) -> Result<MatrixPolynomial> {
        let mut num = MatrixPolynomial::constant(identity(m));
        let mut poles = Vec::new();
        for r in &self.steps {
            num = r.numerator.mul(&num);
            if let Some(p) = r.pole {
                poles.push(p);
            }
        }
        for p in poles {
            let (q, rem) = num.divide_right(&linalg::scalar(m, p));
            let rel = rem.norm() / num.norm().max(1.0);
            if rel > tol.remainder {
                return Err(Error::Inconsistent { what: "composite multiplier is not polynomial".into(), residual: rel });
            }
            num = q;
        }
        let scale = num.norm().max(1.0);
        let mut lead = 0;
        while lead < num.degree() && num.coeff(lead).norm() <= tol.remainder * scale {
            lead += 1;
        }
        Ok(num.truncate_leading(lead).0)
    }
}

/// `R_0` and `R_1` of the elementary multiplier `R(z) = E_i(z − a) + R_0`,
/// `R^{-1}(z) = I − E_i + R_1/(z − a)`, normalized by `Q` at infinity with `R_0 v = 0`.
pub fn elementary_blocks(v: &CVector, q: &CMatrix, i: usize) -> (CMatrix, CMatrix) {
    let m = v.len();
    let vi = v[i];
    let mut r0 = CMatrix::zeros(m, m);
    for k in 0..m {
        for l in 0..m {
            r0[(k, l)] = match (k == i, l == i) {
                (true, true) => (0..m).filter(|&s| s != i).map(|s| q[(i, s)] * v[s]).sum::<Complex64>() / vi,
                (true, false) => -q[(i, l)],
                (false, true) => -v[k] / vi,
                (false, false) => {
                    if k == l {
                        ONE
                    } else {
                        c(0.0, 0.0)
                    }
                }
            };
        }
    }
    let row = CMatrix::from_fn(1, m, |_, l| if l == i { ONE } else { q[(i, l)] });
    let col = CMatrix::from_column_slice(m, 1, v.as_slice());
    let r1 = col * row / vi;
    (r0, r1)
}

fn check_pivot(value: Complex64, tol: &Tolerances, what: &str) -> Result<()> {
    if value.norm() <= tol.pivot {
        return Err(Error::genericity(format!("{what} vanishes ({:.3e})", value.norm())));
    }
    Ok(())
}

fn check_row(a: &MatrixPolynomial, i: usize) -> Result<()> {
    if i >= a.m() {
        return Err(Error::input(format!("row index {} out of range 1..={}", i + 1, a.m())));
    }
    Ok(())
}

/// Divides a matrix polynomial by the scalar `z − a`, requiring a vanishing remainder.
fn divide_scalar(p: &MatrixPolynomial, a: Complex64, tol: &Tolerances, what: &str) -> Result<MatrixPolynomial> {
    let (q, rem) = p.divide_right(&linalg::scalar(p.m(), a));
    let rel = rem.norm() / p.norm().max(1.0);
    if rel > tol.remainder {
        return Err(Error::Inconsistent { what: format!("{what}: division remainder"), residual: rel });
    }
    Ok(q)
}

/// Drops `count` leading coefficients that must cancel and checks `Ã_0 = A_0`.
fn finish(full: MatrixPolynomial, count: usize, a: &MatrixPolynomial, tol: &Tolerances, what: &str) -> Result<MatrixPolynomial> {
    let (out, dropped) = full.truncate_leading(count);
    if dropped > tol.remainder {
        return Err(Error::Inconsistent { what: format!("{what}: leading terms do not cancel"), residual: dropped });
    }
    let lead = (out.leading() - a.leading()).norm() / a.leading().norm().max(1.0);
    if lead > tol.remainder {
        return Err(Error::Inconsistent { what: format!("{what}: leading coefficient changed"), residual: lead });
    }
    Ok(out)
}

/// Root `a ↦ a − 1`, exponent `d_i ↦ d_i + 1` (0-based `i`).
pub fn elementary_down(a: &MatrixPolynomial, root: Complex64, i: usize, tol: &Tolerances) -> Result<(Multiplier, MatrixPolynomial)> {
    check_row(a, i)?;
    let m = a.m();
    let v = a.pencil_eigenvector(root, tol)?;
    check_pivot(v[i], tol, &format!("coordinate {} of the kernel vector at {root}", i + 1))?;
    let fs = a.formal_series(1, tol)?;
    let (r0, r1) = elementary_blocks(&v, &fs.yhat[0], i);
    let ei = unit(m, i);
    let id = identity(m);
    // A R^{-1} = A (I − E_i) + (A R_1)/(z − a), polynomial because A(a) v = 0.
    let p = a.scale_right(&(&id - &ei)).add(&divide_scalar(&a.scale_right(&r1), root, tol, "A R_1")?);
    let r_next = MatrixPolynomial::new(vec![ei.clone(), &ei * (ONE - root) + &r0])?;
    let out = finish(r_next.mul(&p), 1, a, tol, "elementary down move")?;
    let r = Multiplier {
        kind: MultiplierKind::ElementaryDown,
        numerator: MatrixPolynomial::new(vec![ei.clone(), &r0 - &ei * root])?,
        pole: None,
        inverse: Some((MatrixPolynomial::new(vec![&id - &ei, &r1 - (&id - &ei) * root])?, Some(root))),
        det_zeros: vec![root],
        det_poles: Vec::new(),
        r0,
        r1: Some(r1),
    };
    Ok((r, out))
}

/// Root `a ↦ a + 1`, exponent `d_i ↦ d_i − 1` (0-based `i`).
///
/// `R(z) = R'^{-t}(z − 1)` where `R'` is the elementary multiplier built from the
/// left kernel vector `w` of `A(a)` and `Q = −Ŷ_1ᵗ`.
pub fn elementary_up(a: &MatrixPolynomial, root: Complex64, i: usize, tol: &Tolerances) -> Result<(Multiplier, MatrixPolynomial)> {
    check_row(a, i)?;
    let m = a.m();
    let w = a.left_kernel_vector(root, tol)?;
    check_pivot(w[i], tol, &format!("coordinate {} of the left kernel vector at {root}", i + 1))?;
    let fs = a.formal_series(1, tol)?;
    let q = -fs.yhat[0].transpose();
    let (r0p, r1p) = elementary_blocks(&w, &q, i);
    let (r0t, r1t) = (r0p.transpose(), r1p.transpose());
    let ei = unit(m, i);
    let id = identity(m);
    let shifted = root + 1.0;
    // R(z+1) A(z) = (I − E_i) A(z) + R_1'ᵗ A(z)/(z − a), polynomial because wᵗA(a) = 0.
    let left = a.scale_left(&(&id - &ei)).add(&divide_scalar(&a.scale_left(&r1t), root, tol, "R_1' A")?);
    let r_inv = MatrixPolynomial::new(vec![ei.clone(), &r0t - &ei * shifted])?;
    let out = finish(left.mul(&r_inv), 1, a, tol, "elementary up move")?;
    let r = Multiplier {
        kind: MultiplierKind::ElementaryUp,
        numerator: MatrixPolynomial::new(vec![&id - &ei, &r1t - (&id - &ei) * shifted])?,
        pole: Some(shifted),
        inverse: Some((r_inv, None)),
        det_zeros: Vec::new(),
        det_poles: vec![shifted],
        r0: r0p,
        r1: Some(r1p),
    };
    Ok((r, out))
}

/// Roots `a_down ↦ a_down − 1` and `a_up ↦ a_up + 1`, exponents fixed.
///
/// `R(z) = I + R_0/(z − a_up − 1)` with `R_0 = (a_up − a_down + 1)/(v,w) · v wᵗ`.
pub fn elementary_pair_roots(
    a: &MatrixPolynomial,
    a_down: Complex64,
    a_up: Complex64,
    tol: &Tolerances,
) -> Result<(Multiplier, MatrixPolynomial)> {
    let m = a.m();
    let v = a.pencil_eigenvector(a_down, tol)?;
    let w = a.left_kernel_vector(a_up, tol)?;
    let vw = v.transpose() * &w;
    let vw = vw[(0, 0)];
    check_pivot(vw, tol, "the pairing (v, w) of the two kernel vectors")?;
    let coef = (a_up - a_down + 1.0) / vw;
    let r0 = (&v * w.transpose()) * coef;
    // Ã = A − (A R_0)/(z − a_down) + (R_0 A)/(z − a_up) − R_0 [(A R_0)/(z − a_down)]/(z − a_up)
    let x = divide_scalar(&a.scale_right(&r0), a_down, tol, "A R_0")?;
    let y = divide_scalar(&a.scale_left(&r0), a_up, tol, "R_0 A")?;
    let z = divide_scalar(&x.scale_left(&r0), a_up, tol, "R_0 A R_0")?;
    let neg = |p: &MatrixPolynomial| p.scale_left(&(-identity(m)));
    let out = a.add(&neg(&x)).add(&y).add(&neg(&z));
    let out = finish(out, 0, a, tol, "paired root move")?;
    let id = identity(m);
    let r = Multiplier {
        kind: MultiplierKind::PairedRoots,
        numerator: MatrixPolynomial::new(vec![id.clone(), &r0 - &id * (a_up + 1.0)])?,
        pole: Some(a_up + 1.0),
        inverse: Some((MatrixPolynomial::new(vec![id.clone(), -&r0 - &id * a_down])?, Some(a_down))),
        det_zeros: vec![a_down],
        det_poles: vec![a_up + 1.0],
        r0,
        r1: None,
    };
    Ok((r, out))
}

/// Exponents `d_i ↦ d_i + 1`, `d_j ↦ d_j − 1`, roots fixed; `det R ≡ 1`.
pub fn elementary_pair_exponents(a: &MatrixPolynomial, i: usize, j: usize, tol: &Tolerances) -> Result<(Multiplier, MatrixPolynomial)> {
    check_row(a, i)?;
    check_row(a, j)?;
    if i == j {
        return Err(Error::input("paired exponent move needs two different indices"));
    }
    let m = a.m();
    let fs = a.formal_series(2, tol)?;
    let (y1, y2) = (&fs.yhat[0], &fs.yhat[1]);
    let p = y1[(i, j)];
    check_pivot(p, tol, &format!("(Ŷ_1)_{{{}{}}}", i + 1, j + 1))?;
    let mut r0 = CMatrix::zeros(m, m);
    let mut r0_inv = CMatrix::zeros(m, m);
    let corner: Complex64 = -y2[(i, j)] + (0..m).filter(|&s| s != i).map(|s| y1[(i, s)] * y1[(s, j)]).sum::<Complex64>();
    for l in 0..m {
        r0[(i, l)] = if l == i { corner / p } else { -y1[(i, l)] };
    }
    r0[(j, i)] = ONE / p;
    r0_inv[(i, j)] = p;
    r0_inv[(j, i)] = -ONE / p;
    r0_inv[(j, j)] = -y2[(i, j)] / p + y1[(j, j)];
    for l in 0..m {
        if l != i && l != j {
            r0_inv[(j, l)] = -y1[(i, l)] / p;
        }
    }
    for k in 0..m {
        if k == i || k == j {
            continue;
        }
        r0[(k, i)] = -y1[(k, j)] / p;
        r0_inv[(k, j)] = y1[(k, j)];
        for l in 0..m {
            if l != i && l != j && k == l {
                r0[(k, l)] = ONE;
                r0_inv[(k, l)] = ONE;
            }
        }
    }
    let ei = unit(m, i);
    let ej = unit(m, j);
    let r_next = MatrixPolynomial::new(vec![ei.clone(), &ei + &r0])?;
    let r_inv = MatrixPolynomial::new(vec![ej, r0_inv.clone()])?;
    let out = finish(r_next.mul(a).mul(&r_inv), 2, a, tol, "paired exponent move")?;
    let r = Multiplier {
        kind: MultiplierKind::PairedExponents,
        numerator: MatrixPolynomial::new(vec![ei, r0.clone()])?,
        pole: None,
        inverse: Some((r_inv, None)),
        det_zeros: Vec::new(),
        det_poles: Vec::new(),
        r0,
        r1: Some(r0_inv),
    };
    Ok((r, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::diag;

    #[test]
    fn decoupled_down_move() {
        let t = Tolerances::default();
        let (a, b) = (c(0.3, 0.1), c(-0.4, 0.7));
        let poly = MatrixPolynomial::new(vec![diag(&[ONE, c(0.5, 0.5)]), -diag(&[a, b * c(0.5, 0.5)])]).unwrap();
        let (r, out) = elementary_down(&poly, a, 0, &t).unwrap();
        let expect = MatrixPolynomial::new(vec![diag(&[ONE, c(0.5, 0.5)]), -diag(&[a - 1.0, b * c(0.5, 0.5)])]).unwrap();
        assert!(out.rel_distance(&expect) < 1e-12);
        let z = c(0.9, -0.2);
        assert!((r.evaluate(z) - diag(&[z - a, ONE])).norm() < 1e-12);
    }

    #[test]
    fn elementary_blocks_invert() {
        let v = CVector::from_vec(vec![c(0.5, 0.1), c(1.0, 0.0), c(-0.3, 0.2)]);
        let q = CMatrix::from_fn(3, 3, |k, l| c(0.1 * k as f64 - 0.2 * l as f64, 0.05 * (k + l) as f64));
        let (r0, r1) = elementary_blocks(&v, &q, 1);
        assert!((&r0 * &v).norm() < 1e-14);
        let a = c(0.2, 0.0);
        let z = c(1.7, 0.4);
        let e = unit(3, 1);
        let r = &e * (z - a) + &r0;
        let rinv = identity(3) - &e + &r1 / (z - a);
        assert!((r * rinv - identity(3)).norm() < 1e-13);
    }
}
