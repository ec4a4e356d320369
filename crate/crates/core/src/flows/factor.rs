//! The `ℤ^n` flow in factor coordinates `A(z) = A_0(z − C_1(l))⋯(z − C_n(l))`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::lattice::LatticePoint;
use crate::linalg::{self, CMatrix};
use crate::matpoly::{MatrixPolynomial, SpectrumGroups};
use crate::refactor::{FactorSequence, Variant};
use crate::tolerance::Tolerances;

use super::divisor::{divisor_flow, DivisorState};

/// Factors `C_1(l), …, C_n(l)`; `groups` are the spectra at `l = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorState {
    #[serde(with = "io::matrix")]
    pub a0: CMatrix,
    #[serde(with = "io::matrix_list")]
    pub c: Vec<CMatrix>,
    pub groups: SpectrumGroups,
    pub l: LatticePoint,
    pub variant: Variant,
}

impl FactorState {
    pub fn new(a0: CMatrix, c: Vec<CMatrix>, groups: SpectrumGroups, variant: Variant, tol: &Tolerances) -> Result<Self> {
        let n = c.len();
        let state = FactorState { a0, c, groups, l: LatticePoint::zero(n), variant };
        state.validate(tol)?;
        Ok(state)
    }

    /// Factors of `a` with `Sp(C_i)` the `i`-th group.
    pub fn from_polynomial(a: &MatrixPolynomial, groups: SpectrumGroups, variant: Variant, tol: &Tolerances) -> Result<Self> {
        let c = a.factorize(&groups, tol)?;
        Self::new(a.leading().clone(), c, groups, variant, tol)
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let m = self.a0.nrows();
        if self.c.is_empty() || self.c.iter().any(|c| c.shape() != (m, m)) {
            return Err(Error::Dimension("factors must be nonempty and match A0 in size".into()));
        }
        if self.groups.groups.len() != self.c.len() || self.l.len() != self.c.len() {
            return Err(Error::Dimension("groups, factors and lattice point must have n entries".into()));
        }
        if self.groups.congruence != self.variant.congruence() {
            return Err(Error::input("eigenvalue groups were validated for a different variant"));
        }
        self.groups.validate(tol)?;
        self.sequence(tol).map(|_| ())
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn expected_spectrum(&self, i: usize) -> Vec<Complex64> {
        self.variant.shift_values(&self.groups.groups[i], self.l[i])
    }

    pub fn spectrum_error(&self, tol: &Tolerances) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, c) in self.c.iter().enumerate() {
            let actual = linalg::eigenvalues(c)?;
            worst = worst.max(linalg::match_spectra(&self.expected_spectrum(i), &actual, tol.spectrum_ambiguity)?);
        }
        Ok(worst)
    }

    /// The twisted bi-infinite sequence with base period `z − C_i(l)`.
    pub fn sequence(&self, tol: &Tolerances) -> Result<FactorSequence> {
        let types = (0..self.n()).map(|i| self.expected_spectrum(i)).collect();
        FactorSequence::with_types(self.a0.clone(), self.c.clone(), types, self.variant, tol)
    }

    /// `A_0(z − C_1(l))⋯(z − C_n(l))`.
    pub fn polynomial(&self) -> MatrixPolynomial {
        MatrixPolynomial::from_factors(&self.a0, &self.c)
    }

    fn with(&self, c: Vec<CMatrix>, l: LatticePoint) -> Self {
        FactorState { a0: self.a0.clone(), c, groups: self.groups.clone(), l, variant: self.variant }
    }
}

/// `C(target)` by applying `F_j^{target_j − l_j}` for `j = 1, …, n`.
pub fn factor_flow(state: &FactorState, target: &LatticePoint, tol: &Tolerances) -> Result<FactorState> {
    Ok(factor_trajectory(state, target, tol)?.pop().expect("trajectory holds the start"))
}

/// States after each single `F_j^{±1}`, starting with `state`.
pub fn factor_trajectory(state: &FactorState, target: &LatticePoint, tol: &Tolerances) -> Result<Vec<FactorState>> {
    let n = state.n();
    if target.len() != n {
        return Err(Error::Dimension(format!("target has {} coordinates, expected {n}", target.len())));
    }
    let mut seq = state.sequence(tol).map_err(|e| e.at(&state.l))?;
    let mut l = state.l.clone();
    let mut out = vec![state.clone()];
    for j in 0..n {
        while l[j] != target[j] {
            let up = target[j] > l[j];
            let next = if up { seq.flow(j as i64 + 1, tol) } else { seq.inverse_flow(j as i64 + 1, tol) };
            seq = next.map_err(|e| e.at(&l))?;
            l.0[j] += if up { 1 } else { -1 };
            out.push(state.with(seq.base().to_vec(), l.clone()));
        }
    }
    Ok(out)
}

/// `Σ_{j>i} e_j`.
fn tail(n: usize, i: usize) -> LatticePoint {
    LatticePoint((0..n).map(|j| i64::from(j > i)).collect())
}

/// `B_i(k) = C_i(k − Σ_{j>i} e_j)`, one factor flow per index.
pub fn b_from_c(state: &FactorState, k: &LatticePoint, tol: &Tolerances) -> Result<DivisorState> {
    let n = state.n();
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        let l = k - &tail(n, i);
        b.push(factor_flow(state, &l, tol)?.c[i].clone());
    }
    Ok(DivisorState { a0: state.a0.clone(), b, groups: state.groups.clone(), k: k.clone(), variant: state.variant })
}

/// `C_i(l) = B_i(l + Σ_{j>i} e_j)`, one divisor flow per index.
pub fn c_from_b(state: &DivisorState, l: &LatticePoint, tol: &Tolerances) -> Result<FactorState> {
    let n = state.n();
    let mut c = Vec::with_capacity(n);
    for i in 0..n {
        let k = l + &tail(n, i);
        c.push(divisor_flow(state, &k, tol)?.b[i].clone());
    }
    Ok(FactorState { a0: state.a0.clone(), c, groups: state.groups.clone(), l: l.clone(), variant: state.variant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, diag, identity};
    use crate::matpoly::Congruence;

    #[test]
    fn single_factor_flow_is_twist() {
        let t = Tolerances::default();
        let a0 = crate::linalg::real_matrix(2, &[2.0, 1.0, 0.0, 1.0]);
        let c1 = crate::linalg::real_matrix(2, &[0.3, 0.2, -0.1, 0.7]);
        let types = linalg::eigenvalues(&c1).unwrap();
        let groups = SpectrumGroups::unchecked(vec![types], Congruence::Additive);
        let s = FactorState::new(a0.clone(), vec![c1.clone()], groups, Variant::Difference, &t).unwrap();
        let out = factor_flow(&s, &LatticePoint(vec![1]), &t).unwrap();
        let expect = a0.clone().try_inverse().unwrap() * &c1 * &a0 - identity(2);
        assert!((&out.c[0] - expect).norm() < 1e-12);
    }

    #[test]
    fn index_rule_for_two_groups() {
        let t = Tolerances::default();
        let groups = SpectrumGroups::unchecked(
            vec![vec![c(0.1, 0.2), c(0.4, -0.3)], vec![c(-0.25, 0.05), c(0.33, 0.41)]],
            Congruence::Additive,
        );
        let cs = groups.groups.iter().map(|g| diag(g)).collect();
        let s = FactorState::new(diag(&[c(1.0, 0.0), c(0.0, 1.0)]), cs, groups, Variant::Difference, &t).unwrap();
        let b = b_from_c(&s, &LatticePoint::zero(2), &t).unwrap();
        let c01 = factor_flow(&s, &LatticePoint(vec![0, -1]), &t).unwrap();
        assert!((&b.b[0] - &c01.c[0]).norm() < 1e-14);
        assert!((&b.b[1] - &s.c[1]).norm() < 1e-14);
    }
}
