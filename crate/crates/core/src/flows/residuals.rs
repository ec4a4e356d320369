//! Residuals of the lattice equations on computed data.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Result;
use crate::lattice::LatticePoint;
use crate::linalg::{self, CMatrix};
use crate::refactor::{product_identity_residual, Variant};
use crate::tolerance::Tolerances;

use super::factor::FactorState;

/// Largest residual of one equation and the number of instances checked.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Residual {
    pub max: f64,
    pub count: usize,
}

impl Residual {
    fn record(&mut self, r: f64) {
        self.max = if r.is_nan() { f64::INFINITY } else { self.max.max(r) };
        self.count += 1;
    }

    pub fn within(&self, bound: f64) -> bool {
        self.max <= bound
    }
}

/// Residuals of the divisor-coordinate equations, each normalized by the
/// size of the matrices involved.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ResidualReport {
    /// `B_i(k) − B_i(k+e_j) = B_j(k) − B_j(k+e_i)`.
    pub sum_rule: Residual,
    /// `B_j(k+e_i) B_i(k) = B_i(k+e_j) B_j(k)`.
    pub product_rule: Residual,
    /// `B_i(k+1) = τ^{-1}(B_i(k))` for the variant's twist `τ`.
    pub twist_rule: Residual,
    /// `(z − B_i(k+e_j))(z − B_j(k)) = (z − B_j(k+e_i))(z − B_i(k))`.
    pub exchange_rule: Residual,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        [self.sum_rule, self.product_rule, self.twist_rule, self.exchange_rule]
            .iter()
            .map(|r| r.max)
            .fold(0.0, f64::max)
    }
}

fn scale(ms: &[&CMatrix]) -> f64 {
    ms.iter().map(|m| m.norm()).fold(1.0, f64::max)
}

/// Checks every instance of the equations whose lattice points are all in `data`.
pub fn check_residuals(
    data: &BTreeMap<LatticePoint, Vec<CMatrix>>,
    a0: &CMatrix,
    variant: Variant,
    tol: &Tolerances,
) -> Result<ResidualReport> {
    let a0_inv = linalg::inverse_checked(a0, 1.0 / tol.singular_leading, "A0")?;
    let mut report = ResidualReport::default();
    for (k, b) in data {
        let n = k.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let (Some(bi_up), Some(bj_up)) = (data.get(&(k + &LatticePoint::unit(n, i))), data.get(&(k + &LatticePoint::unit(n, j))))
                else {
                    continue;
                };
                // bi_up holds B(k + e_i), bj_up holds B(k + e_j).
                let (bik, bjk) = (&b[i], &b[j]);
                let (bi_j, bj_i) = (&bj_up[i], &bi_up[j]);
                let s = scale(&[bik, bjk, bi_j, bj_i]);
                report.sum_rule.record((bik - bi_j - bjk + bj_i).norm() / s);
                report.product_rule.record((bj_i * bik - bi_j * bjk).norm() / (s * s));
                report.exchange_rule.record(product_identity_residual(
                    &[bi_j.clone(), bjk.clone()],
                    &[bj_i.clone(), bik.clone()],
                ));
            }
        }
        if let Some(diag) = data.get(&(k + &LatticePoint::ones(n))) {
            for (bk, bd) in b.iter().zip(diag) {
                let expect = variant.twist(bk, a0, &a0_inv, -1);
                report.twist_rule.record((bd - &expect).norm() / scale(&[bd, &expect]));
            }
        }
    }
    Ok(report)
}

/// Window identity for one `F_j`: `p_j ⋯ p_{j+n−1} = p̃_{j+1} ⋯ p̃_{j+n}`.
///
/// `after` must sit at `before.l + e_j`.
pub fn factor_step_residual(before: &FactorState, after: &FactorState, j: usize, tol: &Tolerances) -> Result<f64> {
    let n = before.n();
    let old = before.sequence(tol)?;
    let new = after.sequence(tol)?;
    let start = j as i64 + 1;
    Ok(product_identity_residual(&old.window(start, n), &new.window(start + 1, n)))
}

/// Largest window residual along a trajectory of unit factor moves.
pub fn factor_trajectory_residual(path: &[FactorState], tol: &Tolerances) -> Result<Residual> {
    let mut out = Residual::default();
    for pair in path.windows(2) {
        let d = &pair[1].l - &pair[0].l;
        let Some(j) = (0..d.len()).find(|&j| d[j] != 0) else { continue };
        let r = if d[j] > 0 {
            factor_step_residual(&pair[0], &pair[1], j, tol)?
        } else {
            factor_step_residual(&pair[1], &pair[0], j, tol)?
        };
        out.record(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::divisor::{divisor_block, DivisorState};
    use crate::linalg::{c, diag};
    use crate::matpoly::{Congruence, SpectrumGroups};

    #[test]
    fn decoupled_block_is_exact() {
        let t = Tolerances::default();
        let groups = SpectrumGroups::unchecked(
            vec![vec![c(0.1, 0.2), c(0.4, -0.3)], vec![c(-0.25, 0.05), c(0.33, 0.41)]],
            Congruence::Additive,
        );
        let b = groups.groups.iter().map(|g| diag(g)).collect();
        let a0 = diag(&[c(1.0, 0.0), c(0.0, 1.0)]);
        let s = DivisorState::new(a0.clone(), b, groups, Variant::Difference, &t).unwrap();
        let block = divisor_block(&s, 1, &t).unwrap();
        assert_eq!(block.len(), 9);
        let rep = check_residuals(&block, &a0, Variant::Difference, &t).unwrap();
        assert!(rep.max() < 1e-12, "{rep:?}");
        assert!(rep.twist_rule.count > 0 && rep.sum_rule.count > 0);
    }
}
