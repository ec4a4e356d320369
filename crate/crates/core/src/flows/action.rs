//! The lattice action on `(roots, exponents)` as a composition of elementary moves.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::matpoly::{MatrixPolynomial, SpectrumGroups};
use crate::tolerance::Tolerances;

use super::multiplier::{elementary_down, elementary_up, MultiplierChain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "move", rename_all = "snake_case")]
pub enum Move {
    /// Root `r ↦ r − 1`, exponent `d_row ↦ d_row + 1`.
    Down { root: usize, row: usize },
    /// Root `r ↦ r + 1`, exponent `d_row ↦ d_row − 1`.
    Up { root: usize, row: usize },
}

/// Which elementary decomposition [`plan_moves`] produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MoveOrder {
    /// Roots in increasing order, rows chosen from the front.
    #[default]
    Forward,
    /// Roots in decreasing order, rows chosen from the back, leftover exponent
    /// moves raised before they are lowered.
    Reverse,
}

fn check_balance(kappa: &[i64], delta: &[i64], mn: usize, m: usize) -> Result<()> {
    if kappa.len() != mn {
        return Err(Error::input(format!("kappa needs {mn} entries, got {}", kappa.len())));
    }
    if delta.len() != m {
        return Err(Error::input(format!("delta needs {m} entries, got {}", delta.len())));
    }
    let total: i64 = kappa.iter().sum::<i64>() + delta.iter().sum::<i64>();
    if total != 0 {
        return Err(Error::input(format!("sum of kappa and delta must vanish, got {total}")));
    }
    Ok(())
}

fn pick(remaining: &[i64], best: impl Fn(i64, i64) -> bool, reverse: bool) -> usize {
    let mut order: Vec<usize> = (0..remaining.len()).collect();
    if reverse {
        order.reverse();
    }
    let mut chosen = order[0];
    for &r in &order[1..] {
        if best(remaining[r], remaining[chosen]) {
            chosen = r;
        }
    }
    chosen
}

/// A sequence of elementary moves realizing `(κ, δ)`.
///
/// Each negative `κ_r` is spent on down moves whose rows take the largest
/// outstanding `δ`, each positive `κ_r` on up moves with the smallest; what is
/// left of `δ` (it sums to zero) is settled by down/up pairs on the first root.
pub fn plan_moves(kappa: &[i64], delta: &[i64], order: MoveOrder) -> Vec<Move> {
    let reverse = order == MoveOrder::Reverse;
    let mut remaining = delta.to_vec();
    let mut moves = Vec::new();
    let mut roots: Vec<usize> = (0..kappa.len()).collect();
    if reverse {
        roots.reverse();
    }
    for &r in &roots {
        for _ in 0..kappa[r].unsigned_abs() {
            if kappa[r] < 0 {
                let row = pick(&remaining, |a, b| a > b, reverse);
                remaining[row] -= 1;
                moves.push(Move::Down { root: r, row });
            } else {
                let row = pick(&remaining, |a, b| a < b, reverse);
                remaining[row] += 1;
                moves.push(Move::Up { root: r, row });
            }
        }
    }
    let anchor = roots.first().copied().unwrap_or(0);
    while remaining.iter().any(|&d| d != 0) {
        let hi = pick(&remaining, |a, b| a > b, reverse);
        let lo = pick(&remaining, |a, b| a < b, reverse);
        remaining[hi] -= 1;
        remaining[lo] += 1;
        let down = Move::Down { root: anchor, row: hi };
        let up = Move::Up { root: anchor, row: lo };
        if reverse {
            moves.push(up);
            moves.push(down);
        } else {
            moves.push(down);
            moves.push(up);
        }
    }
    moves
}

/// `κ` over the sorted `roots` that shifts every value of group `i` by `−k_i`
/// (the lattice direction convention of the divisor flows).
pub fn group_kappa(roots: &[Complex64], groups: &SpectrumGroups, k: &[i64], tol: &Tolerances) -> Result<Vec<i64>> {
    if k.len() != groups.groups.len() {
        return Err(Error::Dimension(format!("{} group shifts for {} groups", k.len(), groups.groups.len())));
    }
    let mut kappa = vec![0; roots.len()];
    let mut used = vec![false; roots.len()];
    for (g, &shift) in groups.groups.iter().zip(k) {
        for a in g {
            let (best, dist) = roots
                .iter()
                .enumerate()
                .filter(|(r, _)| !used[*r])
                .map(|(r, b)| (r, (a - b).norm()))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .ok_or_else(|| Error::Dimension("more group values than roots".into()))?;
            if dist > tol.spectrum_match * a.norm().max(1.0) {
                return Err(Error::RootMismatch { value: *a, ratio: dist });
            }
            used[best] = true;
            kappa[best] = -shift;
        }
    }
    Ok(kappa)
}

/// Result of [`schlesinger_action`].
#[derive(Debug, Clone)]
pub struct ActionOutcome {
    pub polynomial: MatrixPolynomial,
    pub chain: MultiplierChain,
    pub moves: Vec<Move>,
    /// The starting roots (sorted) and their images under the exact shifts.
    pub roots_before: Vec<Complex64>,
    pub roots_after: Vec<Complex64>,
}

/// Measured shifts of an action against the requested `(κ, δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActionCertificate {
    /// Largest distance between re-extracted roots and `a_r + κ_r`.
    pub root_shift_error: f64,
    /// Largest `|d_i(after) − d_i(before) − δ_i|`.
    pub exponent_shift_error: f64,
    /// `‖Ã_0 − A_0‖_F`.
    pub leading_change: f64,
}

fn tag_move(e: Error, index: usize, mv: &Move) -> Error {
    let context = format!("elementary move {} ({mv:?})", index + 1);
    match e {
        Error::Genericity(msg) => Error::Genericity(format!("{context}: {msg}")),
        Error::Inconsistent { what, residual } => Error::Inconsistent { what: format!("{context}: {what}"), residual },
        other => other,
    }
}

/// Applies the transformation shifting root `r` (sorted order) by `κ_r` and
/// exponent `d_i` by `δ_i`, with `Σκ + Σδ = 0`.
pub fn schlesinger_action(a: &MatrixPolynomial, kappa: &[i64], delta: &[i64], tol: &Tolerances) -> Result<ActionOutcome> {
    schlesinger_action_ordered(a, kappa, delta, MoveOrder::Forward, tol)
}

pub fn schlesinger_action_ordered(
    a: &MatrixPolynomial,
    kappa: &[i64],
    delta: &[i64],
    order: MoveOrder,
    tol: &Tolerances,
) -> Result<ActionOutcome> {
    check_balance(kappa, delta, a.m() * a.degree(), a.m())?;
    let roots_before = a.eigenvalues(tol)?;
    let moves = plan_moves(kappa, delta, order);
    let mut roots = roots_before.clone();
    let mut cur = a.clone();
    let mut chain = MultiplierChain::default();
    for (idx, mv) in moves.iter().enumerate() {
        let (r, next) = match *mv {
            Move::Down { root, row } => {
                let out = elementary_down(&cur, roots[root], row, tol).map_err(|e| tag_move(e, idx, mv))?;
                roots[root] -= 1.0;
                out
            }
            Move::Up { root, row } => {
                let out = elementary_up(&cur, roots[root], row, tol).map_err(|e| tag_move(e, idx, mv))?;
                roots[root] += 1.0;
                out
            }
        };
        chain.push(r);
        cur = next;
    }
    Ok(ActionOutcome { polynomial: cur, chain, moves, roots_before, roots_after: roots })
}

/// Compares `after` with `before` against the requested shifts.
pub fn certify(
    before: &MatrixPolynomial,
    after: &MatrixPolynomial,
    kappa: &[i64],
    delta: &[i64],
    tol: &Tolerances,
) -> Result<ActionCertificate> {
    let roots = before.eigenvalues(tol)?;
    let expected: Vec<Complex64> = roots.iter().zip(kappa).map(|(a, &k)| a + k as f64).collect();
    let actual = after.eigenvalues(tol)?;
    let root_shift_error = linalg::match_spectra(&expected, &actual, tol.spectrum_ambiguity)?;
    let d0 = before.formal_exponents(tol)?;
    let d1 = after.formal_exponents(tol)?;
    let exponent_shift_error = d0
        .iter()
        .zip(&d1)
        .zip(delta)
        .map(|((x, y), &s)| (y - x - s as f64).norm())
        .fold(0.0, f64::max);
    let leading_change = (after.leading() - before.leading()).norm();
    Ok(ActionCertificate { root_shift_error, exponent_shift_error, leading_change })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_is_balanced() {
        let kappa = [-1, 2, 0, -1];
        let delta = [1, -1];
        for order in [MoveOrder::Forward, MoveOrder::Reverse] {
            let moves = plan_moves(&kappa, &delta, order);
            let mut k = [0i64; 4];
            let mut d = [0i64; 2];
            for mv in moves {
                match mv {
                    Move::Down { root, row } => {
                        k[root] -= 1;
                        d[row] += 1;
                    }
                    Move::Up { root, row } => {
                        k[root] += 1;
                        d[row] -= 1;
                    }
                }
            }
            assert_eq!(k, kappa);
            assert_eq!(d, delta);
        }
    }

    #[test]
    fn pure_exponent_shift_uses_pairs() {
        let moves = plan_moves(&[0, 0], &[1, -1], MoveOrder::Forward);
        assert_eq!(moves, vec![Move::Down { root: 0, row: 0 }, Move::Up { root: 0, row: 1 }]);
    }
}
