//! The `ℤ^n` flow in right-divisor coordinates `B_i(k)`.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::lattice::LatticePoint;
use crate::linalg::{self, CMatrix};
use crate::matpoly::{MatrixPolynomial, SpectrumGroups};
use crate::refactor::{swap_adjacent, Variant};
use crate::tolerance::Tolerances;

/// Right divisors `B_1(k), …, B_n(k)` at lattice point `k`.
///
/// `groups` are the spectra at `k = 0`; the spectra at `k` follow from the
/// variant's shift rule and are never re-extracted for bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisorState {
    #[serde(with = "io::matrix")]
    pub a0: CMatrix,
    #[serde(with = "io::matrix_list")]
    pub b: Vec<CMatrix>,
    pub groups: SpectrumGroups,
    pub k: LatticePoint,
    pub variant: Variant,
}

impl DivisorState {
    /// State at `k = 0`; checks shapes, group admissibility and `Sp(B_i) = group i`.
    pub fn new(a0: CMatrix, b: Vec<CMatrix>, groups: SpectrumGroups, variant: Variant, tol: &Tolerances) -> Result<Self> {
        let n = b.len();
        let state = DivisorState { a0, b, groups, k: LatticePoint::zero(n), variant };
        state.validate(tol)?;
        Ok(state)
    }

    /// Right divisors of `a` for the given groups.
    pub fn from_polynomial(a: &MatrixPolynomial, groups: SpectrumGroups, variant: Variant, tol: &Tolerances) -> Result<Self> {
        let b = groups
            .groups
            .iter()
            .map(|g| a.right_divisor(g, tol))
            .collect::<Result<Vec<_>>>()?;
        Self::new(a.leading().clone(), b, groups, variant, tol)
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let m = self.a0.nrows();
        if self.b.is_empty() || self.b.iter().any(|b| b.shape() != (m, m)) {
            return Err(Error::Dimension("divisors must be nonempty and match A0 in size".into()));
        }
        if self.groups.groups.len() != self.b.len() || self.k.len() != self.b.len() {
            return Err(Error::Dimension("groups, divisors and lattice point must have n entries".into()));
        }
        if self.groups.congruence != self.variant.congruence() {
            return Err(Error::input("eigenvalue groups were validated for a different variant"));
        }
        self.groups.validate(tol)?;
        linalg::inverse_checked(&self.a0, 1.0 / tol.singular_leading, "A0")?;
        let err = self.spectrum_error(tol)?;
        if err > tol.spectrum_match * self.spectrum_scale() {
            return Err(Error::input(format!("divisor spectra do not match their groups (distance {err:.3e})")));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn m(&self) -> usize {
        self.a0.nrows()
    }

    /// `Sp(B_i(k))` by the shift rule.
    pub fn expected_spectrum(&self, i: usize) -> Vec<Complex64> {
        self.variant.shift_values(&self.groups.groups[i], self.k[i])
    }

    pub fn current_groups(&self) -> SpectrumGroups {
        SpectrumGroups::unchecked((0..self.n()).map(|i| self.expected_spectrum(i)).collect(), self.groups.congruence)
    }

    fn spectrum_scale(&self) -> f64 {
        (0..self.n())
            .flat_map(|i| self.expected_spectrum(i))
            .map(|z| z.norm())
            .fold(1.0, f64::max)
    }

    /// Largest distance between re-extracted spectra and the shift rule.
    pub fn spectrum_error(&self, tol: &Tolerances) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, b) in self.b.iter().enumerate() {
            let actual = linalg::eigenvalues(b)?;
            worst = worst.max(linalg::match_spectra(&self.expected_spectrum(i), &actual, tol.spectrum_ambiguity)?);
        }
        Ok(worst)
    }

    /// The polynomial with leading coefficient `A_0` and right divisors `z − B_i(k)`.
    pub fn polynomial(&self, tol: &Tolerances) -> Result<MatrixPolynomial> {
        MatrixPolynomial::from_right_divisors(&self.a0, &self.b, &self.current_groups(), tol)
    }

    fn with(&self, b: Vec<CMatrix>, k: LatticePoint) -> Self {
        DivisorState { a0: self.a0.clone(), b, groups: self.groups.clone(), k, variant: self.variant }
    }

    fn a0_inv(&self, tol: &Tolerances) -> Result<CMatrix> {
        linalg::inverse_checked(&self.a0, 1.0 / tol.singular_leading, "A0")
    }

    /// `k ↦ k + s·(1,…,1)` through the twist rule.
    pub fn diagonal(&self, s: i64, tol: &Tolerances) -> Result<Self> {
        if s == 0 {
            return Ok(self.clone());
        }
        let inv = self.a0_inv(tol)?;
        let b = self.b.iter().map(|b| self.variant.twist(b, &self.a0, &inv, -s)).collect();
        let k = LatticePoint(self.k.iter().map(|x| x + s).collect());
        Ok(self.with(b, k))
    }

    /// `k ↦ k + ε` for a 0/1 vector `ε` (given as a bit mask).
    pub fn step(&self, mask: u32, tol: &Tolerances) -> Result<Self> {
        let n = self.n();
        let full = full_mask(n);
        if mask & !full != 0 {
            return Err(Error::input("step mask has bits beyond n"));
        }
        if mask == 0 {
            return Ok(self.clone());
        }
        if mask == full {
            return self.diagonal(1, tol);
        }
        let mut cube = Cube::new(self, tol)?;
        let b = (0..n).map(|i| cube.b_at(i, mask)).collect::<Result<Vec<_>>>()?;
        let k = LatticePoint((0..n).map(|i| self.k[i] + ((mask >> i) & 1) as i64).collect());
        Ok(self.with(b, k))
    }

    /// `B(k + ε)` for every `ε ∈ {0,1}^n`, keyed by lattice point.
    pub fn unit_cube(&self, tol: &Tolerances) -> Result<BTreeMap<LatticePoint, Vec<CMatrix>>> {
        let n = self.n();
        let mut cube = Cube::new(self, tol)?;
        let mut out = BTreeMap::new();
        for mask in 0..=full_mask(n) {
            let b = (0..n).map(|i| cube.b_at(i, mask)).collect::<Result<Vec<_>>>()?;
            let k = LatticePoint((0..n).map(|i| self.k[i] + ((mask >> i) & 1) as i64).collect());
            out.insert(k, b);
        }
        Ok(out)
    }
}

fn full_mask(n: usize) -> u32 {
    (1u32 << n) - 1
}

/// Divisors on the unit cube `k + {0,1}^n`, filled lazily.
///
/// With `ε_i = 0`, `B_i(p + e_j) = D B_i(p) D^{-1}` where `D = B_j(p) − B_i(p)`;
/// this is the exchange `(z − B_i(p+e_j))(z − B_j(p)) = (z − B_j(p+e_i))(z − B_i(p))`
/// read through its conjugation form. With `ε_i = 1` the same exchange is run
/// backwards from `B_i(p + e_j)` and `B_j(p)`, ending at the twisted corner
/// `B_i(k + 1)`.
struct Cube<'a> {
    state: &'a DivisorState,
    a0_inv: CMatrix,
    memo: HashMap<(usize, u32), CMatrix>,
    tol: &'a Tolerances,
}

impl<'a> Cube<'a> {
    fn new(state: &'a DivisorState, tol: &'a Tolerances) -> Result<Self> {
        Ok(Cube { state, a0_inv: state.a0_inv(tol)?, memo: HashMap::new(), tol })
    }

    fn b_at(&mut self, i: usize, mask: u32) -> Result<CMatrix> {
        if let Some(b) = self.memo.get(&(i, mask)) {
            return Ok(b.clone());
        }
        let n = self.state.n();
        let full = full_mask(n);
        let b = if mask & (1 << i) == 0 {
            if mask == 0 {
                self.state.b[i].clone()
            } else {
                let j = mask.trailing_zeros() as usize;
                let p = mask & !(1 << j);
                let bi = self.b_at(i, p)?;
                let d = self.b_at(j, p)? - &bi;
                let d_inv = linalg::inverse_checked(&d, self.tol.conjugator_cond, "divisor difference B_j − B_i")?;
                &d * bi * d_inv
            }
        } else if mask == full {
            self.state.variant.twist(&self.state.b[i], &self.state.a0, &self.a0_inv, -1)
        } else {
            let j = (!mask & full).trailing_zeros() as usize;
            let x = self.b_at(i, mask | (1 << j))?;
            let y = self.b_at(j, mask)?;
            swap_adjacent(&x, &y, self.tol)?.1
        };
        self.memo.insert((i, mask), b.clone());
        Ok(b)
    }
}

/// Path through the lattice used by [`divisor_flow_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Diagonal moves to `min_i (t_i − k_i)`, then 0/1 steps on the coordinates still short.
    #[default]
    DiagonalFirst,
    /// One coordinate at a time; a unit decrease is a diagonal step down followed by `1 − e_j`.
    UnitSteps,
}

/// `B(target)` from `state` along the default schedule.
pub fn divisor_flow(state: &DivisorState, target: &LatticePoint, tol: &Tolerances) -> Result<DivisorState> {
    divisor_flow_with(state, target, Schedule::DiagonalFirst, tol)
}

pub fn divisor_flow_with(state: &DivisorState, target: &LatticePoint, schedule: Schedule, tol: &Tolerances) -> Result<DivisorState> {
    Ok(divisor_trajectory(state, target, schedule, tol)?.pop().expect("trajectory holds the start"))
}

/// Every state visited on the way to `target`, starting with `state` itself.
pub fn divisor_trajectory(
    state: &DivisorState,
    target: &LatticePoint,
    schedule: Schedule,
    tol: &Tolerances,
) -> Result<Vec<DivisorState>> {
    let n = state.n();
    if target.len() != n {
        return Err(Error::Dimension(format!("target has {} coordinates, expected {n}", target.len())));
    }
    let mut path = vec![state.clone()];
    let advance = |path: &mut Vec<DivisorState>, next: Result<DivisorState>| -> Result<()> {
        let cur = path.last().expect("nonempty");
        let next = next.map_err(|e| e.at(&cur.k))?;
        path.push(next);
        Ok(())
    };
    match schedule {
        Schedule::DiagonalFirst => {
            let rest = target - &state.k;
            let d = rest.iter().copied().min().unwrap_or(0);
            for _ in 0..d.unsigned_abs() {
                let cur = path.last().expect("nonempty");
                let next = cur.diagonal(d.signum(), tol);
                advance(&mut path, next)?;
            }
            loop {
                let cur = path.last().expect("nonempty");
                let rest = target - &cur.k;
                let mask = (0..n).filter(|&i| rest[i] > 0).fold(0u32, |acc, i| acc | (1 << i));
                if mask == 0 {
                    break;
                }
                let next = cur.step(mask, tol);
                advance(&mut path, next)?;
            }
        }
        Schedule::UnitSteps => {
            for j in 0..n {
                loop {
                    let cur = path.last().expect("nonempty");
                    let r = target[j] - cur.k[j];
                    if r == 0 {
                        break;
                    }
                    if r > 0 {
                        let next = cur.step(1 << j, tol);
                        advance(&mut path, next)?;
                    } else {
                        let down = cur.diagonal(-1, tol);
                        advance(&mut path, down)?;
                        let cur = path.last().expect("nonempty");
                        let next = cur.step(full_mask(n) & !(1 << j), tol);
                        advance(&mut path, next)?;
                    }
                }
            }
        }
    }
    Ok(path)
}

/// `B(k)` for every `k` with `max_i |k_i − k0_i| ≤ radius` around the state's point.
///
/// The corner is reached by diagonal moves; the rest of the box is filled in
/// lexicographic order, each point one unit step from an earlier one.
pub fn divisor_block(state: &DivisorState, radius: i64, tol: &Tolerances) -> Result<BTreeMap<LatticePoint, Vec<CMatrix>>> {
    let n = state.n();
    let corner = state.diagonal(-radius, tol).map_err(|e| e.at(&state.k))?;
    let mut states: BTreeMap<LatticePoint, DivisorState> = BTreeMap::new();
    for offset in LatticePoint::cube(n, radius) {
        let k = &state.k + &offset;
        if states.is_empty() {
            states.insert(k, corner.clone());
            continue;
        }
        let j = (0..n).rev().find(|&j| offset[j] > -radius).expect("not the corner");
        let mut prev = k.clone();
        prev.0[j] -= 1;
        let from = &states[&prev];
        let next = from.step(1 << j, tol).map_err(|e| e.at(&prev))?;
        states.insert(k, next);
    }
    Ok(states.into_iter().map(|(k, s)| (k, s.b)).collect())
}
