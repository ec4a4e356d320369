//! Numerical thresholds, collected in one record.
//!
//! The exceptional sets of the theory are Zariski-closed; every threshold here
//! is a double-precision proxy for "lies on that set".

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// `|det A_0|` below this (relative to `‖A_0‖^m`) counts as singular.
    pub singular_leading: f64,
    /// A root is simple when `σ_{m-1}(A(a)) > simple_root · σ_1(A(a))`.
    pub simple_root: f64,
    /// A value is accepted as a root when `σ_min(A(a)) ≤ root_residual · σ_1(A(a))`.
    pub root_residual: f64,
    /// Largest admissible condition number of an eigenvector matrix.
    pub eigvec_cond: f64,
    /// Absolute distance to the nearest integer (or q-power) below which two
    /// eigenvalues count as congruent.
    pub congruence: f64,
    /// Largest admissible condition number of the Sylvester solution Λ and of
    /// the other conjugators used by the refactorization maps.
    pub conjugator_cond: f64,
    /// Smallest admissible modulus of a pivot coordinate (`v_i`, `(v,w)`, `(Ŷ_1)_ij`)
    /// relative to the unit-normalized vectors it is taken from.
    pub pivot: f64,
    /// Relative residual accepted for divisor and product identities.
    pub identity: f64,
    /// Relative size of polynomial division remainders and cancelled leading
    /// terms that is still treated as zero.
    pub remainder: f64,
    /// Two eigenvalues closer than this make greedy spectrum matching ambiguous.
    pub spectrum_ambiguity: f64,
    /// Matching distance accepted for spectrum bookkeeping checks.
    pub spectrum_match: f64,
    /// Step-halving discrepancy accepted per integration step.
    pub ode_step: f64,
    /// Minimal pairwise distance between Fuchsian poles.
    pub pole_separation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            singular_leading: 1e-12,
            simple_root: 1e-6,
            root_residual: 1e-6,
            eigvec_cond: 1e8,
            congruence: 1e-8,
            conjugator_cond: 1e10,
            pivot: 1e-8,
            identity: 1e-8,
            remainder: 1e-7,
            spectrum_ambiguity: 1e-6,
            spectrum_match: 1e-6,
            ode_step: 1e-8,
            pole_separation: 1e-6,
        }
    }
}
