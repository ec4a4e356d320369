//! Isomonodromy transformations of linear difference systems `Y(z+1) = A(z)Y(z)`.
//!
//! The crate covers the matrix-polynomial divisor calculus ([`matpoly`]), the
//! refactorization maps on products of linear factors ([`refactor`]), the
//! integer-lattice Schlesinger action with its q-difference and autonomous
//! variants ([`flows`]), and a harness comparing the lattice flows against the
//! classical Schlesinger equations in a scaling limit ([`continuum`]).

pub mod continuum;
pub mod error;
pub mod flows;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod matpoly;
pub mod random;
pub mod refactor;
pub mod tolerance;

pub use continuum::{ContinuousSystem, EmbeddingConfig, ElementaryData};
pub use error::{Error, Result};
pub use lattice::LatticePoint;
pub use linalg::{CMatrix, CVector};
pub use matpoly::{Congruence, FormalSolutionData, MatrixPolynomial, SpectrumGroups};
pub use num_complex::Complex64;
pub use tolerance::Tolerances;
pub use refactor::{FactorSequence, LinearFactor, Variant};
pub use flows::{DivisorState, FactorState, Multiplier, MultiplierKind};
