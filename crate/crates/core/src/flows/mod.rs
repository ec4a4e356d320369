//! Isomonodromy transformations `A(z) ↦ R(z+1)A(z)R^{-1}(z)` and the `ℤ^n`
//! Schlesinger flows in divisor and factor coordinates.

pub mod action;
pub mod divisor;
pub mod factor;
pub mod multiplier;
pub mod residuals;

pub use action::{certify, group_kappa, plan_moves, schlesinger_action, schlesinger_action_ordered, ActionCertificate, ActionOutcome, Move, MoveOrder};
pub use divisor::{divisor_block, divisor_flow, divisor_flow_with, divisor_trajectory, DivisorState, Schedule};
pub use factor::{b_from_c, c_from_b, factor_flow, factor_trajectory, FactorState};
pub use multiplier::{
    elementary_down, elementary_pair_exponents, elementary_pair_roots, elementary_up, Multiplier, MultiplierChain, MultiplierKind,
};
pub use residuals::{check_residuals, factor_step_residual, factor_trajectory_residual, Residual, ResidualReport};
