//! Command-line driver for the `isomono` library: lattice trajectories, the
//! invariant suites, the continuum-limit table and the lattice action.

pub mod check;
pub mod config;
pub mod error;
pub mod limit;
pub mod output;
pub mod run;
pub mod transform;

pub use config::{System, SystemConfig};
pub use error::{CliError, CliResult};
