//! Pseudo-spectral simulation of 2D Rayleigh-Benard convection in
//! vorticity-temperature form with a generalized (slowly weakened)
//! dissipation operator, plus the harmonic-analysis toolbox needed to
//! monitor the quantities that control its regularity: dyadic frequency
//! blocks, (weighted) Besov norms, commutator estimates and energy
//! balances.

pub mod config;
pub mod diag;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod lemmas;
pub mod lp;
pub mod multiplier;
pub mod solver;
pub mod symbol;

pub mod cli;

pub use error::{RbError, Result};
