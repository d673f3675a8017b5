//! Optimistic no-regret learning in finite normal-form games.
//!
//! The crate simulates optimistic mirror descent (OMD) and optimistic
//! follow-the-regularized-leader (OFTRL), checks harmonic and constant-sum
//! structure, and turns each run into regret, path-length and approximate
//! equilibrium certificates.

pub mod classes;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod game;
mod linalg;
pub mod regularizer;
pub mod runner;
pub mod trajectory;

pub use error::{LabError, Result};
