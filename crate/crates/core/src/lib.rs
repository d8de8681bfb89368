//! HORSES penalized regression.
//!
//! Least squares with an L1 penalty on the coefficients plus an L1 penalty on
//! every pairwise coefficient difference:
//!
//! ```text
//! f(β) = ½‖y − Xβ‖² + λ₁ Σ_j |β_j| + λ₂ Σ_{j<k} |β_j − β_k|
//! ```
//!
//! The fusion term drives coefficients of positively correlated predictors
//! to exactly the same value, so a fit is simultaneously sparse and grouped.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. All I/O lives in the companion `horses` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod baselines;
pub mod data;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod penalty;
pub mod simulation;
pub mod solver;
pub mod tuning;

#[cfg(test)]
mod test_util;

pub use data::{
    destandardize, group_extract, standardize, CoefficientVector, Dataset, FitResult,
    GroupStructure, StandardizationReport, DEFAULT_GROUP_TOL,
};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use penalty::PenaltySpec;
pub use solver::{solve, SolverConfig};
