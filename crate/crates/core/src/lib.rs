//! Sufficient dimension reduction by contour regression.
//!
//! [`scr`] and [`gcr`] estimate the central subspace of a regression from
//! pairwise predictor differences whose responses barely change; [`baselines`]
//! holds OLS, SIR, SAVE and PHD for comparison. [`simgen`] generates the
//! benchmark designs and [`harness`] runs seeded simulation studies and CSV
//! analyses on top of them.

pub mod baselines;
pub mod error;
pub mod gcr;
pub mod harness;
pub mod linalg;
pub mod scr;
pub mod simgen;

pub use error::{Error, Result};
pub use linalg::{Dataset, EigenDecomposition, Method, Norm, StandardizedData, SubspaceEstimate};
