//! Positivity of commutators `i[f(P), g(Q)]` on `L^2(R)`: function classes,
//! discretizations, spectra, finite-rank models and operator-monotone
//! compositions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commutator;
pub mod derivavg;
pub mod discretize;
pub mod error;
pub mod finiterank;
pub mod funcspace;
pub mod linalg;
pub mod monotone;
pub mod quad;

pub use error::{Error, Result};
