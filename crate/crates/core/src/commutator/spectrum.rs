use serde::Serialize;

use super::DiscretizedOperator;
use crate::error::{Error, Result};
use crate::linalg;

/// Positivity tolerance, relative to `max |lambda|`.
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Numerical rank threshold, relative to `max |lambda|`.
pub const RANK_THRESHOLD: f64 = 1e-6;
/// Hermiticity bound for spectra.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub min_eig: f64,
    pub max_eig: f64,
    pub trace: f64,
    pub numerical_rank: usize,
    pub rank_threshold: f64,
    pub positivity_tol: f64,
    pub pass: bool,
}

impl SpectralReport {
    pub fn max_abs(&self) -> f64 {
        self.min_eig.abs().max(self.max_eig.abs())
    }

    /// Eigenvalues above the rank threshold, sorted by decreasing magnitude.
    pub fn significant(&self) -> Vec<f64> {
        let cut = self.rank_threshold * self.max_abs();
        let mut v: Vec<f64> = self
            .eigenvalues
            .iter()
            .copied()
            .filter(|l| l.abs() > cut)
            .collect();
        v.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
        v
    }
}

pub fn spectrum(op: &DiscretizedOperator, rank_threshold: f64) -> Result<SpectralReport> {
    spectrum_with(op, rank_threshold, POSITIVITY_TOL)
}

pub fn spectrum_with(op: &DiscretizedOperator, rank_threshold: f64, positivity_tol: f64) -> Result<SpectralReport> {
    let dev = linalg::hermitian_deviation(&op.matrix);
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let mut eigenvalues = linalg::eigvalsh(&op.matrix)?;
    eigenvalues.reverse();
    let (max_eig, min_eig) = match (eigenvalues.first(), eigenvalues.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => (0.0, 0.0),
    };
    let scale = max_eig.abs().max(min_eig.abs());
    let numerical_rank = eigenvalues
        .iter()
        .filter(|l| l.abs() > rank_threshold * scale)
        .count();
    Ok(SpectralReport {
        eigenvalues,
        min_eig,
        max_eig,
        trace: op.trace(),
        numerical_rank,
        rank_threshold,
        positivity_tol,
        pass: min_eig >= -positivity_tol * scale,
    })
}
