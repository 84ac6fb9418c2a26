//! The commutator `K = i[f(P), g(Q)]` discretized by kernel (Nyström) and by
//! direct functional calculus, plus its spectrum and trace identities.

mod build;
mod identities;
mod spectrum;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discretize::Grid;

pub use build::{
    build, build_direct, build_direct_projected, build_nystrom_p, build_nystrom_x, x_kernel,
};
pub use identities::{
    diagonal_identity_check, lattice, shifted_trace, strip_positivity_check, trace_identity_check,
    StripReport, TraceCheck,
};
pub use spectrum::{spectrum, spectrum_with, SpectralReport, HERMITIAN_TOL, POSITIVITY_TOL, RANK_THRESHOLD};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// `W^{1/2} K(x_i, x_j) W^{1/2}` on the position grid
    NystromX,
    /// `W^{1/2} K~(xi_m, xi_n) W^{1/2}` on the momentum grid
    NystromP,
    /// `i(F G - G F)` with `F` diagonal in the DFT basis
    Direct,
    /// Direct route on a twice finer grid, projected onto the coarse band
    DirectProjected,
}

impl Route {
    pub fn is_nystrom(self) -> bool {
        matches!(self, Route::NystromX | Route::NystromP)
    }

    pub fn name(self) -> &'static str {
        match self {
            Route::NystromX => "nystrom-x",
            Route::NystromP => "nystrom-p",
            Route::Direct => "direct",
            Route::DirectProjected => "direct-projected",
        }
    }
}

/// Hermitian matrix on a quadrature grid, tagged by construction route.
#[derive(Clone, Debug)]
pub struct DiscretizedOperator {
    pub grid: Grid,
    pub matrix: Array2<Complex64>,
    pub weights: Vec<f64>,
    /// Nodes the matrix rows refer to (positions or momenta).
    pub nodes: Vec<f64>,
    pub route: Route,
    pub f_bracket: Option<f64>,
    pub g_bracket: Option<f64>,
}

impl DiscretizedOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[[i, i]].re).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// `<u, M u>` for a vector of function samples at the nodes, using the
    /// same `W^{1/2}` embedding as the matrix.
    pub fn quadratic_form(&self, u: &[Complex64]) -> Complex64 {
        let n = self.dim();
        let v: Vec<Complex64> = (0..n).map(|i| u[i] * self.weights[i].sqrt()).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let row: Complex64 = self.matrix.row(i).iter().zip(&v).map(|(a, b)| a * b).sum();
            acc += v[i].conj() * row;
        }
        acc
    }
}
