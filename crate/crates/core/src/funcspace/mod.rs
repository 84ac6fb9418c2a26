//! Bounded real functions, tanh-measure representations and strip diagnostics.

mod fit;
mod function;
mod herglotz;
mod measure;
mod mollify;
mod moments;

pub use fit::{fit_tanh_measure, fit_tanh_measure_with, nnls, FitResult, CLUSTER_CUT, MEMBERSHIP_THRESHOLD};
pub use function::{ctanh, sech2, ClosedForm, RealFunction, Sampled, Smoothed, Term};
pub use herglotz::{herglotz_check, herglotz_check_with, HerglotzReport, HERGLOTZ_TOL, STRIP_MARGIN};
pub use measure::{TanhMeasure, VariationBracket};
pub use mollify::{
    cosh_kernel, cosh_mollify, cosh_mollify_with, gaussian_mollify, gaussian_mollify_with,
    MollifyOptions,
};
pub use moments::{
    estimate_decay_rate, estimate_decay_rate_with, exp_moment, DecayFit, ExpMoment,
    DECAY_FIT_THRESHOLD, DIVERGENCE_RATIO,
};
