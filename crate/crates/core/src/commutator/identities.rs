use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{build::x_kernel, DiscretizedOperator, Route};
use crate::discretize::FourierProfile;
use crate::error::{Error, Result};
use crate::funcspace::{RealFunction, HERGLOTZ_TOL};

#[derive(Clone, Debug, Serialize)]
pub struct TraceCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub error: f64,
}

/// Matrix trace against `[f][g] / 2 pi`. Relative error, or absolute when
/// the right side vanishes.
pub fn trace_identity_check(op: &DiscretizedOperator) -> Result<TraceCheck> {
    if !op.route.is_nystrom() {
        return Err(Error::RouteMismatch(format!(
            "{} matrices are finite commutators with zero trace; the trace identity needs a Nyström route",
            op.route.name()
        )));
    }
    let (fb, gb) = match (op.f_bracket, op.g_bracket) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::invalid("trace identity needs f and g with limits")),
    };
    let lhs = op.trace();
    let rhs = fb * gb / (2.0 * PI);
    let error = if rhs != 0.0 {
        (lhs - rhs).abs() / rhs.abs()
    } else {
        lhs.abs()
    };
    Ok(TraceCheck { lhs, rhs, error })
}

/// Largest relative deviation of `K~(xi, xi)` from `([g]/2 pi) f'(xi)` over
/// momenta with `|xi| <= interior`.
pub fn diagonal_identity_check(op: &DiscretizedOperator, f: &RealFunction, interior: f64) -> Result<f64> {
    if op.route != Route::NystromP {
        return Err(Error::RouteMismatch("diagonal identity is stated on the momentum kernel".into()));
    }
    let gb = op.g_bracket.ok_or_else(|| Error::invalid("g has no limits"))?;
    let mut worst = 0.0f64;
    for (i, &xi) in op.nodes.iter().enumerate() {
        if xi.abs() > interior {
            continue;
        }
        let want = gb / (2.0 * PI) * f.derivative(xi)?;
        let got = op.matrix[[i, i]].re / op.weights[i];
        if want.abs() > 1e-12 {
            worst = worst.max((got - want).abs() / want.abs());
        }
    }
    Ok(worst)
}

/// `(sqrt(2 pi)/[g]) tr(e^{iPx} K e^{-iPy})` via the momentum diagonal:
/// `sum_m K~_mm e^{i k_m (x - y)}`. Equals `f'^(y - x)`.
pub fn shifted_trace(op: &DiscretizedOperator, x: Complex64, y: Complex64) -> Result<Complex64> {
    if op.route != Route::NystromP {
        return Err(Error::RouteMismatch("shifted trace needs the momentum (Nyström-p) route".into()));
    }
    let gb = op
        .g_bracket
        .filter(|b| *b != 0.0)
        .ok_or_else(|| Error::invalid("shifted trace needs [g] != 0"))?;
    let d = x - y;
    let n = op.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut edge = 0.0f64;
    for m in 0..n {
        let term = (Complex64::i() * op.nodes[m] * d).exp() * op.matrix[[m, m]].re;
        if m == 0 || m == n - 1 {
            edge = edge.max(term.norm());
        }
        acc += term;
    }
    if edge > 1e-10 * acc.norm().max(1e-300) {
        return Err(Error::Divergence {
            im: (y - x).im,
            limit: f64::NAN,
        });
    }
    Ok(acc * ((2.0 * PI).sqrt() / gb))
}

#[derive(Clone, Debug, Serialize)]
pub struct StripReport {
    pub y: f64,
    /// `max_x |K(x - iy, x + iy) - (2 pi)^{-1/2} (Im g(x+iy)/y) f'^(2iy)|`
    pub residual: f64,
    pub min_im_g: f64,
    pub min_kernel: f64,
    pub g_strip: f64,
    pub pole_proximity: bool,
    pub pass: bool,
}

/// Evaluate the continued kernel on the anti-diagonal `(x - iy, x + iy)`
/// two ways over an x-lattice.
pub fn strip_positivity_check(f: &RealFunction, g: &RealFunction, y: f64, lattice: &[f64]) -> Result<StripReport> {
    if !(y > 0.0) {
        return Err(Error::invalid(format!("y must be positive, got {y}")));
    }
    if matches!(g, RealFunction::Sampled(_)) {
        return Err(Error::UnsupportedVariant("g has no continuation".into()));
    }
    let profile = FourierProfile::closed_form(f)?;
    let fh = profile.eval_complex(Complex64::new(0.0, 2.0 * y))?;
    let c = 1.0 / (2.0 * PI).sqrt();
    let mut residual = 0.0f64;
    let mut min_im = f64::INFINITY;
    let mut min_kernel = f64::INFINITY;
    for &x in lattice {
        let zp = Complex64::new(x, y);
        let lhs = x_kernel(&profile, g, zp.conj(), zp)?;
        let im = g.eval(zp)?.im;
        let rhs = c * im / y * fh;
        residual = residual.max((lhs - rhs).norm());
        min_im = min_im.min(im);
        min_kernel = min_kernel.min(lhs.re);
    }
    let strip = g.strip_half_width();
    Ok(StripReport {
        y,
        residual,
        min_im_g: min_im,
        min_kernel,
        g_strip: strip,
        pole_proximity: y > 0.9 * strip,
        pass: residual < 1e-8 && min_im >= -HERGLOTZ_TOL && min_kernel >= -HERGLOTZ_TOL,
    })
}

/// Uniform lattice on `[-w, w]`.
pub fn lattice(w: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| -w + 2.0 * w * k as f64 / (n - 1) as f64)
        .collect()
}
