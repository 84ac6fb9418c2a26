use std::f64::consts::PI;

use num_complex::Complex64;

use super::function::{RealFunction, Smoothed};
use super::measure::TanhMeasure;
use crate::error::{Error, Result};

/// Atom grid and tolerances for [`cosh_mollify_with`].
#[derive(Clone, Copy, Debug)]
pub struct MollifyOptions {
    pub window: f64,
    pub atoms: usize,
    pub tol: f64,
}

impl Default for MollifyOptions {
    fn default() -> Self {
        MollifyOptions {
            window: 24.0,
            atoms: 4096,
            tol: 1e-10,
        }
    }
}

/// `phi_eps(t) = (2 eps)^{-1} cosh^{-2}(t / eps)`.
pub fn cosh_kernel(t: f64, eps: f64) -> f64 {
    super::function::sech2(t / eps) / (2.0 * eps)
}

pub fn cosh_mollify(f: &RealFunction, eps: f64) -> Result<TanhMeasure> {
    cosh_mollify_with(f, eps, MollifyOptions::default())
}

/// Representation `f_eps(t) = int tanh((t - s)/eps) dmu(s) + c` of
/// `phi_eps * f`, with `dmu = f'/2 ds` discretized by the midpoint rule.
/// Without a derivative each atom carries the mass `(f(b) - f(a))/2` of its
/// cell instead.
pub fn cosh_mollify_with(f: &RealFunction, eps: f64, opts: MollifyOptions) -> Result<TanhMeasure> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("epsilon must be positive, got {eps}")));
    }
    if opts.atoms < 2 || !(opts.window > 0.0) {
        return Err(Error::invalid("mollifier atom grid is empty"));
    }
    let (lo, hi) = f
        .limits()
        .ok_or_else(|| Error::invalid("cosh mollifier needs a function with limits at infinity"))?;
    let w = opts.window;
    let n = opts.atoms;
    let h = 2.0 * w / n as f64;
    let edges = [f.eval_real(-w), f.eval_real(w)];
    let scale = (hi - lo).abs().max(f.sup_bound()).max(1e-300);
    let mut atoms = Vec::with_capacity(n);
    for k in 0..n {
        let s = -w + (k as f64 + 0.5) * h;
        let mass = match f.derivative(s) {
            Ok(d) => 0.5 * h * d,
            Err(_) => 0.5 * (f.eval_real(s + 0.5 * h) - f.eval_real(s - 0.5 * h)),
        };
        if mass < -opts.tol * scale {
            return Err(Error::Monotonicity { at: s, value: mass / h });
        }
        atoms.push((s, mass.max(0.0)));
    }
    let tail = (hi - edges[1]).abs() + (edges[0] - lo).abs();
    if tail > opts.tol * scale {
        return Err(Error::Truncation {
            what: format!("cosh mollifier window [-{w}, {w}]"),
            tail,
            tol: opts.tol * scale,
        });
    }
    TanhMeasure::new(atoms, 0.5 * (hi + lo), 0.5 * PI * eps)
}

/// Gaussian convolution `psi_w * f` with `psi_w(t) = exp(-t^2 / 2w^2) / (w sqrt(2 pi))`.
/// The result continues to the whole complex plane.
pub fn gaussian_mollify(f: &RealFunction, width: f64) -> Result<RealFunction> {
    gaussian_mollify_with(f, width, 1e-10)
}

pub fn gaussian_mollify_with(f: &RealFunction, width: f64, tol: f64) -> Result<RealFunction> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::invalid(format!("width must be positive, got {width}")));
    }
    let out = RealFunction::Smoothed(Smoothed {
        inner: Box::new(f.clone()),
        width,
        tol,
    });
    // surface quadrature failure at construction rather than on first use
    for x in [0.0, -1.0, 1.0, 5.0 * width] {
        out.eval(Complex64::new(x, 0.0))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    #[test]
    fn steep_tanh_normalization() {
        let f = RealFunction::tanh_affine(1.0, 10.0, 0.0, 0.0);
        let m = cosh_mollify(&f, 0.1).unwrap();
        assert!((m.alpha() - PI / 20.0).abs() < 1e-15);
        // quadrature oracle for [f]/2
        let half = 0.5 * quad::integrate(|t| 10.0 * super::super::function::sech2(10.0 * t), -24.0, 24.0, 400, 12);
        assert!((m.total_weight() - half).abs() < 1e-8);
        assert!((m.total_weight() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn odd_function_stays_odd() {
        let f = RealFunction::tanh_affine(1.0, 1.0, 0.0, 0.0);
        let m = cosh_mollify(&f, 0.05).unwrap();
        assert!(m.eval_real(0.0).abs() < 1e-12);
    }

    #[test]
    fn polynomial_tail_is_truncation() {
        let f = RealFunction::arctan_affine(1.0, 1.0, 0.0, 0.0);
        assert!(matches!(cosh_mollify(&f, 0.5), Err(Error::Truncation { .. })));
    }

    #[test]
    fn decreasing_input_rejected() {
        let f = RealFunction::tanh_affine(-1.0, 1.0, 0.0, 0.0);
        assert!(matches!(cosh_mollify(&f, 0.5), Err(Error::Monotonicity { .. })));
    }

    #[test]
    fn gaussian_of_constant_and_odd() {
        let one = gaussian_mollify(&RealFunction::constant(1.0), 0.7).unwrap();
        assert!((one.eval_real(0.3) - 1.0).abs() < 1e-12);
        let g = gaussian_mollify(&RealFunction::tanh_affine(1.0, 1.0, 0.0, 0.0), 0.5).unwrap();
        assert!(g.eval_real(0.0).abs() < 1e-14);
        let mut sup = 0.0f64;
        for k in -200..=200 {
            sup = sup.max(g.eval_real(k as f64 * 0.1).abs());
        }
        assert!(sup <= 1.0);
    }
}
