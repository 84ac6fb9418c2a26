use num_complex::Complex64;
use serde::Serialize;

use super::function::RealFunction;
use crate::error::Result;

pub const HERGLOTZ_TOL: f64 = 1e-10;
pub const STRIP_MARGIN: f64 = 0.95;

#[derive(Clone, Debug, Serialize)]
pub struct HerglotzReport {
    pub alpha: f64,
    pub min_im: f64,
    pub argmin: (f64, f64),
    pub points: usize,
    /// Lattice rows that lie beyond the function's own strip and could not
    /// be evaluated.
    pub strip_limited: bool,
    pub function_strip: f64,
    pub pass: bool,
}

/// Sample `Im f(z)` on `{0 < Im z <= 0.95 alpha, |Re z| <= window}`.
/// `samples` points along the real axis, `samples / 4` (at least 4) rows.
pub fn herglotz_check(f: &RealFunction, alpha: f64, samples: usize) -> Result<HerglotzReport> {
    herglotz_check_with(f, alpha, samples, 24.0)
}

pub fn herglotz_check_with(
    f: &RealFunction,
    alpha: f64,
    samples: usize,
    window: f64,
) -> Result<HerglotzReport> {
    let nx = samples.max(2);
    let ny = (samples / 4).max(4);
    let strip = f.strip_half_width();
    let mut min_im = f64::INFINITY;
    let mut argmin = (0.0, 0.0);
    let mut points = 0;
    let mut strip_limited = false;
    for r in 1..=ny {
        let y = STRIP_MARGIN * alpha * r as f64 / ny as f64;
        if y >= strip {
            strip_limited = true;
            continue;
        }
        for c in 0..nx {
            let x = -window + 2.0 * window * c as f64 / (nx - 1) as f64;
            let v = f.eval(Complex64::new(x, y))?;
            points += 1;
            if v.im < min_im {
                min_im = v.im;
                argmin = (x, y);
            }
        }
    }
    if points == 0 {
        // every row was out of reach: nothing certifies membership
        let y = strip * 0.5;
        let v = f.eval(Complex64::new(0.0, y))?;
        min_im = v.im;
        argmin = (0.0, y);
        points = 1;
    }
    Ok(HerglotzReport {
        alpha,
        min_im,
        argmin,
        points,
        strip_limited,
        function_strip: strip,
        pass: !strip_limited && min_im >= -HERGLOTZ_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::TanhMeasure;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn tanh_is_herglotz_on_its_strip() {
        let f = RealFunction::tanh_affine(1.0, 1.0, 0.0, 0.0);
        let r = herglotz_check(&f, FRAC_PI_2, 80).unwrap();
        assert!(r.pass && r.min_im >= 0.0);
    }

    #[test]
    fn steeper_tanh_fails_at_wider_strip() {
        let f = RealFunction::tanh_affine(1.0, 2.0, 0.0, 0.0);
        let r = herglotz_check(&f, FRAC_PI_2, 80).unwrap();
        assert!(!r.pass && r.strip_limited);
        assert!((r.function_strip - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn negative_weight_breaks_it() {
        let m = TanhMeasure::new(vec![(-1.0, 0.5), (1.5, 0.3)], 0.0, 1.0).unwrap();
        assert!(herglotz_check(&m.clone().into_function(), 1.0, 80).unwrap().pass);
        let bad = m.with_weight_unchecked(1, -0.3).into_function();
        assert!(!herglotz_check(&bad, 1.0, 80).unwrap().pass);
    }
}
