//! Averaged difference quotients `I_r(x) = int_0^1 h(w) (g(x+rw) - g(x-rw))/(2rw) dw`
//! with `h(w) = w log((1+w)/(1-w))`, and their convergence to `g'`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcspace::RealFunction;
use crate::quad;

/// `h(w) = 2 w atanh(w)`.
pub fn weight(w: f64) -> f64 {
    2.0 * w * w.atanh()
}

/// `2 sum_{m=1}^{terms} w^{2m}/(2m-1)`.
pub fn weight_series(w: f64, terms: usize) -> f64 {
    let w2 = w * w;
    let mut p = 1.0;
    let mut s = 0.0;
    for m in 1..=terms {
        p *= w2;
        s += p / (2 * m - 1) as f64;
    }
    2.0 * s
}

/// Quadrature for `int_0^1 . dw` after `w = 1 - e^{-u}`, which turns the
/// logarithmic endpoint singularity of `h` into exponential decay in `u`.
#[derive(Clone, Debug)]
pub struct AveragingProfile {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Default for AveragingProfile {
    fn default() -> Self {
        AveragingProfile::new(48, 16)
    }
}

impl AveragingProfile {
    /// Composite Gauss-Legendre on `u in [0, 48]`.
    pub fn new(panels: usize, order: usize) -> Self {
        let (u, wu) = quad::composite(0.0, 48.0, panels, order);
        let mut nodes = Vec::with_capacity(u.len());
        let mut weights = Vec::with_capacity(u.len());
        for (&u, &q) in u.iter().zip(&wu) {
            let e = (-u).exp();
            let w = -(-u).exp_m1();
            nodes.push(w);
            // h(w) dw with atanh(1 - e^{-u}) = (ln(2 - e^{-u}) + u)/2
            let h = w * ((2.0 - e).ln() + u);
            weights.push(q * e * h);
        }
        AveragingProfile { nodes, weights }
    }

    /// Nodes `w_i` in `(0, 1)`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `int_0^1 h`.
    pub fn integral(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `int_0^1 h(w) phi(w) dw`.
    pub fn integrate(&self, phi: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&w, &q)| q * phi(w))
            .sum()
    }
}

pub const QUOTIENT_TOL: f64 = 1e-9;

fn quotient(profile: &AveragingProfile, g: &RealFunction, x: f64, r: f64) -> f64 {
    profile.integrate(|w| (g.eval_real(x + r * w) - g.eval_real(x - r * w)) / (2.0 * r * w))
}

/// Largest panel count tried before giving up.
pub const MAX_PANELS: usize = 6144;

/// `I_r(x)`. Panels double from the default rule until two successive rules
/// agree; large `r` compresses the features of `g` toward `w = 0`.
pub fn averaged_quotient(g: &RealFunction, x: f64, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!("r must be positive, got {r}")));
    }
    let mut panels = 48;
    let mut coarse = quotient(&AveragingProfile::new(panels / 2, 16), g, x, r);
    loop {
        let fine = quotient(&AveragingProfile::new(panels, 16), g, x, r);
        let achieved = (fine - coarse).abs();
        let requested = QUOTIENT_TOL * fine.abs().max(1.0);
        if achieved <= requested {
            return Ok(fine);
        }
        if panels >= MAX_PANELS {
            return Err(Error::Accuracy {
                what: format!("averaged quotient at x = {x}, r = {r}"),
                achieved,
                requested,
            });
        }
        coarse = fine;
        panels *= 2;
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub rs: Vec<f64>,
    /// `max_x |I_r(x) - g'(x)|` per `r`.
    pub errors: Vec<f64>,
    /// Log-log slope; absent when all errors are at rounding level.
    pub slope: Option<f64>,
    /// `max_r error / r^2`.
    pub constant: f64,
}

/// Rounding floor below which errors carry no rate information.
pub const ROUNDING_FLOOR: f64 = 1e-13;

pub fn convergence_study(g: &RealFunction, xs: &[f64], rs: &[f64]) -> Result<ConvergenceReport> {
    if xs.is_empty() || rs.len() < 2 {
        return Err(Error::invalid("need a nonempty lattice and at least two radii"));
    }
    if rs.windows(2).any(|p| !(p[1] < p[0])) {
        return Err(Error::invalid("r-sequence must be strictly decreasing"));
    }
    let gp = xs
        .iter()
        .map(|&x| g.derivative(x))
        .collect::<Result<Vec<f64>>>()?;
    let mut errors = Vec::with_capacity(rs.len());
    for &r in rs {
        let mut e = 0.0f64;
        for (&x, &d) in xs.iter().zip(&gp) {
            e = e.max((averaged_quotient(g, x, r)? - d).abs());
        }
        errors.push(e);
    }
    let slope = if errors.iter().all(|&e| e > ROUNDING_FLOOR) {
        let lx: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
        let ly: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
        let n = lx.len() as f64;
        let mx = lx.iter().sum::<f64>() / n;
        let my = ly.iter().sum::<f64>() / n;
        let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
        Some(sxy / sxx)
    } else {
        None
    };
    let constant = rs
        .iter()
        .zip(&errors)
        .fold(0.0f64, |m, (r, e)| m.max(e / (r * r)));
    Ok(ConvergenceReport {
        rs: rs.to_vec(),
        errors,
        slope,
        constant,
    })
}
