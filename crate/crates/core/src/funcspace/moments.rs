use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use super::function::RealFunction;
use crate::error::{Error, Result};
use crate::quad;

/// Edge integrand (per unit length) relative to the integral above which the
/// moment is flagged as divergent.
pub const DIVERGENCE_RATIO: f64 = 1e-3;

#[derive(Clone, Debug, Serialize)]
pub struct ExpMoment {
    pub value: f64,
    pub edge_ratio: f64,
    pub divergent: bool,
}

/// `int_{-W}^{W} f'(t) e^{2bt} dt` by composite Gauss–Legendre.
pub fn exp_moment(f: &RealFunction, b: f64, window: f64) -> Result<ExpMoment> {
    if !(window > 0.0 && window.is_finite() && b.is_finite()) {
        return Err(Error::invalid("moment window must be positive and b finite"));
    }
    let panels = (window * 16.0).ceil().max(64.0) as usize;
    let (x, w) = quad::composite(-window, window, panels, 10);
    let mut peak = 0.0f64;
    let mut vals = Vec::with_capacity(x.len());
    for &t in &x {
        let d = f.derivative(t)?;
        peak = peak.max(d.abs());
        vals.push(d);
    }
    if let Some((i, &d)) = vals
        .iter()
        .enumerate()
        .find(|(_, &d)| d < -1e-12 * peak.max(1e-300))
    {
        return Err(Error::Monotonicity { at: x[i], value: d });
    }
    let value: f64 = vals
        .iter()
        .zip(&x)
        .zip(&w)
        .map(|((d, t), wi)| wi * d * (2.0 * b * t).exp())
        .sum();
    let edge = [-window, window]
        .iter()
        .map(|&t| f.derivative(t).map(|d| d.abs() * (2.0 * b * t).exp()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let edge_ratio = if value > 0.0 { edge / value } else { 0.0 };
    Ok(ExpMoment {
        value,
        edge_ratio,
        divergent: edge_ratio > DIVERGENCE_RATIO,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    /// Rate in `f'(t) ~ C exp(-2 beta |t|)`, the slower of the two tails.
    pub beta: f64,
    pub beta_left: f64,
    pub beta_right: f64,
    /// Relative RMS residual of the log-linear fit.
    pub residual: f64,
    /// `pi / (2 beta)`: strip half-width of the matching tanh kernel.
    pub implied_strip: f64,
}

pub const DECAY_FIT_THRESHOLD: f64 = 1e-3;

pub fn estimate_decay_rate(f: &RealFunction) -> Result<DecayFit> {
    estimate_decay_rate_with(f, 24.0, 64)
}

/// Least-squares fit of `log f'` against `|t|` on the outer half of
/// `[-window, window]`, each tail separately.
pub fn estimate_decay_rate_with(f: &RealFunction, window: f64, per_side: usize) -> Result<DecayFit> {
    let mut betas = [0.0; 2];
    let mut worst = 0.0f64;
    for (side, sign) in [-1.0f64, 1.0].iter().enumerate() {
        let mut ts = Vec::new();
        let mut ys = Vec::new();
        for k in 0..per_side {
            let r = 0.5 * window + 0.5 * window * k as f64 / (per_side - 1) as f64;
            let t = sign * r;
            let d = f.derivative(t)?;
            if !(d > 0.0) {
                return Err(Error::Monotonicity { at: t, value: d });
            }
            let y = d.ln();
            if y < -690.0 {
                // underflow zone; the remaining points carry no information
                break;
            }
            ts.push(r);
            ys.push(y);
        }
        if ts.len() < 8 {
            return Err(Error::invalid(
                "derivative underflows on the outer window; shrink the window",
            ));
        }
        let n = ts.len() as f64;
        let mt = ts.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = ts.iter().map(|t| (t - mt).powi(2)).sum();
        let sxy: f64 = ts.iter().zip(&ys).map(|(t, y)| (t - mt) * (y - my)).sum();
        let slope = sxy / sxx;
        let rms = (ts
            .iter()
            .zip(&ys)
            .map(|(t, y)| (y - my - slope * (t - mt)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        let span = (slope * (ts[ts.len() - 1] - ts[0])).abs().max(1e-300);
        worst = worst.max(rms / span);
        betas[side] = -slope / 2.0;
    }
    if worst > DECAY_FIT_THRESHOLD {
        return Err(Error::FitQuality {
            residual: worst,
            threshold: DECAY_FIT_THRESHOLD,
        });
    }
    let beta = betas[0].min(betas[1]);
    Ok(DecayFit {
        beta,
        beta_left: betas[0],
        beta_right: betas[1],
        residual: worst,
        implied_strip: FRAC_PI_2 / beta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zeroth_moment_is_bracket() {
        let f = RealFunction::tanh_affine(1.0, 1.0, 0.0, 0.0);
        let m = exp_moment(&f, 0.0, 30.0).unwrap();
        assert!((m.value - 2.0).abs() < 1e-10);
        assert!(!m.divergent);
    }

    #[test]
    fn moment_matches_closed_form() {
        // int sech^2(t) e^{kt} dt = pi k / sin(pi k / 2) for |k| < 2
        let f = RealFunction::tanh_affine(1.0, 1.0, 0.0, 0.0);
        let k: f64 = 1.2;
        let m = exp_moment(&f, k / 2.0, 60.0).unwrap();
        let exact = PI * k / (PI * k / 2.0).sin();
        assert!((m.value - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn divergence_flag() {
        let f = RealFunction::tanh_affine(1.0, 1.0, 0.0, 0.0);
        assert!(!exp_moment(&f, 0.9, 40.0).unwrap().divergent);
        for w in [20.0, 30.0, 40.0] {
            assert!(exp_moment(&f, 1.1, w).unwrap().divergent);
        }
    }

    #[test]
    fn decay_rates() {
        let b1 = estimate_decay_rate(&RealFunction::tanh_affine(1.0, 1.0, 0.0, 0.0)).unwrap();
        assert!((b1.beta - 1.0).abs() < 0.02);
        let b2 = estimate_decay_rate(&RealFunction::tanh_affine(1.0, 2.0, 0.0, 0.0)).unwrap();
        assert!((b2.beta - 2.0).abs() < 0.04);
        let e = estimate_decay_rate(&RealFunction::arctan_affine(1.0, 2.0, 0.0, 0.0)).unwrap_err();
        assert!(matches!(e, Error::FitQuality { .. }));
    }
}
