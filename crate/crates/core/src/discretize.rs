//! Uniform periodic grids, quadrature, and the unitary Fourier convention
//! `h^(k) = (2 pi)^{-1/2} int h(t) e^{-ikt} dt`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{RealFunction, Term};

fn inv_sqrt_2pi() -> f64 {
    1.0 / (2.0 * PI).sqrt()
}

/// Nodes `x_j = -L + j Delta`, `j = 0..N-1`, `Delta = 2L/N`; momenta
/// `k_m = (pi/L) m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_width: f64,
    points: usize,
}

impl Grid {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "half-width must be positive and finite, got {half_width}"
            )));
        }
        if points < 8 {
            return Err(Error::InvalidGrid(format!("need N >= 8 points, got {points}")));
        }
        Ok(Grid { half_width, points })
    }

    /// Grid for transform routes: `N` must be a power of two.
    pub fn transform(half_width: f64, points: usize) -> Result<Self> {
        if !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "N = {points} is not a power of two"
            )));
        }
        Self::new(half_width, points)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.node(j)).collect()
    }

    pub fn momentum_spacing(&self) -> f64 {
        PI / self.half_width
    }

    /// Signed frequency index of DFT slot `m` (`m < N/2` maps to itself).
    pub fn frequency_index(&self, m: usize) -> i64 {
        let n = self.points as i64;
        let m = m as i64;
        if m < n / 2 {
            m
        } else {
            m - n
        }
    }

    /// Momenta in DFT order.
    pub fn momenta_fft_order(&self) -> Vec<f64> {
        (0..self.points)
            .map(|m| self.frequency_index(m) as f64 * self.momentum_spacing())
            .collect()
    }

    /// Momenta ascending, `m = -N/2 .. N/2 - 1`.
    pub fn momenta(&self) -> Vec<f64> {
        let h = (self.points / 2) as i64;
        (-h..h)
            .map(|m| m as f64 * self.momentum_spacing())
            .collect()
    }

    /// The grid whose nodes are this grid's ascending momenta.
    pub fn dual(&self) -> Grid {
        Grid {
            half_width: PI * self.points as f64 / (2.0 * self.half_width),
            points: self.points,
        }
    }
}

/// Periodic trapezoid weights: every node carries `Delta`, so the sum is
/// exactly `2L` (the end node `x = L` is identified with `x = -L`).
pub fn quadrature_weights(grid: &Grid) -> Vec<f64> {
    vec![grid.spacing(); grid.points()]
}

/// Forward/inverse DFT scaled by `N^{-1/2}`.
#[derive(Clone)]
pub struct UnitaryDft {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl UnitaryDft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        UnitaryDft {
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            scale: 1.0 / (n as f64).sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn forward(&self, v: &mut [Complex64]) {
        self.fwd.process(v);
        v.iter_mut().for_each(|z| *z *= self.scale);
    }

    pub fn inverse(&self, v: &mut [Complex64]) {
        self.inv.process(v);
        v.iter_mut().for_each(|z| *z *= self.scale);
    }
}

/// Samples of `h^` at the grid momenta (DFT order), from samples of `h` at
/// the nodes: `h^(k_m) = Delta/sqrt(2 pi) (-1)^m DFT(h)_m`.
pub fn continuous_transform(grid: &Grid, samples: &[f64]) -> Vec<Complex64> {
    let n = grid.points();
    let mut v: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut v);
    let c = grid.spacing() * inv_sqrt_2pi();
    for (m, z) in v.iter_mut().enumerate() {
        let sign = if grid.frequency_index(m).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        *z *= c * sign;
    }
    v
}

/// Ends must agree (periodic) or both be flat to `tol`.
pub fn check_periodizable(f: &RealFunction, grid: &Grid, name: &str, tol: f64) -> Result<()> {
    let l = grid.half_width();
    let d = grid.spacing();
    let left = f.eval_real(-l);
    let right = f.eval_real(l);
    let flat = (f.eval_real(-l + d) - left).abs().max((right - f.eval_real(l - d)).abs());
    let wrap = (right - left).abs();
    if flat <= tol || wrap <= tol {
        Ok(())
    } else {
        Err(Error::Periodization {
            which: name.to_string(),
            jump: flat.min(wrap),
            tol,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileRoute {
    ClosedForm,
    Fft,
}

#[derive(Clone, Debug)]
enum ProfileData {
    Closed(Vec<Term>),
    Table {
        /// `h` sampled at `t0 + l dt`, `l = 0..M-1`
        samples: Vec<f64>,
        t0: f64,
        dt: f64,
        /// `h^(j dk)` for `j = -M/2 .. M/2 - 1`, stored from index 0
        values: Vec<Complex64>,
        dk: f64,
    },
}

/// `h^` for `h = f'`, by closed form or by FFT of samples.
#[derive(Clone, Debug)]
pub struct FourierProfile {
    route: ProfileRoute,
    bracket: f64,
    data: ProfileData,
}

/// Truncation tolerance for the sampled derivative at the window edge,
/// relative to its peak.
pub const TAIL_TOL: f64 = 1e-12;

/// Closed-form `h^` for one term's derivative.
fn term_transform(term: &Term, k: Complex64) -> Complex64 {
    match *term {
        Term::Tanh {
            amplitude,
            rate,
            center,
        } => {
            // int a sech^2(a u) e^{-iku} du = pi k / (a sinh(pi k / 2a))
            let x = k * (PI / (2.0 * rate.abs()));
            let ratio = if x.norm() < 1e-4 {
                let x2 = x * x;
                2.0 * (1.0 - x2 / 6.0 + x2 * x2 * (7.0 / 360.0))
            } else {
                2.0 * x / x.sinh()
            };
            (-Complex64::i() * k * center).exp() * ratio * (amplitude * rate.signum() * inv_sqrt_2pi())
        }
        Term::Arctan {
            amplitude,
            scale,
            center,
        } => {
            // real k only: int b/(b^2+u^2) e^{-iku} du = pi e^{-b|k|}
            (-Complex64::i() * k * center).exp()
                * (amplitude * scale.signum() * PI * inv_sqrt_2pi() * (-scale.abs() * k.re.abs()).exp())
        }
        Term::Sine { .. } => Complex64::new(f64::NAN, f64::NAN),
    }
}

impl FourierProfile {
    /// Closed-form route; available for finite tanh/arctan sums.
    pub fn closed_form(f: &RealFunction) -> Result<Self> {
        let (terms, _) = f.closed_terms().ok_or_else(|| {
            Error::UnsupportedVariant(format!(
                "no closed-form transform for a {} function",
                f.variant_name()
            ))
        })?;
        if terms.iter().any(|t| matches!(t, Term::Sine { amplitude, .. } if *amplitude != 0.0)) {
            return Err(Error::UnsupportedVariant(
                "derivative of a sine term is not integrable".into(),
            ));
        }
        let terms: Vec<Term> = terms
            .into_iter()
            .filter(|t| !matches!(t, Term::Sine { .. }))
            .collect();
        let bracket = f.bracket().unwrap_or(0.0);
        Ok(FourierProfile {
            route: ProfileRoute::ClosedForm,
            bracket,
            data: ProfileData::Closed(terms),
        })
    }

    /// FFT route: `h = f'` is sampled on `2N` points so that the output
    /// lands exactly on multiples of `grid.spacing()` for `|j| <= N`.
    pub fn fft(f: &RealFunction, grid: &Grid) -> Result<Self> {
        let n = grid.points();
        let m = 2 * n;
        let dk = grid.spacing();
        let dt = 2.0 * PI / (m as f64 * dk);
        let t0 = -0.5 * m as f64 * dt;
        let samples = (0..m)
            .map(|l| f.derivative(t0 + l as f64 * dt))
            .collect::<Result<Vec<f64>>>()?;
        let peak = samples.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let tail = samples[0].abs().max(f.derivative(-t0)?.abs());
        if tail > TAIL_TOL * peak.max(1e-300) {
            return Err(Error::Truncation {
                what: format!("derivative transform window [{t0}, {}]", -t0),
                tail,
                tol: TAIL_TOL * peak,
            });
        }
        let mut v: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(m).process(&mut v);
        // slot (j mod M) holds sum_l h_l e^{-2 pi i j l / M}; the window
        // offset contributes (-1)^j
        let c = dt * inv_sqrt_2pi();
        let half = (m / 2) as i64;
        let values: Vec<Complex64> = (-half..half)
            .map(|j| {
                let slot = j.rem_euclid(m as i64) as usize;
                let sign = if j.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                v[slot] * (c * sign)
            })
            .collect();
        let bracket = f
            .bracket()
            .unwrap_or_else(|| samples.iter().sum::<f64>() * dt);
        Ok(FourierProfile {
            route: ProfileRoute::Fft,
            bracket,
            data: ProfileData::Table {
                samples,
                t0,
                dt,
                values,
                dk,
            },
        })
    }

    pub fn route(&self) -> ProfileRoute {
        self.route
    }

    /// `[f]`, so that `h^(0) = [f]/sqrt(2 pi)`.
    pub fn bracket(&self) -> f64 {
        self.bracket
    }

    /// Largest `|Im k|` for which the transform integral converges, when
    /// known analytically.
    pub fn moment_limit(&self) -> Option<f64> {
        match &self.data {
            ProfileData::Closed(terms) => Some(
                terms
                    .iter()
                    .map(|t| match *t {
                        Term::Tanh { rate, .. } => 2.0 * rate.abs(),
                        Term::Arctan { amplitude, .. } if amplitude != 0.0 => 0.0,
                        _ => f64::INFINITY,
                    })
                    .fold(f64::INFINITY, f64::min),
            ),
            ProfileData::Table { .. } => None,
        }
    }

    /// `h^(k)` at real `k`.
    pub fn eval(&self, k: f64) -> Complex64 {
        match &self.data {
            ProfileData::Closed(terms) => {
                let kc = Complex64::new(k, 0.0);
                terms.iter().map(|t| term_transform(t, kc)).sum()
            }
            ProfileData::Table {
                values, dk, samples, t0, dt, ..
            } => {
                let r = k / dk;
                let j = r.round();
                let half = (values.len() / 2) as f64;
                if (r - j).abs() < 1e-9 && j >= -half && j < half {
                    values[(j + half) as usize]
                } else {
                    direct_sum(samples, *t0, *dt, Complex64::new(k, 0.0))
                }
            }
        }
    }

    /// `h^(k)` at complex `k`; errors when the exponential moment diverges.
    pub fn eval_complex(&self, k: Complex64) -> Result<Complex64> {
        if k.im == 0.0 {
            return Ok(self.eval(k.re));
        }
        match &self.data {
            ProfileData::Closed(terms) => {
                let limit = self.moment_limit().unwrap_or(f64::INFINITY);
                if !(k.im.abs() < limit) {
                    return Err(Error::Divergence { im: k.im, limit });
                }
                Ok(terms.iter().map(|t| term_transform(t, k)).sum())
            }
            ProfileData::Table {
                samples, t0, dt, ..
            } => {
                let v = direct_sum(samples, *t0, *dt, k);
                let edge = samples[0].abs() * (k.im * t0).exp()
                    + samples[samples.len() - 1].abs() * (-k.im * t0).exp();
                if edge * inv_sqrt_2pi() > 1e-8 * v.norm() {
                    return Err(Error::Divergence {
                        im: k.im,
                        limit: f64::NAN,
                    });
                }
                Ok(v)
            }
        }
    }

    /// `h^(n Delta)` for `n = -(N-1) ..= N-1`, stored at index `n + N - 1`.
    pub fn offsets(&self, grid: &Grid) -> Vec<Complex64> {
        let n = grid.points() as i64;
        let d = grid.spacing();
        (-(n - 1)..n).map(|j| self.eval(j as f64 * d)).collect()
    }
}

fn direct_sum(samples: &[f64], t0: f64, dt: f64, k: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (l, &h) in samples.iter().enumerate() {
        let t = t0 + l as f64 * dt;
        acc += (-Complex64::i() * k * t).exp() * h;
    }
    acc * (dt * inv_sqrt_2pi())
}

/// Transform of `f'` for use with `grid`: closed form when available,
/// FFT otherwise.
pub fn fourier_deriv(f: &RealFunction, grid: &Grid) -> Result<FourierProfile> {
    match FourierProfile::closed_form(f) {
        Ok(p) => Ok(p),
        Err(Error::UnsupportedVariant(_)) if f.closed_terms().is_none() => {
            FourierProfile::fft(f, grid)
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::sech2;
    use crate::quad;

    #[test]
    fn weights_sum_to_width() {
        let g = Grid::new(1.0, 4).unwrap_err();
        assert!(matches!(g, Error::InvalidGrid(_)));
        let g = Grid::new(1.0, 8).unwrap();
        let s: f64 = quadrature_weights(&g).iter().sum();
        assert!((s - 2.0).abs() < 1e-15);
    }

    #[test]
    fn trapezoid_sech2() {
        let g = Grid::new(24.0, 2048).unwrap();
        let w = quadrature_weights(&g);
        let s: f64 = g.nodes().iter().zip(&w).map(|(x, w)| w * sech2(*x)).sum();
        assert!((s - 2.0).abs() < 1e-10);
    }

    #[test]
    fn unitary_roundtrip() {
        let dft = UnitaryDft::new(64);
        let orig: Vec<Complex64> = (0..64)
            .map(|k| Complex64::new((k as f64).sin(), (k as f64 * 0.3).cos()))
            .collect();
        let mut v = orig.clone();
        dft.forward(&mut v);
        let e1: f64 = orig.iter().map(|z| z.norm_sqr()).sum();
        let e2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        assert!((e1 - e2).abs() < 1e-12 * e1);
        dft.inverse(&mut v);
        for (a, b) in v.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn tanh_profile_at_zero() {
        let f = RealFunction::tanh_affine(1.0, 1.0, 0.0, 0.0);
        let p = FourierProfile::closed_form(&f).unwrap();
        assert!((p.eval(0.0).re - 2.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn closed_and_fft_routes_agree() {
        let g = Grid::transform(24.0, 2048).unwrap();
        let f = RealFunction::tanh_affine(1.0, 1.0, 0.0, 0.0);
        let a = FourierProfile::closed_form(&f).unwrap();
        let b = FourierProfile::fft(&f, &g).unwrap();
        for j in -400..=400 {
            let k = j as f64 * g.spacing();
            let (x, y) = (a.eval(k), b.eval(k));
            assert!((x - y).norm() < 1e-8 * x.norm().max(1e-12));
        }
    }

    #[test]
    fn imaginary_argument_matches_moment() {
        let f = RealFunction::tanh_affine(1.0, 1.0, 0.0, 0.0);
        let p = FourierProfile::closed_form(&f).unwrap();
        let v = p.eval_complex(Complex64::new(0.0, 0.8)).unwrap();
        let oracle = quad::integrate(|x| sech2(x) * (0.8 * x).exp(), -60.0, 60.0, 600, 10)
            / (2.0 * PI).sqrt();
        assert!(v.im.abs() < 1e-15);
        assert!((v.re - oracle).abs() < 1e-12 * oracle);
        assert!(matches!(
            p.eval_complex(Complex64::new(0.0, 2.0)),
            Err(Error::Divergence { .. })
        ));
    }

    #[test]
    fn continuous_transform_of_gaussian() {
        let g = Grid::transform(20.0, 512).unwrap();
        let s: Vec<f64> = g.nodes().iter().map(|x| (-x * x / 2.0).exp()).collect();
        let t = continuous_transform(&g, &s);
        for (k, v) in g.momenta_fft_order().iter().zip(&t) {
            assert!((v - Complex64::new((-k * k / 2.0).exp(), 0.0)).norm() < 1e-12);
        }
    }
}
