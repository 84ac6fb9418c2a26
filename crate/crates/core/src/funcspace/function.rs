use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::measure::TanhMeasure;
use crate::error::{Error, Result};
use crate::monotone::MonotoneFunction;

/// One summand of a closed-form catalog function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Term {
    /// `amplitude * tanh(rate * (t - center))`
    Tanh {
        amplitude: f64,
        rate: f64,
        center: f64,
    },
    /// `amplitude * arctan((t - center) / scale)`
    Arctan {
        amplitude: f64,
        scale: f64,
        center: f64,
    },
    /// `amplitude * sin(frequency * t + phase)`
    Sine {
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
}

impl Term {
    fn eval(&self, t: f64) -> f64 {
        match *self {
            Term::Tanh {
                amplitude,
                rate,
                center,
            } => amplitude * (rate * (t - center)).tanh(),
            Term::Arctan {
                amplitude,
                scale,
                center,
            } => amplitude * ((t - center) / scale).atan(),
            Term::Sine {
                amplitude,
                frequency,
                phase,
            } => amplitude * (frequency * t + phase).sin(),
        }
    }

    fn eval_complex(&self, z: Complex64) -> Complex64 {
        match *self {
            Term::Tanh {
                amplitude,
                rate,
                center,
            } => ctanh((z - center) * rate) * amplitude,
            Term::Arctan {
                amplitude,
                scale,
                center,
            } => ((z - center) / scale).atan() * amplitude,
            Term::Sine {
                amplitude,
                frequency,
                phase,
            } => (z * frequency + phase).sin() * amplitude,
        }
    }

    fn derivative(&self, t: f64) -> f64 {
        match *self {
            Term::Tanh {
                amplitude,
                rate,
                center,
            } => amplitude * rate * sech2(rate * (t - center)),
            Term::Arctan {
                amplitude,
                scale,
                center,
            } => {
                let u = t - center;
                amplitude * scale / (scale * scale + u * u)
            }
            Term::Sine {
                amplitude,
                frequency,
                phase,
            } => amplitude * frequency * (frequency * t + phase).cos(),
        }
    }

    /// Values at -inf and +inf.
    fn limits(&self) -> Option<(f64, f64)> {
        match *self {
            Term::Tanh { amplitude, rate, .. } => {
                let s = amplitude * rate.signum();
                Some((-s, s))
            }
            Term::Arctan {
                amplitude, scale, ..
            } => {
                let s = amplitude * scale.signum() * FRAC_PI_2;
                Some((-s, s))
            }
            Term::Sine { amplitude, .. } => {
                if amplitude == 0.0 {
                    Some((0.0, 0.0))
                } else {
                    None
                }
            }
        }
    }

    fn sup(&self) -> f64 {
        match *self {
            Term::Tanh { amplitude, .. } | Term::Sine { amplitude, .. } => amplitude.abs(),
            Term::Arctan { amplitude, .. } => amplitude.abs() * FRAC_PI_2,
        }
    }

    fn strip(&self) -> f64 {
        match *self {
            Term::Tanh { rate, .. } => {
                if rate == 0.0 {
                    f64::INFINITY
                } else {
                    FRAC_PI_2 / rate.abs()
                }
            }
            Term::Arctan { scale, .. } => scale.abs(),
            Term::Sine { .. } => f64::INFINITY,
        }
    }

    fn increasing(&self) -> bool {
        match *self {
            Term::Tanh { amplitude, rate, .. } => amplitude * rate >= 0.0,
            Term::Arctan {
                amplitude, scale, ..
            } => amplitude * scale >= 0.0,
            Term::Sine { amplitude, .. } => amplitude == 0.0,
        }
    }

    fn reflect(&self) -> Term {
        match *self {
            Term::Tanh {
                amplitude,
                rate,
                center,
            } => Term::Tanh {
                amplitude,
                rate,
                center: -center,
            },
            Term::Arctan {
                amplitude,
                scale,
                center,
            } => Term::Arctan {
                amplitude,
                scale,
                center: -center,
            },
            Term::Sine {
                amplitude,
                frequency,
                phase,
            } => Term::Sine {
                amplitude,
                frequency,
                phase: -phase,
            },
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Term::Tanh {
                amplitude,
                rate,
                center,
            } => [amplitude, rate, center].iter().all(|v| v.is_finite()),
            Term::Arctan {
                amplitude,
                scale,
                center,
            } => [amplitude, scale, center].iter().all(|v| v.is_finite()) && scale != 0.0,
            Term::Sine {
                amplitude,
                frequency,
                phase,
            } => [amplitude, frequency, phase].iter().all(|v| v.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("bad term parameters {self:?}")))
        }
    }
}

/// Finite sum of catalog terms plus a constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub terms: Vec<Term>,
    pub offset: f64,
}

/// Piecewise cubic Hermite interpolant through `(t_i, f_i)` with slopes from
/// a five-point Lagrange rule. Constant beyond the sample range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sampled {
    nodes: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl Sampled {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() || nodes.len() < 5 {
            return Err(Error::invalid(
                "sampled function needs at least 5 (t, f) pairs of equal length",
            ));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("sample nodes must be strictly increasing"));
        }
        if nodes.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("sample contains non-finite values"));
        }
        let slopes = five_point_slopes(&nodes, &values);
        Ok(Sampled {
            nodes,
            values,
            slopes,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    fn locate(&self, t: f64) -> Option<usize> {
        let n = self.nodes.len();
        if t < self.nodes[0] || t > self.nodes[n - 1] {
            return None;
        }
        let i = self.nodes.partition_point(|&x| x <= t);
        Some(i.clamp(1, n - 1) - 1)
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.nodes.len();
        match self.locate(t) {
            None if t < self.nodes[0] => self.values[0],
            None => self.values[n - 1],
            Some(i) => {
                let h = self.nodes[i + 1] - self.nodes[i];
                let s = (t - self.nodes[i]) / h;
                let (s2, s3) = (s * s, s * s * s);
                let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
                let h10 = s3 - 2.0 * s2 + s;
                let h01 = -2.0 * s3 + 3.0 * s2;
                let h11 = s3 - s2;
                h00 * self.values[i]
                    + h10 * h * self.slopes[i]
                    + h01 * self.values[i + 1]
                    + h11 * h * self.slopes[i + 1]
            }
        }
    }

    fn derivative(&self, t: f64) -> f64 {
        match self.locate(t) {
            None => 0.0,
            Some(i) => {
                let h = self.nodes[i + 1] - self.nodes[i];
                let s = (t - self.nodes[i]) / h;
                let s2 = s * s;
                let d00 = (6.0 * s2 - 6.0 * s) / h;
                let d10 = 3.0 * s2 - 4.0 * s + 1.0;
                let d01 = (-6.0 * s2 + 6.0 * s) / h;
                let d11 = 3.0 * s2 - 2.0 * s;
                d00 * self.values[i]
                    + d10 * self.slopes[i]
                    + d01 * self.values[i + 1]
                    + d11 * self.slopes[i + 1]
            }
        }
    }
}

/// Derivative of the Lagrange polynomial through five neighbouring nodes,
/// evaluated at the centre node (one-sided stencils at the ends).
pub(crate) fn five_point_slopes(t: &[f64], f: &[f64]) -> Vec<f64> {
    let n = t.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(2).min(n - 5);
            let idx: Vec<usize> = (lo..lo + 5).collect();
            let x = t[i];
            let mut d = 0.0;
            for &j in &idx {
                // l_j'(x) = sum_{m != j} prod_{k != j, m} (x - t_k) / prod_{k != j} (t_j - t_k)
                let mut denom = 1.0;
                for &k in &idx {
                    if k != j {
                        denom *= t[j] - t[k];
                    }
                }
                let mut num = 0.0;
                for &m in &idx {
                    if m == j {
                        continue;
                    }
                    let mut p = 1.0;
                    for &k in &idx {
                        if k != j && k != m {
                            p *= x - t[k];
                        }
                    }
                    num += p;
                }
                d += f[j] * num / denom;
            }
            d
        })
        .collect()
}

/// Gaussian convolution `psi_w * f`, evaluated by trapezoid quadrature with
/// doubling until two successive rules agree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Smoothed {
    pub inner: Box<RealFunction>,
    pub width: f64,
    pub tol: f64,
}

const SMOOTH_START: usize = 256;
const SMOOTH_MAX: usize = 1 << 16;
const GAUSS_CUT: f64 = 12.0;

impl Smoothed {
    fn quad(&self, z: Complex64, n: usize, deriv: bool) -> Complex64 {
        // integral of f(x - s) psi_w(s + i y) ds over the effective support
        let w = self.width;
        let y = z.im;
        let half = (y * y + (GAUSS_CUT * w).powi(2)).sqrt();
        let h = 2.0 * half / n as f64;
        let norm = 1.0 / (w * (2.0 * PI).sqrt());
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..=n {
            let s = -half + j as f64 * h;
            let zs = Complex64::new(s, y);
            let mut psi = (-(zs * zs) / (2.0 * w * w)).exp() * norm;
            if deriv {
                psi *= -zs / (w * w);
            }
            let fx = self.inner.eval_real(z.re - s);
            let wt = if j == 0 || j == n { 0.5 } else { 1.0 };
            acc += psi * (fx * wt);
        }
        acc * h
    }

    fn adaptive(&self, z: Complex64, deriv: bool) -> Result<Complex64> {
        let scale = self.inner.sup_bound().max(1.0);
        let mut n = SMOOTH_START;
        let mut prev = self.quad(z, n, deriv);
        loop {
            let next = self.quad(z, 2 * n, deriv);
            let err = (next - prev).norm();
            if err <= self.tol * scale {
                return Ok(next);
            }
            n *= 2;
            if n >= SMOOTH_MAX {
                return Err(Error::Accuracy {
                    what: "gaussian smoothing quadrature".into(),
                    achieved: err / scale,
                    requested: self.tol,
                });
            }
            prev = next;
        }
    }
}

/// A bounded real function of one real variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum RealFunction {
    ClosedForm(ClosedForm),
    TanhMeasure(TanhMeasure),
    Sampled(Sampled),
    Composed {
        outer: MonotoneFunction,
        inner: Box<RealFunction>,
    },
    Smoothed(Smoothed),
}

impl RealFunction {
    pub fn closed_form(terms: Vec<Term>, offset: f64) -> Result<Self> {
        for t in &terms {
            t.validate()?;
        }
        if !offset.is_finite() {
            return Err(Error::invalid("offset must be finite"));
        }
        Ok(RealFunction::ClosedForm(ClosedForm { terms, offset }))
    }

    /// `c * tanh(a (t - t0)) + d`
    pub fn tanh_affine(c: f64, a: f64, t0: f64, d: f64) -> Self {
        RealFunction::ClosedForm(ClosedForm {
            terms: vec![Term::Tanh {
                amplitude: c,
                rate: a,
                center: t0,
            }],
            offset: d,
        })
    }

    /// `c * arctan((t - t0) / b) + d`
    pub fn arctan_affine(c: f64, b: f64, t0: f64, d: f64) -> Self {
        RealFunction::ClosedForm(ClosedForm {
            terms: vec![Term::Arctan {
                amplitude: c,
                scale: b,
                center: t0,
            }],
            offset: d,
        })
    }

    /// `amplitude * sin(frequency * t + phase)`
    pub fn sine(amplitude: f64, frequency: f64, phase: f64) -> Self {
        RealFunction::ClosedForm(ClosedForm {
            terms: vec![Term::Sine {
                amplitude,
                frequency,
                phase,
            }],
            offset: 0.0,
        })
    }

    pub fn constant(d: f64) -> Self {
        RealFunction::ClosedForm(ClosedForm {
            terms: Vec::new(),
            offset: d,
        })
    }

    pub fn sampled(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(RealFunction::Sampled(Sampled::new(nodes, values)?))
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            RealFunction::ClosedForm(_) => "closed-form",
            RealFunction::TanhMeasure(_) => "tanh-measure",
            RealFunction::Sampled(_) => "sampled",
            RealFunction::Composed { .. } => "composed",
            RealFunction::Smoothed(_) => "smoothed",
        }
    }

    /// Value at a real point.
    pub fn eval_real(&self, t: f64) -> f64 {
        match self {
            RealFunction::ClosedForm(cf) => {
                cf.terms.iter().map(|term| term.eval(t)).sum::<f64>() + cf.offset
            }
            RealFunction::TanhMeasure(m) => m.eval_real(t),
            RealFunction::Sampled(s) => s.eval(t),
            RealFunction::Composed { outer, inner } => outer.eval(inner.eval_real(t)),
            RealFunction::Smoothed(s) => match s.adaptive(Complex64::new(t, 0.0), false) {
                Ok(v) => v.re,
                Err(_) => s.quad(Complex64::new(t, 0.0), SMOOTH_MAX, false).re,
            },
        }
    }

    /// Value at a complex point inside the analyticity strip. Real arguments
    /// return an exactly real result; `eval(conj z) = conj(eval z)` holds
    /// exactly because the lower half strip is computed by reflection.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if z.im == 0.0 {
            if let RealFunction::Smoothed(s) = self {
                return Ok(Complex64::new(s.adaptive(z, false)?.re, 0.0));
            }
            return Ok(Complex64::new(self.eval_real(z.re), 0.0));
        }
        if z.im < 0.0 {
            return Ok(self.eval(z.conj())?.conj());
        }
        if let RealFunction::Sampled(_) = self {
            return Err(Error::UnsupportedVariant(
                "sampled functions have no analytic continuation".into(),
            ));
        }
        let strip = self.strip_half_width();
        if !(z.im < strip) {
            return Err(Error::StripViolation { im: z.im, strip });
        }
        Ok(self.eval_upper(z))
    }

    fn eval_upper(&self, z: Complex64) -> Complex64 {
        match self {
            RealFunction::ClosedForm(cf) => {
                cf.terms
                    .iter()
                    .map(|term| term.eval_complex(z))
                    .sum::<Complex64>()
                    + cf.offset
            }
            RealFunction::TanhMeasure(m) => m.eval_complex(z),
            RealFunction::Sampled(_) => unreachable!(),
            RealFunction::Composed { outer, inner } => outer.eval_complex(inner.eval_upper(z)),
            RealFunction::Smoothed(s) => s
                .adaptive(z, false)
                .unwrap_or_else(|_| Complex64::new(f64::NAN, f64::NAN)),
        }
    }

    /// First derivative on the real line.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        Ok(match self {
            RealFunction::ClosedForm(cf) => cf.terms.iter().map(|term| term.derivative(t)).sum(),
            RealFunction::TanhMeasure(m) => m.derivative(t),
            RealFunction::Sampled(s) => s.derivative(t),
            RealFunction::Composed { outer, inner } => {
                let u = inner.eval_real(t);
                outer.derivative(u) * inner.derivative(t)?
            }
            RealFunction::Smoothed(s) => s.adaptive(Complex64::new(t, 0.0), true)?.re,
        })
    }

    /// Values at -inf and +inf, when they exist.
    pub fn limits(&self) -> Option<(f64, f64)> {
        match self {
            RealFunction::ClosedForm(cf) => {
                let mut lo = cf.offset;
                let mut hi = cf.offset;
                for term in &cf.terms {
                    let (a, b) = term.limits()?;
                    lo += a;
                    hi += b;
                }
                Some((lo, hi))
            }
            RealFunction::TanhMeasure(m) => {
                let w = m.total_weight();
                Some((m.offset() - w, m.offset() + w))
            }
            RealFunction::Sampled(s) => Some((s.values[0], *s.values.last().unwrap())),
            RealFunction::Composed { outer, inner } => {
                let (a, b) = inner.limits()?;
                Some((outer.eval(a), outer.eval(b)))
            }
            RealFunction::Smoothed(s) => s.inner.limits(),
        }
    }

    /// Signed bracket `f(inf) - f(-inf)`.
    pub fn bracket(&self) -> Option<f64> {
        self.limits().map(|(a, b)| b - a)
    }

    /// Upper bound on `sup |f|` over the real line.
    pub fn sup_bound(&self) -> f64 {
        match self {
            RealFunction::ClosedForm(cf) => {
                cf.terms.iter().map(Term::sup).sum::<f64>() + cf.offset.abs()
            }
            RealFunction::TanhMeasure(m) => m.total_weight() + m.offset().abs(),
            RealFunction::Sampled(s) => s.values.iter().fold(0.0, |a, v| a.max(v.abs())),
            RealFunction::Composed { outer, inner } => {
                let (lo, hi) = inner.range_hull();
                outer.eval(lo).abs().max(outer.eval(hi).abs())
            }
            RealFunction::Smoothed(s) => s.inner.sup_bound(),
        }
    }

    /// Closed interval containing the closure of the range.
    pub fn range_hull(&self) -> (f64, f64) {
        match self {
            RealFunction::ClosedForm(cf) => {
                if self.is_monotone_increasing() {
                    return self.limits().unwrap();
                }
                let s: f64 = cf.terms.iter().map(Term::sup).sum();
                (cf.offset - s, cf.offset + s)
            }
            RealFunction::TanhMeasure(_) => self.limits().unwrap(),
            RealFunction::Sampled(s) => s
                .values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                    (a.min(v), b.max(v))
                }),
            RealFunction::Composed { outer, inner } => {
                let (lo, hi) = inner.range_hull();
                (outer.eval(lo), outer.eval(hi))
            }
            RealFunction::Smoothed(s) => s.inner.range_hull(),
        }
    }

    /// Half-width of the strip `|Im z| < a` on which `eval` accepts complex
    /// arguments. Zero for sampled data.
    pub fn strip_half_width(&self) -> f64 {
        match self {
            RealFunction::ClosedForm(cf) => cf
                .terms
                .iter()
                .map(Term::strip)
                .fold(f64::INFINITY, f64::min),
            RealFunction::TanhMeasure(m) => m.alpha(),
            RealFunction::Sampled(_) => 0.0,
            RealFunction::Composed { inner, .. } => inner.strip_half_width(),
            RealFunction::Smoothed(_) => f64::INFINITY,
        }
    }

    /// Structural monotonicity: true when every building block is increasing.
    pub fn is_monotone_increasing(&self) -> bool {
        match self {
            RealFunction::ClosedForm(cf) => cf.terms.iter().all(Term::increasing),
            RealFunction::TanhMeasure(_) => true,
            RealFunction::Sampled(s) => s.values.windows(2).all(|w| w[1] >= w[0]),
            RealFunction::Composed { outer, inner } => {
                outer.is_increasing() && inner.is_monotone_increasing()
            }
            RealFunction::Smoothed(s) => s.inner.is_monotone_increasing(),
        }
    }

    /// Closed-form terms when the function is a finite tanh/arctan/sine sum
    /// (a tanh measure counts as a tanh sum).
    pub fn closed_terms(&self) -> Option<(Vec<Term>, f64)> {
        match self {
            RealFunction::ClosedForm(cf) => Some((cf.terms.clone(), cf.offset)),
            RealFunction::TanhMeasure(m) => Some((
                m.atoms()
                    .iter()
                    .map(|&(s, w)| Term::Tanh {
                        amplitude: w,
                        rate: m.alpha_hat(),
                        center: s,
                    })
                    .collect(),
                m.offset(),
            )),
            _ => None,
        }
    }

    /// The reflected function `t -> -f(-t)`.
    pub fn reflect(&self) -> Result<Self> {
        match self {
            RealFunction::ClosedForm(cf) => Ok(RealFunction::ClosedForm(ClosedForm {
                terms: cf.terms.iter().map(Term::reflect).collect(),
                offset: -cf.offset,
            })),
            RealFunction::TanhMeasure(m) => Ok(RealFunction::TanhMeasure(m.reflect())),
            RealFunction::Sampled(s) => {
                let nodes: Vec<f64> = s.nodes.iter().rev().map(|t| -t).collect();
                let values: Vec<f64> = s.values.iter().rev().map(|v| -v).collect();
                RealFunction::sampled(nodes, values)
            }
            _ => Err(Error::UnsupportedVariant(format!(
                "reflection of a {} function",
                self.variant_name()
            ))),
        }
    }
}

impl From<TanhMeasure> for RealFunction {
    fn from(m: TanhMeasure) -> Self {
        RealFunction::TanhMeasure(m)
    }
}

/// `sech^2(x)`, safe for large |x|.
pub fn sech2(x: f64) -> f64 {
    let a = x.abs();
    if a > 350.0 {
        return 0.0;
    }
    let e = (-2.0 * a).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// Complex tanh that does not overflow for large |Re z|.
pub fn ctanh(z: Complex64) -> Complex64 {
    if z.re < 0.0 {
        return -ctanh(-z);
    }
    let e = (-2.0 * z).exp();
    (1.0 - e) / (1.0 + e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_at_imaginary_point() {
        let f = RealFunction::tanh_affine(1.0, 1.0, 0.0, 0.0);
        let v = f.eval(Complex64::new(0.0, PI / 4.0)).unwrap();
        // tanh(iy) = i tan(y); cross-check with the Taylor series of tan
        let y = PI / 4.0;
        let mut series = 0.0;
        let coeffs = [
            1.0,
            1.0 / 3.0,
            2.0 / 15.0,
            17.0 / 315.0,
            62.0 / 2835.0,
            1382.0 / 155925.0,
            21844.0 / 6081075.0,
            929569.0 / 638512875.0,
        ];
        for (k, c) in coeffs.iter().enumerate() {
            series += c * y.powi(2 * k as i32 + 1);
        }
        assert!(v.re.abs() < 1e-15);
        assert!((v.im - 1.0).abs() < 1e-14);
        assert!((series - 1.0).abs() < 2e-3);
    }

    #[test]
    fn real_argument_has_zero_imaginary_part() {
        let f = RealFunction::arctan_affine(1.0, 2.0, 0.3, 0.1);
        assert_eq!(f.eval(Complex64::new(0.7, 0.0)).unwrap().im, 0.0);
    }

    #[test]
    fn strip_is_enforced() {
        let f = RealFunction::tanh_affine(1.0, 2.0, 0.0, 0.0);
        let e = f.eval(Complex64::new(0.0, 0.8)).unwrap_err();
        assert!(matches!(e, Error::StripViolation { .. }));
    }

    #[test]
    fn sampled_rejects_complex() {
        let t: Vec<f64> = (0..20).map(|k| k as f64 * 0.5 - 5.0).collect();
        let v: Vec<f64> = t.iter().map(|x| x.tanh()).collect();
        let f = RealFunction::sampled(t, v).unwrap();
        assert!(matches!(
            f.eval(Complex64::new(0.0, 0.1)),
            Err(Error::UnsupportedVariant(_))
        ));
    }

    #[test]
    fn sampled_interpolates_smooth_data() {
        let t: Vec<f64> = (0..=400).map(|k| -8.0 + k as f64 * 0.04).collect();
        let v: Vec<f64> = t.iter().map(|x| x.tanh()).collect();
        let f = RealFunction::sampled(t, v).unwrap();
        for &x in &[-3.3, -0.77, 0.0, 0.123, 2.5] {
            assert!((f.eval_real(x) - x.tanh()).abs() < 1e-7);
            assert!((f.derivative(x).unwrap() - sech2(x)).abs() < 1e-5);
        }
    }

    #[test]
    fn reflection_is_minus_f_of_minus_t() {
        let f = RealFunction::closed_form(
            vec![
                Term::Tanh {
                    amplitude: 0.7,
                    rate: 1.3,
                    center: 0.4,
                },
                Term::Arctan {
                    amplitude: 0.2,
                    scale: 2.0,
                    center: -1.0,
                },
                Term::Sine {
                    amplitude: 0.1,
                    frequency: 3.0,
                    phase: 0.5,
                },
            ],
            0.25,
        )
        .unwrap();
        let r = f.reflect().unwrap();
        for &t in &[-2.0, -0.3, 0.0, 1.7] {
            assert!((r.eval_real(t) + f.eval_real(-t)).abs() < 1e-14);
        }
    }

    #[test]
    fn stable_complex_tanh() {
        let v = ctanh(Complex64::new(800.0, 0.3));
        assert!((v - 1.0).norm() < 1e-15);
        let v = ctanh(Complex64::new(-800.0, 0.3));
        assert!((v + 1.0).norm() < 1e-15);
    }
}
