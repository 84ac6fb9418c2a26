//! Operator-monotone catalog, randomized Loewner order test, and
//! composition experiments.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::commutator::{build_nystrom_x, spectrum, SpectralReport, RANK_THRESHOLD};
use crate::discretize::Grid;
use crate::error::{Error, Result};
use crate::funcspace::{ctanh, RealFunction};
use crate::linalg;

/// Scalar function with an open domain interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum MonotoneFunction {
    /// `slope * x + intercept`
    Affine { slope: f64, intercept: f64 },
    /// `(x + shift)^exponent` on `(-shift, inf)`
    Power { exponent: f64, shift: f64 },
    /// `ln(x + shift)` on `(-shift, inf)`
    Log { shift: f64 },
    /// `-1 / (x + shift)` on `(-shift, inf)`
    NegReciprocal { shift: f64 },
    /// `(a x + b) / (c x + d)` on the component of `R \ {-d/c}` to the
    /// right of the pole when `c > 0`, to the left when `c < 0`
    Mobius { a: f64, b: f64, c: f64, d: f64 },
    /// `x^2` on `(lo, hi)`
    Square { lo: f64, hi: f64 },
    /// `tanh(rate * x)`
    Tanh { rate: f64 },
    /// `arctan(x)`
    Arctan,
}

impl MonotoneFunction {
    pub fn identity() -> Self {
        MonotoneFunction::Affine {
            slope: 1.0,
            intercept: 0.0,
        }
    }

    pub fn sqrt(shift: f64) -> Self {
        MonotoneFunction::Power {
            exponent: 0.5,
            shift,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            MonotoneFunction::Affine { slope, intercept } => format!("{slope}*x+{intercept}"),
            MonotoneFunction::Power { exponent, shift } => format!("(x+{shift})^{exponent}"),
            MonotoneFunction::Log { shift } => format!("log(x+{shift})"),
            MonotoneFunction::NegReciprocal { shift } => format!("-1/(x+{shift})"),
            MonotoneFunction::Mobius { a, b, c, d } => format!("({a}x+{b})/({c}x+{d})"),
            MonotoneFunction::Square { lo, hi } => format!("x^2 on ({lo},{hi})"),
            MonotoneFunction::Tanh { rate } => format!("tanh({rate}x)"),
            MonotoneFunction::Arctan => "arctan(x)".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::invalid(format!("{}: {m}", self.label())));
        match *self {
            MonotoneFunction::Affine { slope, intercept } => {
                if !(slope.is_finite() && intercept.is_finite()) {
                    return bad("non-finite parameters");
                }
            }
            MonotoneFunction::Power { exponent, shift } => {
                if !(exponent > 0.0 && exponent <= 1.0 && shift.is_finite()) {
                    return bad("exponent must lie in (0, 1]");
                }
            }
            MonotoneFunction::Log { shift } | MonotoneFunction::NegReciprocal { shift } => {
                if !shift.is_finite() {
                    return bad("non-finite shift");
                }
            }
            MonotoneFunction::Mobius { a, b, c, d } => {
                if !(a * d - b * c > 0.0) {
                    return bad("determinant ad - bc must be positive");
                }
            }
            MonotoneFunction::Square { lo, hi } => {
                if !(lo < hi) {
                    return bad("empty domain");
                }
            }
            MonotoneFunction::Tanh { rate } => {
                if !(rate > 0.0) {
                    return bad("rate must be positive");
                }
            }
            MonotoneFunction::Arctan => {}
        }
        Ok(())
    }

    /// Open domain interval.
    pub fn domain(&self) -> (f64, f64) {
        use MonotoneFunction::*;
        match *self {
            Affine { .. } | Tanh { .. } | Arctan => (f64::NEG_INFINITY, f64::INFINITY),
            Power { shift, .. } | Log { shift } | NegReciprocal { shift } => (-shift, f64::INFINITY),
            Mobius { c, d, .. } => {
                if c > 0.0 {
                    (-d / c, f64::INFINITY)
                } else if c < 0.0 {
                    (f64::NEG_INFINITY, -d / c)
                } else {
                    (f64::NEG_INFINITY, f64::INFINITY)
                }
            }
            Square { lo, hi } => (lo, hi),
        }
    }

    /// Listed as operator monotone on its domain.
    pub fn claimed_monotone(&self) -> bool {
        use MonotoneFunction::*;
        match *self {
            Affine { slope, .. } => slope >= 0.0,
            Power { exponent, .. } => exponent > 0.0 && exponent <= 1.0,
            Log { .. } | NegReciprocal { .. } => true,
            Mobius { a, b, c, d } => a * d - b * c > 0.0,
            Square { .. } | Tanh { .. } | Arctan => false,
        }
    }

    /// Increasing as a scalar function on its domain.
    pub fn is_increasing(&self) -> bool {
        match *self {
            MonotoneFunction::Affine { slope, .. } => slope >= 0.0,
            MonotoneFunction::Square { lo, .. } => lo >= 0.0,
            _ => true,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        use MonotoneFunction::*;
        match *self {
            Affine { slope, intercept } => slope * x + intercept,
            Power { exponent, shift } => (x + shift).powf(exponent),
            Log { shift } => (x + shift).ln(),
            NegReciprocal { shift } => -1.0 / (x + shift),
            Mobius { a, b, c, d } => (a * x + b) / (c * x + d),
            Square { .. } => x * x,
            Tanh { rate } => (rate * x).tanh(),
            Arctan => x.atan(),
        }
    }

    /// Principal-branch continuation.
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        use MonotoneFunction::*;
        match *self {
            Affine { slope, intercept } => z * slope + intercept,
            Power { exponent, shift } => (z + shift).powf(exponent),
            Log { shift } => (z + shift).ln(),
            NegReciprocal { shift } => -1.0 / (z + shift),
            Mobius { a, b, c, d } => (z * a + b) / (z * c + d),
            Square { .. } => z * z,
            Tanh { rate } => ctanh(z * rate),
            Arctan => z.atan(),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        use MonotoneFunction::*;
        match *self {
            Affine { slope, .. } => slope,
            Power { exponent, shift } => exponent * (x + shift).powf(exponent - 1.0),
            Log { shift } => 1.0 / (x + shift),
            NegReciprocal { shift } => 1.0 / ((x + shift) * (x + shift)),
            Mobius { a, b, c, d } => (a * d - b * c) / ((c * x + d) * (c * x + d)),
            Square { .. } => 2.0 * x,
            Tanh { rate } => rate * crate::funcspace::sech2(rate * x),
            Arctan => 1.0 / (1.0 + x * x),
        }
    }

    /// `F(A)` for a real symmetric `A` via its eigendecomposition.
    pub fn apply_matrix(&self, a: &Array2<f64>) -> Result<Array2<f64>> {
        let (w, v) = linalg::eigh_real(a)?;
        let n = w.len();
        let fw: Vec<f64> = w.iter().map(|&x| self.eval(x)).collect();
        let mut out = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                out[[i, j]] = (0..n).map(|k| v[[i, k]] * fw[k] * v[[j, k]]).sum();
            }
        }
        Ok(out)
    }
}

/// Catalog entries listed as operator monotone.
pub fn monotone_catalog() -> Vec<MonotoneFunction> {
    use MonotoneFunction::*;
    vec![
        Affine {
            slope: 2.0,
            intercept: -0.5,
        },
        Power {
            exponent: 0.5,
            shift: 0.0,
        },
        Power {
            exponent: 1.0 / 3.0,
            shift: 0.0,
        },
        Power {
            exponent: 0.75,
            shift: 0.0,
        },
        Log { shift: 0.0 },
        Log { shift: 2.0 },
        NegReciprocal { shift: 0.0 },
        Mobius {
            a: 2.0,
            b: 1.0,
            c: 1.0,
            d: 3.0,
        },
    ]
}

/// Entries that are increasing but not operator monotone on their domain.
pub fn negative_controls() -> Vec<MonotoneFunction> {
    vec![
        MonotoneFunction::Square { lo: 0.0, hi: 2.0 },
        MonotoneFunction::Tanh { rate: 1.0 },
        MonotoneFunction::Arctan,
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct LoewnerReport {
    pub function: String,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// `min_trials lambda_min(F(A) - F(B))`
    pub min_eig: f64,
    pub scale: f64,
    pub violations: usize,
    /// 1-based index of the first violating trial.
    pub first_violation: Option<usize>,
    pub resamples: usize,
    pub pass: bool,
}

pub const LOEWNER_TOL: f64 = 1e-10;
pub const MAX_RESAMPLES: usize = 100;

fn sample_interval(dom: (f64, f64)) -> (f64, f64) {
    let (lo, hi) = dom;
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => {
            let w = hi - lo;
            (lo + 0.02 * w, hi - 0.02 * w)
        }
        (true, false) => (lo + 0.01, lo + 8.0),
        (false, true) => (hi - 8.0, hi - 0.01),
        (false, false) => (-4.0, 4.0),
    }
}

fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Result<Array2<f64>> {
    let mut g = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = rng.sample(StandardNormal);
            g[[i, j]] = v;
            g[[j, i]] = v;
        }
    }
    Ok(linalg::eigh_real(&g)?.1)
}

fn similarity(q: &Array2<f64>, d: &[f64]) -> Array2<f64> {
    let n = d.len();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            out[[i, j]] = (0..n).map(|k| q[[i, k]] * d[k] * q[[j, k]]).sum();
        }
    }
    out
}

/// Random search for `A >= B` with `F(A) - F(B)` not PSD.
pub fn loewner_matrix_test(f: &MonotoneFunction, n: usize, trials: usize, seed: u64) -> Result<LoewnerReport> {
    if n < 2 {
        return Err(Error::invalid("Loewner test needs n >= 2"));
    }
    f.validate()?;
    let dom = f.domain();
    let (a, b) = sample_interval(dom);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_eig = f64::INFINITY;
    let mut scale = 0.0f64;
    let mut violations = 0;
    let mut first = None;
    let mut resamples = 0;
    for trial in 1..=trials {
        let (bm, am) = loop {
            let q = random_orthogonal(n, &mut rng)?;
            let top = a + (b - a) * rng.random_range(0.2..0.95);
            let spec: Vec<f64> = (0..n).map(|_| rng.random_range(a..top)).collect();
            let bm = similarity(&q, &spec);
            let rank = rng.random_range(1..=n);
            let mut r = Array2::<f64>::zeros((n, rank));
            for v in r.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            let c = r.dot(&r.t());
            let cmax = linalg::eigh_real(&c)?.0[n - 1];
            let bmax = spec.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
            let t = rng.random_range(0.05..1.0) * (b - bmax) / cmax;
            let am = &bm + &(c * t);
            let (wa, _) = linalg::eigh_real(&am)?;
            if cmax > 0.0 && wa[0] > dom.0 && wa[n - 1] < dom.1 && wa[n - 1] <= b {
                break (bm, am);
            }
            resamples += 1;
            if resamples > MAX_RESAMPLES {
                return Err(Error::invalid(
                    "Loewner sampling kept leaving the domain; resample budget exhausted",
                ));
            }
        };
        let fa = f.apply_matrix(&am)?;
        let fb = f.apply_matrix(&bm)?;
        let d = &fa - &fb;
        let lam = linalg::eigh_real(&d)?.0[0];
        let s = fa
            .iter()
            .chain(fb.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1e-300);
        scale = scale.max(s);
        if lam < min_eig {
            min_eig = lam;
        }
        if lam < -LOEWNER_TOL * s {
            violations += 1;
            first.get_or_insert(trial);
        }
    }
    Ok(LoewnerReport {
        function: f.label(),
        n,
        trials,
        seed,
        min_eig,
        scale,
        violations,
        first_violation: first,
        resamples,
        pass: violations == 0,
    })
}

fn contain(name: &str, outer: &MonotoneFunction, inner: &RealFunction) -> Result<()> {
    let (lo, hi) = inner.range_hull();
    let (dlo, dhi) = outer.domain();
    if !(lo > dlo) {
        return Err(Error::Containment {
            name: format!("{} applied to {name}", outer.label()),
            endpoint: format!("inf range({name})"),
            value: lo,
            lo: dlo,
            hi: dhi,
        });
    }
    if !(hi < dhi) {
        return Err(Error::Containment {
            name: format!("{} applied to {name}", outer.label()),
            endpoint: format!("sup range({name})"),
            value: hi,
            lo: dlo,
            hi: dhi,
        });
    }
    Ok(())
}

fn compose(outer: &MonotoneFunction, inner: &RealFunction) -> RealFunction {
    if *outer == MonotoneFunction::identity() {
        return inner.clone();
    }
    RealFunction::Composed {
        outer: outer.clone(),
        inner: Box::new(inner.clone()),
    }
}

/// `(F o f, G o g)` after checking that the closed ranges lie inside the
/// open domains.
pub fn compose_pair(
    ff: &MonotoneFunction,
    f: &RealFunction,
    gg: &MonotoneFunction,
    g: &RealFunction,
) -> Result<(RealFunction, RealFunction)> {
    ff.validate()?;
    gg.validate()?;
    contain("f", ff, f)?;
    contain("g", gg, g)?;
    Ok((compose(ff, f), compose(gg, g)))
}

/// Spectrum of the Nyström-x operator of the composed pair.
pub fn composition_positivity_experiment(
    ff: &MonotoneFunction,
    f: &RealFunction,
    gg: &MonotoneFunction,
    g: &RealFunction,
    grid: &Grid,
) -> Result<SpectralReport> {
    let (cf, cg) = compose_pair(ff, f, gg, g)?;
    let op = build_nystrom_x(&cf, &cg, grid)?;
    spectrum(&op, RANK_THRESHOLD)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_is_falsified() {
        let r = loewner_matrix_test(&MonotoneFunction::Square { lo: 0.0, hi: 2.0 }, 3, 100, 7).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn affine_is_exact() {
        let r = loewner_matrix_test(&MonotoneFunction::identity(), 3, 50, 1).unwrap();
        assert!(r.pass && r.min_eig >= -1e-12);
    }

    #[test]
    fn containment_names_endpoint() {
        let f = RealFunction::tanh_affine(1.0, 1.0, 0.0, 0.0);
        let e = compose_pair(
            &MonotoneFunction::Mobius { a: 1.0, b: 0.0, c: 0.0, d: 1.0 },
            &f,
            &MonotoneFunction::Log { shift: 0.0 },
            &f,
        )
        .unwrap_err();
        match e {
            Error::Containment { endpoint, value, .. } => {
                assert_eq!(endpoint, "inf range(g)");
                assert_eq!(value, -1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn log_image_interval() {
        let f = RealFunction::tanh_affine(1.0, std::f64::consts::FRAC_PI_2, 0.0, 0.0);
        let (cf, _) = compose_pair(
            &MonotoneFunction::Log { shift: 2.0 },
            &f,
            &MonotoneFunction::identity(),
            &f,
        )
        .unwrap();
        let (lo, hi) = cf.range_hull();
        assert!((lo - 0.0).abs() < 1e-15 && (hi - 3f64.ln()).abs() < 1e-15);
    }
}
