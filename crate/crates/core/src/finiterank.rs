//! Finite-rank commutators: the rank-one tanh pairs, the indefinite rank-3
//! example, recovery of factors from kernel probes, and reconstruction of
//! `f'` and `g'` from a positive model.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;

use crate::commutator::{spectrum, x_kernel, DiscretizedOperator, Route, RANK_THRESHOLD};
use crate::discretize::{continuous_transform, fourier_deriv, FourierProfile, Grid};
use crate::error::{Error, Result};
use crate::funcspace::{RealFunction, Sampled, Term, VariationBracket};
use crate::linalg;

/// Smallest admissible determinant of the normalized Gram matrix.
pub const GRAM_TOL: f64 = 1e-12;
/// Largest admissible condition number of a probe Gram matrix.
pub const PROBE_COND_LIMIT: f64 = 1e10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Space {
    Position,
    Momentum,
}

/// `K = sum_k c_k (phi_k, .) phi_k` with factors sampled on a grid.
#[derive(Clone, Debug)]
pub struct FiniteRankModel {
    grid: Grid,
    space: Space,
    factors: Vec<Vec<Complex64>>,
    coeffs: Vec<f64>,
}

impl FiniteRankModel {
    /// Factors are sampled at `grid.nodes()` for [`Space::Position`] and at
    /// `grid.momenta()` for [`Space::Momentum`].
    pub fn new(grid: Grid, space: Space, factors: Vec<Vec<Complex64>>, coeffs: Vec<f64>) -> Result<Self> {
        if factors.len() != coeffs.len() {
            return Err(Error::invalid("one coefficient per factor"));
        }
        if factors.iter().any(|f| f.len() != grid.points()) {
            return Err(Error::invalid("factor length differs from grid size"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("non-finite coefficient"));
        }
        let model = FiniteRankModel {
            grid,
            space,
            factors,
            coeffs,
        };
        let det = model.normalized_gram_det()?;
        if det <= GRAM_TOL {
            return Err(Error::invalid(format!(
                "factors are linearly dependent (normalized Gram determinant {det:e})"
            )));
        }
        Ok(model)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn factors(&self) -> &[Vec<Complex64>] {
        &self.factors
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn nodes(&self) -> Vec<f64> {
        match self.space {
            Space::Position => self.grid.nodes(),
            Space::Momentum => self.grid.momenta(),
        }
    }

    pub fn weight(&self) -> f64 {
        match self.space {
            Space::Position => self.grid.spacing(),
            Space::Momentum => self.grid.momentum_spacing(),
        }
    }

    /// `(a, b) = sum_i w conj(a_i) b_i`
    pub fn inner(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>() * self.weight()
    }

    pub fn gram(&self) -> Array2<Complex64> {
        let r = self.rank();
        Array2::from_shape_fn((r, r), |(k, l)| self.inner(&self.factors[k], &self.factors[l]))
    }

    fn normalized_gram_det(&self) -> Result<f64> {
        let g = self.gram();
        let r = g.nrows();
        if r == 0 {
            return Ok(1.0);
        }
        let d: Vec<f64> = (0..r).map(|k| g[[k, k]].re.sqrt()).collect();
        if d.iter().any(|&x| !(x > 0.0)) {
            return Ok(0.0);
        }
        let c = Array2::from_shape_fn((r, r), |(k, l)| g[[k, l]] / (d[k] * d[l]));
        Ok(linalg::eigvalsh(&c)?.iter().product())
    }

    /// `w sum_k c_k phi_k(u_i) conj(phi_k(u_j))`, the Nyström-embedded matrix.
    pub fn assemble(&self) -> Array2<Complex64> {
        let n = self.grid.points();
        let w = self.weight();
        let mut m = Array2::zeros((n, n));
        for (phi, &c) in self.factors.iter().zip(&self.coeffs) {
            for i in 0..n {
                let a = phi[i] * (c * w);
                for j in 0..n {
                    m[[i, j]] += a * phi[j].conj();
                }
            }
        }
        m
    }

    /// `<u, K u>` for samples `u` on the model nodes.
    pub fn quadratic_form(&self, u: &[Complex64]) -> f64 {
        self.factors
            .iter()
            .zip(&self.coeffs)
            .map(|(phi, &c)| c * self.inner(phi, u).norm_sqr())
            .sum()
    }

    pub fn scaled(&self, s: f64) -> FiniteRankModel {
        FiniteRankModel {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            ..self.clone()
        }
    }

    /// The same operator with factors replaced by their Fourier transforms.
    pub fn to_momentum(&self) -> Result<FiniteRankModel> {
        if self.space != Space::Position {
            return Err(Error::invalid("model is already in momentum space"));
        }
        let n = self.grid.points();
        let h = (n / 2) as i64;
        let factors = self
            .factors
            .iter()
            .map(|phi| {
                let re: Vec<f64> = phi.iter().map(|z| z.re).collect();
                let im: Vec<f64> = phi.iter().map(|z| z.im).collect();
                let a = continuous_transform(&self.grid, &re);
                let b = continuous_transform(&self.grid, &im);
                (-h..h)
                    .map(|m| {
                        let s = m.rem_euclid(n as i64) as usize;
                        a[s] + Complex64::i() * b[s]
                    })
                    .collect()
            })
            .collect();
        FiniteRankModel::new(self.grid, Space::Momentum, factors, self.coeffs.clone())
    }
}

/// Sample a real function on the grid nodes as a complex factor.
pub fn sample_factor(grid: &Grid, phi: impl Fn(f64) -> f64) -> Vec<Complex64> {
    grid.nodes().iter().map(|&x| Complex64::new(phi(x), 0.0)).collect()
}

/// Model from the `count` eigenpairs of largest magnitude of a Nyström-x
/// operator: `phi_k = v_k / sqrt(w)`, `c_k = lambda_k`.
pub fn model_from_operator(op: &DiscretizedOperator, count: usize) -> Result<FiniteRankModel> {
    if op.route != Route::NystromX {
        return Err(Error::RouteMismatch("factor extraction needs the Nyström-x route".into()));
    }
    let (lam, v) = linalg::eigh_extreme(&op.matrix, count)?;
    let s = 1.0 / op.grid.spacing().sqrt();
    let factors = (0..lam.len())
        .map(|k| v.column(k).iter().map(|z| z * s).collect())
        .collect();
    FiniteRankModel::new(op.grid, Space::Position, factors, lam)
}

/// `f = c1 tanh(alpha_hat (t - t1)) + d1`, `g = c2 tanh(alpha (t - t2)) + d2`
/// with `alpha alpha_hat = pi/2`.
pub fn kato_rank_one_pair(
    alpha: f64,
    c1: f64,
    c2: f64,
    t1: f64,
    t2: f64,
    d1: f64,
    d2: f64,
) -> Result<(RealFunction, RealFunction)> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    if !(c1 * c2 > 0.0) {
        return Err(Error::SignConstraint(c1 * c2));
    }
    let alpha_hat = PI / (2.0 * alpha);
    Ok((
        RealFunction::tanh_affine(c1, alpha_hat, t1, d1),
        RealFunction::tanh_affine(c2, alpha, t2, d2),
    ))
}

/// `g = tanh x`, `f = tanh(pi xi / 2) + beta tanh(pi xi)` and the model
/// `(1/pi) phi phi* + (beta/pi)(phi_+ phi_+* - phi_- phi_-*)`.
pub fn rank3_example(beta: f64, grid: &Grid) -> Result<(RealFunction, RealFunction, FiniteRankModel)> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    let f = RealFunction::closed_form(
        vec![
            Term::Tanh {
                amplitude: 1.0,
                rate: PI / 2.0,
                center: 0.0,
            },
            Term::Tanh {
                amplitude: beta,
                rate: PI,
                center: 0.0,
            },
        ],
        0.0,
    )?;
    let g = RealFunction::tanh_affine(1.0, 1.0, 0.0, 0.0);
    let model = FiniteRankModel::new(
        *grid,
        Space::Position,
        rank3_factors(grid).to_vec(),
        vec![1.0 / PI, beta / PI, -beta / PI],
    )?;
    Ok((f, g, model))
}

/// `[phi, phi_+, phi_-]` on the grid nodes.
pub fn rank3_factors(grid: &Grid) -> [Vec<Complex64>; 3] {
    [
        sample_factor(grid, |x| 1.0 / x.cosh()),
        sample_factor(grid, |x| (x / 2.0).cosh() / x.cosh()),
        sample_factor(grid, |x| (x / 2.0).sinh() / x.cosh()),
    ]
}

fn reconstruct(model: &FiniteRankModel, bracket: VariationBracket) -> Result<Sampled> {
    if let Some(c) = model.coeffs.iter().find(|c| **c < 0.0) {
        return Err(Error::NotApplicable(format!(
            "reconstruction needs a positive model, found coefficient {c}"
        )));
    }
    let s = 2.0 * PI / bracket.value();
    let nodes = model.nodes();
    let values = (0..nodes.len())
        .map(|i| {
            s * model
                .factors
                .iter()
                .zip(&model.coeffs)
                .map(|(phi, &c)| c * phi[i].norm_sqr())
                .sum::<f64>()
        })
        .collect();
    Sampled::new(nodes, values)
}

/// `g'(x) = (2 pi/[f]) sum_k c_k |phi_k(x)|^2` for a position-space model.
pub fn reconstruct_gprime(model: &FiniteRankModel, f_bracket: VariationBracket) -> Result<Sampled> {
    if model.space != Space::Position {
        return Err(Error::invalid("g' reconstruction needs a position-space model"));
    }
    reconstruct(model, f_bracket)
}

/// `f'(xi) = (2 pi/[g]) sum_k c_k |phi^_k(xi)|^2` for a momentum-space model.
pub fn reconstruct_fprime(model: &FiniteRankModel, g_bracket: VariationBracket) -> Result<Sampled> {
    if model.space != Space::Momentum {
        return Err(Error::invalid("f' reconstruction needs a momentum-space model"));
    }
    reconstruct(model, g_bracket)
}

/// Two disjoint probe sets of equal size.
#[derive(Clone, Debug, Serialize)]
pub struct GammaProbe {
    pub primary: Vec<f64>,
    pub secondary: Vec<f64>,
}

impl GammaProbe {
    pub fn new(primary: Vec<f64>, secondary: Vec<f64>) -> Result<Self> {
        if primary.is_empty() || primary.len() != secondary.len() {
            return Err(Error::invalid("probe sets must be nonempty and of equal size"));
        }
        if primary.iter().any(|y| secondary.contains(y)) {
            return Err(Error::invalid("probe sets must be disjoint"));
        }
        Ok(GammaProbe { primary, secondary })
    }

    /// Golden-ratio points in `[-2, 2]`.
    pub fn quasi_random(n: usize) -> Result<Self> {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let pt = |j: usize| -2.0 + 4.0 * (0.5 + j as f64 * g).fract();
        GammaProbe::new((0..n).map(pt).collect(), (n..2 * n).map(pt).collect())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaRecovery {
    pub rank: usize,
    pub cond_primary: f64,
    pub cond_secondary: f64,
    /// `"primary"` or `"secondary"`.
    pub used: &'static str,
    /// Max-norm distance between the reassembled model and the input matrix.
    pub reassembly_error: f64,
    /// Largest principal angle between the two probe sets' spans, when both
    /// are well conditioned.
    pub consistency_angle: Option<f64>,
    #[serde(skip)]
    pub model: FiniteRankModel,
}

struct ProbeFactors {
    cond: f64,
    factors: Vec<Vec<Complex64>>,
    signs: Vec<f64>,
}

fn probe_factors(
    grid: &Grid,
    g: &RealFunction,
    profile: &FourierProfile,
    probes: &[f64],
) -> Result<ProbeFactors> {
    let r = probes.len();
    let c = |z1: f64, z2: f64| x_kernel(profile, g, Complex64::new(z1, 0.0), Complex64::new(z2, 0.0));
    let mut a = Array2::zeros((r, r));
    for i in 0..r {
        for j in 0..r {
            a[[i, j]] = c(probes[i], probes[j])?;
        }
    }
    // enforce exact Hermitian symmetry before factoring
    let a = Array2::from_shape_fn((r, r), |(i, j)| 0.5 * (a[[i, j]] + a[[j, i]].conj()));
    let (lam, v) = linalg::eigh_select(&a, 1, r)?;
    let big = lam.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let small = lam.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
    let cond = if small > 0.0 { big / small } else { f64::INFINITY };
    if !(cond < PROBE_COND_LIMIT) {
        return Ok(ProbeFactors {
            cond,
            factors: Vec::new(),
            signs: Vec::new(),
        });
    }
    let nodes = grid.nodes();
    let mut gamma = vec![vec![Complex64::new(0.0, 0.0); r]; nodes.len()];
    for (i, &x) in nodes.iter().enumerate() {
        for (j, &y) in probes.iter().enumerate() {
            gamma[i][j] = c(x, y)?;
        }
    }
    // psi_k = sum_j gamma_j V_jk |lambda_k|^{-1/2}
    let factors = (0..r)
        .map(|k| {
            let s = 1.0 / lam[k].abs().sqrt();
            gamma
                .iter()
                .map(|row| (0..r).map(|j| row[j] * v[[j, k]]).sum::<Complex64>() * s)
                .collect()
        })
        .collect();
    let signs = lam.iter().map(|l| l.signum()).collect();
    Ok(ProbeFactors { cond, factors, signs })
}

/// Recover factors from kernel values `gamma_j(x) = K(x, y_j)`.
///
/// With the probe Gram matrix `A_ij = K(y_i, y_j) = V Lambda V*`, the
/// functions `psi = gamma V |Lambda|^{-1/2}` satisfy
/// `K(x, x') = sum_k sign(lambda_k) psi_k(x) conj(psi_k(x'))`.
pub fn gamma_recover(
    op: &DiscretizedOperator,
    g: &RealFunction,
    profile: &FourierProfile,
    probes: &GammaProbe,
) -> Result<GammaRecovery> {
    let report = spectrum(op, RANK_THRESHOLD)?;
    let rank = report.numerical_rank;
    if probes.primary.len() != rank {
        return Err(Error::invalid(format!(
            "{} probes for a kernel of numerical rank {rank}",
            probes.primary.len()
        )));
    }
    let p = probe_factors(&op.grid, g, profile, &probes.primary)?;
    let s = probe_factors(&op.grid, g, profile, &probes.secondary)?;
    let (best, used) = match (p.factors.is_empty(), s.factors.is_empty()) {
        (true, true) => {
            return Err(Error::ProbeSelection {
                primary: p.cond,
                secondary: s.cond,
            })
        }
        (false, _) => (&p, "primary"),
        (true, false) => (&s, "secondary"),
    };
    let model = FiniteRankModel::new(op.grid, Space::Position, best.factors.clone(), best.signs.clone())?;
    let reassembly_error = (&model.assemble() - &op.matrix)
        .iter()
        .fold(0.0f64, |m, z| m.max(z.norm()));
    let consistency_angle = if !p.factors.is_empty() && !s.factors.is_empty() {
        let w = op.grid.spacing();
        let ang = principal_angles(&p.factors, &s.factors, w)?;
        Some(ang.iter().fold(0.0f64, |m, &a| m.max(a)))
    } else {
        None
    };
    Ok(GammaRecovery {
        rank,
        cond_primary: p.cond,
        cond_secondary: s.cond,
        used,
        reassembly_error,
        consistency_angle,
        model,
    })
}

fn orthonormalize(vs: &[Vec<Complex64>], w: f64) -> Result<Vec<Vec<Complex64>>> {
    let r = vs.len();
    let n = vs[0].len();
    let dot = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>() * w;
    let g = Array2::from_shape_fn((r, r), |(k, l)| dot(&vs[k], &vs[l]));
    let (lam, u) = linalg::eigh_select(&g, 1, r)?;
    if lam[0] <= 0.0 {
        return Err(Error::invalid("span is rank deficient"));
    }
    Ok((0..r)
        .map(|k| {
            let s = 1.0 / lam[k].sqrt();
            (0..n)
                .map(|i| (0..r).map(|l| vs[l][i] * u[[l, k]]).sum::<Complex64>() * s)
                .collect()
        })
        .collect())
}

/// Principal angles between two spans of sampled functions under the
/// inner product `w sum conj(a) b`, ascending.
pub fn principal_angles(a: &[Vec<Complex64>], b: &[Vec<Complex64>], w: f64) -> Result<Vec<f64>> {
    if a.is_empty() || b.is_empty() {
        return Ok(Vec::new());
    }
    let qa = orthonormalize(a, w)?;
    let qb = orthonormalize(b, w)?;
    let dot = |x: &[Complex64], y: &[Complex64]| x.iter().zip(y).map(|(p, q)| p.conj() * q).sum::<Complex64>() * w;
    // sines are the singular values of (I - Qa Qa*) Qb
    let res: Vec<Vec<Complex64>> = qb
        .iter()
        .map(|v| {
            let mut r = v.clone();
            for q in &qa {
                let c = dot(q, v);
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= c * qi;
                }
            }
            r
        })
        .collect();
    let k = res.len();
    let g = Array2::from_shape_fn((k, k), |(i, j)| dot(&res[i], &res[j]));
    let g = Array2::from_shape_fn((k, k), |(i, j)| 0.5 * (g[[i, j]] + g[[j, i]].conj()));
    let mut ang: Vec<f64> = linalg::eigvalsh(&g)?
        .iter()
        .map(|s2| s2.max(0.0).sqrt().min(1.0).asin())
        .collect();
    ang.sort_by(f64::total_cmp);
    Ok(ang)
}

/// Fit of `log |h'^(k)| = c + p log k - r k` over the decaying range.
#[derive(Clone, Debug, Serialize)]
pub struct StripFit {
    pub rate: f64,
    pub power: f64,
    pub residual: f64,
    pub k_lo: f64,
    pub k_hi: f64,
}

/// Exponential decay rate of `h'^`, which bounds the strip of analyticity
/// of `h`.
pub fn strip_fit(h: &RealFunction, grid: &Grid) -> Result<StripFit> {
    let profile = fourier_deriv(h, grid)?;
    let top = profile.eval(0.0).norm();
    if top == 0.0 {
        return Err(Error::invalid("function is constant"));
    }
    let kmax = match profile.route() {
        crate::discretize::ProfileRoute::ClosedForm => 400.0,
        crate::discretize::ProfileRoute::Fft => 0.9 * grid.dual().half_width(),
    };
    let dk = 0.05;
    let mut pts = Vec::new();
    let mut k = dk;
    while k < kmax {
        let v = profile.eval(k).norm() / top;
        if v < 1e-12 {
            break;
        }
        if v < 1e-2 {
            pts.push((k, v.ln()));
        }
        k += dk;
    }
    if pts.len() < 8 {
        return Err(Error::FitQuality {
            residual: f64::INFINITY,
            threshold: 0.0,
        });
    }
    let a = Array2::from_shape_fn((pts.len(), 3), |(i, j)| match j {
        0 => 1.0,
        1 => pts[i].0.ln(),
        _ => -pts[i].0,
    });
    let b: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let x = linalg::lstsq(&a, &b)?;
    let residual = (pts
        .iter()
        .map(|&(k, y)| {
            let e = x[0] + x[1] * k.ln() - x[2] * k - y;
            e * e
        })
        .sum::<f64>()
        / pts.len() as f64)
        .sqrt();
    Ok(StripFit {
        rate: x[2],
        power: x[1],
        residual,
        k_lo: pts[0].0,
        k_hi: pts[pts.len() - 1].0,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct StripProduct {
    pub f: StripFit,
    pub g: StripFit,
    pub product: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Fitted strips of `f` and `g` and the check `r_f r_g <= pi/2`.
pub fn strip_product(f: &RealFunction, g: &RealFunction, grid: &Grid) -> Result<StripProduct> {
    let sf = strip_fit(f, grid)?;
    let sg = strip_fit(g, grid)?;
    let product = sf.rate * sg.rate;
    Ok(StripProduct {
        f: sf,
        g: sg,
        product,
        bound: PI / 2.0,
        pass: product <= PI / 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commutator::build_nystrom_x;

    #[test]
    fn rank3_norms() {
        let grid = Grid::transform(24.0, 512).unwrap();
        let (_, _, m) = rank3_example(1.0, &grid).unwrap();
        let [p, pp, pm] = rank3_factors(&grid);
        assert!(m.inner(&p, &pm).norm() < 1e-12);
        assert!((m.inner(&p, &p).re - 2.0).abs() < 1e-9);
        assert!((m.inner(&pp, &pp).re - (PI + 2.0) / 2.0).abs() < 1e-9);
        assert!((m.inner(&pm, &pm).re - (PI - 2.0) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn rank3_matches_kernel() {
        let grid = Grid::transform(24.0, 256).unwrap();
        let (f, g, m) = rank3_example(0.7, &grid).unwrap();
        let op = build_nystrom_x(&f, &g, &grid).unwrap();
        let d = (&m.assemble() - &op.matrix).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        assert!(d < 1e-12, "{d}");
    }

    #[test]
    fn sign_constraint() {
        assert!(matches!(
            kato_rank_one_pair(1.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0),
            Err(Error::SignConstraint(_))
        ));
    }

    #[test]
    fn dependent_factors_rejected() {
        let grid = Grid::transform(10.0, 64).unwrap();
        let p = sample_factor(&grid, |x| 1.0 / x.cosh());
        let q: Vec<Complex64> = p.iter().map(|z| z * 2.0).collect();
        assert!(FiniteRankModel::new(grid, Space::Position, vec![p, q], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn identical_spans_have_zero_angles() {
        let grid = Grid::transform(12.0, 128).unwrap();
        let [a, b, c] = rank3_factors(&grid);
        let mix: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + y * 0.5).collect();
        let ang = principal_angles(&[a.clone(), b.clone()], &[mix, b], grid.spacing()).unwrap();
        assert!(ang.iter().all(|&t| t < 1e-7));
        let ang = principal_angles(&[a], &[c], grid.spacing()).unwrap();
        assert!((ang[0] - PI / 2.0).abs() < 1e-7);
    }
}
