use std::f64::consts::FRAC_PI_2;

use ndarray::Array2;
use serde::Serialize;

use super::function::{five_point_slopes, sech2};
use super::measure::TanhMeasure;
use crate::error::{Error, Result};
use crate::linalg;

pub const MEMBERSHIP_THRESHOLD: f64 = 1e-4;
/// Atoms lighter than this fraction of the total weight are left out of
/// the cluster summary.
pub const CLUSTER_CUT: f64 = 1e-3;

/// Solution of `min ||A w - b||_2` subject to `w >= 0` (Lawson–Hanson active
/// set). Stops when the largest gradient component over the inactive set is
/// below `tol * ||A^T b||_inf`.
pub fn nnls(a: &Array2<f64>, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    let (m, p) = a.dim();
    let mut w = vec![0.0; p];
    let mut passive = vec![false; p];
    let grad = |w: &[f64]| -> Vec<f64> {
        let mut r = b.to_vec();
        for i in 0..m {
            for j in 0..p {
                if w[j] != 0.0 {
                    r[i] -= a[[i, j]] * w[j];
                }
            }
        }
        (0..p)
            .map(|j| (0..m).map(|i| a[[i, j]] * r[i]).sum())
            .collect()
    };
    let g0 = grad(&w);
    let scale = g0.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
    let solve_passive = |passive: &[bool]| -> Result<Vec<f64>> {
        let cols: Vec<usize> = (0..p).filter(|&j| passive[j]).collect();
        let mut sub = Array2::zeros((m, cols.len()));
        for (c, &j) in cols.iter().enumerate() {
            sub.column_mut(c).assign(&a.column(j));
        }
        let x = linalg::lstsq(&sub, b)?;
        let mut z = vec![0.0; p];
        for (c, &j) in cols.iter().enumerate() {
            z[j] = x[c];
        }
        Ok(z)
    };
    for _outer in 0..3 * p + 10 {
        let g = grad(&w);
        let pick = (0..p)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| g[i].total_cmp(&g[j]));
        let j = match pick {
            Some(j) if g[j] > tol * scale => j,
            _ => return Ok(w),
        };
        passive[j] = true;
        loop {
            let z = solve_passive(&passive)?;
            if (0..p).filter(|&k| passive[k]).all(|k| z[k] > 0.0) {
                w = z;
                break;
            }
            let mut step = f64::INFINITY;
            for k in (0..p).filter(|&k| passive[k] && z[k] <= 0.0) {
                step = step.min(w[k] / (w[k] - z[k]));
            }
            for k in 0..p {
                w[k] += step * (z[k] - w[k]);
            }
            for k in 0..p {
                if passive[k] && w[k] <= 1e-15 * scale.max(1.0) {
                    passive[k] = false;
                    w[k] = 0.0;
                }
            }
            if !passive.iter().any(|&x| x) {
                break;
            }
        }
    }
    Ok(w)
}

#[derive(Clone, Debug, Serialize)]
pub struct FitResult {
    pub measure: TanhMeasure,
    /// `||A w - f'|| / ||f'||` on the sample nodes.
    pub residual: f64,
    pub member: bool,
    pub threshold: f64,
    /// Adjacent nonzero atoms merged: (weighted location, total weight).
    pub clusters: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

/// Fit `f'(t) ~ alpha_hat * sum_i w_i sech^2(alpha_hat (t - s_i))` with
/// `w >= 0` on the given atom grid; the offset is the midpoint of the end
/// values.
pub fn fit_tanh_measure(samples: &[(f64, f64)], alpha: f64, atom_grid: &[f64]) -> Result<FitResult> {
    fit_tanh_measure_with(samples, alpha, atom_grid, MEMBERSHIP_THRESHOLD)
}

pub fn fit_tanh_measure_with(
    samples: &[(f64, f64)],
    alpha: f64,
    atom_grid: &[f64],
    threshold: f64,
) -> Result<FitResult> {
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    if samples.len() < 5 || atom_grid.is_empty() {
        return Err(Error::invalid("need at least 5 samples and one atom"));
    }
    if samples.len() < atom_grid.len() {
        return Err(Error::invalid("fewer samples than atoms"));
    }
    let t: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let f: Vec<f64> = samples.iter().map(|s| s.1).collect();
    if t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("sample abscissae must be strictly increasing"));
    }
    let ah = FRAC_PI_2 / alpha;
    let mut warnings = Vec::new();
    let spacing = atom_grid
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(f64::INFINITY, f64::min);
    if spacing < 0.1 / ah {
        warnings.push(format!(
            "atom spacing {spacing:.3e} is below a tenth of the kernel width {:.3e}; the fit is ill-conditioned",
            1.0 / ah
        ));
    }
    let d = five_point_slopes(&t, &f);
    let peak = d.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let edge = d[0].abs().max(d[d.len() - 1].abs());
    if edge > 1e-6 * peak {
        warnings.push(format!(
            "derivative at the sample ends ({edge:.3e}) has not decayed; limits are uncertain"
        ));
    }
    let mut a = Array2::zeros((t.len(), atom_grid.len()));
    for (i, &ti) in t.iter().enumerate() {
        for (j, &s) in atom_grid.iter().enumerate() {
            a[[i, j]] = ah * sech2(ah * (ti - s));
        }
    }
    let w = nnls(&a, &d, 1e-10)?;
    let mut r2 = 0.0;
    let mut b2 = 0.0;
    for i in 0..t.len() {
        let fit: f64 = (0..atom_grid.len()).map(|j| a[[i, j]] * w[j]).sum();
        r2 += (fit - d[i]).powi(2);
        b2 += d[i] * d[i];
    }
    let residual = if b2 > 0.0 { (r2 / b2).sqrt() } else { r2.sqrt() };
    let offset = 0.5 * (f[0] + f[f.len() - 1]);
    let atoms: Vec<(f64, f64)> = atom_grid
        .iter()
        .zip(&w)
        .filter(|(_, &wi)| wi > 0.0)
        .map(|(&s, &wi)| (s, wi))
        .collect();
    let clusters = cluster(atom_grid, &w);
    Ok(FitResult {
        measure: TanhMeasure::new(atoms, offset, alpha)?,
        residual,
        member: residual < threshold,
        threshold,
        clusters,
        warnings,
    })
}

fn cluster(grid: &[f64], w: &[f64]) -> Vec<(f64, f64)> {
    let total: f64 = w.iter().sum();
    let cut = CLUSTER_CUT * total;
    let mut out = Vec::new();
    let mut cur: Option<(f64, f64)> = None;
    for (&s, &wi) in grid.iter().zip(w) {
        if wi > cut {
            let (m, tw) = cur.unwrap_or((0.0, 0.0));
            cur = Some((m + s * wi, tw + wi));
        } else if let Some((m, tw)) = cur.take() {
            out.push((m / tw, tw));
        }
    }
    if let Some((m, tw)) = cur {
        out.push((m / tw, tw));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nnls_small() {
        // unconstrained optimum has a negative component
        let a = ndarray::array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let b = [1.0, -1.0, 0.0];
        let w = nnls(&a, &b, 1e-12).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-12 && w[1] == 0.0);
    }

    #[test]
    fn recovers_single_tanh() {
        let samples: Vec<(f64, f64)> = (0..=1600)
            .map(|k| {
                let t = -16.0 + k as f64 * 0.02;
                (t, t.tanh())
            })
            .collect();
        let grid: Vec<f64> = (-40..=40).map(|k| k as f64 / 10.0).collect();
        let r = fit_tanh_measure(&samples, FRAC_PI_2, &grid).unwrap();
        assert!(r.member);
        assert_eq!(r.clusters.len(), 1);
        assert!(r.clusters[0].0.abs() < 0.05 && (r.clusters[0].1 - 1.0).abs() < 1e-2);
    }
}
