use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{DiscretizedOperator, Route};
use crate::discretize::{
    check_periodizable, fourier_deriv, quadrature_weights, FourierProfile, Grid, UnitaryDft,
};
use crate::error::{Error, Result};
use crate::funcspace::RealFunction;

/// End-flatness tolerance for the periodic routes.
pub const FLAT_TOL: f64 = 1e-10;

fn inv_sqrt_2pi() -> f64 {
    1.0 / (2.0 * PI).sqrt()
}

pub fn build(f: &RealFunction, g: &RealFunction, grid: &Grid, route: Route) -> Result<DiscretizedOperator> {
    match route {
        Route::NystromX => build_nystrom_x(f, g, grid),
        Route::NystromP => build_nystrom_p(f, g, grid),
        Route::Direct => build_direct(f, g, grid),
        Route::DirectProjected => build_direct_projected(f, g, grid),
    }
}

/// `K(z1, z2) = (2 pi)^{-1/2} (g(z1) - g(z2))/(z1 - z2) f'^(z2 - z1)` at
/// complex points; the quotient becomes `g'` when the points coincide on
/// the real line.
pub fn x_kernel(profile: &FourierProfile, g: &RealFunction, z1: Complex64, z2: Complex64) -> Result<Complex64> {
    let q = if z1 == z2 {
        if z1.im != 0.0 {
            return Err(Error::UnsupportedVariant(
                "kernel diagonal off the real line".into(),
            ));
        }
        Complex64::new(g.derivative(z1.re)?, 0.0)
    } else {
        (g.eval(z1)? - g.eval(z2)?) / (z1 - z2)
    };
    Ok(q * profile.eval_complex(z2 - z1)? * inv_sqrt_2pi())
}

/// Shared Nyström assembly: entry `(i, j)` is
/// `w (2 pi)^{-1/2} q(u_i, u_j) h^(s (u_j - u_i))` with `q` the difference
/// quotient of `u -> phi(u)`; only the upper triangle is computed.
fn nystrom(
    nodes: &[f64],
    weight: f64,
    phi: &RealFunction,
    offsets: &[Complex64],
    reverse: bool,
) -> Result<Array2<Complex64>> {
    let n = nodes.len();
    let vals: Vec<f64> = nodes.iter().map(|&u| phi.eval_real(u)).collect();
    let der = nodes
        .iter()
        .map(|&u| phi.derivative(u))
        .collect::<Result<Vec<f64>>>()?;
    let c = weight * inv_sqrt_2pi();
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        m[[i, i]] = Complex64::new(c * der[i] * offsets[n - 1].re, 0.0);
        for j in i + 1..n {
            let q = (vals[i] - vals[j]) / (nodes[i] - nodes[j]);
            // x-kernel uses h^(y - x), p-kernel uses h^(xi - eta)
            let idx = if reverse { n - 1 - (j - i) } else { n - 1 + (j - i) };
            let v = offsets[idx] * (c * q);
            m[[i, j]] = v;
            m[[j, i]] = v.conj();
        }
    }
    Ok(m)
}

/// Nyström discretization of the position-space kernel.
pub fn build_nystrom_x(f: &RealFunction, g: &RealFunction, grid: &Grid) -> Result<DiscretizedOperator> {
    let profile = fourier_deriv(f, grid)?;
    let offsets = profile.offsets(grid);
    let nodes = grid.nodes();
    let matrix = nystrom(&nodes, grid.spacing(), g, &offsets, false)?;
    Ok(DiscretizedOperator {
        grid: *grid,
        matrix,
        weights: quadrature_weights(grid),
        nodes,
        route: Route::NystromX,
        f_bracket: f.bracket(),
        g_bracket: g.bracket(),
    })
}

/// Nyström discretization of the momentum-space kernel
/// `K~(xi, eta) = (2 pi)^{-1/2} (f(xi) - f(eta))/(xi - eta) g'^(xi - eta)`
/// on the ascending momenta of `grid`.
pub fn build_nystrom_p(f: &RealFunction, g: &RealFunction, grid: &Grid) -> Result<DiscretizedOperator> {
    let dual = grid.dual();
    let profile = fourier_deriv(g, &dual)?;
    let offsets = profile.offsets(&dual);
    let nodes = dual.nodes();
    let matrix = nystrom(&nodes, dual.spacing(), f, &offsets, true)?;
    Ok(DiscretizedOperator {
        grid: *grid,
        matrix,
        weights: quadrature_weights(&dual),
        nodes,
        route: Route::NystromP,
        f_bracket: f.bracket(),
        g_bracket: g.bracket(),
    })
}

/// Column `n` of the circulant `U^H diag(f(k)) U`: `c_n = N^{-1} sum_m f(k_m) e^{2 pi i m n / N}`.
fn multiplier_column(f: &RealFunction, grid: &Grid) -> Vec<Complex64> {
    let n = grid.points();
    let mut v: Vec<Complex64> = grid
        .momenta_fft_order()
        .iter()
        .map(|&k| Complex64::new(f.eval_real(k), 0.0))
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut v);
    v.iter_mut().for_each(|z| *z /= n as f64);
    v
}

/// Direct functional calculus `M = i(F G - G F)`. The diagonal is exactly
/// zero, hence so is the trace.
pub fn build_direct(f: &RealFunction, g: &RealFunction, grid: &Grid) -> Result<DiscretizedOperator> {
    let grid = Grid::transform(grid.half_width(), grid.points())?;
    check_periodizable(g, &grid, "g", FLAT_TOL)?;
    let n = grid.points();
    let col = multiplier_column(f, &grid);
    let nodes = grid.nodes();
    let gv: Vec<f64> = nodes.iter().map(|&x| g.eval_real(x)).collect();
    let mut m = Array2::zeros((n, n));
    for j in 0..n {
        for l in j + 1..n {
            let fjl = col[(j + n - l) % n];
            let v = Complex64::i() * fjl * (gv[l] - gv[j]);
            m[[j, l]] = v;
            m[[l, j]] = v.conj();
        }
    }
    Ok(DiscretizedOperator {
        grid,
        matrix: m,
        weights: quadrature_weights(&grid),
        nodes,
        route: Route::Direct,
        f_bracket: f.bracket(),
        g_bracket: g.bracket(),
    })
}

/// Direct route evaluated on a grid with `2N` points and the same `L`, then
/// restricted to the `N` coarse momenta and mapped back to the coarse
/// position basis. Removes the aliasing of `g(Q)` that makes the raw direct
/// matrix alternate between odd and even off-diagonals.
pub fn build_direct_projected(f: &RealFunction, g: &RealFunction, grid: &Grid) -> Result<DiscretizedOperator> {
    let grid = Grid::transform(grid.half_width(), grid.points())?;
    check_periodizable(g, &grid, "g", FLAT_TOL)?;
    let n = grid.points();
    let fine = Grid::transform(grid.half_width(), 2 * n)?;
    let nf = fine.points();
    // Fourier coefficients of g on the fine grid
    let mut cg: Vec<Complex64> = fine
        .nodes()
        .iter()
        .map(|&x| Complex64::new(g.eval_real(x), 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(nf).process(&mut cg);
    cg.iter_mut().for_each(|z| *z /= nf as f64);
    let fine_slot = |a: usize| -> i64 { grid.frequency_index(a) };
    let fk: Vec<f64> = grid
        .momenta_fft_order()
        .iter()
        .map(|&k| f.eval_real(k))
        .collect();
    // coarse-band block of i[f(P), g(Q)] in the fine momentum basis
    let mut b = Array2::<Complex64>::zeros((n, n));
    for a in 0..n {
        for c in 0..n {
            let p = (fine_slot(a) - fine_slot(c)).rem_euclid(nf as i64) as usize;
            b[[a, c]] = Complex64::i() * (fk[a] - fk[c]) * cg[p];
        }
    }
    let dft = UnitaryDft::new(n);
    // M = U^H B U: forward transform along rows, inverse along columns
    let mut row = vec![Complex64::new(0.0, 0.0); n];
    for a in 0..n {
        for c in 0..n {
            row[c] = b[[a, c]];
        }
        dft.forward(&mut row);
        for c in 0..n {
            b[[a, c]] = row[c];
        }
    }
    for c in 0..n {
        for a in 0..n {
            row[a] = b[[a, c]];
        }
        dft.inverse(&mut row);
        for a in 0..n {
            b[[a, c]] = row[a];
        }
    }
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        m[[i, i]] = Complex64::new(b[[i, i]].re, 0.0);
        for j in i + 1..n {
            let v = 0.5 * (b[[i, j]] + b[[j, i]].conj());
            m[[i, j]] = v;
            m[[j, i]] = v.conj();
        }
    }
    Ok(DiscretizedOperator {
        grid,
        matrix: m,
        weights: quadrature_weights(&grid),
        nodes: grid.nodes(),
        route: Route::DirectProjected,
        f_bracket: f.bracket(),
        g_bracket: g.bracket(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_deviation;

    #[test]
    fn kato_diagonal_at_origin() {
        let f = RealFunction::tanh_affine(1.0, PI / 2.0, 0.0, 0.0);
        let g = RealFunction::tanh_affine(1.0, 1.0, 0.0, 0.0);
        let grid = Grid::transform(24.0, 256).unwrap();
        let op = build_nystrom_x(&f, &g, &grid).unwrap();
        let j = 128; // x = 0
        assert_eq!(grid.node(j), 0.0);
        let want = grid.spacing() / PI;
        assert!((op.matrix[[j, j]].re - want).abs() < 1e-14);
        assert!(hermitian_deviation(&op.matrix) == 0.0);
    }

    #[test]
    fn constant_gives_zero() {
        let f = RealFunction::constant(0.3);
        let g = RealFunction::tanh_affine(1.0, 1.0, 0.0, 0.0);
        let grid = Grid::transform(10.0, 64).unwrap();
        for op in [
            build_nystrom_x(&f, &g, &grid).unwrap(),
            build_nystrom_x(&g, &f, &grid).unwrap(),
            build_nystrom_p(&f, &g, &grid).unwrap(),
        ] {
            assert_eq!(op.max_abs(), 0.0);
        }
    }

    #[test]
    fn direct_trace_is_zero() {
        let f = RealFunction::tanh_affine(1.0, PI / 2.0, 0.0, 0.0);
        let g = RealFunction::tanh_affine(1.0, 1.0, 0.0, 0.0);
        let grid = Grid::transform(20.0, 128).unwrap();
        let op = build_direct(&f, &g, &grid).unwrap();
        assert_eq!(op.trace(), 0.0);
    }

    #[test]
    fn direct_needs_flat_ends() {
        let f = RealFunction::tanh_affine(1.0, 1.0, 0.0, 0.0);
        let g = RealFunction::tanh_affine(1.0, 0.1, 0.0, 0.0);
        let grid = Grid::transform(5.0, 64).unwrap();
        assert!(matches!(
            build_direct(&f, &g, &grid),
            Err(Error::Periodization { .. })
        ));
    }
}
