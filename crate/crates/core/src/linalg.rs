//! Dense Hermitian eigensolvers on top of LAPACK (OpenBLAS).
//!
//! Matrices are row-major `ndarray` arrays. LAPACK reads them column-major,
//! i.e. it sees the transpose; for a Hermitian matrix that is the complex
//! conjugate, which has the same eigenvalues and conjugated eigenvectors.

use std::os::raw::{c_char, c_int};
use std::sync::Once;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

extern crate openblas_src;

extern "C" {
    fn openblas_set_num_threads(n: c_int);
}

static THREADS: Once = Once::new();

fn init() {
    // single-threaded BLAS keeps reductions bit-reproducible
    THREADS.call_once(|| unsafe { openblas_set_num_threads(1) });
}

fn check(routine: &'static str, info: c_int) -> Result<()> {
    if info == 0 {
        Ok(())
    } else {
        Err(Error::Lapack { routine, info })
    }
}

type LapackComplex = lapack_sys::__BindgenComplex<f64>;

fn as_lapack(v: &mut [Complex64]) -> *mut LapackComplex {
    // both are #[repr(C)] { re: f64, im: f64 }
    v.as_mut_ptr().cast()
}

/// Max |M - M^H| over entries.
pub fn hermitian_deviation(m: &Array2<Complex64>) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    dev
}

fn is_real(m: &Array2<Complex64>) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

fn real_part(m: &Array2<Complex64>) -> Vec<f64> {
    m.iter().map(|z| z.re).collect()
}

fn dsyevd(n: usize, a: &mut [f64], jobz: u8) -> Result<Vec<f64>> {
    init();
    let ni = n as c_int;
    let mut w = vec![0.0; n];
    let mut info = 0;
    let mut wq = [0.0f64];
    let mut iwq = [0 as c_int];
    let q: c_int = -1;
    unsafe {
        lapack_sys::dsyevd_(
            &(jobz as c_char),
            &(b'U' as c_char),
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            wq.as_mut_ptr(),
            &q,
            iwq.as_mut_ptr(),
            &q,
            &mut info,
        );
    }
    check("dsyevd", info)?;
    let lwork = wq[0] as c_int;
    let liwork = iwq[0];
    let mut work = vec![0.0; lwork.max(1) as usize];
    let mut iwork = vec![0 as c_int; liwork.max(1) as usize];
    unsafe {
        lapack_sys::dsyevd_(
            &(jobz as c_char),
            &(b'U' as c_char),
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    check("dsyevd", info)?;
    Ok(w)
}

fn zheevd_values(n: usize, a: &mut [Complex64]) -> Result<Vec<f64>> {
    init();
    let ni = n as c_int;
    let mut w = vec![0.0; n];
    let mut info = 0;
    let mut wq = [Complex64::new(0.0, 0.0)];
    let mut rwq = [0.0f64];
    let mut iwq = [0 as c_int];
    let q: c_int = -1;
    unsafe {
        lapack_sys::zheevd_2stage_(
            &(b'N' as c_char),
            &(b'U' as c_char),
            &ni,
            as_lapack(a),
            &ni,
            w.as_mut_ptr(),
            as_lapack(&mut wq),
            &q,
            rwq.as_mut_ptr(),
            &q,
            iwq.as_mut_ptr(),
            &q,
            &mut info,
        );
    }
    check("zheevd_2stage", info)?;
    let lwork = wq[0].re as c_int;
    let lrwork = rwq[0] as c_int;
    let liwork = iwq[0];
    let mut work = vec![Complex64::new(0.0, 0.0); lwork.max(1) as usize];
    let mut rwork = vec![0.0; lrwork.max(1) as usize];
    let mut iwork = vec![0 as c_int; liwork.max(1) as usize];
    unsafe {
        lapack_sys::zheevd_2stage_(
            &(b'N' as c_char),
            &(b'U' as c_char),
            &ni,
            as_lapack(a),
            &ni,
            w.as_mut_ptr(),
            as_lapack(&mut work),
            &lwork,
            rwork.as_mut_ptr(),
            &lrwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    check("zheevd_2stage", info)?;
    Ok(w)
}

/// All eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(m: &Array2<Complex64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if is_real(m) {
        let mut a = real_part(m);
        dsyevd(n, &mut a, b'N')
    } else {
        let mut a: Vec<Complex64> = m.iter().copied().collect();
        zheevd_values(n, &mut a)
    }
}

/// Full eigendecomposition of a small real symmetric matrix.
/// Returns ascending eigenvalues and eigenvectors as columns.
pub fn eigh_real(m: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = m.nrows();
    // column-major copy so that LAPACK's output columns are eigenvectors
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i + j * n] = m[[i, j]];
        }
    }
    let w = dsyevd(n, &mut a, b'V')?;
    let mut v = Array2::zeros((n, n));
    for k in 0..n {
        for i in 0..n {
            v[[i, k]] = a[i + k * n];
        }
    }
    Ok((w, v))
}

/// Eigenpairs with ascending indices `il..=iu` (1-based, as in LAPACK).
/// Eigenvectors are returned as the columns of an `n x (iu-il+1)` array.
pub fn eigh_select(
    m: &Array2<Complex64>,
    il: usize,
    iu: usize,
) -> Result<(Vec<f64>, Array2<Complex64>)> {
    let n = m.nrows();
    if il < 1 || iu > n || il > iu {
        return Err(Error::invalid(format!(
            "eigenpair index range {il}..={iu} outside 1..={n}"
        )));
    }
    init();
    let k = iu - il + 1;
    let ni = n as c_int;
    let (ilc, iuc) = (il as c_int, iu as c_int);
    let (vl, vu, abstol) = (0.0f64, 0.0f64, 0.0f64);
    let mut found: c_int = 0;
    let mut w = vec![0.0; n];
    let mut isuppz = vec![0 as c_int; 2 * k];
    let mut info = 0;
    let q: c_int = -1;
    let mut out = Array2::zeros((n, k));
    let mut a: Vec<Complex64> = m.iter().copied().collect();
    let mut z = vec![Complex64::new(0.0, 0.0); n * k];
    let mut wq = [Complex64::new(0.0, 0.0)];
    let mut rwq = [0.0f64];
    let mut iwq = [0 as c_int];
    unsafe {
        lapack_sys::zheevr_(
            &(b'V' as c_char),
            &(b'I' as c_char),
            &(b'U' as c_char),
            &ni,
            as_lapack(&mut a),
            &ni,
            &vl,
            &vu,
            &ilc,
            &iuc,
            &abstol,
            &mut found,
            w.as_mut_ptr(),
            as_lapack(&mut z),
            &ni,
            isuppz.as_mut_ptr(),
            as_lapack(&mut wq),
            &q,
            rwq.as_mut_ptr(),
            &q,
            iwq.as_mut_ptr(),
            &q,
            &mut info,
        );
    }
    check("zheevr", info)?;
    let lwork = wq[0].re as c_int;
    let lrwork = rwq[0] as c_int;
    let liwork = iwq[0];
    let mut work = vec![Complex64::new(0.0, 0.0); lwork.max(1) as usize];
    let mut rwork = vec![0.0; lrwork.max(1) as usize];
    let mut iwork = vec![0 as c_int; liwork.max(1) as usize];
    unsafe {
        lapack_sys::zheevr_(
            &(b'V' as c_char),
            &(b'I' as c_char),
            &(b'U' as c_char),
            &ni,
            as_lapack(&mut a),
            &ni,
            &vl,
            &vu,
            &ilc,
            &iuc,
            &abstol,
            &mut found,
            w.as_mut_ptr(),
            as_lapack(&mut z),
            &ni,
            isuppz.as_mut_ptr(),
            as_lapack(&mut work),
            &lwork,
            rwork.as_mut_ptr(),
            &lrwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    check("zheevr", info)?;
    // LAPACK diagonalized conj(M); conjugate back
    for c in 0..k {
        for i in 0..n {
            out[[i, c]] = z[i + c * n].conj();
        }
    }
    if found as usize != k {
        return Err(Error::Lapack {
            routine: "?evr",
            info: -(found + 1000),
        });
    }
    w.truncate(k);
    Ok((w, out))
}

/// Eigenpairs of the `count` eigenvalues largest in magnitude, sorted by
/// decreasing |λ|.
pub fn eigh_extreme(
    m: &Array2<Complex64>,
    count: usize,
) -> Result<(Vec<f64>, Array2<Complex64>)> {
    let n = m.nrows();
    let count = count.min(n);
    if count == 0 {
        return Ok((Vec::new(), Array2::zeros((n, 0))));
    }
    let (lo_vals, lo_vecs) = eigh_select(m, 1, count)?;
    let (hi_vals, hi_vecs) = eigh_select(m, n - count + 1, n)?;
    let mut cand: Vec<(f64, usize, bool)> = Vec::new();
    for (i, &v) in lo_vals.iter().enumerate() {
        cand.push((v, i, false));
    }
    for (i, &v) in hi_vals.iter().enumerate() {
        // the two windows overlap when 2*count > n
        if n - count + i < count {
            continue;
        }
        cand.push((v, i, true));
    }
    cand.sort_by(|a, b| b.0.abs().total_cmp(&a.0.abs()));
    cand.truncate(count);
    let mut vals = Vec::with_capacity(count);
    let mut vecs = Array2::zeros((n, count));
    for (c, &(v, i, hi)) in cand.iter().enumerate() {
        vals.push(v);
        let src = if hi { &hi_vecs } else { &lo_vecs };
        vecs.column_mut(c).assign(&src.column(i));
    }
    Ok((vals, vecs))
}

/// Least-squares solution of `A x = b` for a full-column-rank `m x p`
/// matrix with `m >= p` (QR via `dgels`).
pub fn lstsq(a: &Array2<f64>, b: &[f64]) -> Result<Vec<f64>> {
    init();
    let (m, p) = a.dim();
    if b.len() != m || m < p {
        return Err(Error::invalid("least-squares shape mismatch"));
    }
    if p == 0 {
        return Ok(Vec::new());
    }
    let mut cm = vec![0.0; m * p];
    for i in 0..m {
        for j in 0..p {
            cm[i + j * m] = a[[i, j]];
        }
    }
    let mut rhs = b.to_vec();
    let (mi, pi, one) = (m as c_int, p as c_int, 1 as c_int);
    let mut info = 0;
    let mut wq = [0.0f64];
    let q: c_int = -1;
    unsafe {
        lapack_sys::dgels_(
            &(b'N' as c_char),
            &mi,
            &pi,
            &one,
            cm.as_mut_ptr(),
            &mi,
            rhs.as_mut_ptr(),
            &mi,
            wq.as_mut_ptr(),
            &q,
            &mut info,
            1,
        );
    }
    check("dgels", info)?;
    let lwork = wq[0] as c_int;
    let mut work = vec![0.0; lwork.max(1) as usize];
    unsafe {
        lapack_sys::dgels_(
            &(b'N' as c_char),
            &mi,
            &pi,
            &one,
            cm.as_mut_ptr(),
            &mi,
            rhs.as_mut_ptr(),
            &mi,
            work.as_mut_ptr(),
            &lwork,
            &mut info,
            1,
        );
    }
    check("dgels", info)?;
    rhs.truncate(p);
    Ok(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn values_preserve_trace_and_frobenius() {
        let n = 200;
        for complex in [false, true] {
            let m = Array2::from_shape_fn((n, n), |(i, j)| {
                let (a, b) = (i.min(j) as f64, i.max(j) as f64);
                let re = (0.37 * a + 1.3 * b).sin();
                let im = if complex && i != j { (0.11 * a * b).cos() } else { 0.0 };
                Complex64::new(re, if i < j { im } else { -im })
            });
            let w = eigvalsh(&m).unwrap();
            let tr: f64 = (0..n).map(|i| m[[i, i]].re).sum();
            let fro: f64 = m.iter().map(|z| z.norm_sqr()).sum();
            assert!((w.iter().sum::<f64>() - tr).abs() < 1e-10);
            assert!((w.iter().map(|x| x * x).sum::<f64>() - fro).abs() < 1e-9 * fro);
        }
    }

    fn residual(m: &Array2<Complex64>, lam: &[f64], v: &Array2<Complex64>) -> (f64, f64) {
        let n = m.nrows();
        let mut res = 0.0f64;
        let mut norm = 0.0f64;
        for (c, &l) in lam.iter().enumerate() {
            let col = v.column(c);
            let mv = m.dot(&col);
            for i in 0..n {
                res = res.max((mv[i] - col[i] * l).norm());
            }
            norm = norm.max((col.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs());
        }
        (res, norm)
    }

    #[test]
    fn selected_pairs_of_real_low_rank_matrix() {
        let n = 1024;
        let x: Vec<f64> = (0..n).map(|i| -20.0 + 40.0 * i as f64 / n as f64).collect();
        let m = Array2::from_shape_fn((n, n), |(i, j)| {
            let a = 1.0 / x[i].cosh() / x[j].cosh();
            let b = 0.3 * (x[i] / 2.0).sinh() / x[i].cosh() * (x[j] / 2.0).sinh() / x[j].cosh();
            Complex64::new(0.05 * (a - b), 0.0)
        });
        let (lam, v) = eigh_extreme(&m, 2).unwrap();
        let (res, norm) = residual(&m, &lam, &v);
        assert!(res < 1e-12 && norm < 1e-12, "{res:e} {norm:e}");
        assert!(lam[0] > 0.0 && lam[1] < 0.0);
    }

    #[test]
    fn small_real_decomposition() {
        for n in [2, 3, 5, 16] {
            let m = Array2::from_shape_fn((n, n), |(i, j)| ((i * 7 + j * 7 + i * j) as f64 * 0.3).cos());
            let (w, v) = eigh_real(&m).unwrap();
            let back = Array2::from_shape_fn((n, n), |(i, j)| (0..n).map(|k| v[[i, k]] * w[k] * v[[j, k]]).sum::<f64>());
            let err = (&back - &m).iter().fold(0.0f64, |a, b| a.max(b.abs()));
            let orth = v.t().dot(&v) - Array2::<f64>::eye(n);
            let e2 = orth.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            assert!(err < 1e-12 && e2 < 1e-12, "n = {n}: {err:e} {e2:e}");
        }
    }

    #[test]
    fn real_two_by_two() {
        let m = array![
            [Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)],
            [Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)]
        ];
        let w = eigvalsh(&m).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-14 && (w[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn complex_eigenvector_orientation() {
        // [[1, i], [-i, 1]] has eigenvalues 0, 2; v2 = (1, -i)/sqrt2
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        let m = array![[one, i], [-i, one]];
        let (w, v) = eigh_select(&m, 1, 2).unwrap();
        assert!(w[0].abs() < 1e-14 && (w[1] - 2.0).abs() < 1e-14);
        let mv = m.dot(&v.column(1));
        for r in 0..2 {
            assert!((mv[r] - v[[r, 1]] * 2.0).norm() < 1e-13);
        }
    }

    #[test]
    fn extreme_orders_by_magnitude() {
        let d = [-5.0, 0.1, 3.0, -0.2];
        let mut m = Array2::zeros((4, 4));
        for (k, &x) in d.iter().enumerate() {
            m[[k, k]] = Complex64::new(x, 0.0);
        }
        let (w, _) = eigh_extreme(&m, 2).unwrap();
        assert_eq!(w, vec![-5.0, 3.0]);
    }
}
