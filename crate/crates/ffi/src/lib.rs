//! C interface to `poscomm`.
//!
//! Objects are opaque handles created by `pc_*_new`/`pc_*_build` style calls
//! and released with the matching `pc_*_free`. Every fallible call returns a
//! [`PcStatus`]; on failure a message is kept per thread and can be read with
//! [`pc_last_error`] until the next failing call. Outputs are written only on
//! success. Strings returned to the caller are released with
//! [`pc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use num_complex::Complex64;
use poscomm::cli::{self, ExperimentConfig, FunctionSpec};
use poscomm::commutator::{self, DiscretizedOperator, Route};
use poscomm::derivavg::averaged_quotient;
use poscomm::discretize::Grid;
use poscomm::funcspace::{fit_tanh_measure, herglotz_check, RealFunction, TanhMeasure};
use poscomm::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PcStatus {
    Ok = 0,
    /// The run completed but at least one check failed.
    CheckFailed = 1,
    /// Malformed configuration or JSON.
    Config = 2,
    /// A numerical accuracy or convergence guard tripped.
    Numerical = 3,
    InvalidArgument = 4,
    /// The input lies outside the mathematical domain of the call.
    Domain = 5,
    Io = 6,
    NullPointer = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Discretization route for [`pc_operator_build`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PcRoute {
    NystromX = 0,
    NystromP = 1,
    Direct = 2,
    DirectProjected = 3,
}

impl From<PcRoute> for Route {
    fn from(r: PcRoute) -> Self {
        match r {
            PcRoute::NystromX => Route::NystromX,
            PcRoute::NystromP => Route::NystromP,
            PcRoute::Direct => Route::Direct,
            PcRoute::DirectProjected => Route::DirectProjected,
        }
    }
}

/// A real function of one variable with a holomorphic extension.
pub struct PcFunction(RealFunction);

/// Uniform quadrature grid on `[-L, L)`.
pub struct PcGrid(Grid);

/// Discretized commutator matrix.
pub struct PcOperator(DiscretizedOperator);

/// Spectral summary filled by [`pc_operator_spectrum`].
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct PcSpectrum {
    pub dim: usize,
    pub min_eig: f64,
    pub max_eig: f64,
    pub trace: f64,
    pub numerical_rank: usize,
    /// Minimum eigenvalue above `-positivity_tol * max|lambda|`.
    pub positive: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn status_of(e: &Error) -> PcStatus {
    match e {
        Error::Config { .. } | Error::Json(_) | Error::SectionAbsent(_) => PcStatus::Config,
        Error::Io(_) => PcStatus::Io,
        Error::InvalidArgument(_) | Error::InvalidGrid(_) => PcStatus::InvalidArgument,
        e if e.exit_code() == 3 => PcStatus::Numerical,
        _ => PcStatus::Domain,
    }
}

struct Fail(PcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

type Res<T> = Result<T, Fail>;

fn guard(f: impl FnOnce() -> Res<PcStatus>) -> PcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Fail(s, m))) => {
            set_error(m);
            s
        }
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {m}"));
            PcStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(PcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Res<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Res<&'a mut T> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Res<&'a [f64]> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Res<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(PcStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn room(need: usize, len: usize) -> Res<()> {
    if len < need {
        return Err(Fail(
            PcStatus::BufferTooSmall,
            format!("buffer holds {len} values, {need} needed"),
        ));
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be null or a string obtained from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn pc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `c tanh(a (t - t0)) + d`.
///
/// # Safety
/// `out_fn` must be valid for writing a handle.
#[no_mangle]
pub unsafe extern "C" fn pc_function_tanh(c: f64, a: f64, t0: f64, d: f64, out_fn: *mut *mut PcFunction) -> PcStatus {
    guard(|| {
        let o = out(out_fn, "out_fn")?;
        if !(a > 0.0 && a.is_finite() && c.is_finite() && t0.is_finite() && d.is_finite()) {
            return Err(Fail(PcStatus::InvalidArgument, "tanh parameters must be finite with a > 0".into()));
        }
        *o = boxed(PcFunction(RealFunction::tanh_affine(c, a, t0, d)));
        Ok(PcStatus::Ok)
    })
}

/// `c arctan((t - t0)/b) + d`.
///
/// # Safety
/// `out_fn` must be valid for writing a handle.
#[no_mangle]
pub unsafe extern "C" fn pc_function_arctan(c: f64, b: f64, t0: f64, d: f64, out_fn: *mut *mut PcFunction) -> PcStatus {
    guard(|| {
        let o = out(out_fn, "out_fn")?;
        if !(b > 0.0 && b.is_finite() && c.is_finite() && t0.is_finite() && d.is_finite()) {
            return Err(Fail(PcStatus::InvalidArgument, "arctan parameters must be finite with b > 0".into()));
        }
        *o = boxed(PcFunction(RealFunction::arctan_affine(c, b, t0, d)));
        Ok(PcStatus::Ok)
    })
}

/// `offset + sum_k w_k tanh(pi (t - s_k) / (2 alpha))` with `n` atoms.
///
/// # Safety
/// `locations` and `weights` must point to `n` values each.
#[no_mangle]
pub unsafe extern "C" fn pc_function_tanh_measure(
    locations: *const f64,
    weights: *const f64,
    n: usize,
    offset: f64,
    alpha: f64,
    out_fn: *mut *mut PcFunction,
) -> PcStatus {
    guard(|| {
        let o = out(out_fn, "out_fn")?;
        let s = slice(locations, n, "locations")?;
        let w = slice(weights, n, "weights")?;
        let m = TanhMeasure::new(s.iter().copied().zip(w.iter().copied()).collect(), offset, alpha)?;
        *o = boxed(PcFunction(m.into_function()));
        Ok(PcStatus::Ok)
    })
}

/// Function from a JSON spec as used in experiment configs, e.g.
/// `{"name": "tanh", "rate": 2}`. Relative sample paths resolve against
/// `base_dir`, or the working directory when it is null.
///
/// # Safety
/// `json` must be a NUL-terminated string; `base_dir` null or one.
#[no_mangle]
pub unsafe extern "C" fn pc_function_from_json(
    json: *const c_char,
    base_dir: *const c_char,
    out_fn: *mut *mut PcFunction,
) -> PcStatus {
    guard(|| {
        let o = out(out_fn, "out_fn")?;
        let text = string(json, "json")?;
        let base = if base_dir.is_null() { "." } else { string(base_dir, "base_dir")? };
        let spec: FunctionSpec = serde_json::from_str(text).map_err(Error::from)?;
        *o = boxed(PcFunction(spec.build(Path::new(base), "function")?));
        Ok(PcStatus::Ok)
    })
}

/// # Safety
/// `f` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn pc_function_free(f: *mut PcFunction) {
    free(f)
}

/// Value at a real point.
///
/// # Safety
/// `f` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_function_eval(f: *const PcFunction, t: f64, value: *mut f64) -> PcStatus {
    guard(|| {
        let f = deref(f, "f")?;
        let v = out(value, "value")?;
        *v = f.0.eval_real(t);
        Ok(PcStatus::Ok)
    })
}

/// Value at `re + i im` inside the strip of holomorphy.
///
/// # Safety
/// `f` must be a live handle and both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn pc_function_eval_complex(
    f: *const PcFunction,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> PcStatus {
    guard(|| {
        let f = deref(f, "f")?;
        let r = out(out_re, "out_re")?;
        let i = out(out_im, "out_im")?;
        let z = f.0.eval(Complex64::new(re, im))?;
        *r = z.re;
        *i = z.im;
        Ok(PcStatus::Ok)
    })
}

/// Derivative at a real point.
///
/// # Safety
/// `f` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_function_derivative(f: *const PcFunction, t: f64, value: *mut f64) -> PcStatus {
    guard(|| {
        let f = deref(f, "f")?;
        let v = out(value, "value")?;
        *v = f.0.derivative(t)?;
        Ok(PcStatus::Ok)
    })
}

/// Half-width of the horizontal strip where the function is holomorphic.
///
/// # Safety
/// `f` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_function_strip(f: *const PcFunction, value: *mut f64) -> PcStatus {
    guard(|| {
        let f = deref(f, "f")?;
        *out(value, "value")? = f.0.strip_half_width();
        Ok(PcStatus::Ok)
    })
}

/// Minimum of `Im f` over a lattice in the upper half strip of width
/// `alpha`; `pass` is set when it is nonnegative up to tolerance.
///
/// # Safety
/// `f` must be a live handle and both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn pc_herglotz_check(
    f: *const PcFunction,
    alpha: f64,
    samples: usize,
    min_im: *mut f64,
    pass: *mut bool,
) -> PcStatus {
    guard(|| {
        let f = deref(f, "f")?;
        let m = out(min_im, "min_im")?;
        let p = out(pass, "pass")?;
        let r = herglotz_check(&f.0, alpha, samples)?;
        *m = r.min_im;
        *p = r.pass;
        Ok(PcStatus::Ok)
    })
}

/// Averaged difference quotient of `g` at `x` with radius `r`.
///
/// # Safety
/// `g` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_averaged_quotient(g: *const PcFunction, x: f64, r: f64, value: *mut f64) -> PcStatus {
    guard(|| {
        let g = deref(g, "g")?;
        let v = out(value, "value")?;
        *v = averaged_quotient(&g.0, x, r)?;
        Ok(PcStatus::Ok)
    })
}

/// Nonnegative least-squares fit of samples `(ts[i], values[i])` by a tanh
/// measure with atoms on `atom_grid`. The fitted function is returned as a
/// new handle.
///
/// # Safety
/// Arrays must hold `n` and `m` values; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_fit_tanh_measure(
    ts: *const f64,
    values: *const f64,
    n: usize,
    alpha: f64,
    atom_grid: *const f64,
    m: usize,
    out_fn: *mut *mut PcFunction,
    residual: *mut f64,
    member: *mut bool,
) -> PcStatus {
    guard(|| {
        let o = out(out_fn, "out_fn")?;
        let res = out(residual, "residual")?;
        let mem = out(member, "member")?;
        let t = slice(ts, n, "ts")?;
        let v = slice(values, n, "values")?;
        let grid = slice(atom_grid, m, "atom_grid")?;
        let samples: Vec<(f64, f64)> = t.iter().copied().zip(v.iter().copied()).collect();
        let fit = fit_tanh_measure(&samples, alpha, grid)?;
        *res = fit.residual;
        *mem = fit.member;
        *o = boxed(PcFunction(fit.measure.into_function()));
        Ok(PcStatus::Ok)
    })
}

/// Grid of `points` nodes (a power of two, at least 8) on `[-L, L)`.
///
/// # Safety
/// `out_grid` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_grid_new(half_width: f64, points: usize, out_grid: *mut *mut PcGrid) -> PcStatus {
    guard(|| {
        let o = out(out_grid, "out_grid")?;
        *o = boxed(PcGrid(Grid::transform(half_width, points)?));
        Ok(PcStatus::Ok)
    })
}

/// # Safety
/// `g` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn pc_grid_free(g: *mut PcGrid) {
    free(g)
}

/// Kernel matrix of `i[f(P), g(Q)]` on the grid.
///
/// # Safety
/// All handles must be live and `out_op` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_operator_build(
    f: *const PcFunction,
    g: *const PcFunction,
    grid: *const PcGrid,
    route: PcRoute,
    out_op: *mut *mut PcOperator,
) -> PcStatus {
    guard(|| {
        let f = deref(f, "f")?;
        let g = deref(g, "g")?;
        let grid = deref(grid, "grid")?;
        let o = out(out_op, "out_op")?;
        *o = boxed(PcOperator(commutator::build(&f.0, &g.0, &grid.0, route.into())?));
        Ok(PcStatus::Ok)
    })
}

/// # Safety
/// `op` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn pc_operator_free(op: *mut PcOperator) {
    free(op)
}

/// Matrix dimension, or 0 for a null handle.
///
/// # Safety
/// `op` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_operator_dim(op: *const PcOperator) -> usize {
    op.as_ref().map_or(0, |o| o.0.matrix.nrows())
}

/// Copy the matrix in row-major order into `re` and `im`, each holding
/// `len >= dim * dim` values.
///
/// # Safety
/// `re` and `im` must be writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn pc_operator_matrix(op: *const PcOperator, re: *mut f64, im: *mut f64, len: usize) -> PcStatus {
    guard(|| {
        let op = deref(op, "op")?;
        let n = op.0.matrix.nrows();
        room(n * n, len)?;
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        let re = std::slice::from_raw_parts_mut(re, n * n);
        let im = std::slice::from_raw_parts_mut(im, n * n);
        for (k, z) in op.0.matrix.iter().enumerate() {
            re[k] = z.re;
            im[k] = z.im;
        }
        Ok(PcStatus::Ok)
    })
}

/// Copy the nodes the matrix rows refer to.
///
/// # Safety
/// `nodes` must be writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn pc_operator_nodes(op: *const PcOperator, nodes: *mut f64, len: usize) -> PcStatus {
    guard(|| {
        let op = deref(op, "op")?;
        let n = op.0.nodes.len();
        room(n, len)?;
        if nodes.is_null() {
            return Err(null("nodes"));
        }
        std::slice::from_raw_parts_mut(nodes, n).copy_from_slice(&op.0.nodes);
        Ok(PcStatus::Ok)
    })
}

/// Spectrum of the operator. When `eigenvalues` is non-null, the
/// eigenvalues are copied in descending order; it must hold `len >= dim`
/// values.
///
/// # Safety
/// `summary` must be writable; `eigenvalues` null or writable for `len`.
#[no_mangle]
pub unsafe extern "C" fn pc_operator_spectrum(
    op: *const PcOperator,
    rank_threshold: f64,
    summary: *mut PcSpectrum,
    eigenvalues: *mut f64,
    len: usize,
) -> PcStatus {
    guard(|| {
        let op = deref(op, "op")?;
        let s = out(summary, "summary")?;
        let n = op.0.matrix.nrows();
        if !eigenvalues.is_null() {
            room(n, len)?;
        }
        let r = commutator::spectrum(&op.0, rank_threshold)?;
        if !eigenvalues.is_null() {
            std::slice::from_raw_parts_mut(eigenvalues, n).copy_from_slice(&r.eigenvalues);
        }
        *s = PcSpectrum {
            dim: n,
            min_eig: r.min_eig,
            max_eig: r.max_eig,
            trace: r.trace,
            numerical_rank: r.numerical_rank,
            positive: r.pass,
        };
        Ok(PcStatus::Ok)
    })
}

/// Matrix trace against `[f][g] / 2 pi` for Nyström routes.
///
/// # Safety
/// Outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_operator_trace_identity(
    op: *const PcOperator,
    lhs: *mut f64,
    rhs: *mut f64,
    error: *mut f64,
) -> PcStatus {
    guard(|| {
        let op = deref(op, "op")?;
        let (l, r, e) = (out(lhs, "lhs")?, out(rhs, "rhs")?, out(error, "error")?);
        let t = commutator::trace_identity_check(&op.0)?;
        *l = t.lhs;
        *r = t.rhs;
        *e = t.error;
        Ok(PcStatus::Ok)
    })
}

/// Run an experiment config given as JSON text and return the report as a
/// JSON string (release with [`pc_string_free`]). Returns
/// `PC_STATUS_CHECK_FAILED` with a report when some check fails.
///
/// # Safety
/// `config_json` must be a NUL-terminated string, `base_dir` null or one,
/// and `report` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_run_config(
    config_json: *const c_char,
    base_dir: *const c_char,
    report: *mut *mut c_char,
) -> PcStatus {
    guard(|| {
        let o = out(report, "report")?;
        let text = string(config_json, "config_json")?;
        let base = if base_dir.is_null() { "." } else { string(base_dir, "base_dir")? };
        let config = ExperimentConfig::parse(text, Path::new(base))?;
        let r = cli::execute(&config)?;
        let json = r.to_json()?;
        let c = CString::new(json).map_err(|_| Fail(PcStatus::Panic, "report contains NUL".into()))?;
        *o = c.into_raw();
        Ok(if r.passed() { PcStatus::Ok } else { PcStatus::CheckFailed })
    })
}
