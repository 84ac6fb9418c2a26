//! Experiment configs: a JSON document with a versioned schema, an
//! experiment kind, and kind-specific parameters.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::commutator::Route;
use crate::discretize::Grid;
use crate::error::{Error, Result};
use crate::funcspace::{cosh_mollify, gaussian_mollify, RealFunction, TanhMeasure, Term};
use crate::monotone::MonotoneFunction;

pub const SCHEMA: &str = "poscomm.experiment/1";

fn cfg(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

fn one() -> f64 {
    1.0
}

/// Function descriptor: catalog name plus parameters, or a sample file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// `amplitude * tanh(rate (t - center)) + offset`
    Tanh {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        rate: f64,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `amplitude * arctan((t - center)/scale) + offset`
    Arctan {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `amplitude * sin(frequency t + phase)`
    Sine {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    Constant { value: f64 },
    /// Finite sum of closed-form terms.
    Sum {
        terms: Vec<Term>,
        #[serde(default)]
        offset: f64,
    },
    /// `sum_i w_i tanh(alpha_hat (t - s_i)) + offset`, atoms as `[s, w]`.
    TanhMeasure {
        atoms: Vec<(f64, f64)>,
        alpha: f64,
        #[serde(default)]
        offset: f64,
    },
    /// Two-column text file `t f(t)`, relative to the config file.
    Sampled { path: PathBuf },
    Composed {
        outer: MonotoneFunction,
        inner: Box<FunctionSpec>,
    },
    GaussianSmoothed { inner: Box<FunctionSpec>, width: f64 },
    CoshMollified { inner: Box<FunctionSpec>, epsilon: f64 },
}

impl FunctionSpec {
    pub fn build(&self, base: &Path, field: &str) -> Result<RealFunction> {
        let wrap = |e: Error| match e {
            Error::InvalidArgument(m) => cfg(field, m),
            other => other,
        };
        Ok(match self {
            FunctionSpec::Tanh {
                amplitude,
                rate,
                center,
                offset,
            } => RealFunction::closed_form(
                vec![Term::Tanh {
                    amplitude: *amplitude,
                    rate: *rate,
                    center: *center,
                }],
                *offset,
            )
            .map_err(wrap)?,
            FunctionSpec::Arctan {
                amplitude,
                scale,
                center,
                offset,
            } => RealFunction::closed_form(
                vec![Term::Arctan {
                    amplitude: *amplitude,
                    scale: *scale,
                    center: *center,
                }],
                *offset,
            )
            .map_err(wrap)?,
            FunctionSpec::Sine {
                amplitude,
                frequency,
                phase,
            } => RealFunction::closed_form(
                vec![Term::Sine {
                    amplitude: *amplitude,
                    frequency: *frequency,
                    phase: *phase,
                }],
                0.0,
            )
            .map_err(wrap)?,
            FunctionSpec::Constant { value } => RealFunction::constant(*value),
            FunctionSpec::Sum { terms, offset } => {
                RealFunction::closed_form(terms.clone(), *offset).map_err(wrap)?
            }
            FunctionSpec::TanhMeasure {
                atoms,
                alpha,
                offset,
            } => TanhMeasure::new(atoms.clone(), *offset, *alpha)
                .map_err(wrap)?
                .into_function(),
            FunctionSpec::Sampled { path } => {
                let (t, v) = read_samples(&base.join(path), field)?;
                RealFunction::sampled(t, v).map_err(wrap)?
            }
            FunctionSpec::Composed { outer, inner } => {
                outer.validate().map_err(wrap)?;
                RealFunction::Composed {
                    outer: outer.clone(),
                    inner: Box::new(inner.build(base, &format!("{field}.inner"))?),
                }
            }
            FunctionSpec::GaussianSmoothed { inner, width } => {
                let f = inner.build(base, &format!("{field}.inner"))?;
                gaussian_mollify(&f, *width).map_err(wrap)?
            }
            FunctionSpec::CoshMollified { inner, epsilon } => {
                let f = inner.build(base, &format!("{field}.inner"))?;
                cosh_mollify(&f, *epsilon).map_err(wrap)?.into_function()
            }
        })
    }
}

/// Two whitespace- or comma-separated columns; `#` starts a comment.
pub fn read_samples(path: &Path, field: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| cfg(format!("{field}.path"), format!("{}: {e}", path.display())))?;
    let mut t = Vec::new();
    let mut v = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| {
                cfg(
                    format!("{field}.path"),
                    format!("{}:{}: expected two numbers", path.display(), ln + 1),
                )
            })
        };
        if cols.len() != 2 {
            return Err(cfg(
                format!("{field}.path"),
                format!("{}:{}: expected two columns", path.display(), ln + 1),
            ));
        }
        t.push(parse(cols[0])?);
        v.push(parse(cols[1])?);
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(cfg(
            format!("{field}.path"),
            "first column must be strictly increasing",
        ));
    }
    Ok((t, v))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub points: usize,
}

impl GridSpec {
    pub fn build(&self, field: &str) -> Result<Grid> {
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(cfg(format!("{field}.L"), "half-width must be positive and finite"));
        }
        if !self.points.is_power_of_two() || self.points < 8 {
            return Err(cfg(
                format!("{field}.N"),
                format!("N = {} must be a power of two and at least 8", self.points),
            ));
        }
        Grid::transform(self.half_width, self.points)
    }
}

fn default_grid() -> GridSpec {
    GridSpec {
        half_width: 24.0,
        points: 2048,
    }
}

/// Uniform lattice `from..=to` with `count` points.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lattice {
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

impl Lattice {
    pub fn points(&self, field: &str) -> Result<Vec<f64>> {
        if self.count < 2 || !(self.to > self.from) {
            return Err(cfg(field, "need count >= 2 and to > from"));
        }
        let n = self.count - 1;
        Ok((0..=n)
            .map(|k| self.from + (self.to - self.from) * k as f64 / n as f64)
            .collect())
    }
}

/// Expected value with tolerance.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub value: f64,
    pub tol: f64,
    /// Compare relative to `|value|`.
    #[serde(default)]
    pub relative: bool,
}

pub fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(cfg(field, format!("must be positive, got {v}")))
    }
}

fn check_target(field: &str, t: &Option<Target>) -> Result<()> {
    match t {
        Some(t) => positive(&format!("{field}.tol"), t.tol),
        None => Ok(()),
    }
}

fn default_route() -> Route {
    Route::NystromX
}
fn default_rank() -> f64 {
    crate::commutator::RANK_THRESHOLD
}
fn default_pos() -> f64 {
    crate::commutator::POSITIVITY_TOL
}
fn default_trace_tol() -> f64 {
    1e-6
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildKernel {
    pub f: FunctionSpec,
    pub g: FunctionSpec,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    #[serde(default = "default_route")]
    pub route: Route,
    /// Row of the kernel slice: the node nearest this coordinate.
    #[serde(default)]
    pub slice_at: f64,
    /// Expected kernel value `K(x0, x0)` (matrix entry over its weight).
    pub expect_diagonal: Option<Target>,
    #[serde(default)]
    pub expect_zero: bool,
    /// Compare against the assembled rank-3 model with this beta.
    pub compare_rank3: Option<f64>,
    pub compare_tol: Option<f64>,
    /// Interior half-width for comparison against the Nyström-x route.
    pub compare_nystrom_interior: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumExpect {
    pub psd: Option<bool>,
    pub rank: Option<usize>,
    pub lambda1: Option<Target>,
    pub lambda_min: Option<Target>,
    /// Counts of positive and negative significant eigenvalues.
    pub signs: Option<(usize, usize)>,
    pub max_abs_below: Option<f64>,
    pub trace_exactly_zero: Option<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    pub f: FunctionSpec,
    pub g: FunctionSpec,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    #[serde(default = "default_route")]
    pub route: Route,
    #[serde(default = "default_rank")]
    pub rank_threshold: f64,
    #[serde(default = "default_pos")]
    pub positivity_tol: f64,
    #[serde(default)]
    pub expect: SpectrumExpect,
    /// Compare significant eigenvalues against another route.
    pub compare_route: Option<Route>,
    /// Compare against Nyström-x of the swapped pair `(-g(-.), f)`.
    #[serde(default)]
    pub compare_swapped: bool,
    pub compare_tol: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyPair {
    pub f: FunctionSpec,
    pub g: FunctionSpec,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    #[serde(default = "default_rank")]
    pub rank_threshold: f64,
    #[serde(default = "default_pos")]
    pub positivity_tol: f64,
    #[serde(default = "default_trace_tol")]
    pub trace_tol: f64,
    pub expect_rank: Option<usize>,
    pub expect_lambda1: Option<Target>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftedPoint {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub tol: f64,
    /// Independent value; defaults to the transform profile of `f'`.
    pub expect: Option<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagonalCheck {
    pub interior: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceCheckParams {
    pub f: FunctionSpec,
    pub g: FunctionSpec,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    #[serde(default = "default_route")]
    pub route: Route,
    #[serde(default = "default_trace_tol")]
    pub trace_tol: f64,
    pub diagonal: Option<DiagonalCheck>,
    #[serde(default)]
    pub shifted: Vec<ShiftedPoint>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rank1 {
    pub alpha: f64,
    #[serde(default = "one")]
    pub c1: f64,
    #[serde(default = "one")]
    pub c2: f64,
    #[serde(default)]
    pub t1: f64,
    #[serde(default)]
    pub t2: f64,
    #[serde(default)]
    pub d1: f64,
    #[serde(default)]
    pub d2: f64,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    #[serde(default = "default_rank")]
    pub rank_threshold: f64,
    #[serde(default = "lambda_tol")]
    pub lambda1_tol: f64,
    #[serde(default = "recon_tol")]
    pub reconstruct_tol: f64,
    /// Shifts `(t1, t2)` of a second pair whose top eigenvalue must agree.
    pub shift: Option<(f64, f64)>,
    #[serde(default = "shift_tol")]
    pub shift_tol: f64,
    /// Scale `alpha_hat` by this factor; the rank must then exceed one.
    pub perturb: Option<f64>,
}

fn lambda_tol() -> f64 {
    1e-4
}
fn recon_tol() -> f64 {
    1e-6
}
fn shift_tol() -> f64 {
    1e-8
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rank3 {
    pub beta: f64,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    #[serde(default = "recon_tol")]
    pub tol: f64,
    #[serde(default = "strip_tol")]
    pub strip_tol: f64,
}

fn strip_tol() -> f64 {
    0.05
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub primary: Vec<f64>,
    pub secondary: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    /// `{sech x, cosh(x/2)/cosh x, sinh(x/2)/cosh x}`
    Rank3Factors,
    /// Leading eigenvectors of the operator.
    Eigenvectors,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaRecoverParams {
    pub f: FunctionSpec,
    pub g: FunctionSpec,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    pub probes: Option<ProbeSpec>,
    pub reference: Option<Reference>,
    #[serde(default = "reassembly_tol")]
    pub reassembly_tol: f64,
    #[serde(default = "reassembly_tol")]
    pub angle_tol: f64,
}

fn reassembly_tol() -> f64 {
    1e-5
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Compose {
    pub outer_f: MonotoneFunction,
    pub outer_g: MonotoneFunction,
    pub f: FunctionSpec,
    pub g: FunctionSpec,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    #[serde(default = "yes")]
    pub expect_psd: bool,
    /// Compare the spectrum with that of the uncomposed pair.
    #[serde(default)]
    pub compare_base: bool,
    /// Expected closed range hull of `F o f`.
    pub expect_range_f: Option<(f64, f64)>,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoewnerParams {
    pub function: MonotoneFunction,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Defaults to the catalog's claim.
    pub expect_monotone: Option<bool>,
    /// With `expect_monotone = true`: require the minimum to be at least
    /// this value (exactness checks for affine maps).
    pub min_eig_at_least: Option<f64>,
}

fn default_sizes() -> Vec<usize> {
    vec![2, 3, 5]
}
fn default_trials() -> usize {
    1000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum SampleSource {
    File { path: PathBuf },
    Function { function: FunctionSpec, window: Lattice },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitMeasureParams {
    pub samples: SampleSource,
    pub alpha: f64,
    pub atoms: Lattice,
    #[serde(default = "membership")]
    pub threshold: f64,
    pub expect_member: Option<bool>,
    /// Expected `[location, weight]` clusters.
    pub expect_atoms: Option<Vec<(f64, f64)>>,
    #[serde(default = "loc_tol")]
    pub location_tol: f64,
    #[serde(default = "weight_tol")]
    pub weight_tol: f64,
    pub max_residual: Option<f64>,
}

fn membership() -> f64 {
    crate::funcspace::MEMBERSHIP_THRESHOLD
}
fn loc_tol() -> f64 {
    0.05
}
fn weight_tol() -> f64 {
    1e-2
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuotientPoint {
    pub x: f64,
    pub r: f64,
    pub expect: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivAvgParams {
    pub g: FunctionSpec,
    pub xs: Option<Lattice>,
    #[serde(default)]
    pub rs: Vec<f64>,
    pub slope_range: Option<(f64, f64)>,
    pub max_error: Option<f64>,
    #[serde(default)]
    pub points: Vec<QuotientPoint>,
    #[serde(default = "mass_tol")]
    pub mass_tol: f64,
    /// Require `I_r(x) >= 0` on the lattice for every `r`.
    #[serde(default)]
    pub expect_nonnegative: bool,
}

fn mass_tol() -> f64 {
    1e-10
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StripCheckParams {
    pub f: FunctionSpec,
    pub g: FunctionSpec,
    pub ys: Vec<f64>,
    #[serde(default = "default_lattice")]
    pub lattice: Lattice,
    #[serde(default = "strip_residual")]
    pub residual_tol: f64,
    /// One flag per entry of `ys`.
    #[serde(default)]
    pub expect_pole_proximity: Vec<bool>,
}

fn default_lattice() -> Lattice {
    Lattice {
        from: -10.0,
        to: 10.0,
        count: 201,
    }
}
fn strip_residual() -> f64 {
    1e-8
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentPoint {
    pub b: f64,
    #[serde(default = "moment_window")]
    pub window: f64,
    pub expect: Option<Target>,
    pub expect_divergent: Option<bool>,
}

fn moment_window() -> f64 {
    24.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySpec {
    pub expect_beta: Option<Target>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HerglotzSpec {
    pub alpha: f64,
    #[serde(default = "herglotz_samples")]
    pub samples: usize,
    pub expect_pass: Option<bool>,
}

fn herglotz_samples() -> usize {
    64
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    /// Real arguments; each compares the closed-form and FFT routes.
    #[serde(default)]
    pub ks: Vec<f64>,
    #[serde(default = "profile_tol")]
    pub tol: f64,
    /// `[k, expected]` pairs at real `k`.
    #[serde(default)]
    pub values: Vec<(f64, f64)>,
    /// `[kappa, expected]` pairs: `f'^(i kappa)`.
    #[serde(default)]
    pub imaginary: Vec<(f64, f64)>,
    #[serde(default = "profile_value_tol")]
    pub value_tol: f64,
    /// Expected trapezoid integral of `f'` over the grid.
    pub integral: Option<Target>,
}

fn profile_tol() -> f64 {
    1e-8
}
fn profile_value_tol() -> f64 {
    1e-5
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalPoint {
    pub z: (f64, f64),
    pub expect: (f64, f64),
    pub tol: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MollifySpec {
    pub epsilon: f64,
    pub expect_total_weight: Option<Target>,
    /// `[t, expected]` pairs for the mollified function.
    #[serde(default)]
    pub values: Vec<(f64, f64)>,
    /// Check the representation against direct convolution at these points.
    #[serde(default)]
    pub compare_at: Vec<f64>,
    #[serde(default = "mollify_tol")]
    pub compare_tol: f64,
    #[serde(default)]
    pub herglotz: bool,
}

fn mollify_tol() -> f64 {
    1e-8
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothSpec {
    pub width: f64,
    /// `[t, expected]` pairs.
    #[serde(default)]
    pub values: Vec<(f64, f64)>,
    #[serde(default = "mollify_tol")]
    pub tol: f64,
    /// Require `sup |f_w| <= sup_bound` on a dense lattice.
    pub sup_bound: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentScanParams {
    pub f: FunctionSpec,
    #[serde(default)]
    pub evaluate: Vec<EvalPoint>,
    #[serde(default)]
    pub moments: Vec<MomentPoint>,
    pub decay: Option<DecaySpec>,
    pub herglotz: Option<HerglotzSpec>,
    pub profile: Option<ProfileSpec>,
    pub mollify: Option<MollifySpec>,
    pub smooth: Option<SmoothSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    BuildKernel,
    Spectrum,
    VerifyPair,
    TraceCheck,
    Rank1,
    Rank3,
    GammaRecover,
    Compose,
    LoewnerTest,
    FitMeasure,
    DerivAvg,
    StripCheck,
    MomentScan,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::BuildKernel => "build-kernel",
            Kind::Spectrum => "spectrum",
            Kind::VerifyPair => "verify-pair",
            Kind::TraceCheck => "trace-check",
            Kind::Rank1 => "rank1",
            Kind::Rank3 => "rank3",
            Kind::GammaRecover => "gamma-recover",
            Kind::Compose => "compose",
            Kind::LoewnerTest => "loewner-test",
            Kind::FitMeasure => "fit-measure",
            Kind::DerivAvg => "deriv-avg",
            Kind::StripCheck => "strip-check",
            Kind::MomentScan => "moment-scan",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Params {
    BuildKernel(BuildKernel),
    Spectrum(SpectrumParams),
    VerifyPair(VerifyPair),
    TraceCheck(TraceCheckParams),
    Rank1(Rank1),
    Rank3(Rank3),
    GammaRecover(GammaRecoverParams),
    Compose(Compose),
    LoewnerTest(LoewnerParams),
    FitMeasure(FitMeasureParams),
    DerivAvg(DerivAvgParams),
    StripCheck(StripCheckParams),
    MomentScan(MomentScanParams),
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// The document as read, for the report echo.
    pub raw: Value,
    /// Directory against which relative paths resolve.
    pub base_dir: PathBuf,
    pub params: Params,
}

const COMMON: [&str; 5] = ["schema", "kind", "seed", "output", "description"];

fn params<T: DeserializeOwned>(rest: Map<String, Value>) -> Result<T> {
    serde_path_to_error::deserialize(Value::Object(rest)).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "<root>".to_string() } else { path };
        cfg(field, e.into_inner().to_string())
    })
}

impl ExperimentConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: Value = serde_json::from_str(text).map_err(|e| cfg("<document>", e.to_string()))?;
        let obj = raw
            .as_object()
            .ok_or_else(|| cfg("<document>", "config must be a JSON object"))?;
        match obj.get("schema") {
            Some(Value::String(s)) if s == SCHEMA => {}
            Some(other) => {
                return Err(cfg("schema", format!("expected \"{SCHEMA}\", got {other}")));
            }
            None => return Err(cfg("schema", format!("missing; expected \"{SCHEMA}\""))),
        }
        let kind: Kind = match obj.get("kind") {
            Some(v) => serde_json::from_value(v.clone())
                .map_err(|_| cfg("kind", format!("unknown experiment kind {v}")))?,
            None => return Err(cfg("kind", "missing")),
        };
        let seed = match obj.get("seed") {
            None => 0,
            Some(v) => v
                .as_u64()
                .ok_or_else(|| cfg("seed", "must be a nonnegative integer"))?,
        };
        let output = match obj.get("output") {
            None => None,
            Some(Value::String(s)) => Some(PathBuf::from(s)),
            Some(_) => return Err(cfg("output", "must be a string path")),
        };
        if let Some(d) = obj.get("description") {
            if !d.is_string() {
                return Err(cfg("description", "must be a string"));
            }
        }
        let rest: Map<String, Value> = obj
            .iter()
            .filter(|(k, _)| !COMMON.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let params = match kind {
            Kind::BuildKernel => Params::BuildKernel(params(rest)?),
            Kind::Spectrum => Params::Spectrum(params(rest)?),
            Kind::VerifyPair => Params::VerifyPair(params(rest)?),
            Kind::TraceCheck => Params::TraceCheck(params(rest)?),
            Kind::Rank1 => Params::Rank1(params(rest)?),
            Kind::Rank3 => Params::Rank3(params(rest)?),
            Kind::GammaRecover => Params::GammaRecover(params(rest)?),
            Kind::Compose => Params::Compose(params(rest)?),
            Kind::LoewnerTest => Params::LoewnerTest(params(rest)?),
            Kind::FitMeasure => Params::FitMeasure(params(rest)?),
            Kind::DerivAvg => Params::DerivAvg(params(rest)?),
            Kind::StripCheck => Params::StripCheck(params(rest)?),
            Kind::MomentScan => Params::MomentScan(params(rest)?),
        };
        let config = ExperimentConfig {
            kind,
            seed,
            output,
            raw,
            base_dir: base_dir.to_path_buf(),
            params,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg("--config", format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Field-level checks that do not need any numerics.
    pub fn validate(&self) -> Result<()> {
        match &self.params {
            Params::BuildKernel(p) => {
                p.grid.build("grid")?;
                check_target("expect_diagonal", &p.expect_diagonal)?;
                if let Some(t) = p.compare_tol {
                    positive("compare_tol", t)?;
                }
                if let Some(b) = p.compare_rank3 {
                    positive("compare_rank3", b)?;
                }
            }
            Params::Spectrum(p) => {
                p.grid.build("grid")?;
                positive("rank_threshold", p.rank_threshold)?;
                positive("positivity_tol", p.positivity_tol)?;
                check_target("expect.lambda1", &p.expect.lambda1)?;
                check_target("expect.lambda_min", &p.expect.lambda_min)?;
                if let Some(t) = p.compare_tol {
                    positive("compare_tol", t)?;
                }
            }
            Params::VerifyPair(p) => {
                p.grid.build("grid")?;
                positive("rank_threshold", p.rank_threshold)?;
                positive("positivity_tol", p.positivity_tol)?;
                positive("trace_tol", p.trace_tol)?;
                check_target("expect_lambda1", &p.expect_lambda1)?;
            }
            Params::TraceCheck(p) => {
                p.grid.build("grid")?;
                positive("trace_tol", p.trace_tol)?;
                for (i, s) in p.shifted.iter().enumerate() {
                    positive(&format!("shifted[{i}].tol"), s.tol)?;
                }
                if let Some(d) = &p.diagonal {
                    positive("diagonal.tol", d.tol)?;
                    positive("diagonal.interior", d.interior)?;
                }
            }
            Params::Rank1(p) => {
                p.grid.build("grid")?;
                positive("alpha", p.alpha)?;
                positive("rank_threshold", p.rank_threshold)?;
                positive("lambda1_tol", p.lambda1_tol)?;
                positive("reconstruct_tol", p.reconstruct_tol)?;
                positive("shift_tol", p.shift_tol)?;
                if let Some(s) = p.perturb {
                    positive("perturb", s)?;
                }
            }
            Params::Rank3(p) => {
                p.grid.build("grid")?;
                positive("beta", p.beta)?;
                positive("tol", p.tol)?;
                positive("strip_tol", p.strip_tol)?;
            }
            Params::GammaRecover(p) => {
                p.grid.build("grid")?;
                positive("reassembly_tol", p.reassembly_tol)?;
                positive("angle_tol", p.angle_tol)?;
            }
            Params::Compose(p) => {
                p.grid.build("grid")?;
                p.outer_f
                    .validate()
                    .map_err(|e| cfg("outer_f", e.to_string()))?;
                p.outer_g
                    .validate()
                    .map_err(|e| cfg("outer_g", e.to_string()))?;
            }
            Params::LoewnerTest(p) => {
                p.function
                    .validate()
                    .map_err(|e| cfg("function", e.to_string()))?;
                if p.sizes.is_empty() || p.sizes.iter().any(|&n| n < 2) {
                    return Err(cfg("sizes", "need at least one size, each >= 2"));
                }
                if p.trials == 0 {
                    return Err(cfg("trials", "must be positive"));
                }
            }
            Params::FitMeasure(p) => {
                positive("alpha", p.alpha)?;
                positive("threshold", p.threshold)?;
                positive("location_tol", p.location_tol)?;
                positive("weight_tol", p.weight_tol)?;
                p.atoms.points("atoms")?;
                if let SampleSource::Function { window, .. } = &p.samples {
                    window.points("samples.window")?;
                }
            }
            Params::DerivAvg(p) => {
                positive("mass_tol", p.mass_tol)?;
                if let Some(xs) = &p.xs {
                    xs.points("xs")?;
                }
                if p.rs.iter().any(|r| !(*r > 0.0)) {
                    return Err(cfg("rs", "radii must be positive"));
                }
                if p.rs.windows(2).any(|w| !(w[1] < w[0])) {
                    return Err(cfg("rs", "radii must be strictly decreasing"));
                }
                if !p.rs.is_empty() && p.xs.is_none() {
                    return Err(cfg("xs", "a lattice is required with rs"));
                }
            }
            Params::StripCheck(p) => {
                positive("residual_tol", p.residual_tol)?;
                p.lattice.points("lattice")?;
                if !p.expect_pole_proximity.is_empty() && p.expect_pole_proximity.len() != p.ys.len() {
                    return Err(cfg("expect_pole_proximity", "need one flag per entry of ys"));
                }
                for (i, &y) in p.ys.iter().enumerate() {
                    positive(&format!("ys[{i}]"), y)?;
                }
            }
            Params::MomentScan(p) => {
                for (i, m) in p.moments.iter().enumerate() {
                    positive(&format!("moments[{i}].window"), m.window)?;
                    check_target(&format!("moments[{i}].expect"), &m.expect)?;
                }
                if let Some(h) = &p.herglotz {
                    positive("herglotz.alpha", h.alpha)?;
                }
                if let Some(pr) = &p.profile {
                    pr.grid.build("profile.grid")?;
                    positive("profile.tol", pr.tol)?;
                }
                if let Some(m) = &p.mollify {
                    positive("mollify.epsilon", m.epsilon)?;
                }
                if let Some(s) = &p.smooth {
                    positive("smooth.width", s.width)?;
                }
                if let Some(d) = &p.decay {
                    check_target("decay.expect_beta", &d.expect_beta)?;
                }
            }
        }
        Ok(())
    }
}
