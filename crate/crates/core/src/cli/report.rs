//! Run reports: named checks with verdicts, free-form result sections, and
//! the tables that `plot` extracts from them.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

pub const REPORT_SCHEMA: &str = "poscomm.report/1";

/// One comparison. `error` is what was compared against `tolerance`; either
/// may be absent for boolean checks.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: Value,
    pub rhs: Value,
    pub error: Option<f64>,
    pub tolerance: Option<f64>,
    pub verdict: bool,
}

impl Check {
    /// `|lhs - rhs| <= tol`.
    pub fn close(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let e = (lhs - rhs).abs();
        Check {
            name: name.into(),
            lhs: json!(lhs),
            rhs: json!(rhs),
            error: Some(e),
            tolerance: Some(tol),
            verdict: e <= tol,
        }
    }

    /// `|lhs - rhs| / |rhs| <= tol`, absolute when `rhs = 0`.
    pub fn relative(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let e = if rhs != 0.0 {
            (lhs - rhs).abs() / rhs.abs()
        } else {
            lhs.abs()
        };
        Check {
            name: name.into(),
            lhs: json!(lhs),
            rhs: json!(rhs),
            error: Some(e),
            tolerance: Some(tol),
            verdict: e <= tol,
        }
    }

    /// A measured error against a tolerance.
    pub fn below(name: impl Into<String>, error: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            lhs: json!(error),
            rhs: json!(tol),
            error: Some(error),
            tolerance: Some(tol),
            verdict: error <= tol,
        }
    }

    /// `value >= bound`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            lhs: json!(value),
            rhs: json!(bound),
            error: None,
            tolerance: None,
            verdict: value >= bound,
        }
    }

    pub fn equal<T: Serialize + PartialEq>(name: impl Into<String>, got: T, want: T) -> Self {
        let verdict = got == want;
        Check {
            name: name.into(),
            lhs: json!(got),
            rhs: json!(want),
            error: None,
            tolerance: None,
            verdict,
        }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            name: name.into(),
            lhs: json!(value),
            rhs: json!([lo, hi]),
            error: None,
            tolerance: None,
            verdict: value >= lo && value <= hi,
        }
    }
}

/// Checks and sections produced by one experiment.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub sections: Map<String, Value>,
}

impl Outcome {
    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn section(&mut self, name: &str, v: impl Serialize) -> Result<()> {
        self.sections.insert(name.to_string(), serde_json::to_value(v)?);
        Ok(())
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub version: &'static str,
    pub kind: &'static str,
    pub seed: u64,
    pub config: Value,
    pub verdict: &'static str,
    pub checks: Vec<Check>,
    pub sections: Map<String, Value>,
    /// Wall-clock data; the only field that differs between identical runs.
    pub timing: Timing,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Write through a sibling temporary file and rename, so readers never see
/// a partial report.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Tables extractable by `plot`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotKind {
    Eigenvalues,
    KernelSlice,
    MeasureAtoms,
    Convergence,
}

impl PlotKind {
    fn section(self) -> &'static str {
        match self {
            PlotKind::Eigenvalues => "spectrum",
            PlotKind::KernelSlice => "kernel_slice",
            PlotKind::MeasureAtoms => "measure_atoms",
            PlotKind::Convergence => "convergence",
        }
    }
}

fn num(v: &Value) -> String {
    match v.as_f64() {
        Some(x) => format!("{x:e}"),
        None => "nan".into(),
    }
}

fn malformed(what: &str) -> Error {
    Error::Config {
        field: what.into(),
        message: "report section is malformed".into(),
    }
}

/// CSV table for one plot kind.
pub fn plot_table(report: &Value, kind: PlotKind) -> Result<String> {
    let name = kind.section();
    let sec = report
        .get("sections")
        .and_then(|s| s.get(name))
        .ok_or_else(|| Error::SectionAbsent(name.into()))?;
    let mut out = String::new();
    let arr = |v: Option<&Value>, what: &str| -> Result<Vec<Value>> {
        v.and_then(Value::as_array).cloned().ok_or_else(|| malformed(what))
    };
    match kind {
        PlotKind::Eigenvalues => {
            let ev = arr(sec.get("eigenvalues"), "spectrum.eigenvalues")?;
            let thr = sec.get("rank_threshold").and_then(Value::as_f64).unwrap_or(0.0);
            let top = ev
                .iter()
                .filter_map(Value::as_f64)
                .fold(0.0f64, |m, x| m.max(x.abs()));
            out.push_str("index,eigenvalue,significant\n");
            for (i, v) in ev.iter().enumerate() {
                let sig = v.as_f64().map(|x| x.abs() > thr * top).unwrap_or(false);
                out.push_str(&format!("{i},{},{}\n", num(v), sig as u8));
            }
        }
        PlotKind::KernelSlice => {
            let rows = arr(sec.get("values"), "kernel_slice.values")?;
            out.push_str("x,re,im\n");
            for r in rows {
                let r = r.as_array().ok_or_else(|| malformed("kernel_slice.values"))?;
                if r.len() != 3 {
                    return Err(malformed("kernel_slice.values"));
                }
                out.push_str(&format!("{},{},{}\n", num(&r[0]), num(&r[1]), num(&r[2])));
            }
        }
        PlotKind::MeasureAtoms => {
            let rows = arr(Some(sec), "measure_atoms")?;
            out.push_str("location,weight\n");
            for r in rows {
                let r = r.as_array().ok_or_else(|| malformed("measure_atoms"))?;
                if r.len() != 2 {
                    return Err(malformed("measure_atoms"));
                }
                out.push_str(&format!("{},{}\n", num(&r[0]), num(&r[1])));
            }
        }
        PlotKind::Convergence => {
            let rs = arr(sec.get("rs"), "convergence.rs")?;
            let es = arr(sec.get("errors"), "convergence.errors")?;
            out.push_str("r,error\n");
            for (r, e) in rs.iter().zip(&es) {
                out.push_str(&format!("{},{}\n", num(r), num(e)));
            }
        }
    }
    Ok(out)
}
