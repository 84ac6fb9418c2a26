//! One function per experiment kind, each turning parameters into checks
//! and report sections.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde_json::json;

use super::config::*;
use super::report::{Check, Outcome};
use crate::commutator::{
    build, build_nystrom_p, build_nystrom_x, diagonal_identity_check, shifted_trace, spectrum,
    spectrum_with, strip_positivity_check, trace_identity_check, Route,
    SpectralReport, POSITIVITY_TOL, RANK_THRESHOLD,
};
use crate::derivavg::{averaged_quotient, convergence_study, AveragingProfile};
use crate::discretize::{fourier_deriv, FourierProfile, Grid};
use crate::error::{Error, Result};
use crate::finiterank::{
    gamma_recover, kato_rank_one_pair, model_from_operator, principal_angles, rank3_example,
    rank3_factors, reconstruct_fprime, reconstruct_gprime, strip_product, GammaProbe,
};
use crate::funcspace::{
    cosh_kernel, cosh_mollify, estimate_decay_rate, exp_moment, fit_tanh_measure_with, gaussian_mollify,
    herglotz_check, RealFunction, VariationBracket,
};
use crate::linalg;
use crate::monotone::{compose_pair, loewner_matrix_test};
use crate::quad;

pub fn run(config: &ExperimentConfig) -> Result<Outcome> {
    let base = config.base_dir.as_path();
    match &config.params {
        Params::BuildKernel(p) => build_kernel(p, base),
        Params::Spectrum(p) => spectrum_kind(p, base),
        Params::VerifyPair(p) => verify_pair(p, base),
        Params::TraceCheck(p) => trace_check(p, base),
        Params::Rank1(p) => rank1(p),
        Params::Rank3(p) => rank3(p),
        Params::GammaRecover(p) => gamma(p, base),
        Params::Compose(p) => compose(p, base),
        Params::LoewnerTest(p) => loewner(p, config.seed),
        Params::FitMeasure(p) => fit_measure(p, base),
        Params::DerivAvg(p) => deriv_avg(p, base),
        Params::StripCheck(p) => strip_check(p, base),
        Params::MomentScan(p) => moment_scan(p, base),
    }
}

fn pair(f: &FunctionSpec, g: &FunctionSpec, base: &Path) -> Result<(RealFunction, RealFunction)> {
    Ok((f.build(base, "f")?, g.build(base, "g")?))
}

fn target(out: &mut Outcome, name: &str, got: f64, t: &Target) {
    out.check(if t.relative {
        Check::relative(name, got, t.value, t.tol)
    } else {
        Check::close(name, got, t.value, t.tol)
    });
}

fn max_dist(a: &ndarray::Array2<Complex64>, b: &ndarray::Array2<Complex64>) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}

fn sign_counts(s: &SpectralReport) -> (usize, usize) {
    let sig = s.significant();
    (
        sig.iter().filter(|l| **l > 0.0).count(),
        sig.iter().filter(|l| **l < 0.0).count(),
    )
}

/// Relative discrete L2 distance.
fn rel_l2(got: &[f64], want: &[f64]) -> f64 {
    let num: f64 = got.iter().zip(want).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = want.iter().map(|b| b * b).sum();
    (num / den).sqrt()
}

fn build_kernel(p: &BuildKernel, base: &Path) -> Result<Outcome> {
    let (f, g) = pair(&p.f, &p.g, base)?;
    let grid = p.grid.build("grid")?;
    let op = build(&f, &g, &grid, p.route)?;
    let mut out = Outcome::default();
    let dev = linalg::hermitian_deviation(&op.matrix);
    out.check(Check::below("hermitian deviation", dev, crate::commutator::HERMITIAN_TOL));
    let i0 = nearest(&op.nodes, p.slice_at);
    let wi = op.weights[i0];
    let values: Vec<[f64; 3]> = (0..op.dim())
        .map(|j| {
            let k = op.matrix[[i0, j]] / (wi * op.weights[j]).sqrt();
            [op.nodes[j], k.re, k.im]
        })
        .collect();
    out.section(
        "operator",
        json!({
            "route": op.route,
            "dim": op.dim(),
            "trace": op.trace(),
            "max_abs": op.max_abs(),
            "hermitian_deviation": dev,
        }),
    )?;
    out.section("kernel_slice", json!({ "row": i0, "at": op.nodes[i0], "values": values }))?;
    if let Some(t) = &p.expect_diagonal {
        target(&mut out, "K(x0, x0)", op.matrix[[i0, i0]].re / wi, t);
    }
    if p.expect_zero {
        out.check(Check::below("max |entry|", op.max_abs(), 0.0));
    }
    if let Some(beta) = p.compare_rank3 {
        if op.route != Route::NystromX {
            return Err(Error::RouteMismatch("rank-3 model comparison needs nystrom-x".into()));
        }
        let (_, _, model) = rank3_example(beta, &grid)?;
        let d = max_dist(&model.assemble(), &op.matrix);
        out.check(Check::below("max |model - matrix|", d, p.compare_tol.unwrap_or(1e-6)));
    }
    if let Some(r) = p.compare_nystrom_interior {
        let nx = build_nystrom_x(&f, &g, &grid)?;
        if op.route == Route::NystromP {
            return Err(Error::RouteMismatch("momentum matrices are not on the position grid".into()));
        }
        let mut worst = 0.0f64;
        for i in 0..op.dim() {
            for j in 0..op.dim() {
                if op.nodes[i].abs() <= r && op.nodes[j].abs() <= r {
                    worst = worst.max((nx.matrix[[i, j]] - op.matrix[[i, j]]).norm());
                }
            }
        }
        out.check(Check::below(
            format!("interior |{} - nystrom-x|", op.route.name()),
            worst,
            p.compare_tol.unwrap_or(1e-4),
        ));
    }
    Ok(out)
}

fn nearest(nodes: &[f64], x: f64) -> usize {
    nodes
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

fn top_significant(s: &SpectralReport, count: usize) -> Vec<f64> {
    let mut v = s.significant();
    v.truncate(count);
    v
}

fn compare_spectra(out: &mut Outcome, name: &str, a: &SpectralReport, b: &SpectralReport, tol: f64) {
    let sa = a.significant();
    let sb = top_significant(b, sa.len());
    let scale = a.max_abs().max(1e-300);
    let worst = if sa.len() == sb.len() {
        sa.iter().zip(&sb).fold(0.0f64, |m, (x, y)| m.max((x - y).abs() / scale))
    } else {
        f64::INFINITY
    };
    out.check(Check::below(name, worst, tol));
}

fn spectrum_kind(p: &SpectrumParams, base: &Path) -> Result<Outcome> {
    let (f, g) = pair(&p.f, &p.g, base)?;
    let grid = p.grid.build("grid")?;
    let op = build(&f, &g, &grid, p.route)?;
    let s = spectrum_with(&op, p.rank_threshold, p.positivity_tol)?;
    let mut out = Outcome::default();
    let e = &p.expect;
    if let Some(psd) = e.psd {
        out.check(Check::equal("positive semidefinite", s.pass, psd));
    }
    if let Some(r) = e.rank {
        out.check(Check::equal("numerical rank", s.numerical_rank, r));
    }
    if let Some(t) = &e.lambda1 {
        target(&mut out, "largest eigenvalue", s.max_eig, t);
    }
    if let Some(t) = &e.lambda_min {
        target(&mut out, "smallest eigenvalue", s.min_eig, t);
    }
    if let Some(signs) = e.signs {
        out.check(Check::equal("significant signs (+, -)", sign_counts(&s), signs));
    }
    if let Some(b) = e.max_abs_below {
        out.check(Check::below("max |eigenvalue|", s.max_abs(), b));
    }
    if let Some(z) = e.trace_exactly_zero {
        out.check(Check::equal("trace exactly zero", op.trace() == 0.0, z));
    }
    let tol = p.compare_tol.unwrap_or(1e-6);
    if let Some(route) = p.compare_route {
        let other = build(&f, &g, &grid, route)?;
        let so = spectrum_with(&other, p.rank_threshold, p.positivity_tol)?;
        compare_spectra(&mut out, &format!("spectrum vs {}", route.name()), &s, &so, tol);
    }
    if p.compare_swapped {
        let swapped = build_nystrom_x(&g.reflect()?, &f, &grid)?;
        let ss = spectrum_with(&swapped, p.rank_threshold, p.positivity_tol)?;
        compare_spectra(&mut out, "spectrum vs swapped pair", &s, &ss, tol);
    }
    out.section("spectrum", &s)?;
    Ok(out)
}

fn verify_pair(p: &VerifyPair, base: &Path) -> Result<Outcome> {
    let (f, g) = pair(&p.f, &p.g, base)?;
    let grid = p.grid.build("grid")?;
    let op = build_nystrom_x(&f, &g, &grid)?;
    let s = spectrum_with(&op, p.rank_threshold, p.positivity_tol)?;
    let tr = trace_identity_check(&op)?;
    let mut out = Outcome::default();
    out.check(Check::at_least(
        "min eigenvalue / max |eigenvalue|",
        s.min_eig / s.max_abs().max(1e-300),
        -p.positivity_tol,
    ));
    out.check(Check::relative("trace vs [f][g]/2pi", tr.lhs, tr.rhs, p.trace_tol));
    if let Some(r) = p.expect_rank {
        out.check(Check::equal("numerical rank", s.numerical_rank, r));
    }
    if let Some(t) = &p.expect_lambda1 {
        target(&mut out, "largest eigenvalue", s.max_eig, t);
    }
    out.section("spectrum", &s)?;
    out.section("trace", &tr)?;
    Ok(out)
}

fn trace_check(p: &TraceCheckParams, base: &Path) -> Result<Outcome> {
    let (f, g) = pair(&p.f, &p.g, base)?;
    let grid = p.grid.build("grid")?;
    let op = build(&f, &g, &grid, p.route)?;
    let tr = trace_identity_check(&op)?;
    let mut out = Outcome::default();
    out.check(Check::relative("trace vs [f][g]/2pi", tr.lhs, tr.rhs, p.trace_tol));
    out.section("trace", &tr)?;
    if p.diagonal.is_none() && p.shifted.is_empty() {
        return Ok(out);
    }
    let mom = if op.route == Route::NystromP {
        op
    } else {
        build_nystrom_p(&f, &g, &grid)?
    };
    if let Some(d) = &p.diagonal {
        let err = diagonal_identity_check(&mom, &f, d.interior)?;
        out.check(Check::below(
            format!("diagonal vs [g] f'/2pi on |xi| <= {}", d.interior),
            err,
            d.tol,
        ));
    }
    if !p.shifted.is_empty() {
        let profile = fourier_deriv(&f, &grid)?;
        let mut rows = Vec::new();
        for s in &p.shifted {
            let x = Complex64::new(s.x.0, s.x.1);
            let y = Complex64::new(s.y.0, s.y.1);
            let got = shifted_trace(&mom, x, y)?;
            let want = match s.expect {
                Some((re, im)) => Complex64::new(re, im),
                None => profile.eval_complex(y - x)?,
            };
            let err = (got - want).norm() / want.norm().max(1e-300);
            out.check(Check::below(format!("shifted trace at x = {x}, y = {y}"), err, s.tol));
            rows.push(json!({ "x": [x.re, x.im], "y": [y.re, y.im], "trace": [got.re, got.im], "reference": [want.re, want.im] }));
        }
        out.section("shifted", rows)?;
    }
    Ok(out)
}

fn rank1(p: &Rank1) -> Result<Outcome> {
    let grid = p.grid.build("grid")?;
    let (f, g) = kato_rank_one_pair(p.alpha, p.c1, p.c2, p.t1, p.t2, p.d1, p.d2)?;
    let op = build_nystrom_x(&f, &g, &grid)?;
    let s = spectrum_with(&op, p.rank_threshold, POSITIVITY_TOL)?;
    let mut out = Outcome::default();
    out.check(Check::equal("numerical rank", s.numerical_rank, 1));
    let fb = VariationBracket::of(&f)?;
    let gb = VariationBracket::of(&g)?;
    let lambda = fb.value() * gb.value() / (2.0 * PI);
    out.check(Check::relative("largest eigenvalue vs [f][g]/2pi", s.max_eig, lambda, p.lambda1_tol));

    let model = model_from_operator(&op, 1)?;
    let gp = reconstruct_gprime(&model, fb)?;
    let want: Vec<f64> = gp
        .nodes()
        .iter()
        .map(|&x| g.derivative(x))
        .collect::<Result<_>>()?;
    let eg = rel_l2(gp.values(), &want);
    out.check(Check::below("g' reconstruction (relative L2)", eg, p.reconstruct_tol));

    let mm = model.to_momentum()?;
    let fp = reconstruct_fprime(&mm, gb)?;
    let want_f: Vec<f64> = fp
        .nodes()
        .iter()
        .map(|&k| f.derivative(k))
        .collect::<Result<_>>()?;
    let ef = rel_l2(fp.values(), &want_f);
    out.check(Check::below("f' reconstruction (relative L2)", ef, p.reconstruct_tol));

    let doubled = reconstruct_gprime(&model.scaled(2.0), VariationBracket::new(2.0 * fb.value())?)?;
    let hom = doubled
        .values()
        .iter()
        .zip(gp.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    out.check(Check::below("rescaled model and [f] give the same g'", hom, 1e-12));

    if let Some((t1, t2)) = p.shift {
        let (fs, gs) = kato_rank_one_pair(p.alpha, p.c1, p.c2, t1, t2, p.d1, p.d2)?;
        let so = spectrum(&build_nystrom_x(&fs, &gs, &grid)?, p.rank_threshold)?;
        out.check(Check::close(
            format!("largest eigenvalue after shift to ({t1}, {t2})"),
            so.max_eig,
            s.max_eig,
            p.shift_tol,
        ));
    }
    if let Some(factor) = p.perturb {
        let rate = PI / (2.0 * p.alpha) * factor;
        let fp = RealFunction::tanh_affine(p.c1, rate, p.t1, p.d1);
        let sp = spectrum(&build_nystrom_x(&fp, &g, &grid)?, p.rank_threshold)?;
        out.check(Check::at_least(
            format!("numerical rank with alpha_hat scaled by {factor}"),
            sp.numerical_rank as f64,
            2.0,
        ));
        out.section("perturbed_spectrum", &sp)?;
    }
    out.section("spectrum", &s)?;
    out.section(
        "reconstruction",
        json!({ "gprime_error": eg, "fprime_error": ef, "coefficient": model.coeffs()[0] }),
    )?;
    Ok(out)
}

fn rank3(p: &Rank3) -> Result<Outcome> {
    let grid = p.grid.build("grid")?;
    let (f, g, model) = rank3_example(p.beta, &grid)?;
    let op = build_nystrom_x(&f, &g, &grid)?;
    let s = spectrum(&op, RANK_THRESHOLD)?;
    let mut out = Outcome::default();
    out.check(Check::equal("significant signs (+, -)", sign_counts(&s), (2, 1)));
    let nm2 = (PI - 2.0) / 2.0;
    let neg = s.significant().into_iter().find(|l| *l < 0.0).unwrap_or(f64::NAN);
    out.check(Check::relative("negative eigenvalue", neg, -(p.beta / PI) * nm2, p.tol));
    let [phi, _, pm] = rank3_factors(&grid);
    let q = op.quadratic_form(&pm).re;
    out.check(Check::relative("<phi-, K phi->", q, -(p.beta / PI) * nm2 * nm2, p.tol));
    out.check(Check::relative("trace", op.trace(), 2.0 * (1.0 + p.beta) / PI, p.tol));
    out.check(Check::below("|(phi, phi-)|", model.inner(&phi, &pm).norm(), 1e-12));
    let d = max_dist(&model.assemble(), &op.matrix);
    out.check(Check::below("max |model - matrix|", d, p.tol));
    let na = matches!(
        reconstruct_gprime(&model, VariationBracket::of(&f)?),
        Err(Error::NotApplicable(_))
    );
    out.check(Check::equal("g' reconstruction refused for indefinite model", na, true));
    let sp = strip_product(&f, &g, &grid)?;
    out.check(Check::relative("strip product vs pi/4", sp.product, PI / 4.0, p.strip_tol));
    out.check(Check::equal("strip product <= pi/2", sp.pass, true));
    out.section("spectrum", &s)?;
    out.section("strip_product", &sp)?;
    Ok(out)
}

fn gamma(p: &GammaRecoverParams, base: &Path) -> Result<Outcome> {
    let (f, g) = pair(&p.f, &p.g, base)?;
    let grid = p.grid.build("grid")?;
    let op = build_nystrom_x(&f, &g, &grid)?;
    let profile = fourier_deriv(&f, &grid)?;
    let rank = spectrum(&op, RANK_THRESHOLD)?.numerical_rank;
    let probes = match &p.probes {
        Some(ps) => GammaProbe::new(ps.primary.clone(), ps.secondary.clone())
            .map_err(|e| Error::Config {
                field: "probes".into(),
                message: e.to_string(),
            })?,
        None => GammaProbe::quasi_random(rank)?,
    };
    let rec = gamma_recover(&op, &g, &profile, &probes)?;
    let mut out = Outcome::default();
    out.check(Check::below("reassembly error", rec.reassembly_error, p.reassembly_tol));
    if let Some(a) = rec.consistency_angle {
        out.check(Check::below("angle between probe-set spans", a, p.angle_tol));
    }
    let mut angles = None;
    if let Some(r) = p.reference {
        let reference: Vec<Vec<Complex64>> = match r {
            Reference::Rank3Factors => rank3_factors(&grid).to_vec(),
            Reference::Eigenvectors => model_from_operator(&op, rec.rank)?.factors().to_vec(),
        };
        let ang = principal_angles(rec.model.factors(), &reference, grid.spacing())?;
        let worst = ang.iter().fold(0.0f64, |m, &a| m.max(a));
        out.check(Check::below("largest principal angle to reference span", worst, p.angle_tol));
        angles = Some(ang);
    }
    out.section("recovery", &rec)?;
    out.section("probes", &probes)?;
    if let Some(a) = angles {
        out.section("principal_angles", a)?;
    }
    Ok(out)
}

fn compose(p: &Compose, base: &Path) -> Result<Outcome> {
    let (f, g) = pair(&p.f, &p.g, base)?;
    let grid = p.grid.build("grid")?;
    let (cf, cg) = compose_pair(&p.outer_f, &f, &p.outer_g, &g)?;
    let op = build_nystrom_x(&cf, &cg, &grid)?;
    let s = spectrum(&op, RANK_THRESHOLD)?;
    let mut out = Outcome::default();
    out.check(Check::equal("positive semidefinite", s.pass, p.expect_psd));
    if p.compare_base {
        let base = spectrum(&build_nystrom_x(&f, &g, &grid)?, RANK_THRESHOLD)?;
        let d = s
            .eigenvalues
            .iter()
            .zip(&base.eigenvalues)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        out.check(Check::below("max |eigenvalue - base eigenvalue|", d, 1e-12));
    }
    let hull = cf.range_hull();
    if let Some((lo, hi)) = p.expect_range_f {
        out.check(Check::close("inf range(F o f)", hull.0, lo, 1e-9));
        out.check(Check::close("sup range(F o f)", hull.1, hi, 1e-9));
    }
    out.section("spectrum", &s)?;
    out.section(
        "composed",
        json!({ "range_f": [hull.0, hull.1], "range_g": cg.range_hull(), "outer_f": p.outer_f.label(), "outer_g": p.outer_g.label() }),
    )?;
    Ok(out)
}

fn loewner(p: &LoewnerParams, seed: u64) -> Result<Outcome> {
    let expect = p.expect_monotone.unwrap_or_else(|| p.function.claimed_monotone());
    let mut out = Outcome::default();
    let mut reports = Vec::new();
    for &n in &p.sizes {
        let r = loewner_matrix_test(&p.function, n, p.trials, seed)?;
        out.check(Check::equal(format!("n = {n}: no violation"), r.pass, expect));
        if let (true, Some(b)) = (expect, p.min_eig_at_least) {
            out.check(Check::at_least(format!("n = {n}: min eigenvalue"), r.min_eig, b));
        }
        reports.push(r);
    }
    out.section("loewner", reports)?;
    Ok(out)
}

fn fit_measure(p: &FitMeasureParams, base: &Path) -> Result<Outcome> {
    let samples: Vec<(f64, f64)> = match &p.samples {
        SampleSource::File { path } => {
            let (t, v) = read_samples(&base.join(path), "samples")?;
            t.into_iter().zip(v).collect()
        }
        SampleSource::Function { function, window } => {
            let f = function.build(base, "samples.function")?;
            window
                .points("samples.window")?
                .into_iter()
                .map(|t| (t, f.eval_real(t)))
                .collect()
        }
    };
    let atoms = p.atoms.points("atoms")?;
    let fit = fit_tanh_measure_with(&samples, p.alpha, &atoms, p.threshold)?;
    let mut out = Outcome::default();
    if let Some(m) = p.expect_member {
        out.check(Check::equal("member of the tanh-measure class", fit.member, m));
    }
    if let Some(r) = p.max_residual {
        out.check(Check::below("relative residual", fit.residual, r));
    }
    if let Some(want) = &p.expect_atoms {
        out.check(Check::equal("cluster count", fit.clusters.len(), want.len()));
        for &(s, w) in want {
            let near = fit
                .clusters
                .iter()
                .min_by(|a, b| (a.0 - s).abs().total_cmp(&(b.0 - s).abs()));
            match near {
                Some(&(cs, cw)) => {
                    out.check(Check::close(format!("atom near {s}: location"), cs, s, p.location_tol));
                    out.check(Check::close(format!("atom near {s}: weight"), cw, w, p.weight_tol));
                }
                None => out.check(Check::equal(format!("atom near {s} found"), false, true)),
            }
        }
    }
    out.section(
        "fit",
        json!({
            "residual": fit.residual,
            "member": fit.member,
            "threshold": fit.threshold,
            "offset": fit.measure.offset(),
            "alpha": fit.measure.alpha(),
            "atoms": fit.measure.atoms(),
            "warnings": fit.warnings,
        }),
    )?;
    out.section("measure_atoms", &fit.clusters)?;
    Ok(out)
}

fn deriv_avg(p: &DerivAvgParams, base: &Path) -> Result<Outcome> {
    let g = p.g.build(base, "g")?;
    let mut out = Outcome::default();
    let mass = AveragingProfile::default().integral();
    out.check(Check::close("integral of the weight", mass, 1.0, p.mass_tol));
    for q in &p.points {
        let v = averaged_quotient(&g, q.x, q.r)?;
        out.check(Check::close(format!("I_r(x) at x = {}, r = {}", q.x, q.r), v, q.expect, q.tol));
    }
    if let Some(xs) = &p.xs {
        let xs = xs.points("xs")?;
        if p.expect_nonnegative {
            let mut worst = f64::INFINITY;
            for &r in &p.rs {
                for &x in &xs {
                    worst = worst.min(averaged_quotient(&g, x, r)?);
                }
            }
            out.check(Check::at_least("min I_r(x)", worst, 0.0));
        }
        if p.rs.len() >= 2 {
            let c = convergence_study(&g, &xs, &p.rs)?;
            if let Some((lo, hi)) = p.slope_range {
                match c.slope {
                    Some(s) => out.check(Check::within("log-log slope", s, lo, hi)),
                    None => out.check(Check::equal("log-log slope available", false, true)),
                }
            }
            if let Some(m) = p.max_error {
                let worst = c.errors.iter().fold(0.0f64, |a, &b| a.max(b));
                out.check(Check::below("max |I_r - g'|", worst, m));
            }
            out.section("convergence", &c)?;
        }
    }
    Ok(out)
}

fn strip_check(p: &StripCheckParams, base: &Path) -> Result<Outcome> {
    let (f, g) = pair(&p.f, &p.g, base)?;
    let lattice = p.lattice.points("lattice")?;
    let mut out = Outcome::default();
    let mut reports = Vec::new();
    for &y in &p.ys {
        let r = strip_positivity_check(&f, &g, y, &lattice)?;
        out.check(Check::below(format!("y = {y}: kernel residual"), r.residual, p.residual_tol));
        out.check(Check::at_least(
            format!("y = {y}: min Im g(x + iy)"),
            r.min_im_g,
            -crate::funcspace::HERGLOTZ_TOL,
        ));
        out.check(Check::at_least(
            format!("y = {y}: min K(x - iy, x + iy)"),
            r.min_kernel,
            -crate::funcspace::HERGLOTZ_TOL,
        ));
        if let Some(&e) = p.expect_pole_proximity.get(reports.len()) {
            out.check(Check::equal(format!("y = {y}: pole proximity flag"), r.pole_proximity, e));
        }
        reports.push(r);
    }
    out.section("strip", reports)?;
    Ok(out)
}

fn moment_scan(p: &MomentScanParams, base: &Path) -> Result<Outcome> {
    let f = p.f.build(base, "f")?;
    let mut out = Outcome::default();
    let mut evals = Vec::new();
    for e in &p.evaluate {
        let z = Complex64::new(e.z.0, e.z.1);
        let v = f.eval(z)?;
        let want = Complex64::new(e.expect.0, e.expect.1);
        out.check(Check::below(format!("f({z})"), (v - want).norm(), e.tol));
        evals.push(json!({ "z": [z.re, z.im], "value": [v.re, v.im] }));
    }
    if !evals.is_empty() {
        out.section("evaluate", evals)?;
    }
    let mut moments = Vec::new();
    for m in &p.moments {
        let r = exp_moment(&f, m.b, m.window)?;
        if let Some(t) = &m.expect {
            target(&mut out, &format!("exponential moment at b = {}", m.b), r.value, t);
        }
        if let Some(d) = m.expect_divergent {
            out.check(Check::equal(format!("b = {}: divergent", m.b), r.divergent, d));
        }
        moments.push(json!({ "b": m.b, "window": m.window, "result": r }));
    }
    if !moments.is_empty() {
        out.section("moments", moments)?;
    }
    if let Some(d) = &p.decay {
        let fit = estimate_decay_rate(&f)?;
        if let Some(t) = &d.expect_beta {
            target(&mut out, "decay rate", fit.beta, t);
        }
        out.section("decay", &fit)?;
    }
    if let Some(h) = &p.herglotz {
        let r = herglotz_check(&f, h.alpha, h.samples)?;
        out.check(Check::equal("Im f >= 0 on the upper strip", r.pass, h.expect_pass.unwrap_or(true)));
        out.section("herglotz", &r)?;
    }
    if let Some(pr) = &p.profile {
        let grid = pr.grid.build("profile.grid")?;
        profile_checks(&mut out, &f, &grid, pr)?;
    }
    if let Some(m) = &p.mollify {
        let meas = cosh_mollify(&f, m.epsilon)?;
        if let Some(t) = &m.expect_total_weight {
            target(&mut out, "total weight of the mollified measure", meas.total_weight(), t);
        }
        for &(t, want) in &m.values {
            out.check(Check::close(format!("mollified f at t = {t}"), meas.eval_real(t), want, m.compare_tol));
        }
        let mut rows = Vec::new();
        for &t in &m.compare_at {
            let w = 40.0 * m.epsilon;
            let direct = quad::integrate(|s| f.eval_real(t - s) * cosh_kernel(s, m.epsilon), -w, w, 400, 12);
            let rep = meas.eval_real(t);
            out.check(Check::close(format!("mollified value at t = {t}"), rep, direct, m.compare_tol));
            rows.push([t, rep, direct]);
        }
        let alpha = PI * m.epsilon / 2.0;
        let mut sec = json!({
            "epsilon": m.epsilon,
            "alpha": alpha,
            "total_weight": meas.total_weight(),
            "offset": meas.offset(),
            "atoms": meas.atoms().len(),
            "values": rows,
        });
        if m.herglotz {
            let r = herglotz_check(&meas.clone().into_function(), alpha, 64)?;
            out.check(Check::equal("mollified function is Herglotz on its strip", r.pass, true));
            sec["herglotz"] = serde_json::to_value(&r)?;
        }
        out.section("mollify", sec)?;
    }
    if let Some(sm) = &p.smooth {
        let fs = gaussian_mollify(&f, sm.width)?;
        let mut rows = Vec::new();
        for &(t, want) in &sm.values {
            let v = fs.eval_real(t);
            out.check(Check::close(format!("smoothed value at t = {t}"), v, want, sm.tol));
            rows.push([t, v]);
        }
        if let Some(b) = sm.sup_bound {
            let sup = (0..=4000)
                .map(|i| fs.eval_real(-40.0 + 0.02 * i as f64).abs())
                .fold(0.0f64, f64::max);
            out.check(Check::below("sup |smoothed|", sup, b));
        }
        out.section("smooth", json!({ "width": sm.width, "values": rows }))?;
    }
    Ok(out)
}

fn profile_checks(out: &mut Outcome, f: &RealFunction, grid: &Grid, pr: &ProfileSpec) -> Result<()> {
    let fft = FourierProfile::fft(f, grid)?;
    let closed = FourierProfile::closed_form(f).ok();
    let mut rows = Vec::new();
    for &k in &pr.ks {
        let a = fft.eval(k);
        let mut row = json!({ "k": k, "fft": [a.re, a.im] });
        if let Some(c) = &closed {
            let b = c.eval(k);
            out.check(Check::below(format!("closed form vs FFT at k = {k}"), (a - b).norm(), pr.tol));
            row["closed_form"] = json!([b.re, b.im]);
        }
        rows.push(row);
    }
    let weights = crate::discretize::quadrature_weights(grid);
    out.check(Check::close(
        "sum of quadrature weights vs 2L",
        weights.iter().sum(),
        2.0 * grid.half_width(),
        1e-12 * grid.half_width(),
    ));
    if let Some(t) = &pr.integral {
        let v = grid
            .nodes()
            .iter()
            .zip(&weights)
            .map(|(&x, &w)| Ok(w * f.derivative(x)?))
            .sum::<Result<f64>>()?;
        target(out, "trapezoid integral of f'", v, t);
    }
    let reference = closed.as_ref().unwrap_or(&fft);
    for &(k, want) in &pr.values {
        let v = reference.eval(k);
        out.check(Check::close(format!("f'^({k})"), v.re, want, pr.value_tol));
    }
    for &(kappa, want) in &pr.imaginary {
        let v = reference.eval_complex(Complex64::new(0.0, kappa))?;
        out.check(Check::close(format!("f'^({kappa} i)"), v.re, want, pr.value_tol));
    }
    out.section("profile", rows)?;
    Ok(())
}
