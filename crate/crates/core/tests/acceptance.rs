//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use poscomm::commutator::{
    build, build_direct, build_nystrom_p, build_nystrom_x, lattice, shifted_trace, spectrum,
    strip_positivity_check, trace_identity_check, Route, RANK_THRESHOLD,
};
use poscomm::derivavg::{convergence_study, AveragingProfile};
use poscomm::discretize::Grid;
use poscomm::finiterank::{kato_rank_one_pair, rank3_example, rank3_factors, strip_product};
use poscomm::funcspace::{cosh_mollify, fit_tanh_measure, herglotz_check, RealFunction, TanhMeasure};
use poscomm::monotone::{
    composition_positivity_experiment, loewner_matrix_test, monotone_catalog, negative_controls,
    MonotoneFunction,
};
use poscomm::quad;

type Check = Result<(bool, String), String>;

fn kato() -> (RealFunction, RealFunction) {
    (
        RealFunction::tanh_affine(1.0, PI / 2.0, 0.0, 0.0),
        RealFunction::tanh_affine(1.0, 1.0, 0.0, 0.0),
    )
}

fn grid() -> Grid {
    Grid::transform(24.0, 2048).unwrap()
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn c1_trace() -> Check {
    let (f, g) = kato();
    let op = build_nystrom_x(&f, &g, &grid()).map_err(e)?;
    let t = trace_identity_check(&op).map_err(e)?;
    let want = 2.0 / PI;
    let rel = (t.lhs - want).abs() / want;
    Ok((
        rel < 1e-6 && t.error < 1e-6,
        format!("trace {:.12} vs 2/pi, relative error {rel:.2e}", t.lhs),
    ))
}

fn top_eigs(f: &RealFunction, g: &RealFunction) -> Result<(f64, f64), String> {
    let op = build_nystrom_x(f, g, &grid()).map_err(e)?;
    let s = spectrum(&op, RANK_THRESHOLD).map_err(e)?;
    Ok((s.eigenvalues[0], s.eigenvalues[1].abs().max(s.min_eig.abs())))
}

fn c2_rank_one() -> Check {
    let (f, g) = kato();
    let (l1, l2) = top_eigs(&f, &g)?;
    let (fs, gs) = kato_rank_one_pair(1.0, 1.0, 1.0, 3.0, -2.0, 0.0, 0.0).map_err(e)?;
    let (m1, _) = top_eigs(&fs, &gs)?;
    let ratio = l2 / l1;
    let dev = (l1 - 2.0 / PI).abs();
    let shift = (m1 - l1).abs();
    Ok((
        ratio < 1e-6 && dev < 1e-4 && shift < 1e-8,
        format!("lambda1 {l1:.10} (|.-2/pi| {dev:.1e}), lambda2/lambda1 {ratio:.1e}, shifted pair moves lambda1 by {shift:.1e}"),
    ))
}

fn measure_pair(fa: &[(f64, f64)], ga: &[(f64, f64)], alpha_f: f64) -> (RealFunction, RealFunction) {
    let alpha_g = PI / 2.0 / alpha_f;
    (
        TanhMeasure::new(fa.to_vec(), 0.0, alpha_f).unwrap().into_function(),
        TanhMeasure::new(ga.to_vec(), 0.0, alpha_g).unwrap().into_function(),
    )
}

fn psd_pairs() -> Vec<(&'static str, RealFunction, RealFunction)> {
    vec![
        {
            let (f, g) = measure_pair(&[(0.0, 1.0)], &[(0.0, 1.0)], 1.0);
            ("1+1 atoms", f, g)
        },
        {
            let (f, g) = measure_pair(&[(-1.0, 0.5), (1.0, 0.5)], &[(0.3, 1.0)], 0.7);
            ("2+1 atoms", f, g)
        },
        {
            let (f, g) = measure_pair(&[(0.0, 0.4), (2.0, 0.6)], &[(-1.0, 0.2), (1.5, 0.8)], 2.0);
            ("2+2 atoms", f, g)
        },
        {
            let (f, g) = measure_pair(
                &[(-2.0, 0.1), (-1.0, 0.3), (0.0, 0.2), (1.0, 0.25), (2.5, 0.15)],
                &[(0.0, 1.0)],
                1.3,
            );
            ("5+1 atoms", f, g)
        },
        {
            let (f, g) = measure_pair(
                &[(0.5, 1.0)],
                &[(-3.0, 0.2), (-1.0, 0.2), (0.0, 0.2), (1.5, 0.2), (3.0, 0.2)],
                0.6,
            );
            ("1+5 atoms", f, g)
        },
        (
            "arctan(t/2), tanh t",
            RealFunction::arctan_affine(1.0, 2.0, 0.0, 0.0),
            RealFunction::tanh_affine(1.0, 1.0, 0.0, 0.0),
        ),
    ]
}

fn c3_psd() -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, f, g) in psd_pairs() {
        let op = build_nystrom_x(&f, &g, &grid()).map_err(e)?;
        let s = spectrum(&op, RANK_THRESHOLD).map_err(e)?;
        let r = s.min_eig / s.max_eig;
        ok &= s.pass && s.min_eig >= -1e-10 * s.max_eig;
        parts.push(format!("{name}: {r:.1e}"));
    }
    Ok((ok, format!("minEig/lambdaMax {}", parts.join("; "))))
}

fn c4_rank3() -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for beta in [0.5, 1.0, 2.0] {
        let gr = grid();
        let (f, g, _) = rank3_example(beta, &gr).map_err(e)?;
        let op = build_nystrom_x(&f, &g, &gr).map_err(e)?;
        let s = spectrum(&op, RANK_THRESHOLD).map_err(e)?;
        let sig = s.significant();
        let npos = sig.iter().filter(|l| **l > 0.0).count();
        let neg: Vec<f64> = sig.iter().copied().filter(|l| *l < 0.0).collect();
        let nm2 = (PI - 2.0) / 2.0;
        let want_neg = -(beta / PI) * nm2;
        let got_neg = neg.first().copied().unwrap_or(f64::NAN);
        let e_neg = ((got_neg - want_neg) / want_neg).abs();
        let [_, _, pm] = rank3_factors(&gr);
        let q = op.quadratic_form(&pm).re;
        let want_q = -(beta / PI) * nm2 * nm2;
        let e_q = ((q - want_q) / want_q).abs();
        let want_tr = 2.0 * (1.0 + beta) / PI;
        let e_tr = ((op.trace() - want_tr) / want_tr).abs();
        let pass = sig.len() == 3 && npos == 2 && neg.len() == 1 && e_neg < 1e-6 && e_q < 1e-6 && e_tr < 1e-6;
        ok &= pass;
        parts.push(format!(
            "beta {beta}: {} significant (+{npos}/-{}), lambda- err {e_neg:.1e}, <phi-,K phi-> err {e_q:.1e}, trace err {e_tr:.1e}",
            sig.len(),
            neg.len()
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn c5_zero() -> Check {
    let f = RealFunction::sine(1.0, 1.0, 0.0);
    let g = RealFunction::sine(1.0, 2.0 * PI, 0.0);
    let gr = Grid::transform(8.0, 1024).map_err(e)?;
    let op = build_direct(&f, &g, &gr).map_err(e)?;
    let s = spectrum(&op, RANK_THRESHOLD).map_err(e)?;
    let norm = s.max_abs();
    Ok((norm < 1e-8, format!("||K||_2 = {norm:.2e} (L = 8, N = 1024)")))
}

fn c6_routes() -> Check {
    let (f, g) = kato();
    let gr = Grid::transform(20.0, 1024).map_err(e)?;
    let nx = build_nystrom_x(&f, &g, &gr).map_err(e)?;
    let dp = build(&f, &g, &gr, Route::DirectProjected).map_err(e)?;
    let raw = build_direct(&f, &g, &gr).map_err(e)?;
    let nodes = gr.nodes();
    let mut worst = 0.0f64;
    for i in 0..nodes.len() {
        for j in 0..nodes.len() {
            if nodes[i].abs() <= 10.0 && nodes[j].abs() <= 10.0 {
                worst = worst.max((nx.matrix[[i, j]] - dp.matrix[[i, j]]).norm());
            }
        }
    }
    let tr = raw.trace();
    Ok((
        worst < 1e-4 && tr == 0.0,
        format!("max interior |Nystrom-x - direct| {worst:.2e}; raw direct trace {tr}"),
    ))
}

/// `f'^(k)` for `f = tanh(pi t/2)` by quadrature, `k` real or imaginary.
fn fhat_oracle(k: Complex64) -> f64 {
    let fp = |t: f64| PI / 2.0 / (PI * t / 2.0).cosh().powi(2);
    let v = if k.im == 0.0 {
        quad::integrate(|t| fp(t) * (k.re * t).cos(), -40.0, 40.0, 800, 12)
    } else {
        quad::integrate(|t| fp(t) * (k.im * t).cosh(), -40.0, 40.0, 800, 12)
    };
    v / (2.0 * PI).sqrt()
}

fn c7_shifted_trace() -> Check {
    let (f, g) = kato();
    let op = build_nystrom_p(&f, &g, &grid()).map_err(e)?;
    let mut worst = 0.0f64;
    let mut args = Vec::new();
    for s in [0.0, 0.5, 1.0, 2.0, 3.5] {
        args.push((Complex64::new(0.0, 0.0), Complex64::new(s, 0.0)));
    }
    for y in [0.2, 0.5, 0.8] {
        args.push((Complex64::new(0.0, -y), Complex64::new(0.0, y)));
    }
    for (x, y) in args {
        let got = shifted_trace(&op, x, y).map_err(e)?;
        let want = fhat_oracle(y - x);
        worst = worst.max((got - want).norm() / want.abs());
    }
    Ok((worst < 1e-5, format!("worst relative error over 8 arguments {worst:.2e}")))
}

fn c8_strip() -> Check {
    let (f, g) = kato();
    let lat = lattice(10.0, 201);
    let mut ok = true;
    let mut parts = Vec::new();
    for y in [0.2, 0.5, 1.0] {
        let r = strip_positivity_check(&f, &g, y, &lat).map_err(e)?;
        ok &= r.residual < 1e-8 && r.min_im_g >= 0.0 && r.pass;
        parts.push(format!("y {y}: residual {:.1e}, min Im g {:.3e}", r.residual, r.min_im_g));
    }
    Ok((ok, parts.join("; ")))
}

fn c9_loewner() -> Check {
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for fun in monotone_catalog() {
        for n in [2, 3, 5] {
            let r = loewner_matrix_test(&fun, n, 1000, 2024).map_err(e)?;
            ok &= r.pass;
            worst = worst.min(r.min_eig / r.scale);
            if !r.pass {
                println!("    {} n={n}: violation at trial {:?}", r.function, r.first_violation);
            }
        }
    }
    let sq = loewner_matrix_test(&MonotoneFunction::Square { lo: 0.0, hi: 2.0 }, 3, 100, 2024).map_err(e)?;
    ok &= !sq.pass;
    let mut controls = Vec::new();
    for fun in negative_controls().into_iter().skip(1) {
        let r = loewner_matrix_test(&fun, 3, 1000, 2024).map_err(e)?;
        controls.push(format!("{} {}", r.function, if r.pass { "passes" } else { "falsified" }));
    }
    Ok((
        ok,
        format!(
            "{} catalog entries pass (worst minEig/scale {worst:.1e}); x^2 falsified at trial {:?}; controls: {}",
            monotone_catalog().len(),
            sq.first_violation,
            controls.join(", ")
        ),
    ))
}

fn c10_composition() -> Check {
    use MonotoneFunction::*;
    let pairs = [
        (Log { shift: 2.0 }, MonotoneFunction::identity()),
        (MonotoneFunction::identity(), Power { exponent: 0.5, shift: 2.0 }),
        (Power { exponent: 1.0 / 3.0, shift: 2.0 }, Log { shift: 3.0 }),
        (NegReciprocal { shift: 2.0 }, Power { exponent: 0.75, shift: 2.0 }),
        (Mobius { a: 2.0, b: 1.0, c: 1.0, d: 3.0 }, MonotoneFunction::identity()),
        (Power { exponent: 0.5, shift: 2.0 }, NegReciprocal { shift: 3.0 }),
    ];
    let bases = [
        kato(),
        measure_pair(&[(-0.5, 0.5), (0.5, 0.5)], &[(0.0, 1.0)], 0.8),
    ];
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for (f, g) in &bases {
        for (ff, gg) in &pairs {
            let s = composition_positivity_experiment(ff, f, gg, g, &grid()).map_err(e)?;
            ok &= s.pass;
            worst = worst.min(s.min_eig / s.max_eig);
        }
    }
    Ok((ok, format!("12 composed operators, worst minEig/lambdaMax {worst:.1e}")))
}

fn c11_averaging() -> Check {
    let mass = AveragingProfile::default().integral();
    let g = RealFunction::tanh_affine(1.0, 1.0, 0.0, 0.0);
    let xs = lattice(2.0, 21);
    let r = convergence_study(&g, &xs, &[0.2, 0.1, 0.05, 0.025]).map_err(e)?;
    let slope = r.slope.unwrap_or(f64::NAN);
    Ok((
        (mass - 1.0).abs() < 1e-10 && (1.8..=2.2).contains(&slope),
        format!("int h = 1 {:+.1e}; slope {slope:.4}", mass - 1.0),
    ))
}

fn c12_fit() -> Check {
    let ts = lattice(12.0, 481);
    let two: Vec<(f64, f64)> = ts
        .iter()
        .map(|&t| (t, 0.5 * (t + 1.0).tanh() + 0.5 * (t - 1.0).tanh()))
        .collect();
    let atoms = lattice(4.0, 81);
    let fit = fit_tanh_measure(&two, PI / 2.0, &atoms).map_err(e)?;
    let mut ok = fit.residual < 1e-6 && fit.member && fit.clusters.len() == 2;
    for (c, want) in fit.clusters.iter().zip([-1.0, 1.0]) {
        ok &= (c.0 - want).abs() < 0.05 && (c.1 - 0.5).abs() < 1e-2;
    }
    let steep: Vec<(f64, f64)> = ts.iter().map(|&t| (t, (2.0 * t).tanh())).collect();
    let rej = fit_tanh_measure(&steep, PI / 2.0, &atoms).map_err(e)?;
    ok &= !rej.member;
    Ok((
        ok,
        format!(
            "clusters {:?}, residual {:.1e}; tanh(2t) residual {:.1e} -> {}",
            fit.clusters
                .iter()
                .map(|c| format!("({:.4}, {:.4})", c.0, c.1))
                .collect::<Vec<_>>(),
            fit.residual,
            rej.residual,
            if rej.member { "accepted" } else { "rejected" }
        ),
    ))
}

fn c13_mollifier() -> Check {
    let inputs = [
        RealFunction::tanh_affine(1.0, 10.0, 0.0, 0.0),
        TanhMeasure::new(vec![(-1.0, 0.5), (1.0, 0.5)], 0.0, PI / 6.0)
            .unwrap()
            .into_function(),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for eps in [0.1, 0.5] {
        for f in &inputs {
            let m = cosh_mollify(f, eps).map_err(e)?;
            let alpha = PI * eps / 2.0;
            let h = herglotz_check(&m.into_function(), alpha, 64).map_err(e)?;
            ok &= h.pass;
            parts.push(format!("eps {eps}: min Im {:.1e}", h.min_im));
        }
    }
    Ok((ok, parts.join("; ")))
}

fn c14_strip_product() -> Check {
    let gr = grid();
    let (f, g, _) = rank3_example(1.0, &gr).map_err(e)?;
    let sp = strip_product(&f, &g, &gr).map_err(e)?;
    let rel = (sp.product - PI / 4.0).abs() / (PI / 4.0);
    Ok((
        rel < 0.05 && sp.pass,
        format!(
            "r_f {:.4}, r_g {:.4}, product {:.4} (pi/4 {:+.2}%), <= pi/2: {}",
            sp.f.rate,
            sp.g.rate,
            sp.product,
            100.0 * (sp.product / (PI / 4.0) - 1.0),
            sp.pass
        ),
    ))
}

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/paper")
}

fn strip_timing(v: &mut serde_json::Value) {
    if let Some(o) = v.as_object_mut() {
        o.remove("timing");
    }
}

fn c15_determinism() -> Check {
    let bin = env!("CARGO_BIN_EXE_poscomm");
    let dir = tempfile::tempdir().map_err(e)?;
    let mut configs: Vec<PathBuf> = std::fs::read_dir(corpus())
        .map_err(e)?
        .filter_map(|d| d.ok().map(|d| d.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    configs.sort();
    let mut differing = Vec::new();
    for cfg in &configs {
        let mut outs = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(format!("r{rep}.json"));
            Command::new(bin)
                .arg("run")
                .arg("--config")
                .arg(cfg)
                .arg("--out")
                .arg(&out)
                .output()
                .map_err(e)?;
            let text = std::fs::read_to_string(&out).map_err(|x| format!("{}: {x}", cfg.display()))?;
            let mut v: serde_json::Value = serde_json::from_str(&text).map_err(e)?;
            strip_timing(&mut v);
            outs.push(serde_json::to_string(&v).map_err(e)?);
        }
        if outs[0] != outs[1] {
            differing.push(cfg.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    Ok((
        !configs.is_empty() && differing.is_empty(),
        format!("{} configs run twice, {} differ {:?}", configs.len(), differing.len(), differing),
    ))
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("trace identity", c1_trace),
        ("rank-one reproduction", c2_rank_one),
        ("PSD certificates", c3_psd),
        ("rank-3 indefiniteness", c4_rank3),
        ("zero commutator", c5_zero),
        ("route consistency", c6_routes),
        ("shifted trace", c7_shifted_trace),
        ("strip identity and Herglotz", c8_strip),
        ("Loewner suite", c9_loewner),
        ("composition positivity", c10_composition),
        ("averaging kernel", c11_averaging),
        ("measure fitting", c12_fit),
        ("mollifier membership", c13_mollifier),
        ("strip product", c14_strip_product),
        ("determinism", c15_determinism),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let t0 = Instant::now();
        let (pass, detail) = match run() {
            Ok(r) => r,
            Err(msg) => (false, format!("error: {msg}")),
        };
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {n:>2} {name}: {detail} ({:.1}s)", t0.elapsed().as_secs_f64());
        if !pass {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
