use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use proptest::prelude::*;

use poscomm::cli::ExperimentConfig;
use poscomm::commutator::{build_nystrom_p, build_nystrom_x, spectrum, HERMITIAN_TOL, RANK_THRESHOLD};
use poscomm::derivavg::averaged_quotient;
use poscomm::discretize::{fourier_deriv, Grid, UnitaryDft};
use poscomm::finiterank::{
    gamma_recover, rank3_example, rank3_factors, reconstruct_gprime, GammaProbe, FiniteRankModel, Space,
};
use poscomm::funcspace::{RealFunction, TanhMeasure, VariationBracket};
use poscomm::linalg;
use poscomm::monotone::{compose_pair, monotone_catalog, MonotoneFunction};

fn atoms(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-3.0f64..3.0, 0.0f64..1.0), 1..=max)
}

fn cheap() -> ProptestConfig {
    ProptestConfig::with_cases(16)
}

proptest! {
    #[test]
    fn closed_form_commutes_with_conjugation(
        c in -2.0f64..2.0, a in 0.3f64..3.0, t0 in -2.0f64..2.0,
        x in -5.0f64..5.0, frac in -0.9f64..0.9,
    ) {
        for f in [RealFunction::tanh_affine(c, a, t0, 0.1), RealFunction::arctan_affine(c, a, t0, -0.2)] {
            let z = Complex64::new(x, frac * f.strip_half_width().min(10.0));
            let lhs = f.eval(z.conj()).unwrap();
            let rhs = f.eval(z).unwrap().conj();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn tanh_measure_is_increasing(at in atoms(6), alpha in 0.2f64..3.0, mut ts in prop::collection::vec(-10.0f64..10.0, 2..40)) {
        let m = TanhMeasure::new(at, 0.0, alpha).unwrap();
        ts.sort_by(f64::total_cmp);
        for w in ts.windows(2) {
            prop_assert!(m.eval_real(w[1]) >= m.eval_real(w[0]) - 1e-15);
        }
    }

    #[test]
    fn tanh_measure_maps_strip_to_upper_half_plane(
        at in atoms(6), alpha in 0.2f64..3.0, x in -8.0f64..8.0, frac in 0.0f64..0.99,
    ) {
        let m = TanhMeasure::new(at, 0.4, alpha).unwrap();
        let z = Complex64::new(x, frac * alpha);
        prop_assert!(m.eval_complex(z).im >= -1e-14);
    }

    #[test]
    fn eigenvalues_sum_to_trace(seed in any::<u64>(), n in 2usize..40) {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut m = Array2::<Complex64>::zeros((n, n));
        for i in 0..n {
            m[[i, i]] = Complex64::new(next(), 0.0);
            for j in 0..i {
                let z = Complex64::new(next(), next());
                m[[i, j]] = z;
                m[[j, i]] = z.conj();
            }
        }
        let w = linalg::eigvalsh(&m).unwrap();
        let tr: f64 = (0..n).map(|i| m[[i, i]].re).sum();
        prop_assert!((w.iter().sum::<f64>() - tr).abs() < 1e-12 * n as f64);
        prop_assert!(w.windows(2).all(|p| p[0] <= p[1]));
    }

    #[test]
    fn scalar_reduction_of_matrix_monotonicity(idx in 0usize..8, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let f = &monotone_catalog()[idx];
        let (lo, hi) = f.domain();
        let (lo, hi) = (if lo.is_finite() { lo + 1e-3 } else { -50.0 }, if hi.is_finite() { hi - 1e-3 } else { 50.0 });
        let (a, b) = (lo + (hi - lo) * u.max(v), lo + (hi - lo) * u.min(v));
        prop_assert!(f.eval(a) >= f.eval(b));
        let one = f.apply_matrix(&Array2::from_elem((1, 1), a)).unwrap();
        prop_assert!((one[[0, 0]] - f.eval(a)).abs() <= 1e-12 * (1.0 + f.eval(a).abs()));
    }

    #[test]
    fn averaged_quotient_of_increasing_function_is_nonnegative(
        at in atoms(4), alpha in 0.5f64..2.0, x in -4.0f64..4.0, r in 0.01f64..3.0,
    ) {
        let g = TanhMeasure::new(at, 0.0, alpha).unwrap().into_function();
        prop_assert!(averaged_quotient(&g, x, r).unwrap() >= -1e-14);
    }

    #[test]
    fn log_containment_matches_range(shift in 0.2f64..3.0) {
        let f = RealFunction::tanh_affine(1.0, PI / 2.0, 0.0, 0.0);
        let g = RealFunction::tanh_affine(1.0, 1.0, 0.0, 0.0);
        let r = compose_pair(&MonotoneFunction::Log { shift }, &f, &MonotoneFunction::identity(), &g);
        prop_assert_eq!(r.is_ok(), shift > 1.0);
    }

    #[test]
    fn dft_round_trip(v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64)) {
        let orig: Vec<Complex64> = v.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let dft = UnitaryDft::new(64);
        let mut w = orig.clone();
        dft.forward(&mut w);
        let e2: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>() - orig.iter().map(|z| z.norm_sqr()).sum::<f64>();
        dft.inverse(&mut w);
        prop_assert!(w.iter().zip(&orig).all(|(a, b)| (a - b).norm() < 1e-12));
        prop_assert!(e2.abs() < 1e-12);
    }

    #[test]
    fn grid_sizes_other_than_powers_of_two_are_rejected(n in 9usize..5000) {
        prop_assume!(!n.is_power_of_two());
        let text = format!(
            r#"{{"schema": "poscomm.experiment/1", "kind": "verify-pair",
                "f": {{"name": "tanh"}}, "g": {{"name": "tanh"}}, "grid": {{"L": 10, "N": {n}}}}}"#
        );
        match ExperimentConfig::parse(&text, std::path::Path::new(".")) {
            Err(poscomm::Error::Config { field, .. }) => prop_assert_eq!(field, "grid.N"),
            other => prop_assert!(false, "{:?}", other.map(|c| c.kind)),
        }
    }
}

proptest! {
    #![proptest_config(cheap())]

    #[test]
    fn built_operators_are_hermitian(
        c1 in 0.2f64..2.0, a1 in 1.0f64..2.0, t1 in -1.0f64..1.0,
        c2 in -2.0f64..2.0, a2 in 1.0f64..2.0, t2 in -1.0f64..1.0,
    ) {
        let grid = Grid::transform(16.0, 128).unwrap();
        let f = RealFunction::tanh_affine(c1, a1, t1, 0.0);
        let g = RealFunction::tanh_affine(c2, a2, t2, 0.3);
        for op in [build_nystrom_x(&f, &g, &grid).unwrap(), build_nystrom_p(&f, &g, &grid).unwrap()] {
            prop_assert!(linalg::hermitian_deviation(&op.matrix) <= HERMITIAN_TOL);
        }
    }

    #[test]
    fn rank3_sign_pattern(beta in 0.2f64..3.0) {
        let grid = Grid::transform(24.0, 256).unwrap();
        let (f, g, model) = rank3_example(beta, &grid).unwrap();
        let op = build_nystrom_x(&f, &g, &grid).unwrap();
        let sig = spectrum(&op, RANK_THRESHOLD).unwrap().significant();
        prop_assert_eq!(sig.len(), 3);
        prop_assert_eq!(sig.iter().filter(|l| **l < 0.0).count(), 1);
        let [phi, _, pm] = rank3_factors(&grid);
        prop_assert!(model.quadratic_form(&phi) > 0.0);
        prop_assert!(model.quadratic_form(&pm) < 0.0);
    }

    #[test]
    fn probe_recovery_reassembles_rank3(beta in 0.2f64..3.0) {
        let grid = Grid::transform(24.0, 256).unwrap();
        let (f, g, _) = rank3_example(beta, &grid).unwrap();
        let op = build_nystrom_x(&f, &g, &grid).unwrap();
        let profile = fourier_deriv(&f, &grid).unwrap();
        let rec = gamma_recover(&op, &g, &profile, &GammaProbe::quasi_random(3).unwrap()).unwrap();
        prop_assert_eq!(rec.rank, 3);
        prop_assert!(rec.reassembly_error < 1e-8, "{}", rec.reassembly_error);
    }

    #[test]
    fn momentum_and_position_spectra_agree(alpha in 0.6f64..1.6, c in 0.3f64..2.0) {
        let grid = Grid::transform(24.0, 512).unwrap();
        let f = TanhMeasure::new(vec![(-0.5, 0.5), (0.7, 0.5)], 0.0, alpha).unwrap().into_function();
        let g = RealFunction::tanh_affine(c, 1.0 / alpha.max(0.8), 0.0, 0.0);
        let x = spectrum(&build_nystrom_x(&f, &g, &grid).unwrap(), RANK_THRESHOLD).unwrap();
        let p = spectrum(&build_nystrom_p(&f, &g, &grid).unwrap(), RANK_THRESHOLD).unwrap();
        prop_assert!((x.max_eig - p.max_eig).abs() < 1e-6 * x.max_eig.abs());
    }

    #[test]
    fn positive_models_reconstruct_nonnegative_derivatives(
        c in prop::collection::vec(0.01f64..2.0, 3), fb in 0.1f64..5.0,
    ) {
        let grid = Grid::transform(12.0, 128).unwrap();
        let model = FiniteRankModel::new(grid, Space::Position, rank3_factors(&grid).to_vec(), c).unwrap();
        let gp = reconstruct_gprime(&model, VariationBracket::new(fb).unwrap()).unwrap();
        prop_assert!(gp.values().iter().all(|v| *v >= 0.0));
    }
}
