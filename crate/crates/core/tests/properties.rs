use paradisp::burgers::{galilean_normalize, solve, SolverConfig};
use paradisp::experiment::{random_sparse_data, random_symbol, round_trip_error, support_violations};
use paradisp::gauge::GaugeFlow;
use paradisp::paracomp::{paracompose, DiffeoMap};
use paradisp::spectral::lp_decompose;
use paradisp::symbol::quantize;
use paradisp::{CutoffFunction, PeriodicGrid, SpectralFunction, Symbol, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn max_diff(a: &SpectralFunction, b: &SpectralFunction) -> f64 {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(p, q)| (p - q).norm())
        .fold(0.0, f64::max)
}

fn random_complex(grid: PeriodicGrid, rng: &mut ChaCha8Rng) -> SpectralFunction {
    let c = (0..grid.n_points())
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    SpectralFunction::from_coeffs(grid, c).unwrap()
}

fn grid_strategy() -> impl Strategy<Value = PeriodicGrid> {
    (4u32..=8).prop_map(|k| PeriodicGrid::new(1 << k).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn samples_round_trip_through_coefficients(grid in grid_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_complex(grid, &mut rng);
        let back = SpectralFunction::from_complex_samples(grid, &u.samples()).unwrap();
        prop_assert!(max_diff(&u, &back) <= 1e-12 * u.max_abs().max(1.0));
    }

    #[test]
    fn littlewood_paley_blocks_sum_to_input(grid in grid_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_complex(grid, &mut rng);
        prop_assert!(max_diff(&lp_decompose(&u).reconstruct(), &u) <= 1e-13);
    }

    #[test]
    fn quantization_is_linear_in_data(seed in any::<u64>(), alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
        let grid = PeriodicGrid::new(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = CutoffFunction::default_for(grid);
        let a = random_symbol(grid, rng.random_range(-1.0..1.0), 3, &mut rng).unwrap();
        let u = random_complex(grid, &mut rng);
        let v = random_complex(grid, &mut rng);
        let lhs = quantize(&a, &psi, &u.scale_real(alpha).axpy(C64::new(beta, 0.0), &v).unwrap()).unwrap();
        let rhs = quantize(&a, &psi, &u).unwrap().scale_real(alpha)
            .axpy(C64::new(beta, 0.0), &quantize(&a, &psi, &v).unwrap()).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-10 * (u.l2_norm() + v.l2_norm()) * a.max_abs().max(1.0));
    }

    #[test]
    fn quantization_is_linear_in_symbol(seed in any::<u64>()) {
        let grid = PeriodicGrid::new(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = CutoffFunction::default_for(grid);
        let a = random_symbol(grid, 0.5, 2, &mut rng).unwrap();
        let b = random_symbol(grid, 0.5, 2, &mut rng).unwrap();
        let u = random_complex(grid, &mut rng);
        let lhs = quantize(&a.add(&b).unwrap(), &psi, &u).unwrap();
        let rhs = &quantize(&a, &psi, &u).unwrap() + &quantize(&b, &psi, &u).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-10 * u.l2_norm() * a.max_abs().max(b.max_abs()));
    }

    #[test]
    fn extracted_symbol_matches_cutoff_filter(seed in any::<u64>(), band in 0i64..=4, order in -1.0f64..1.0) {
        let grid = PeriodicGrid::new(128).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_symbol(grid, order, band, &mut rng).unwrap();
        prop_assert!(round_trip_error(&a, &CutoffFunction::default_for(grid)).unwrap() <= 1e-10);
    }

    #[test]
    fn output_stays_in_the_cutoff_support(seed in any::<u64>(), band in 0i64..=4, big_b in 2.0f64..8.0) {
        let grid = PeriodicGrid::new(128).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = CutoffFunction::new(big_b, 1.0, grid).unwrap();
        let a = random_symbol(grid, 0.0, band, &mut rng).unwrap();
        let u = random_sparse_data(grid, 40, &mut rng);
        prop_assert_eq!(support_violations(&a, &psi, &u).unwrap(), 0);
    }

    #[test]
    fn multiplier_flow_is_unitary(seed in any::<u64>(), tau in -2.0f64..2.0) {
        let grid = PeriodicGrid::new(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = rng.random_range(-1.0..1.0);
        let p = Symbol::x_independent(grid, 0.5, |xi| C64::new(c * (xi.abs() as f64).sqrt(), 0.0)).unwrap();
        let flow = GaugeFlow::new(&p, &CutoffFunction::default_for(grid)).unwrap();
        let h = random_complex(grid, &mut rng);
        let out = flow.evolve(tau, 64, &h).unwrap();
        prop_assert!((out.l2_norm() / h.l2_norm() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn flow_is_linear_in_data(seed in any::<u64>(), alpha in -2.0f64..2.0) {
        let grid = PeriodicGrid::new(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = SpectralFunction::from_real_fn(grid, |x| 0.3 * x.cos() + 0.2 * (2.0 * x).sin());
        let p = Symbol::from_fn(grid, 0.5, f64::INFINITY, |x, xi| {
            C64::new((xi.abs() as f64).sqrt() * v.eval(x).re, 0.0)
        }).unwrap();
        let flow = GaugeFlow::new(&p, &CutoffFunction::default_for(grid)).unwrap();
        let h = random_complex(grid, &mut rng);
        let k = random_complex(grid, &mut rng);
        let lhs = flow.evolve(0.5, 32, &h.scale_real(alpha).axpy(C64::new(1.0, 0.0), &k).unwrap()).unwrap();
        let rhs = flow.evolve(0.5, 32, &h).unwrap().scale_real(alpha)
            .axpy(C64::new(1.0, 0.0), &flow.evolve(0.5, 32, &k).unwrap()).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-10 * (h.l2_norm() + k.l2_norm()));
    }

    #[test]
    fn identity_paracomposition_is_identity(grid in grid_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_complex(grid, &mut rng);
        let out = paracompose(&DiffeoMap::identity(grid), &u).unwrap();
        prop_assert!(max_diff(&out, &u) <= 1e-10 * u.l2_norm());
    }

    #[test]
    fn paracomposition_is_linear(seed in any::<u64>(), amp in 0.0f64..0.3, alpha in -2.0f64..2.0) {
        let grid = PeriodicGrid::new(128).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chi = DiffeoMap::from_fns(grid, |x| x + amp * x.sin(), |x| 1.0 + amp * x.cos()).unwrap();
        let u = random_sparse_data(grid, 40, &mut rng);
        let v = random_sparse_data(grid, 40, &mut rng);
        let lhs = paracompose(&chi, &u.scale_real(alpha).axpy(C64::new(1.0, 0.0), &v).unwrap()).unwrap();
        let rhs = paracompose(&chi, &u).unwrap().scale_real(alpha)
            .axpy(C64::new(1.0, 0.0), &paracompose(&chi, &v).unwrap()).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-10 * (u.l2_norm() + v.l2_norm()));
    }

    #[test]
    fn galilean_frame_at_zero_mean_is_identity(grid in grid_strategy(), seed in any::<u64>(), t in 0.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_complex(grid, &mut rng);
        let g = galilean_normalize(&u, 0.0, t);
        prop_assert_eq!(g.coeffs(), u.coeffs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn solver_keeps_zero_mean_and_is_deterministic(seed in any::<u64>(), alpha in 1.2f64..1.9) {
        let grid = PeriodicGrid::new(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes: Vec<(i64, C64)> = (1..=3).map(|k| (k, C64::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1)))).collect();
        let mut u0 = SpectralFunction::from_modes(grid, &modes);
        u0.enforce_real();
        let cfg = SolverConfig::new(alpha, 64, 2e-3, 0.2);
        let a = solve(&u0, &cfg).unwrap();
        let b = solve(&u0, &cfg).unwrap();
        prop_assert!(a.final_state().mean().norm() <= 1e-14);
        prop_assert_eq!(a.final_state().coeffs(), b.final_state().coeffs());
    }
}
