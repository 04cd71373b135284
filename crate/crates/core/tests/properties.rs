use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use pathgap_core::constants::{
    damped_length, grid_max, heat_a, heat_c, heat_c_coarse, lambda_fn, spectral_gap_bound, sup_heat_a, sup_lambda,
};
use pathgap_core::damped::{boundary_projection, path_gradients, q_evolve, q_norm_ratio, CylinderPointwise, ProjectionMode};
use pathgap_core::functions::{InnerSpec, Registered, RegisteredInner, RegisteredOuter};
use pathgap_core::heat::{heat_record, CylinderIntegral};
use pathgap_core::inequality::{verdict, VERDICT_SIGMAS};
use pathgap_core::sampler::simulate_path;
use pathgap_core::{EstimateWithError, Frame, ManifoldModel, PathGrid, Point, SamplerConfig, Verdict};
use proptest::prelude::*;

fn e_raw(k: f64, s: f64) -> f64 {
    if k == 0.0 {
        s
    } else {
        (1.0 - (-k * s).exp()) / k
    }
}

fn curvature() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), -2.0..2.0f64]
}

fn est(value: f64, std_error: f64) -> EstimateWithError {
    EstimateWithError { value, std_error, n_samples: 100 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn damped_length_matches_direct_form(k in -3.0..3.0f64, s in 0.0..3.0f64) {
        prop_assume!(k.abs() > 1e-3);
        let (a, b) = (damped_length(k, s), e_raw(k, s));
        prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
    }

    #[test]
    fn lambda_matches_expanded_form(k1 in -2.0..2.0f64, k2 in curvature(), horizon in 0.05..4.0f64, u in 0.0..1.0f64) {
        let t = u * horizon;
        let kx = k1.abs().max(k2.abs());
        let direct = 1.0
            + kx * (e_raw(k2, horizon - t) + e_raw(k2, t))
            + 0.5 * kx * kx * e_raw(k2, t) * (e_raw(k2, horizon) + e_raw(k2, horizon - t));
        let v = lambda_fn(t, horizon, k1, k2);
        prop_assert!((v - direct).abs() <= 1e-9 * direct);
        prop_assert!(v >= 1.0);
    }

    #[test]
    fn sup_lambda_dominates_grid(k1 in -2.0..2.0f64, k2 in curvature(), horizon in 0.05..4.0f64) {
        let s = sup_lambda(horizon, k1, k2);
        let (_, g) = grid_max(horizon, 2000, |t| lambda_fn(t, horizon, k1, k2));
        prop_assert!(s.value >= g * (1.0 - 1e-9), "sup {} grid {}", s.value, g);
        prop_assert!((0.0..=horizon).contains(&s.t_star));
        prop_assert!((lambda_fn(s.t_star, horizon, k1, k2) - s.value).abs() <= 1e-8 * s.value);
    }

    #[test]
    fn spectral_bound_is_at_least_one(k1 in -2.0..2.0f64, k2 in curvature(), horizon in 0.05..4.0f64) {
        let b = spectral_gap_bound(horizon, k1, k2).value;
        prop_assert!(b >= 1.0 - 1e-12);
        prop_assert!(b.is_finite());
    }

    #[test]
    fn spectral_bound_grows_with_horizon_for_negative_k2(k2 in -2.0..-0.01f64, t1 in 0.05..3.0f64, dt in 0.0..2.0f64) {
        prop_assert!(spectral_gap_bound(t1 + dt, k2, k2).value >= spectral_gap_bound(t1, k2, k2).value);
    }

    #[test]
    fn heat_a_matches_expanded_form(k in -2.0..2.0f64, horizon in 0.1..3.0f64, u in 0.0..1.0f64) {
        prop_assume!(k.abs() > 0.05);
        let s = u * horizon;
        let direct = (2.0 - 2.0 * (-k * s).exp() + (-k * (horizon + s)).exp() - (-k * (horizon - s)).exp()) / (2.0 * k * k);
        prop_assert!((heat_a(s, horizon, k) - direct).abs() <= 1e-9 * direct.abs().max(1e-3));
    }

    #[test]
    fn heat_a_nondecreasing_for_nonpositive_k(k in -2.0..=0.0f64, horizon in 0.1..3.0f64, u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        prop_assert!(heat_a(lo * horizon, horizon, k) <= heat_a(hi * horizon, horizon, k) * (1.0 + 1e-12));
    }

    #[test]
    fn heat_constants_bound_a(k in curvature(), horizon in 0.1..3.0f64) {
        let (s, sup) = sup_heat_a(horizon, k);
        prop_assert!((0.0..=horizon * (1.0 + 1e-12)).contains(&s));
        let (_, g) = grid_max(horizon, 2000, |t| heat_a(t, horizon, k));
        prop_assert!(sup >= g * (1.0 - 1e-9));
        prop_assert!((heat_c_coarse(horizon, k) - 2.0 * sup).abs() <= 1e-12 * sup);
        if k >= 0.0 {
            prop_assert!((heat_c(horizon, k) - sup).abs() <= 1e-12 * sup);
        } else {
            prop_assert!((heat_c(horizon, k) - heat_c_coarse(horizon, k)).abs() <= 1e-9 * sup);
        }
    }

    #[test]
    fn boundary_projection_is_a_rank_one_orthogonal_projector(
        theta in 0.0..std::f64::consts::TAU,
        phi in 0.0..std::f64::consts::PI,
        angle in 0.0..std::f64::consts::TAU,
    ) {
        let n = DVector::from_vec(vec![phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos()]);
        let r = nalgebra::Rotation3::from_axis_angle(&nalgebra::Vector3::z_axis(), angle);
        let frame = Frame(DMatrix::from_iterator(3, 3, r.matrix().iter().copied()));
        let p = boundary_projection(&frame, &n).unwrap();
        prop_assert!((&p * &p - &p).norm() < 1e-12);
        prop_assert!((&p - p.transpose()).norm() < 1e-12);
        prop_assert!((p.trace() - 1.0).abs() < 1e-12);
        let q = DMatrix::identity(3, 3) - &p;
        prop_assert!((&q * &q - &q).norm() < 1e-12);
        prop_assert!((&q * frame.pull_covector(&n)).norm() < 1e-12);
    }

    #[test]
    fn verdict_follows_the_noise_band(lhs in -5.0..5.0f64, rhs in -5.0..5.0f64, se1 in 0.0..1.0f64, se2 in 0.0..1.0f64) {
        let (a, b) = (est(lhs, se1), est(rhs, se2));
        let band = VERDICT_SIGMAS * se1.hypot(se2);
        let v = verdict(&a, &b);
        prop_assert_eq!(v == Verdict::Violated, lhs - band > rhs);
        if v == Verdict::Holds {
            prop_assert!(rhs - lhs >= band);
        }
        if rhs >= lhs + band {
            prop_assert_eq!(v, Verdict::Holds);
        }
    }

    #[test]
    fn verdict_is_scale_invariant(lhs in -5.0..5.0f64, rhs in -5.0..5.0f64, se in 0.0..1.0f64, c in 0.1..10.0f64) {
        prop_assume!(((rhs - lhs).abs() - VERDICT_SIGMAS * se * 2f64.sqrt()).abs() > 1e-9);
        prop_assert_eq!(verdict(&est(lhs, se), &est(rhs, se)), verdict(&est(c * lhs, c * se), &est(c * rhs, c * se)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn paths_are_reproducible_and_stay_in_the_domain(seed in any::<u64>(), idx in 0u64..1000, x in 0.0..0.9f64) {
        let model = ManifoldModel::ball(2, 1.0).unwrap();
        let cfg = SamplerConfig::new(PathGrid::new(1.0, 64).unwrap(), 1, seed);
        let start = Point::new(&[x, 0.0]);
        let a = simulate_path(&model, &start, &cfg, idx).unwrap();
        let b = simulate_path(&model, &start, &cfg, idx).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.points.iter().all(|p| model.contains(p, 1e-9)));
        prop_assert!(a.dl.iter().all(|&d| d >= 0.0));
        prop_assert_eq!(a.dl[0], 0.0);
    }

    #[test]
    fn q_norm_stays_under_its_envelope(seed in any::<u64>(), base in 0usize..32) {
        let model = ManifoldModel::ball(2, 1.0).unwrap();
        let cfg = SamplerConfig::new(PathGrid::new(1.0, 64).unwrap(), 1, seed);
        let path = simulate_path(&model, &Point::new(&[0.8, 0.0]), &cfg, 0).unwrap();
        let q = q_evolve(&path, &model, base, ProjectionMode::EveryEvent).unwrap();
        let ratio = q_norm_ratio(&q, &path, &model.exact_bounds());
        prop_assert!(ratio <= 1.0 + 10.0 * path.dt(), "ratio {ratio}");
    }

    #[test]
    fn gradients_vanish_after_the_last_time(seed in any::<u64>(), t1 in 0.1..0.9f64) {
        let model = ManifoldModel::sphere(2).unwrap();
        let cfg = SamplerConfig::new(PathGrid::new(1.0, 64).unwrap(), 1, seed);
        let path = simulate_path(&model, &Point::new(&[0.0, 0.0, 1.0]), &cfg, 0).unwrap();
        let f = CylinderPointwise::new(vec![t1], Arc::new(Registered::from_name("tanh-coordinate", 0, 1.0, 0.0).unwrap())).unwrap();
        let g = path_gradients(&path, &model, &f, ProjectionMode::EveryEvent).unwrap();
        let last = path.grid.snap(t1);
        for k in last..=path.n_steps() {
            prop_assert_eq!(g.malliavin.vectors[k].norm(), 0.0);
            prop_assert_eq!(g.damped.vectors[k].norm(), 0.0);
        }
    }

    #[test]
    fn heat_exact_form_is_below_its_bound(seed in any::<u64>(), x in 0.0..0.5f64) {
        let model = ManifoldModel::half_space(2).unwrap();
        let cfg = SamplerConfig::new(PathGrid::new(1.0, 64).unwrap(), 1, seed);
        let path = simulate_path(&model, &Point::new(&[0.3, x]), &cfg, 0).unwrap();
        let inner = InnerSpec { name: "tanh-coordinate".into(), index: 1, weights: None };
        let func = CylinderIntegral::new(
            Arc::new(RegisteredOuter::from_name("tanh", 1.0, 0.0).unwrap()),
            vec![Arc::new(RegisteredInner::from_spec(&inner, &model).unwrap())],
        )
        .unwrap();
        let r = heat_record(&path, &model, &func, 0.0, 0.0, ProjectionMode::EveryEvent);
        prop_assert!(r.exact <= r.bound * (1.0 + 1e-9) + 1e-15, "exact {} bound {}", r.exact, r.bound);
        prop_assert!(r.holder_excess <= 1e-12);
        prop_assert!(r.bound <= r.plain);
    }
}
