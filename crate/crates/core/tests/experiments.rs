//! Experiment-level checks and pinned regression values. Goldens were
//! recorded from the first verified run; tolerances are relative.

use nonlocal_lab::geometry::{mesh_over, Interval};
use nonlocal_lab::harnack::{
    barrier_combination_check, barrier_profile, classical_harnack_check, disconnected_harnack_experiment,
    family_data, harnack_report, localized_mp_check, random_shell_data, weak_harnack_check, DataFamily,
};
use nonlocal_lab::poisson::{bounds_sample_grid, check_poisson_bounds, PoissonKernelBall};
use nonlocal_lab::solver1d::{discrete_nonhom_mp, solve, DirichletSolver};
use nonlocal_lab::{Ball, DisconnectedConfig, Growth, Kernel, Mesh1D, Normalization, PointFunction};

const GOLDEN_NONHOM_C: f64 = 1.12534902212008181e-1;
const GOLDEN_ONES_C: f64 = 1.05611999323851480;
const GOLDEN_RANDOM_C_MAX: f64 = 1.45837538921183918;
const GOLDEN_CLASSICAL_C: f64 = 1.38718929840322791;
const GOLDEN_C0_S025: f64 = 3.01995172040201917e-2;

fn symmetric_pair() -> DisconnectedConfig {
    DisconnectedConfig::symmetric_1d(1.0, 16.0).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

/// `value` on `B_R ∖ Ω`, zero elsewhere.
fn annulus_constant(config: &DisconnectedConfig, value: f64) -> PointFunction {
    let (b1, b2, big_r) = (config.ball1(2.0), config.ball2(2.0), config.big_r);
    PointFunction::new1(
        move |y| {
            if y.abs() < big_r && !b1.contains1(y) && !b2.contains1(y) {
                value
            } else {
                0.0
            }
        },
        Growth::Bounded(value.abs()),
    )
    .with_breaks(vec![-big_r, big_r], nonlocal_lab::Regularity::Discontinuous)
}

#[test]
fn center_value_matches_closed_form() {
    let mesh = Mesh1D::uniform(vec![Interval::new(-1.0, 1.0)], 512).unwrap();
    let g = PointFunction::indicator(1.0, 3.0, 1.0);
    let u = solve(&Kernel::fractional(1, 0.5).unwrap(), &mesh, &g, None).unwrap();
    let exact = (1.0f64 / 3.0).acos() / std::f64::consts::PI;
    assert!(close(u.eval(0.0), exact, 0.02), "{}", u.eval(0.0));
}

#[test]
fn nonhomogeneous_constant_is_pinned() {
    let k = Kernel::fractional(1, 0.25).unwrap();
    let ball = Ball::interval(0.0, 1.0).unwrap();
    let mp = discrete_nonhom_mp(&k, &ball, 256, 1.0).unwrap();
    assert!(mp.bound_constant.is_finite() && mp.bound_constant > 0.0);
    assert!(close(mp.bound_constant, GOLDEN_NONHOM_C, 1e-9));
    let zero = discrete_nonhom_mp(&k, &ball, 256, 0.0).unwrap();
    assert_eq!(zero.min_u, 0.0);
}

#[test]
fn unit_annulus_data() {
    let cfg = symmetric_pair();
    let k = Kernel::fractional(1, 0.5).unwrap();
    let mesh = mesh_over(&cfg, 128).unwrap();
    let solver = DirichletSolver::new(&k, &mesh).unwrap();
    let one = harnack_report(&solver.solve(&annulus_constant(&cfg, 1.0), None).unwrap(), &cfg, &k).unwrap();
    let ten = harnack_report(&solver.solve(&annulus_constant(&cfg, 10.0), None).unwrap(), &cfg, &k).unwrap();
    assert_eq!(one.tail_term, 0.0);
    let c = one.c_estimate.unwrap();
    assert!(close(c, GOLDEN_ONES_C, 1e-9));
    assert!(close(ten.c_estimate.unwrap(), c, 1e-12));
}

#[test]
fn random_family_constant() {
    let cfg = symmetric_pair();
    let k = Kernel::fractional(1, 0.5).unwrap();
    let family = DataFamily::RandomNonneg { samples: 20 };
    let coarse = disconnected_harnack_experiment(&k, &cfg, &family, 7, 128).unwrap();
    let fine = disconnected_harnack_experiment(&k, &cfg, &family, 7, 256).unwrap();
    let (c, f) = (coarse.c_max.unwrap(), fine.c_max.unwrap());
    for r in &coarse.reports {
        assert!(r.sup <= c * (r.inf + r.tail_term));
        assert!(r.inf >= 0.0 && r.sup >= r.avg);
    }
    assert!(close(f, c, 0.05));
    assert!(close(c, GOLDEN_RANDOM_C_MAX, 1e-9));
}

#[test]
fn far_negative_data_have_a_tail() {
    let cfg = symmetric_pair();
    let k = Kernel::fractional(1, 0.5).unwrap();
    let exp = disconnected_harnack_experiment(&k, &cfg, &DataFamily::FarNegative { samples: 5 }, 1, 128).unwrap();
    for r in &exp.reports {
        assert!(r.tail_term > 0.0);
        assert!(r.c_estimate.is_some_and(f64::is_finite));
    }
}

#[test]
fn weak_constant_below_full_constant() {
    let cfg = symmetric_pair();
    let k = Kernel::fractional(1, 0.5).unwrap();
    let mesh = mesh_over(&cfg, 128).unwrap();
    let solver = DirichletSolver::new(&k, &mesh).unwrap();
    for g in family_data(&DataFamily::RandomNonneg { samples: 10 }, &cfg, &mesh, 3) {
        let u = solver.solve(&g, None).unwrap();
        let weak = weak_harnack_check(&u, &cfg, 0.5).unwrap();
        let full = harnack_report(&u, &cfg, &k).unwrap();
        assert!(weak.constant.unwrap() <= full.c_estimate.unwrap());
    }
    let u = solver.solve(&PointFunction::constant(3.0), None).unwrap();
    let weak = weak_harnack_check(&u, &cfg, 0.5).unwrap();
    assert!((weak.lhs_avg - 3.0).abs() < 1e-10 && (weak.inf - 3.0).abs() < 1e-10);
    assert!((weak.constant.unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn localized_mp_without_far_data() {
    let k = Kernel::fractional(1, 0.25).unwrap();
    let mp = localized_mp_check(&k, &symmetric_pair(), 0.0, 128).unwrap();
    assert!(mp.min_u >= 0.0);
    assert_eq!(mp.c_empirical, 0.0);
}

#[test]
fn doubling_far_data_doubles_the_minimum() {
    let k = Kernel::fractional(1, 0.25).unwrap();
    let a = localized_mp_check(&k, &symmetric_pair(), -1.0, 128).unwrap();
    let b = localized_mp_check(&k, &symmetric_pair(), -2.0, 128).unwrap();
    assert!((b.min_u / a.min_u - 2.0).abs() < 1e-10);
}

#[test]
fn c0_exists_and_is_scale_free() {
    let k = Kernel::fractional(1, 0.25).unwrap();
    let base = barrier_combination_check(&k, &symmetric_pair(), 101).unwrap();
    assert!(base.c0_max > 0.0);
    assert!(close(base.c0_max, GOLDEN_C0_S025, 1e-12));
    for r in [0.5, 2.0] {
        let c = barrier_combination_check(&k, &DisconnectedConfig::symmetric_1d(r, 16.0).unwrap(), 101).unwrap();
        assert!(close(c.c0_max, base.c0_max, 0.1));
    }
}

#[test]
fn w2_bounded_for_translation_invariant_kernel() {
    for s in [0.25, 0.5, 0.75] {
        let k = Kernel::builtin_translation_invariant(1, s).unwrap();
        let a = barrier_profile(&k, &symmetric_pair(), 101).unwrap();
        let b = barrier_profile(&k, &DisconnectedConfig::symmetric_1d(2.0, 16.0).unwrap(), 101).unwrap();
        assert!(a.w2_bound.is_finite() && a.w1_bound > 0.0);
        // The profile is not homogeneous, so the r-scaling only holds up to Λ.
        assert!(b.w2_bound <= 1.5 * 1.5 * a.w2_bound.abs() + 1e-9);
    }
}

#[test]
fn poisson_ratio_spread_on_dense_grid() {
    let pk = PoissonKernelBall::unit_interval(0.5, 1.0).unwrap();
    let (xs, zs) = bounds_sample_grid(&pk, 50, 10.0).unwrap();
    let b = check_poisson_bounds(&pk, &xs, &zs).unwrap();
    assert!(b.pass && b.min_ratio > 0.0 && b.max_ratio / b.min_ratio < 100.0);
}

#[test]
fn single_interval_constants() {
    let ball = Ball::interval(0.0, 1.0).unwrap();
    let k = Kernel::fractional(1, 0.5).unwrap();
    let mesh = Mesh1D::over_ball(&ball, 128).unwrap();
    let solver = DirichletSolver::new(&k, &mesh).unwrap();
    let flat = classical_harnack_check(&solver.solve(&PointFunction::constant(2.0), None).unwrap(), &ball, 0.5).unwrap();
    assert!((flat.c_empirical.unwrap() - 1.0).abs() < 1e-10);

    let single = classical_harnack_check(&solver.solve(&random_shell_data(&ball, 6.0, 5), None).unwrap(), &ball, 0.5).unwrap();
    let c = single.c_empirical.unwrap();
    assert!(close(c, GOLDEN_CLASSICAL_C, 1e-9));

    let mut single_max: f64 = 0.0;
    for seed in 0..20 {
        let u = solver.solve(&random_shell_data(&ball, 6.0, seed), None).unwrap();
        single_max = single_max.max(classical_harnack_check(&u, &ball, 0.5).unwrap().c_empirical.unwrap());
    }
    let disconnected = disconnected_harnack_experiment(&k, &symmetric_pair(), &DataFamily::RandomNonneg { samples: 20 }, 0, 128)
        .unwrap()
        .c_max
        .unwrap();
    assert!(single_max <= disconnected, "{single_max} > {disconnected}");
}

#[test]
fn normalization_leaves_constants_unchanged() {
    let cfg = symmetric_pair();
    let family = DataFamily::MassNearX2 {
        masses: vec![1.0, 100.0],
        baseline: 1.0,
    };
    for s in [0.5, 0.9] {
        let plain = Kernel::fractional(1, s).unwrap();
        let scaled = plain.clone().with_normalization(Normalization::OneMinusS);
        let a = disconnected_harnack_experiment(&plain, &cfg, &family, 0, 64).unwrap();
        let b = disconnected_harnack_experiment(&scaled, &cfg, &family, 0, 64).unwrap();
        assert!(close(a.c_max.unwrap(), b.c_max.unwrap(), 1e-10));
        let ca = barrier_combination_check(&plain, &cfg, 41).unwrap().c0_max;
        let cb = barrier_combination_check(&scaled, &cfg, 41).unwrap().c0_max;
        assert_eq!(ca, cb);
    }
}
