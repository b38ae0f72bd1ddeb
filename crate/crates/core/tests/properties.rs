use nonlocal_lab::geometry::Interval;
use nonlocal_lab::poisson::{poisson_eval, poisson_mass, PoissonKernelBall};
use nonlocal_lab::quadrature::Quadrature;
use nonlocal_lab::solver1d::{assemble, DirichletSolver};
use nonlocal_lab::{Kernel, Mesh1D, PointFunction};
use proptest::prelude::*;

fn mesh(cells: usize) -> Mesh1D {
    Mesh1D::uniform(vec![Interval::new(-1.0, 1.0)], cells).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn constants_are_reproduced(s in 0.1f64..0.9, c in -10.0f64..10.0, cells in 4usize..24) {
        let k = Kernel::fractional(1, s).unwrap();
        let u = DirichletSolver::new(&k, &mesh(cells)).unwrap().solve(&PointFunction::constant(c), None).unwrap();
        for v in &u.values {
            prop_assert!((v - c).abs() <= 1e-9 * (1.0 + c.abs()));
        }
    }

    #[test]
    fn system_is_an_m_matrix(s in 0.1f64..0.9, cells in 4usize..24, ti in any::<bool>()) {
        let k = if ti { Kernel::builtin_translation_invariant(1, s) } else { Kernel::fractional(1, s) }.unwrap();
        let sys = assemble(&k, &mesh(cells), &PointFunction::constant(0.0), None).unwrap();
        for i in 0..cells {
            let mut off = 0.0;
            for j in 0..cells {
                if j != i {
                    prop_assert!(sys.matrix[(i, j)] <= 0.0);
                    off -= sys.matrix[(i, j)];
                }
            }
            prop_assert!(sys.matrix[(i, i)] > off);
        }
    }

    #[test]
    fn solution_is_linear_in_data(s in 0.2f64..0.8, a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let k = Kernel::fractional(1, s).unwrap();
        let solver = DirichletSolver::new(&k, &mesh(16)).unwrap();
        let g1 = PointFunction::indicator(1.0, 3.0, 1.0);
        let g2 = PointFunction::indicator(-4.0, -2.0, 1.0);
        let u1 = solver.solve(&g1, None).unwrap();
        let u2 = solver.solve(&g2, None).unwrap();
        let u = solver.solve(&PointFunction::combine(a, &g1, b, &g2), None).unwrap();
        for i in 0..16 {
            let expected = a * u1.values[i] + b * u2.values[i];
            prop_assert!((u.values[i] - expected).abs() < 1e-10 * (1.0 + a.abs() + b.abs()));
        }
    }

    #[test]
    fn poisson_mass_is_one(s in 0.1f64..0.9, x in -0.95f64..0.95) {
        let pk = PoissonKernelBall::unit_interval(s, 1.0).unwrap();
        let m = poisson_mass(&pk, x, &Quadrature::default()).unwrap();
        prop_assert!((m.value - 1.0).abs() < 1e-6, "{}", m.value);
    }

    #[test]
    fn poisson_kernel_scales_with_radius(s in 0.1f64..0.9, x in -0.9f64..0.9, z in 1.05f64..20.0, r in 0.1f64..10.0) {
        let unit = PoissonKernelBall::unit_interval(s, 1.0).unwrap();
        let big = PoissonKernelBall::unit_interval(s, r).unwrap();
        let p1 = poisson_eval(&unit, &[x], &[z]).unwrap();
        let pr = poisson_eval(&big, &[r * x], &[r * z]).unwrap();
        prop_assert!((pr * r - p1).abs() <= 1e-12 * p1);
    }

    #[test]
    fn kernels_are_symmetric(s in 0.1f64..0.9, x in -5.0f64..5.0, y in -5.0f64..5.0) {
        prop_assume!((x - y).abs() > 1e-6);
        for k in [Kernel::fractional(1, s), Kernel::builtin_translation_invariant(1, s), Kernel::builtin_anisotropic(1, s)] {
            let k = k.unwrap();
            let (a, b) = (k.eval1(x, y), k.eval1(y, x));
            prop_assert!((a - b).abs() <= 1e-14 * a.abs());
        }
    }
}
