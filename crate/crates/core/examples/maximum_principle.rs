//! Sign of discrete solutions: nonnegative data give nonnegative solutions,
//! and L u = -C0 with zero data stays above -C·C0·r^(2s).

use nonlocal_lab::harnack::random_shell_data;
use nonlocal_lab::solver1d::{discrete_nonhom_mp, DirichletSolver};
use nonlocal_lab::{Ball, Kernel, Mesh1D};

fn main() -> nonlocal_lab::Result<()> {
    let ball = Ball::interval(0.0, 1.0)?;
    for s in [0.25, 0.5, 0.75] {
        let kernel = Kernel::builtin_translation_invariant(1, s)?;
        let solver = DirichletSolver::new(&kernel, &Mesh1D::over_ball(&ball, 64)?)?;
        let mut lowest = f64::INFINITY;
        for seed in 0..50 {
            let u = solver.solve(&random_shell_data(&ball, 6.0, seed), None)?;
            lowest = lowest.min(u.min());
        }
        let mp = discrete_nonhom_mp(&kernel, &ball, 64, 1.0)?;
        println!(
            "s = {s:.2}  min u over 50 random data = {lowest:.4e}  L u = -1: min u = {:.5}, C = {:.5} (reference {:.5})",
            mp.min_u, mp.bound_constant, mp.reference_threshold
        );
    }
    Ok(())
}
