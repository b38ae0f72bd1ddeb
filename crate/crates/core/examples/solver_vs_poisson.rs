//! Solve the Dirichlet problem on (-1, 1) with data χ_(1,3) and compare with
//! the Poisson-kernel extension at every cell center.

use nonlocal_lab::geometry::Interval;
use nonlocal_lab::poisson::{poisson_extend, PoissonKernelBall};
use nonlocal_lab::solver1d::solve;
use nonlocal_lab::{Kernel, Mesh1D, PointFunction, Quadrature};

fn main() -> nonlocal_lab::Result<()> {
    let g = PointFunction::indicator(1.0, 3.0, 1.0);
    let quad = Quadrature::new(1e-12);
    for s in [0.25, 0.5, 0.75] {
        let kernel = Kernel::fractional(1, s)?;
        let pk = PoissonKernelBall::unit_interval(s, 1.0)?;
        for n in [64, 128, 256, 512] {
            let mesh = Mesh1D::uniform(vec![Interval::new(-1.0, 1.0)], n)?;
            let u = solve(&kernel, &mesh, &g, None)?;
            let mut worst: f64 = 0.0;
            let mut at = 0.0;
            for (x, v) in mesh.centers().iter().zip(&u.values) {
                let exact = poisson_extend(&pk, &g, *x, &quad)?.value;
                let rel = (v - exact).abs() / exact.abs();
                if rel > worst {
                    worst = rel;
                    at = *x;
                }
            }
            println!("s = {s:.2}  N = {n:4}  max relative error {worst:.3e} at x = {at:+.4}");
        }
    }
    Ok(())
}
