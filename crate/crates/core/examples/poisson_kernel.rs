//! The fractional Poisson kernel of an interval: mass, an extension with a
//! closed form, and the two-sided interior bounds.

use std::f64::consts::PI;

use nonlocal_lab::poisson::{
    bounds_sample_grid, check_poisson_bounds, poisson_constant, poisson_extend, poisson_mass, PoissonKernelBall,
};
use nonlocal_lab::{PointFunction, Quadrature};

fn main() -> nonlocal_lab::Result<()> {
    let quad = Quadrature::new(1e-12);
    println!("c(1, 1/2) = {:.15}, 1/pi = {:.15}", poisson_constant(1, 0.5)?, 1.0 / PI);
    for s in [0.25, 0.5, 0.75] {
        let pk = PoissonKernelBall::unit_interval(s, 1.0)?;
        let masses: Vec<String> = [-0.9, 0.0, 0.5]
            .iter()
            .map(|&x| poisson_mass(&pk, x, &quad).map(|m| format!("{:.2e}", m.value - 1.0)))
            .collect::<nonlocal_lab::Result<_>>()?;
        let (xs, zs) = bounds_sample_grid(&pk, 16, 10.0)?;
        let b = check_poisson_bounds(&pk, &xs, &zs)?;
        println!(
            "s = {s:.2}  mass - 1 at x = -0.9, 0, 0.5: {}  P·|x-z|^(1+2s)/r^2s in [{:.4}, {:.4}]",
            masses.join(", "),
            b.min_ratio,
            b.max_ratio
        );
    }
    let pk = PoissonKernelBall::unit_interval(0.5, 1.0)?;
    let e = poisson_extend(&pk, &PointFunction::indicator(1.0, 3.0, 1.0), 0.0, &quad)?;
    println!("extension of χ_(1,3) at 0: {:.12}, arccos(1/3)/pi = {:.12}", e.value, (1.0f64 / 3.0).acos() / PI);
    Ok(())
}
