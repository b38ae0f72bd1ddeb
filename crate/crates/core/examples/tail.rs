//! Tails of an indicator and of a growing function, with truncation bounds.

use nonlocal_lab::operator::tail;
use nonlocal_lab::{Growth, PointFunction, Quadrature};

fn main() -> nonlocal_lab::Result<()> {
    let quad = Quadrature::new(1e-12);
    let s = 0.25;

    // χ_(2,4) seen from 0 at radius 1: r^{2s} ∫_2^4 y^{-1-2s} dy.
    let u = PointFunction::indicator(2.0, 4.0, 1.0);
    let t = tail(&u, &[0.0], 1.0, s, 1e4, &quad)?;
    let exact = (2f64.powf(-2.0 * s) - 4f64.powf(-2.0 * s)) / (2.0 * s);
    println!("indicator: tail {:.12} closed form {exact:.12}", t.value);

    // |y|^0.3 is tail-integrable for 2s = 0.5 > 0.3; only the truncation is inexact.
    let grow = PointFunction::new1(|y| y.abs().powf(0.3), Growth::Power { coeff: 1.0, exponent: 0.3 });
    for far in [1e3, 1e5, 1e7] {
        let t = tail(&grow, &[0.0], 1.0, s, far, &quad)?;
        println!("|y|^0.3, T = {far:.0e}: tail {:.8} + remainder <= {:.3e}", t.value, t.remainder_bound);
    }
    Ok(())
}
