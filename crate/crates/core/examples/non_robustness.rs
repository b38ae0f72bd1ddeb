//! Sweep s toward 1 with the (1 - s)-normalized kernel and watch the Harnack
//! constant grow and c0 shrink. The plain kernel gives the same numbers:
//! scaling a kernel changes neither homogeneous solutions nor c0.

use nonlocal_lab::harnack::{s_sweep, DataFamily};
use nonlocal_lab::{DisconnectedConfig, Kernel, Normalization};

fn main() -> nonlocal_lab::Result<()> {
    let config = DisconnectedConfig::symmetric_1d(1.0, 16.0)?;
    let family = DataFamily::MassNearX2 {
        masses: DataFamily::default_masses(),
        baseline: 1.0,
    };
    let grid = [0.5, 0.7, 0.9, 0.95, 0.99];
    for norm in [Normalization::OneMinusS, Normalization::Plain] {
        let base = Kernel::fractional(1, 0.5)?.with_normalization(norm);
        let sweep = s_sweep(&base, &config, &grid, &family, 0, 128, 101)?;
        println!("{norm:?}");
        for row in &sweep.rows {
            println!(
                "  s = {:.2}  C_max = {:.4}  c0_max = {:.3e}  c0/(1-s) = {:.4}",
                row.s,
                row.c_max.unwrap_or(f64::NAN),
                row.c0_max,
                row.c0_over_one_minus_s
            );
        }
    }
    Ok(())
}
