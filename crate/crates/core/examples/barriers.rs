//! L w1 and L w2 across B_r(x1), their r^(-2s) scaling and the largest c0
//! with L(w1 + c0 w2) <= 0.

use nonlocal_lab::harnack::{barrier_combination_check, barrier_profile};
use nonlocal_lab::{DisconnectedConfig, Kernel};

fn main() -> nonlocal_lab::Result<()> {
    for s in [0.25, 0.5, 0.75] {
        let kernel = Kernel::fractional(1, s)?;
        for r in [0.5, 1.0, 2.0] {
            let config = DisconnectedConfig::symmetric_1d(r, 16.0)?;
            let p = barrier_profile(&kernel, &config, 101)?;
            println!(
                "s = {s:.2}  r = {r:3}  min(-L w1)·r^2s = {:.6}  max(L w2)·r^2s = {:.6}",
                p.w1_bound, p.w2_bound
            );
        }
        let comb = barrier_combination_check(&kernel, &DisconnectedConfig::symmetric_1d(1.0, 16.0)?, 101)?;
        println!("         c0_max = {:.4e}  (pointwise ratio bound {:.4e})", comb.c0_max, comb.ratio_bound);
    }
    Ok(())
}
