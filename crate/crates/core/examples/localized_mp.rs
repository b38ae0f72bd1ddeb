//! Negative data far away pull the solution on B_r(x1) below zero by an
//! amount proportional to the scaled tail, whatever R/r is.

use nonlocal_lab::harnack::localized_mp_check;
use nonlocal_lab::{DisconnectedConfig, Kernel};

fn main() -> nonlocal_lab::Result<()> {
    for s in [0.25, 0.5] {
        let kernel = Kernel::fractional(1, s)?;
        for ratio in [8.0, 16.0, 32.0, 64.0] {
            let config = DisconnectedConfig::symmetric_1d(1.0, ratio)?;
            let mp = localized_mp_check(&kernel, &config, -1.0, 256)?;
            println!(
                "s = {s:.2}  R/r = {ratio:4}  min u = {:.5e}  tail term = {:.5e}  C = {:.4}",
                mp.min_u, mp.tail_term, mp.c_empirical
            );
        }
    }
    Ok(())
}
