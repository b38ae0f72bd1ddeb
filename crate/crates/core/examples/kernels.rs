//! Build the three kernel families and check their ellipticity bracket on
//! random pairs.

use nonlocal_lab::kernel::{check_ellipticity, sample_pairs};
use nonlocal_lab::{Kernel, Normalization};

fn main() -> nonlocal_lab::Result<()> {
    let pairs = sample_pairs(1, 1000, 10.0, 42);
    for s in [0.25, 0.75] {
        let kernels = [
            Kernel::fractional(1, s)?,
            Kernel::builtin_translation_invariant(1, s)?,
            Kernel::builtin_anisotropic(1, s)?,
            Kernel::fractional(1, s)?.with_normalization(Normalization::OneMinusS),
        ];
        for k in &kernels {
            let e = check_ellipticity(k, &pairs)?;
            println!(
                "s = {s:.2}  {:<8} {:?}  k(0,1) = {:.4}  ratio in [{:.3}, {:.3}]  ok = {}",
                k.family.tag(),
                k.normalization,
                k.eval1(0.0, 1.0),
                e.min_ratio,
                e.max_ratio,
                e.pass
            );
        }
    }
    Ok(())
}
