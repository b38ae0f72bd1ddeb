//! Harnack constants between two disjoint intervals, for random data and for
//! a growing mass next to the second interval, plus the weak and the
//! single-interval versions on one datum.

use nonlocal_lab::geometry::mesh_over;
use nonlocal_lab::harnack::{
    classical_harnack_check, disconnected_harnack_experiment, random_shell_data, weak_harnack_check, DataFamily,
};
use nonlocal_lab::solver1d::solve;
use nonlocal_lab::{Ball, DisconnectedConfig, Kernel, Mesh1D};

fn main() -> nonlocal_lab::Result<()> {
    let config = DisconnectedConfig::symmetric_1d(1.0, 16.0)?;
    let kernel = Kernel::fractional(1, 0.5)?;

    let random = disconnected_harnack_experiment(&kernel, &config, &DataFamily::RandomNonneg { samples: 20 }, 7, 128)?;
    println!("random data, 20 samples: C_max = {:.4}", random.c_max.unwrap_or(f64::NAN));

    let family = DataFamily::MassNearX2 {
        masses: vec![1.0, 10.0, 100.0, 1000.0, 10000.0],
        baseline: 1.0,
    };
    for rep in disconnected_harnack_experiment(&kernel, &config, &family, 0, 256)?.reports {
        println!(
            "mass sample {}: sup {:10.4}  inf {:8.4}  C = {:.4}",
            rep.sample_id,
            rep.sup,
            rep.inf,
            rep.c_estimate.unwrap_or(f64::NAN)
        );
    }

    let g = nonlocal_lab::harnack::family_data(&DataFamily::FarNegative { samples: 1 }, &config, &mesh_over(&config, 128)?, 3)
        .remove(0);
    let u = solve(&kernel, &mesh_over(&config, 128)?, &g, None)?;
    let weak = weak_harnack_check(&u, &config, kernel.s)?;
    println!(
        "weak Harnack, far-negative datum: avg {:.4}  inf {:.4}  tail {:.4}  C = {:.4}",
        weak.lhs_avg,
        weak.inf,
        weak.tail_term,
        weak.constant.unwrap_or(f64::NAN)
    );

    let ball = Ball::interval(0.0, 1.0)?;
    let u = solve(&kernel, &Mesh1D::over_ball(&ball, 128)?, &random_shell_data(&ball, 6.0, 5), None)?;
    let single = classical_harnack_check(&u, &ball, kernel.s)?;
    println!(
        "one interval: sup {:.4}  inf {:.4}  C = {:.4}",
        single.sup,
        single.inf,
        single.c_empirical.unwrap_or(f64::NAN)
    );
    Ok(())
}
