//! Harnack-type experiments on two disjoint intervals: data families, empirical
//! constants, barrier combinations and the sweep over the order `s`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::function::{Growth, PointFunction, Regularity};
use crate::geometry::{mesh_over, Ball, DisconnectedConfig, Mesh1D};
use crate::kernel::{Kernel, Normalization};
use crate::operator::{barrier_w1, barrier_w2, eval_l, near_radius_for, tail, FAR_TRUNCATION_FACTOR};
use crate::quadrature::Quadrature;
use crate::solver1d::{DirichletSolver, GridFunction};

/// Tails in the experiments are truncated at this multiple of the tail radius.
pub const TAIL_TRUNCATION_FACTOR: f64 = 1e8;

/// Length of the constant pieces of random data, in units of `r`.
pub const RANDOM_PIECE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum DataFamily {
    /// Uniform `[0, 1]` values on pieces of `B_R ∖ Ω`, zero outside `B_R`.
    RandomNonneg { samples: usize },
    /// `baseline` on `B_R ∖ Ω` plus `M` on `(x2 + 2r, x2 + 3r)`, one datum per mass.
    MassNearX2 { masses: Vec<f64>, baseline: f64 },
    /// Random nonnegative data in `B_R ∖ Ω` and `-1` outside `B_R`.
    FarNegative { samples: usize },
}

impl DataFamily {
    pub fn name(&self) -> &'static str {
        match self {
            DataFamily::RandomNonneg { .. } => "random-nonneg",
            DataFamily::MassNearX2 { .. } => "mass-near-x2",
            DataFamily::FarNegative { .. } => "far-negative",
        }
    }

    pub fn default_masses() -> Vec<f64> {
        vec![1.0, 10.0, 100.0, 1000.0]
    }
}

/// Pieces of `B_R(0) ∖ Ω` on the line.
fn annulus_pieces(mesh: &Mesh1D, big_r: f64) -> Vec<(f64, f64)> {
    mesh.exterior_pieces()
        .into_iter()
        .filter_map(|(a, b)| {
            let (a, b) = (a.max(-big_r), b.min(big_r));
            (b > a).then_some((a, b))
        })
        .collect()
}

/// Piecewise-constant data: `values[k]` on `pieces[k]`, `outside` beyond `|y| >= R`.
fn piecewise_data(pieces: Vec<(f64, f64, f64)>, big_r: f64, outside: f64) -> PointFunction {
    let mut breaks: Vec<f64> = pieces.iter().flat_map(|p| [p.0, p.1]).collect();
    breaks.extend([-big_r, big_r]);
    let sup = pieces.iter().fold(outside.abs(), |m, p| m.max(p.2.abs()));
    let table = pieces.clone();
    let f = PointFunction::new1(
        move |y| {
            if y.abs() >= big_r {
                return outside;
            }
            table
                .iter()
                .find(|(a, b, _)| y > *a && y < *b)
                .map_or(0.0, |p| p.2)
        },
        Growth::Bounded(sup),
    )
    .with_breaks(breaks, Regularity::Discontinuous);
    if outside == 0.0 {
        f.with_support(Ball {
            center: vec![0.0],
            radius: big_r,
        })
    } else {
        f
    }
}

fn random_pieces(mesh: &Mesh1D, config: &DisconnectedConfig, rng: &mut ChaCha8Rng) -> Vec<(f64, f64, f64)> {
    let step = RANDOM_PIECE * config.r;
    let mut out = Vec::new();
    for (a, b) in annulus_pieces(mesh, config.big_r) {
        let count = ((b - a) / step).ceil().max(1.0) as usize;
        let w = (b - a) / count as f64;
        for k in 0..count {
            let lo = a + k as f64 * w;
            let hi = if k + 1 == count { b } else { a + (k + 1) as f64 * w };
            out.push((lo, hi, rng.random::<f64>()));
        }
    }
    out
}

/// The data of a family, in sample order.
pub fn family_data(family: &DataFamily, config: &DisconnectedConfig, mesh: &Mesh1D, seed: u64) -> Vec<PointFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let big_r = config.big_r;
    match family {
        DataFamily::RandomNonneg { samples } => (0..*samples)
            .map(|_| piecewise_data(random_pieces(mesh, config, &mut rng), big_r, 0.0))
            .collect(),
        DataFamily::FarNegative { samples } => (0..*samples)
            .map(|_| piecewise_data(random_pieces(mesh, config, &mut rng), big_r, -1.0))
            .collect(),
        DataFamily::MassNearX2 { masses, baseline } => {
            let (lo, hi) = (config.x2[0] + 2.0 * config.r, config.x2[0] + 3.0 * config.r);
            masses
                .iter()
                .map(|&m| {
                    let mut pieces = Vec::new();
                    for (a, b) in annulus_pieces(mesh, big_r) {
                        // Split each exterior piece around the mass window.
                        let cuts = [a, lo.clamp(a, b), hi.clamp(a, b), b];
                        for w in cuts.windows(2) {
                            if w[1] > w[0] {
                                let inside = w[0] >= lo && w[1] <= hi;
                                pieces.push((w[0], w[1], if inside { baseline + m } else { *baseline }));
                            }
                        }
                    }
                    piecewise_data(pieces, big_r, 0.0)
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnackReport {
    pub config: DisconnectedConfig,
    pub s: f64,
    pub kernel: String,
    pub normalization: Normalization,
    pub family: String,
    pub sample_id: usize,
    #[serde(rename = "sup_B_r(x2)")]
    pub sup: f64,
    #[serde(rename = "inf_B_r(x1)")]
    pub inf: f64,
    #[serde(rename = "avg_B_r(x2)")]
    pub avg: f64,
    pub tail_term: f64,
    pub tail_remainder: f64,
    #[serde(rename = "C_estimate")]
    pub c_estimate: Option<f64>,
    pub trivial: bool,
    pub seed: u64,
    #[serde(rename = "N")]
    pub cells: usize,
}

/// `(r/R)^{2s}·Tail(u_-; 0, R)` of the solution extended by its data, with the remainder bound.
pub fn scaled_negative_tail(u: &GridFunction, config: &DisconnectedConfig, s: f64) -> Result<(f64, f64)> {
    let negative = u.to_point_function().negative_part();
    let big_r = config.big_r;
    let quad = Quadrature::new(1e-12);
    let t = tail(&negative, &[0.0], big_r, s, TAIL_TRUNCATION_FACTOR * big_r, &quad)?;
    let scale = (config.r / big_r).powf(2.0 * s);
    Ok((scale * t.value, scale * t.remainder_bound))
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

pub fn harnack_report(u: &GridFunction, config: &DisconnectedConfig, kernel: &Kernel) -> Result<HarnackReport> {
    let s = kernel.s;
    let (b1, b2) = (config.ball1(1.0), config.ball2(1.0));
    let sup = u.sup_in(&b2)?;
    let inf = u.inf_in(&b1)?;
    let avg = u.avg_in(&b2)?;
    let (tail_term, tail_remainder) = scaled_negative_tail(u, config, s)?;
    let c_estimate = ratio(sup, inf + tail_term);
    Ok(HarnackReport {
        config: config.clone(),
        s,
        kernel: kernel.family.tag().to_string(),
        normalization: kernel.normalization,
        family: String::new(),
        sample_id: 0,
        sup,
        inf,
        avg,
        tail_term,
        tail_remainder,
        c_estimate,
        trivial: c_estimate.is_none(),
        seed: 0,
        cells: u.mesh.cells_per_interval,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Experiment {
    pub reports: Vec<HarnackReport>,
    #[serde(rename = "C_max")]
    pub c_max: Option<f64>,
}

pub fn disconnected_harnack_experiment(
    kernel: &Kernel,
    config: &DisconnectedConfig,
    family: &DataFamily,
    seed: u64,
    cells: usize,
) -> Result<Experiment> {
    let mesh = mesh_over(config, cells)?;
    let solver = DirichletSolver::new(kernel, &mesh)?;
    let data = family_data(family, config, &mesh, seed);
    let reports: Vec<Result<HarnackReport>> = data
        .par_iter()
        .enumerate()
        .map(|(id, g)| {
            let u = solver.solve(g, None)?;
            let mut rep = harnack_report(&u, config, kernel)?;
            rep.family = family.name().to_string();
            rep.sample_id = id;
            rep.seed = seed;
            Ok(rep)
        })
        .collect();
    let reports = reports.into_iter().collect::<Result<Vec<_>>>()?;
    let c_max = reports
        .iter()
        .filter_map(|r| r.c_estimate)
        .fold(None, |m: Option<f64>, c| Some(m.map_or(c, |m| m.max(c))));
    Ok(Experiment { reports, c_max })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakHarnack {
    pub lhs_avg: f64,
    pub inf: f64,
    pub tail_term: f64,
    pub constant: Option<f64>,
    pub pass: bool,
}

pub fn weak_harnack_check(u: &GridFunction, config: &DisconnectedConfig, s: f64) -> Result<WeakHarnack> {
    let lhs_avg = u.avg_in(&config.ball2(1.0))?;
    let inf = u.inf_in(&config.ball1(1.0))?;
    let (tail_term, _) = scaled_negative_tail(u, config, s)?;
    let constant = ratio(lhs_avg, inf + tail_term);
    Ok(WeakHarnack {
        lhs_avg,
        inf,
        tail_term,
        constant,
        pass: constant.is_some_and(f64::is_finite) || lhs_avg <= 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalizedMp {
    pub min_u: f64,
    pub tail_term: f64,
    #[serde(rename = "C_empirical")]
    pub c_empirical: f64,
}

/// Solve on `B_r(x1)` with zero data on `B_R ∖ B_r(x1)` and `far_value` outside `B_R`.
pub fn localized_mp_check(kernel: &Kernel, config: &DisconnectedConfig, far_value: f64, cells: usize) -> Result<LocalizedMp> {
    if config.n != 1 {
        return Err(LabError::UnsupportedDimension(config.n));
    }
    let ball = config.ball1(1.0);
    let mesh = Mesh1D::over_ball(&ball, cells)?;
    let big_r = config.big_r;
    let mut g = PointFunction::new1(move |y| if y.abs() >= big_r { far_value } else { 0.0 }, Growth::Bounded(far_value.abs()))
        .with_breaks(vec![-big_r, big_r], Regularity::Discontinuous);
    if far_value == 0.0 {
        g = PointFunction::constant(0.0);
    }
    let u = DirichletSolver::new(kernel, &mesh)?.solve(&g, None)?;
    let min_u = u.min();
    let (tail_term, _) = scaled_negative_tail(&u, config, kernel.s)?;
    let c_empirical = if min_u < 0.0 && tail_term > 0.0 { -min_u / tail_term } else { 0.0 };
    Ok(LocalizedMp {
        min_u,
        tail_term,
        c_empirical,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarrierProfile {
    pub xs: Vec<f64>,
    pub lw1: Vec<f64>,
    pub lw2: Vec<f64>,
    /// `min(-Lw1)·r^{2s}` over the grid.
    pub w1_bound: f64,
    /// `max(Lw2)·r^{2s}` over the grid.
    pub w2_bound: f64,
    pub max_error: f64,
}

/// `points` equally spaced points strictly inside `B_r(x1)`.
pub fn barrier_grid(config: &DisconnectedConfig, points: usize) -> Vec<f64> {
    let (c, r) = (config.x1[0], config.r);
    (0..points)
        .map(|i| c - r + 2.0 * r * (i + 1) as f64 / (points + 1) as f64)
        .collect()
}

pub fn barrier_profile(kernel: &Kernel, config: &DisconnectedConfig, points: usize) -> Result<BarrierProfile> {
    if config.n != 1 {
        return Err(LabError::UnsupportedDimension(config.n));
    }
    if !kernel.is_translation_invariant() {
        return Err(LabError::UnsupportedKernel(
            "barrier estimates need a translation-invariant kernel".into(),
        ));
    }
    let (w1, w2) = (barrier_w1(config), barrier_w2(config));
    let r = config.r;
    let t_far = FAR_TRUNCATION_FACTOR * r;
    let quad = Quadrature::new(1e-11);
    let xs = barrier_grid(config, points);
    let values: Vec<Result<(f64, f64, f64)>> = xs
        .par_iter()
        .map(|&x| {
            let a = eval_l(kernel, &w1, &[x], near_radius_for(&w1, x, r), t_far, &quad)?;
            let b = eval_l(kernel, &w2, &[x], 0.25 * r, t_far, &quad)?;
            Ok((a.value, b.value, a.error.max(b.error)))
        })
        .collect();
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;
    let scale = r.powf(2.0 * kernel.s);
    let lw1: Vec<f64> = values.iter().map(|v| v.0).collect();
    let lw2: Vec<f64> = values.iter().map(|v| v.1).collect();
    Ok(BarrierProfile {
        w1_bound: lw1.iter().fold(f64::INFINITY, |m, v| m.min(-v)) * scale,
        w2_bound: lw2.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)) * scale,
        max_error: values.iter().fold(0.0, |m, v| m.max(v.2)),
        xs,
        lw1,
        lw2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarrierCombination {
    pub c0_max: f64,
    /// `min (-Lw1)/Lw2` over grid points with `Lw2 > 0`.
    pub ratio_bound: f64,
    pub v_profile: Vec<f64>,
    pub profile: BarrierProfile,
}

/// Search grid for `c0`: 50 points per decade from 1e-6 to 1e6.
pub fn c0_grid() -> Vec<f64> {
    (0..=600).map(|k| 10f64.powf(-6.0 + k as f64 / 50.0)).collect()
}

/// Largest grid `c0` with `L(w1 + c0·w2) <= 0` on the grid in `B_r(x1)`.
pub fn barrier_combination_check(kernel: &Kernel, config: &DisconnectedConfig, points: usize) -> Result<BarrierCombination> {
    let profile = barrier_profile(kernel, config, points)?;
    let ok = |c0: f64| profile.lw1.iter().zip(&profile.lw2).all(|(a, b)| a + c0 * b <= 0.0);
    let grid = c0_grid();
    if !ok(grid[0]) {
        return Err(LabError::NoPositiveC0);
    }
    let c0_max = grid.iter().copied().take_while(|&c| ok(c)).last().unwrap_or(grid[0]);
    let ratio_bound = profile
        .lw1
        .iter()
        .zip(&profile.lw2)
        .filter(|(_, b)| **b > 0.0)
        .map(|(a, b)| -a / b)
        .fold(f64::INFINITY, f64::min);
    let v_profile = profile.lw1.iter().zip(&profile.lw2).map(|(a, b)| a + c0_max * b).collect();
    Ok(BarrierCombination {
        c0_max,
        ratio_bound,
        v_profile,
        profile,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub s: f64,
    #[serde(rename = "C_max")]
    pub c_max: Option<f64>,
    pub c0_max: f64,
    pub c0_over_one_minus_s: f64,
    pub reports: Vec<HarnackReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    pub c_max_increasing: bool,
    pub c0_max_decreasing: bool,
}

/// Harnack and barrier constants for each order in `s_grid`.
pub fn s_sweep(
    base: &Kernel,
    config: &DisconnectedConfig,
    s_grid: &[f64],
    family: &DataFamily,
    seed: u64,
    cells: usize,
    points: usize,
) -> Result<Sweep> {
    let mut rows = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let kernel = base.with_order(s)?;
        let exp = disconnected_harnack_experiment(&kernel, config, family, seed, cells)?;
        let comb = barrier_combination_check(&kernel, config, points)?;
        rows.push(SweepRow {
            s,
            c_max: exp.c_max,
            c0_max: comb.c0_max,
            c0_over_one_minus_s: comb.c0_max / (1.0 - s),
            reports: exp.reports,
        });
    }
    let c_max_increasing = rows.windows(2).all(|w| match (w[0].c_max, w[1].c_max) {
        (Some(a), Some(b)) => b > a,
        _ => false,
    });
    let c0_max_decreasing = rows.windows(2).all(|w| w[1].c0_max < w[0].c0_max);
    Ok(Sweep {
        rows,
        c_max_increasing,
        c0_max_decreasing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalHarnack {
    pub sup: f64,
    pub inf: f64,
    pub tail: f64,
    #[serde(rename = "C_empirical")]
    pub c_empirical: Option<f64>,
}

/// Single-ball Harnack constant: `u` solved on `ball`, statistics on the
/// concentric ball of half the radius, tail of `u_-` outside `ball`.
pub fn classical_harnack_check(u: &GridFunction, ball: &Ball, s: f64) -> Result<ClassicalHarnack> {
    let inner = ball.scaled(0.5);
    let sup = u.sup_in(&inner)?;
    let inf = u.inf_in(&inner)?;
    let negative = u.to_point_function().negative_part();
    let quad = Quadrature::new(1e-12);
    let t = tail(&negative, &ball.center, ball.radius, s, TAIL_TRUNCATION_FACTOR * ball.radius, &quad)?;
    Ok(ClassicalHarnack {
        sup,
        inf,
        tail: t.value,
        c_empirical: ratio(sup, inf + t.value),
    })
}

/// Random nonnegative piecewise-constant data on `(R_in, R_out)` shells around a ball.
pub fn random_shell_data(ball: &Ball, outer: f64, seed: u64) -> PointFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (c, r) = (ball.center[0], ball.radius);
    let step = RANDOM_PIECE * 0.5 * r;
    let mut pieces = Vec::new();
    for (a, b) in [(c - outer, c - r), (c + r, c + outer)] {
        let count = ((b - a) / step).ceil().max(1.0) as usize;
        let w = (b - a) / count as f64;
        for k in 0..count {
            let hi = if k + 1 == count { b } else { a + (k + 1) as f64 * w };
            pieces.push((a + k as f64 * w, hi, rng.random::<f64>()));
        }
    }
    let sup = pieces.iter().fold(0.0f64, |m, p| m.max(p.2));
    let breaks = pieces.iter().flat_map(|p| [p.0, p.1]).collect();
    PointFunction::new1(
        move |y| pieces.iter().find(|(a, b, _)| y > *a && y < *b).map_or(0.0, |p| p.2),
        Growth::Bounded(sup),
    )
    .with_breaks(breaks, Regularity::Discontinuous)
    .with_support(Ball {
        center: vec![c],
        radius: outer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_data_is_trivial() {
        let cfg = DisconnectedConfig::symmetric_1d(1.0, 16.0).unwrap();
        let k = Kernel::fractional(1, 0.5).unwrap();
        let mesh = mesh_over(&cfg, 16).unwrap();
        let u = DirichletSolver::new(&k, &mesh)
            .unwrap()
            .solve(&PointFunction::constant(0.0), None)
            .unwrap();
        let rep = harnack_report(&u, &cfg, &k).unwrap();
        assert_eq!((rep.sup, rep.inf), (0.0, 0.0));
        assert!(rep.trivial && rep.c_estimate.is_none());
    }

    #[test]
    fn families_are_seeded() {
        let cfg = DisconnectedConfig::symmetric_1d(1.0, 16.0).unwrap();
        let mesh = mesh_over(&cfg, 16).unwrap();
        let fam = DataFamily::RandomNonneg { samples: 3 };
        let a = family_data(&fam, &cfg, &mesh, 7);
        let b = family_data(&fam, &cfg, &mesh, 7);
        let c = family_data(&fam, &cfg, &mesh, 8);
        for x in [-7.3, -5.1, 4.4, 9.9] {
            assert_eq!(a[1].eval1(x), b[1].eval1(x));
        }
        assert!((0..3).any(|i| a[i].eval1(5.3) != c[i].eval1(5.3)));
        assert_eq!(a[0].eval1(-2.0), 0.0);
        assert_eq!(a[0].eval1(17.0), 0.0);
    }

    #[test]
    fn mass_family_layout() {
        let cfg = DisconnectedConfig::symmetric_1d(1.0, 16.0).unwrap();
        let mesh = mesh_over(&cfg, 16).unwrap();
        let fam = DataFamily::MassNearX2 {
            masses: vec![10.0],
            baseline: 1.0,
        };
        let g = &family_data(&fam, &cfg, &mesh, 0)[0];
        assert_eq!(g.eval1(4.5), 11.0);
        assert_eq!(g.eval1(5.5), 1.0);
        assert_eq!(g.eval1(-6.0), 1.0);
        assert_eq!(g.eval1(20.0), 0.0);
    }

    #[test]
    fn c0_grid_is_logarithmic() {
        let g = c0_grid();
        assert!((g[0] - 1e-6).abs() < 1e-18);
        assert!((g[600] - 1e6).abs() < 1e-6);
        assert!((g[51] / g[50] - 10f64.powf(0.02)).abs() < 1e-12);
    }
}
