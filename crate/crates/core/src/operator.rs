//! Pointwise evaluation of `Lu(x) = 2 p.v.∫ (u(x) - u(y)) k(x, y) dy`, the
//! nonlocal tail, and the two barrier functions.
//!
//! Evaluation is one-dimensional. The integral is split at the near radius `ρ`:
//!
//! * near field `2∫_0^ρ F(h) dh` with the symmetrized integrand
//!   `F(h) = (u(x) - u(x+h)) k(x, x+h) + (u(x) - u(x-h)) k(x, x-h)`, which is
//!   `O(h^(1-2s))` for `u` smooth at `x`; it is integrated in `v = h^(2-2s)`,
//!   which makes it bounded,
//! * far field `2∫_ρ^T F(h) dh` on dyadic panels,
//! * beyond `T`: when `u` vanishes there, the `u(x)` part is integrated exactly
//!   (fractional kernel) or bracketed through ellipticity; otherwise the whole
//!   contribution is dropped and bounded through the growth class.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::function::{Growth, PointFunction, Regularity};
use crate::geometry::{distance, DisconnectedConfig};
use crate::kernel::{Kernel, KernelFamily};
use crate::quadrature::{Estimate, Quadrature};

/// Default far-field truncation in units of the configuration radius.
pub const FAR_TRUNCATION_FACTOR: f64 = 1e4;

/// Coefficient `c` in the recorded bound `|D²w2| <= c / r²`.
pub const W2_HESSIAN_COEFF: f64 = 240.0;

const INNER_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorValue {
    pub value: f64,
    /// Quadrature error estimate plus the truncation remainder bound.
    pub error: f64,
    pub remainder_bound: f64,
}

fn require_1d(kernel: &Kernel, x: &[f64]) -> Result<f64> {
    if kernel.n != 1 {
        return Err(LabError::UnsupportedDimension(kernel.n));
    }
    match x {
        [x0] => Ok(*x0),
        _ => Err(LabError::UnsupportedDimension(x.len())),
    }
}

/// Half the distance from `x` to the nearest breakpoint of `u`, or `fallback`
/// when `u` has none. For indicators this makes the near field vanish.
pub fn near_radius_for(u: &PointFunction, x: f64, fallback: f64) -> f64 {
    u.breaks
        .iter()
        .map(|b| (b - x).abs())
        .filter(|d| *d > 0.0)
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.min(d))))
        .map_or(fallback, |d| 0.5 * d)
}

/// `Lu(x)` with near radius `rho` and far truncation `t_far`.
pub fn eval_l(
    kernel: &Kernel,
    u: &PointFunction,
    x: &[f64],
    rho: f64,
    t_far: f64,
    quad: &Quadrature,
) -> Result<OperatorValue> {
    let x0 = require_1d(kernel, x)?;
    if !(rho > 0.0) || !(t_far > rho) {
        return Err(LabError::InvalidParameter(format!(
            "need 0 < near radius < far radius, got rho = {rho}, T = {t_far}"
        )));
    }
    let s = kernel.s;
    u.require_tail_integrable(s)?;

    let dists: Vec<f64> = u.breaks.iter().map(|b| (b - x0).abs()).collect();
    let h0 = INNER_FRACTION * rho;
    if u.regularity != Regularity::Smooth {
        let nearest = dists.iter().copied().fold(f64::INFINITY, f64::min);
        if u.regularity == Regularity::Discontinuous && nearest <= h0 {
            return Err(LabError::DomainViolation(format!(
                "u jumps at distance {nearest:e} from x = {x0}; Lu is not defined pointwise there"
            )));
        }
        if !kernel.is_translation_invariant() && nearest < rho {
            return Err(LabError::UnsupportedKernel(
                "general kernels need u smooth on the whole near field".into(),
            ));
        }
    }

    let ux = u.eval1(x0);
    let integrand = |h: f64| -> f64 {
        let up = u.eval1(x0 + h);
        let um = u.eval1(x0 - h);
        if kernel.is_translation_invariant() {
            (2.0 * ux - up - um) * kernel.eval1(x0, x0 + h)
        } else {
            (ux - up) * kernel.eval1(x0, x0 + h) + (ux - um) * kernel.eval1(x0, x0 - h)
        }
    };

    // Near field in v = h^(2-2s), where F(h)·h^(2s-1) stays bounded at the center.
    // Below h0 the power law h^(1-2s) is assumed, which is constant in v.
    let q = 2.0 - 2.0 * s;
    let near_f = |v: f64| {
        let h = v.max(0.0).powf(1.0 / q).max(h0);
        integrand(h) * h.powf(2.0 * s - 1.0) / q
    };
    let v_breaks: Vec<f64> = dists
        .iter()
        .copied()
        .filter(|&d| d > h0 && d < rho)
        .map(|d| d.powf(q))
        .collect();
    let local = Quadrature {
        rel_tol: quad.rel_tol.max(1e-10),
        ..*quad
    };
    let near = local.integrate_with_breaks(&near_f, 0.0, rho.powf(q), &v_breaks)?.scaled(2.0);

    // Far field up to T.
    let far_breaks: Vec<f64> = dists.iter().copied().filter(|&d| d > rho && d < t_far).collect();
    let far = quad.integrate_geometric(&integrand, rho, t_far, &far_breaks)?.scaled(2.0);

    // Beyond T. With u supported inside B_T(x) only the u(x) part survives;
    // otherwise both parts are dropped and bounded.
    let two_s = 2.0 * s;
    let envelope = kernel.lambda * kernel.factor();
    let shell = 2.0 * t_far.powf(-two_s) / two_s;
    let (beyond, remainder_bound) = if u.supported_within(x, t_far) {
        match kernel.family {
            KernelFamily::Fractional => {
                let right = kernel.interval_integral(x0, x0 + t_far, f64::INFINITY, quad)?;
                let left = kernel.interval_integral(x0, f64::NEG_INFINITY, x0 - t_far, quad)?;
                ((right + left).scaled(2.0 * ux), 0.0)
            }
            _ => {
                // Ellipticity brackets the kernel mass between envelope/Λ² and envelope.
                let lo = envelope / (kernel.lambda * kernel.lambda) * shell;
                let hi = envelope * shell;
                let mid = Estimate {
                    value: 0.5 * (lo + hi),
                    error: 0.0,
                };
                (mid.scaled(2.0 * ux), (hi - lo) * ux.abs())
            }
        }
    } else {
        let far_u = match u.growth {
            Growth::Bounded(m) => m * shell,
            Growth::Power { coeff, exponent } => {
                let p = exponent.max(0.0);
                let kappa = 1.0 + (1.0 + x0.abs()) / t_far;
                2.0 * coeff * kappa.powf(p) * t_far.powf(p - two_s) / (two_s - p)
            }
        };
        (Estimate::default(), 2.0 * envelope * (ux.abs() * shell + far_u))
    };

    let total = near + far + beyond;
    Ok(OperatorValue {
        value: total.value,
        error: total.error + remainder_bound,
        remainder_bound,
    })
}

/// `w1 = χ_{B_r(x2)}`.
pub fn barrier_w1(config: &DisconnectedConfig) -> PointFunction {
    let ball = config.ball2(1.0);
    let b = ball.clone();
    let f = PointFunction::new(move |x| if b.contains(x) { 1.0 } else { 0.0 }, Growth::Bounded(1.0))
        .with_support(ball);
    if config.n == 1 {
        let (c, r) = (config.x2[0], config.r);
        f.with_breaks(vec![c - r, c + r], Regularity::Discontinuous)
    } else {
        f
    }
}

/// Quintic smoothstep profile: 1 on `[0, 1/2]`, 0 from 1 on, C² in between.
fn cutoff_profile(rho: f64) -> f64 {
    let t = (2.0 * rho - 1.0).clamp(0.0, 1.0);
    1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

/// Radial C² cutoff around `x1`: 1 on `B_{r/2}(x1)`, 0 outside `B_r(x1)`.
pub fn barrier_w2(config: &DisconnectedConfig) -> PointFunction {
    let center = config.x1.clone();
    let r = config.r;
    let support = config.ball1(1.0);
    let f = PointFunction::new(move |x| cutoff_profile(distance(x, &center) / r), Growth::Bounded(1.0))
        .with_support(support);
    if config.n == 1 {
        let c = config.x1[0];
        f.with_breaks(vec![c - r, c - 0.5 * r, c + 0.5 * r, c + r], Regularity::C2Joins)
    } else {
        f
    }
}

/// Recorded second-derivative bound of `w2`: `W2_HESSIAN_COEFF / r²`.
pub fn w2_hessian_bound(r: f64) -> f64 {
    W2_HESSIAN_COEFF / (r * r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailResult {
    pub value: f64,
    pub remainder_bound: f64,
    pub truncation_radius: f64,
    pub quadrature_error: f64,
}

/// `Tail(u; x0, r) = r^{2s} ∫_{|y-x0|>r} |u(y)| |y-x0|^{-n-2s} dy`, truncated at `T`.
pub fn tail(u: &PointFunction, x0: &[f64], r: f64, s: f64, t_far: f64, quad: &Quadrature) -> Result<TailResult> {
    let c = match x0 {
        [c] => *c,
        _ => return Err(LabError::UnsupportedDimension(x0.len())),
    };
    if !(s > 0.0 && s < 1.0) {
        return Err(LabError::InvalidParameter(format!("order s must lie in (0, 1), got {s}")));
    }
    if !(r > 0.0) || !(t_far > r) {
        return Err(LabError::InvalidParameter(format!(
            "need 0 < r < T, got r = {r}, T = {t_far}"
        )));
    }
    u.require_tail_integrable(s)?;
    let two_s = 2.0 * s;
    let weight = r.powf(two_s);
    let f = |rho: f64| (u.eval1(c + rho).abs() + u.eval1(c - rho).abs()) * rho.powf(-1.0 - two_s);
    let breaks: Vec<f64> = u.breaks.iter().map(|b| (b - c).abs()).collect();
    let est = quad.integrate_geometric(&f, r, t_far, &breaks)?;

    let remainder_bound = if u.supported_within(x0, t_far) {
        0.0
    } else {
        match u.growth {
            Growth::Bounded(m) => weight * m * 2.0 * t_far.powf(-two_s) / two_s,
            Growth::Power { coeff, exponent } => {
                let p = exponent.max(0.0);
                let kappa = 1.0 + (1.0 + c.abs()) / t_far;
                weight * 2.0 * coeff * kappa.powf(p) * t_far.powf(p - two_s) / (two_s - p)
            }
        }
    };
    Ok(TailResult {
        value: weight * est.value,
        remainder_bound,
        truncation_radius: t_far,
        quadrature_error: weight * est.error,
    })
}
