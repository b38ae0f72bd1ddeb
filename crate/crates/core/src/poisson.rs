//! Poisson kernel of the fractional Laplacian on a ball and the extension
//! `u(x) = ∫_{|z-c|>r} g(z) P(x, z) dz` of exterior data.

use serde::Serialize;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{LabError, Result};
use crate::function::{Growth, PointFunction};
use crate::geometry::distance;
use crate::operator::FAR_TRUNCATION_FACTOR;
use crate::quadrature::{Estimate, Quadrature};

/// `c_{n,s} = Γ(n/2) π^{-n/2-1} sin(sπ)`.
pub fn poisson_constant(n: usize, s: f64) -> Result<f64> {
    if n == 0 {
        return Err(LabError::UnsupportedDimension(n));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(LabError::InvalidParameter(format!("order s must lie in (0, 1), got {s}")));
    }
    let half = n as f64 / 2.0;
    Ok(gamma(half) * PI.powf(-half - 1.0) * (s * PI).sin())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonKernelBall {
    pub n: usize,
    pub s: f64,
    pub r: f64,
    pub center: Vec<f64>,
    constant: f64,
}

impl PoissonKernelBall {
    pub fn new(n: usize, s: f64, r: f64, center: Vec<f64>) -> Result<Self> {
        let constant = poisson_constant(n, s)?;
        if !(r > 0.0 && r.is_finite()) {
            return Err(LabError::InvalidParameter(format!("radius must be positive, got {r}")));
        }
        if center.len() != n {
            return Err(LabError::InvalidParameter(format!(
                "center has {} coordinates, expected {n}",
                center.len()
            )));
        }
        Ok(PoissonKernelBall { n, s, r, center, constant })
    }

    /// Ball `B_r(0)` on the line.
    pub fn unit_interval(s: f64, r: f64) -> Result<Self> {
        PoissonKernelBall::new(1, s, r, vec![0.0])
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    fn check_dims(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.n {
            return Err(LabError::UnsupportedDimension(p.len()));
        }
        Ok(())
    }

    /// `(r² - |x-c|²)^s`, failing unless `x` is strictly inside.
    fn interior_weight(&self, x: &[f64]) -> Result<f64> {
        self.check_dims(x)?;
        let dx = distance(x, &self.center);
        if dx >= self.r {
            return Err(LabError::DomainViolation(format!(
                "x at distance {dx} from the center is not inside the ball of radius {}",
                self.r
            )));
        }
        Ok((self.r * self.r - dx * dx).powf(self.s))
    }
}

pub fn poisson_eval(pk: &PoissonKernelBall, x: &[f64], y: &[f64]) -> Result<f64> {
    let inner = pk.interior_weight(x)?;
    pk.check_dims(y)?;
    let dy = distance(y, &pk.center);
    if dy <= pk.r {
        return Err(LabError::DomainViolation(format!(
            "y at distance {dy} from the center is not outside the closed ball of radius {}",
            pk.r
        )));
    }
    let outer = (dy * dy - pk.r * pk.r).powf(pk.s);
    Ok(pk.constant * inner / (outer * distance(x, y).powi(pk.n as i32)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extension {
    pub value: f64,
    pub quadrature_error: f64,
    pub remainder_bound: f64,
    pub truncation_radius: f64,
}

/// One side of the exterior, parametrized by `t = |z - c| - r > 0`.
/// `(0, r)` uses `t = r·v^(1/(1-s))`, which turns `t^(-s) dt` into a constant
/// multiple of `dv`; `(r, far)` uses geometric panels.
fn exterior_side(
    pk: &PoissonKernelBall,
    g: &PointFunction,
    x: f64,
    sign: f64,
    far: Option<f64>,
    quad: &Quadrature,
) -> Result<Estimate> {
    let (c, r, s) = (pk.center[0], pk.r, pk.s);
    let weight = pk.constant * (r * r - (x - c) * (x - c)).powf(s);
    let z_of = |t: f64| c + sign * (r + t);
    let density = |t: f64| {
        let z = z_of(t);
        let gz = g.eval1(z);
        if gz == 0.0 {
            return 0.0;
        }
        gz / ((2.0 * r + t).powf(s) * (z - x).abs())
    };
    let t_breaks: Vec<f64> = g
        .breaks
        .iter()
        .map(|b| sign * (b - c) - r)
        .filter(|t| *t > 0.0)
        .collect();

    let q = 1.0 - s;
    let near = |v: f64| {
        let t = r * v.powf(1.0 / q);
        density(t) * r.powf(q) / q
    };
    let v_breaks: Vec<f64> = t_breaks
        .iter()
        .filter(|t| **t < r)
        .map(|t| (t / r).powf(q))
        .collect();
    let near_est = quad.integrate_with_breaks(&near, 0.0, 1.0, &v_breaks)?;

    let outer = |t: f64| density(t) * t.powf(-s);
    let far_breaks: Vec<f64> = t_breaks.iter().copied().filter(|t| *t > r).collect();
    let far_est = match far {
        Some(t_max) => quad.integrate_geometric(&outer, r, t_max, &far_breaks)?,
        None => quad.integrate_to_infinity(&outer, r, r, 2.0 * s, &far_breaks)?,
    };
    Ok((near_est + far_est).scaled(weight))
}

/// `∫_{|z-c|>r} P(x, z) dz` without truncation; equals 1 exactly.
pub fn poisson_mass(pk: &PoissonKernelBall, x: f64, quad: &Quadrature) -> Result<Estimate> {
    if pk.n != 1 {
        return Err(LabError::UnsupportedDimension(pk.n));
    }
    pk.interior_weight(&[x])?;
    let one = PointFunction::constant(1.0);
    Ok(exterior_side(pk, &one, x, 1.0, None, quad)? + exterior_side(pk, &one, x, -1.0, None, quad)?)
}

/// Extension of `g` at `x`, truncated at `|z - c| = 10⁴·r`.
pub fn poisson_extend(pk: &PoissonKernelBall, g: &PointFunction, x: f64, quad: &Quadrature) -> Result<Extension> {
    poisson_extend_truncated(pk, g, x, FAR_TRUNCATION_FACTOR * pk.r, quad)
}

pub fn poisson_extend_truncated(
    pk: &PoissonKernelBall,
    g: &PointFunction,
    x: f64,
    truncation_radius: f64,
    quad: &Quadrature,
) -> Result<Extension> {
    if pk.n != 1 {
        return Err(LabError::UnsupportedDimension(pk.n));
    }
    if !(truncation_radius > 2.0 * pk.r) {
        return Err(LabError::InvalidParameter(format!(
            "truncation radius {truncation_radius} must exceed 2r = {}",
            2.0 * pk.r
        )));
    }
    pk.interior_weight(&[x])?;
    g.require_tail_integrable(pk.s)?;
    let t_max = truncation_radius - pk.r;
    let est = exterior_side(pk, g, x, 1.0, Some(t_max), quad)? + exterior_side(pk, g, x, -1.0, Some(t_max), quad)?;

    let c = pk.center[0];
    let remainder_bound = if g.supported_within(&pk.center, truncation_radius) {
        0.0
    } else {
        // For |z-c| = ρ >= T: P <= weight / ((ρ² - r²)^s (ρ - |x-c|)) <= κ·weight·ρ^(-1-2s).
        let (r, s, big_t) = (pk.r, pk.s, truncation_radius);
        let weight = pk.constant * (r * r - (x - c) * (x - c)).powf(s);
        let kappa = (1.0 - (r / big_t).powi(2)).powf(-s) / (1.0 - r / big_t);
        let two_s = 2.0 * s;
        match g.growth {
            Growth::Bounded(m) => 2.0 * kappa * weight * m * big_t.powf(-two_s) / two_s,
            Growth::Power { coeff, exponent } => {
                let p = exponent.max(0.0);
                let grow = (1.0 + (1.0 + c.abs()) / big_t).powf(p);
                2.0 * kappa * weight * coeff * grow * big_t.powf(p - two_s) / (two_s - p)
            }
        }
    };
    Ok(Extension {
        value: est.value,
        quadrature_error: est.error,
        remainder_bound,
        truncation_radius,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoissonBounds {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Extremes of `P(x, z)·|x - z|^(n+2s) / r^(2s)` over `x ∈ B_{r/2}`, `z ∉ B_{2r}`.
pub fn check_poisson_bounds(pk: &PoissonKernelBall, xs: &[Vec<f64>], zs: &[Vec<f64>]) -> Result<PoissonBounds> {
    for x in xs {
        pk.check_dims(x)?;
        let d = distance(x, &pk.center);
        if d >= 0.5 * pk.r {
            return Err(LabError::DomainViolation(format!(
                "sample x at distance {d} is outside B_(r/2), r/2 = {}",
                0.5 * pk.r
            )));
        }
    }
    for z in zs {
        pk.check_dims(z)?;
        let d = distance(z, &pk.center);
        if d < 2.0 * pk.r {
            return Err(LabError::DomainViolation(format!(
                "sample z at distance {d} is inside B_(2r), 2r = {}",
                2.0 * pk.r
            )));
        }
    }
    if xs.is_empty() || zs.is_empty() {
        return Err(LabError::EmptySample("Poisson bound samples".into()));
    }
    let scale = pk.r.powf(2.0 * pk.s);
    let order = pk.n as f64 + 2.0 * pk.s;
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio: f64 = 0.0;
    for x in xs {
        for z in zs {
            let ratio = poisson_eval(pk, x, z)? * distance(x, z).powf(order) / scale;
            min_ratio = min_ratio.min(ratio);
            max_ratio = max_ratio.max(ratio);
        }
    }
    Ok(PoissonBounds {
        min_ratio,
        max_ratio,
        samples: xs.len() * zs.len(),
        pass: min_ratio > 0.0 && max_ratio.is_finite(),
    })
}

/// `m` interior points across `B_{r/2}` and `m` exterior points with
/// `2r <= |z - c| <= outer·r`, alternating sides.
pub fn bounds_sample_grid(pk: &PoissonKernelBall, m: usize, outer: f64) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    if pk.n != 1 {
        return Err(LabError::UnsupportedDimension(pk.n));
    }
    if m < 2 || !(outer > 2.0) {
        return Err(LabError::InvalidParameter(format!(
            "need at least 2 samples and outer radius factor > 2, got {m} and {outer}"
        )));
    }
    let (c, r) = (pk.center[0], pk.r);
    let xs = (0..m)
        .map(|i| vec![c - 0.5 * r + r * (i as f64 + 0.5) / m as f64])
        .collect();
    let zs = (0..m)
        .map(|j| {
            let d = r * (2.0 + (outer - 2.0) * (j / 2) as f64 / ((m - 1) / 2).max(1) as f64);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            vec![c + sign * d]
        })
        .collect();
    Ok((xs, zs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_closed_forms() {
        assert!((poisson_constant(1, 0.5).unwrap() - 1.0 / PI).abs() < 1e-12);
        assert!((poisson_constant(2, 0.5).unwrap() - 1.0 / (PI * PI)).abs() < 1e-12);
        assert!(poisson_constant(1, 1e-9).unwrap() < 1e-8);
        assert!(poisson_constant(1, 1.0).is_err());
    }

    #[test]
    fn kernel_spot_value_and_symmetry() {
        let pk = PoissonKernelBall::unit_interval(0.5, 1.0).unwrap();
        let v = poisson_eval(&pk, &[0.0], &[2f64.sqrt()]).unwrap();
        assert!((v - 0.2250791).abs() < 1e-7);
        let w = poisson_eval(&pk, &[0.0], &[-(2f64.sqrt())]).unwrap();
        assert_eq!(v, w);
        assert!(matches!(poisson_eval(&pk, &[1.0], &[2.0]), Err(LabError::DomainViolation(_))));
        assert!(matches!(poisson_eval(&pk, &[0.0], &[1.0]), Err(LabError::DomainViolation(_))));
    }

    #[test]
    fn decay_rate() {
        let pk = PoissonKernelBall::unit_interval(0.3, 1.0).unwrap();
        let a = poisson_eval(&pk, &[0.2], &[1e3]).unwrap();
        let b = poisson_eval(&pk, &[0.2], &[1e4]).unwrap();
        let rate = (a / b).log10();
        assert!((rate - 1.6).abs() < 1e-3, "{rate}");
    }

    #[test]
    fn mass_is_one() {
        let quad = Quadrature::new(1e-12);
        for s in [0.25, 0.5, 0.75] {
            let pk = PoissonKernelBall::unit_interval(s, 1.0).unwrap();
            for x in [0.0, 0.5, -0.5] {
                let m = poisson_mass(&pk, x, &quad).unwrap();
                assert!((m.value - 1.0).abs() < 1e-9, "s={s} x={x}: {m:?}");
            }
        }
    }

    #[test]
    fn indicator_closed_form() {
        let quad = Quadrature::new(1e-12);
        let pk = PoissonKernelBall::unit_interval(0.5, 1.0).unwrap();
        let g = PointFunction::indicator(1.0, 3.0, 1.0);
        let u = poisson_extend(&pk, &g, 0.0, &quad).unwrap();
        assert!((u.value - (1.0f64 / 3.0).acos() / PI).abs() < 1e-10, "{u:?}");
        assert_eq!(u.remainder_bound, 0.0);
    }

    #[test]
    fn constant_data_brackets_one() {
        let quad = Quadrature::new(1e-12);
        for s in [0.25, 0.6] {
            let pk = PoissonKernelBall::unit_interval(s, 1.0).unwrap();
            let u = poisson_extend(&pk, &PointFunction::constant(1.0), 0.3, &quad).unwrap();
            assert!(u.value < 1.0 && 1.0 <= u.value + u.remainder_bound, "{u:?}");
        }
    }

    #[test]
    fn bounds_window_and_scaling() {
        let pk = PoissonKernelBall::unit_interval(0.5, 1.0).unwrap();
        let (xs, zs) = bounds_sample_grid(&pk, 50, 10.0).unwrap();
        let b = check_poisson_bounds(&pk, &xs, &zs).unwrap();
        assert!(b.pass && b.max_ratio / b.min_ratio < 100.0, "{b:?}");
        let pk2 = PoissonKernelBall::unit_interval(0.5, 2.0).unwrap();
        let (xs2, zs2) = bounds_sample_grid(&pk2, 50, 10.0).unwrap();
        let b2 = check_poisson_bounds(&pk2, &xs2, &zs2).unwrap();
        assert!((b.min_ratio - b2.min_ratio).abs() < 1e-12 && (b.max_ratio - b2.max_ratio).abs() < 1e-12);
        assert!(check_poisson_bounds(&pk, &[vec![0.6]], &zs).is_err());
        assert!(check_poisson_bounds(&pk, &xs, &[vec![1.5]]).is_err());
    }
}
