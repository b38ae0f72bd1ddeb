//! Globally adaptive Gauss–Kronrod (G7/K15) quadrature.
//!
//! All panels of an integral live in one priority queue ordered by their error
//! estimate; the worst panel is bisected until the summed error meets
//! `max(abs_tol, rel_tol * |value|)`. Integrands with known kinks or jumps
//! should pass them as breakpoints so that no panel straddles a discontinuity.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{LabError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Integral value with an (absolute) error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

impl std::ops::AddAssign for Estimate {
    fn add_assign(&mut self, rhs: Estimate) {
        self.value += rhs.value;
        self.error += rhs.error;
    }
}

impl Estimate {
    pub fn scaled(self, c: f64) -> Estimate {
        Estimate {
            value: c * self.value,
            error: c.abs() * self.error,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    splittable: bool,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // Non-splittable panels sink to the bottom of the heap.
        (self.splittable, self.error)
            .partial_cmp(&(other.splittable, other.error))
            .unwrap_or(Ordering::Equal)
    }
}

fn gk15<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = fc.abs() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let mut error = ((kronrod - gauss) * half).abs();
    let roundoff = 50.0 * f64::EPSILON * resabs * half.abs();
    if error < roundoff {
        error = roundoff;
    }
    let splittable = half.abs() > 64.0 * f64::EPSILON * center.abs().max(f64::MIN_POSITIVE)
        && error > roundoff;
    Panel {
        a,
        b,
        value,
        error,
        splittable,
    }
}

/// Adaptive quadrature driver with absolute and relative tolerances.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_panels: 20_000,
        }
    }
}

impl Quadrature {
    pub fn new(abs_tol: f64) -> Self {
        Quadrature {
            abs_tol,
            ..Default::default()
        }
    }

    pub fn integrate<F: Fn(f64) -> f64 + ?Sized>(&self, f: &F, a: f64, b: f64) -> Result<Estimate> {
        self.integrate_with_breaks(f, a, b, &[])
    }

    /// Integrate over `[a, b]`, never letting a panel straddle a breakpoint.
    pub fn integrate_with_breaks<F: Fn(f64) -> f64 + ?Sized>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        breaks: &[f64],
    ) -> Result<Estimate> {
        if a == b {
            return Ok(Estimate::default());
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let mut nodes: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
        nodes.push(lo);
        nodes.extend(breaks.iter().copied().filter(|&p| p > lo && p < hi));
        nodes.push(hi);
        nodes.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
        nodes.dedup();
        let est = self.run(f, &nodes)?;
        Ok(est.scaled(sign))
    }

    /// Integrate over `[a, b]` with `0 < a < b` on dyadic panels `a·2^k`,
    /// for integrands that decay like a power of the variable.
    pub fn integrate_geometric<F: Fn(f64) -> f64 + ?Sized>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        breaks: &[f64],
    ) -> Result<Estimate> {
        debug_assert!(a > 0.0);
        let mut pts: Vec<f64> = breaks.to_vec();
        let mut p = 2.0 * a;
        while p < b {
            pts.push(p);
            p *= 2.0;
        }
        self.integrate_with_breaks(f, a, b, &pts)
    }

    /// Integrate `f` over `[a, ∞)` for integrands decaying like `y^(-1-decay)`.
    ///
    /// Uses `y = a + scale·(τ^(-1/decay) - 1)`, which maps the half line onto
    /// `τ ∈ (0, 1]` and turns the algebraic decay into a bounded integrand.
    pub fn integrate_to_infinity<F: Fn(f64) -> f64 + ?Sized>(
        &self,
        f: &F,
        a: f64,
        scale: f64,
        decay: f64,
        breaks: &[f64],
    ) -> Result<Estimate> {
        if !(decay > 0.0) || !(scale > 0.0) {
            return Err(LabError::InvalidParameter(format!(
                "half-line quadrature needs positive decay and scale (got {decay}, {scale})"
            )));
        }
        let inv = 1.0 / decay;
        let g = |tau: f64| {
            if tau <= 0.0 {
                return 0.0;
            }
            let t = tau.powf(-inv);
            let y = a + scale * (t - 1.0);
            let jac = scale * inv * t / tau;
            let v = f(y) * jac;
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        let mut taus: Vec<f64> = breaks
            .iter()
            .filter(|&&b| b > a)
            .map(|&b| (1.0 + (b - a) / scale).powf(-decay))
            .collect();
        // Resolve the region near `a`, where the integrand usually peaks.
        for k in 1..=6 {
            taus.push((1.0 + f64::from(1u32 << k) / 64.0).powf(-decay));
        }
        self.integrate_with_breaks(&g, 0.0, 1.0, &taus)
    }

    fn run<F: Fn(f64) -> f64 + ?Sized>(&self, f: &F, nodes: &[f64]) -> Result<Estimate> {
        let mut heap = BinaryHeap::with_capacity(2 * nodes.len() + 64);
        let mut value = 0.0;
        let mut error = 0.0;
        for w in nodes.windows(2) {
            let p = gk15(f, w[0], w[1]);
            value += p.value;
            error += p.error;
            heap.push(p);
        }
        let mut panels = heap.len();
        loop {
            let tol = self.abs_tol.max(self.rel_tol * value.abs());
            if error <= tol {
                break;
            }
            let worst = match heap.peek() {
                Some(p) if p.splittable => heap.pop().expect("peeked"),
                _ => break,
            };
            if panels >= self.max_panels {
                return Err(LabError::QuadratureFailure {
                    a: nodes[0],
                    b: nodes[nodes.len() - 1],
                    error,
                    tolerance: tol,
                });
            }
            let mid = 0.5 * (worst.a + worst.b);
            let left = gk15(f, worst.a, mid);
            let right = gk15(f, mid, worst.b);
            value += left.value + right.value - worst.value;
            error += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
            panels += 1;
        }
        // Re-sum to shed drift accumulated by the incremental updates.
        let (v, e) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        if !v.is_finite() {
            return Err(LabError::QuadratureFailure {
                a: nodes[0],
                b: nodes[nodes.len() - 1],
                error: f64::INFINITY,
                tolerance: self.abs_tol,
            });
        }
        Ok(Estimate { value: v, error: e })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = Quadrature::default();
        let est = q.integrate(&|x: f64| 3.0 * x * x + 1.0, 0.0, 2.0).unwrap();
        assert!((est.value - 10.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let q = Quadrature::default();
        let est = q.integrate(&|x: f64| x.exp(), 1.0, 0.0).unwrap();
        assert!((est.value + (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let q = Quadrature::new(1e-10);
        let est = q.integrate(&|x: f64| x.powf(-0.5), 0.0, 1.0).unwrap();
        assert!((est.value - 2.0).abs() < 1e-8, "{est:?}");
    }

    #[test]
    fn jump_with_breakpoint() {
        let q = Quadrature::default();
        let f = |x: f64| if x < 0.3 { 1.0 } else { 5.0 };
        let est = q.integrate_with_breaks(&f, 0.0, 1.0, &[0.3]).unwrap();
        assert!((est.value - (0.3 + 3.5)).abs() < 1e-13);
    }

    #[test]
    fn half_line_power_decay() {
        let q = Quadrature::new(1e-12);
        for &p in &[0.5, 1.0, 1.5, 1.9] {
            let f = |y: f64| y.powf(-1.0 - p);
            let est = q.integrate_to_infinity(&f, 2.0, 2.0, p, &[]).unwrap();
            let exact = 2f64.powf(-p) / p;
            assert!((est.value - exact).abs() < 1e-10, "p={p}: {} vs {exact}", est.value);
        }
    }

    #[test]
    fn geometric_panels() {
        let q = Quadrature::new(1e-12);
        let f = |h: f64| h.powf(-1.5);
        let est = q.integrate_geometric(&f, 0.5, 1e4, &[]).unwrap();
        let exact = 2.0 * (0.5f64.powf(-0.5) - 1e4f64.powf(-0.5));
        assert!((est.value - exact).abs() < 1e-10);
    }
}
