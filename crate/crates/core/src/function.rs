//! Point-evaluable functions on R^n with the metadata quadrature needs:
//! a growth class for tail bounds, an optional bounding support ball and
//! the 1-D locations where the function is not smooth.

use std::fmt;
use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::geometry::{distance, Ball};

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Growth {
    /// `|u| <= sup` everywhere.
    Bounded(f64),
    /// `|u(y)| <= coeff·(1 + |y|)^exponent`; tail-integrable only when `exponent < 2s`.
    Power { coeff: f64, exponent: f64 },
}

impl Growth {
    pub fn bound_at(&self, radius: f64) -> f64 {
        match *self {
            Growth::Bounded(m) => m,
            Growth::Power { coeff, exponent } => coeff * (1.0 + radius).powf(exponent),
        }
    }

    /// Growth exponent of the bound (0 for bounded functions).
    pub fn exponent(&self) -> f64 {
        match *self {
            Growth::Bounded(_) => 0.0,
            Growth::Power { exponent, .. } => exponent.max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Regularity {
    Smooth,
    /// C² everywhere, smooth away from the listed breakpoints.
    C2Joins,
    /// Jumps (or kinks) at the listed breakpoints.
    Discontinuous,
}

#[derive(Clone)]
pub struct PointFunction {
    f: ScalarFn,
    pub growth: Growth,
    pub support: Option<Ball>,
    pub breaks: Vec<f64>,
    pub regularity: Regularity,
}

impl fmt::Debug for PointFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointFunction")
            .field("growth", &self.growth)
            .field("support", &self.support)
            .field("breaks", &self.breaks)
            .field("regularity", &self.regularity)
            .finish()
    }
}

impl PointFunction {
    pub fn new<F>(f: F, growth: Growth) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        PointFunction {
            f: Arc::new(f),
            growth,
            support: None,
            breaks: Vec::new(),
            regularity: Regularity::Smooth,
        }
    }

    /// One-dimensional convenience constructor.
    pub fn new1<F>(f: F, growth: Growth) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        PointFunction::new(move |x: &[f64]| f(x[0]), growth)
    }

    pub fn constant(c: f64) -> Self {
        PointFunction::new(move |_| c, Growth::Bounded(c.abs()))
    }

    /// `value · χ_(a, b)` on the real line.
    pub fn indicator(a: f64, b: f64, value: f64) -> Self {
        let ball = Ball {
            center: vec![0.5 * (a + b)],
            radius: 0.5 * (b - a),
        };
        PointFunction::new1(move |x| if x > a && x < b { value } else { 0.0 }, Growth::Bounded(value.abs()))
            .with_support(ball)
            .with_breaks(vec![a, b], Regularity::Discontinuous)
    }

    pub fn with_support(mut self, support: Ball) -> Self {
        self.support = Some(support);
        self
    }

    pub fn with_breaks(mut self, mut breaks: Vec<f64>, regularity: Regularity) -> Self {
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        self.breaks = breaks;
        self.regularity = regularity;
        self
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        if let Some(ball) = &self.support {
            if !ball.contains(x) {
                return 0.0;
            }
        }
        (self.f)(x)
    }

    #[inline]
    pub fn eval1(&self, x: f64) -> f64 {
        self.eval(&[x])
    }

    /// Bound on `|u(y)|` valid for every `y` with `|y| <= radius`.
    pub fn bound_within(&self, radius: f64) -> f64 {
        self.growth.bound_at(radius)
    }

    /// True when the support ball lies inside `B_radius(center)`.
    pub fn supported_within(&self, center: &[f64], radius: f64) -> bool {
        match &self.support {
            Some(b) => distance(&b.center, center) + b.radius <= radius,
            None => false,
        }
    }

    /// Fails unless `|u|` is integrable against `|y|^(-n-2s)` at infinity.
    pub fn require_tail_integrable(&self, s: f64) -> Result<()> {
        if self.support.is_some() {
            return Ok(());
        }
        match self.growth {
            Growth::Bounded(_) => Ok(()),
            Growth::Power { exponent, .. } if exponent < 2.0 * s => Ok(()),
            Growth::Power { exponent, .. } => Err(LabError::NonIntegrableTail(format!(
                "growth exponent {exponent} >= 2s = {}",
                2.0 * s
            ))),
        }
    }

    /// `a·u + b·v`.
    pub fn combine(a: f64, u: &PointFunction, b: f64, v: &PointFunction) -> PointFunction {
        let (fu, fv) = (u.clone(), v.clone());
        let growth = match (u.growth, v.growth) {
            (Growth::Bounded(m1), Growth::Bounded(m2)) => Growth::Bounded(a.abs() * m1 + b.abs() * m2),
            (g1, g2) => {
                let p = g1.exponent().max(g2.exponent());
                let c = a.abs() * g1.bound_at(0.0) + b.abs() * g2.bound_at(0.0);
                Growth::Power { coeff: c, exponent: p }
            }
        };
        let support = match (&u.support, &v.support) {
            (Some(s1), Some(s2)) => {
                let radius = s1.radius.max(distance(&s1.center, &s2.center) + s2.radius);
                Some(Ball {
                    center: s1.center.clone(),
                    radius,
                })
            }
            _ => None,
        };
        let mut breaks = u.breaks.clone();
        breaks.extend_from_slice(&v.breaks);
        let regularity = u.regularity.max(v.regularity);
        let mut out = PointFunction::new(move |x| a * fu.eval(x) + b * fv.eval(x), growth)
            .with_breaks(breaks, regularity);
        out.support = support;
        out
    }

    pub fn scale(&self, c: f64) -> PointFunction {
        PointFunction::combine(c, self, 0.0, &PointFunction::constant(0.0))
    }

    /// `u_- = max(-u, 0)`.
    pub fn negative_part(&self) -> PointFunction {
        let u = self.clone();
        let mut out = PointFunction::new(move |x| (-u.eval(x)).max(0.0), self.growth)
            .with_breaks(self.breaks.clone(), self.regularity.max(Regularity::Discontinuous));
        out.support = self.support.clone();
        out
    }

    /// `|u|`.
    pub fn abs(&self) -> PointFunction {
        let u = self.clone();
        let mut out = PointFunction::new(move |x| u.eval(x).abs(), self.growth)
            .with_breaks(self.breaks.clone(), self.regularity.max(Regularity::Discontinuous));
        out.support = self.support.clone();
        out
    }

    /// Supremum bound used for remainder estimates beyond `radius` around `center`.
    pub fn bound_beyond(&self, center: &[f64], radius: f64) -> f64 {
        if self.supported_within(center, radius) {
            return 0.0;
        }
        match self.growth {
            Growth::Bounded(m) => m,
            Growth::Power { .. } => f64::INFINITY,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_values_and_support() {
        let w = PointFunction::indicator(1.0, 3.0, 1.0);
        assert_eq!(w.eval1(2.0), 1.0);
        assert_eq!(w.eval1(0.0), 0.0);
        assert_eq!(w.eval1(3.0), 0.0);
        assert!(w.supported_within(&[0.0], 3.0));
        assert!(!w.supported_within(&[0.0], 2.9));
    }

    #[test]
    fn combination_is_pointwise() {
        let u = PointFunction::new1(|x| x * x, Growth::Power { coeff: 1.0, exponent: 2.0 });
        let v = PointFunction::constant(3.0);
        let w = PointFunction::combine(2.0, &u, -1.0, &v);
        assert_eq!(w.eval1(2.0), 5.0);
        assert!(w.require_tail_integrable(0.9).is_err());
        let n = w.negative_part();
        assert_eq!(n.eval1(0.0), 3.0);
        assert_eq!(n.eval1(2.0), 0.0);
    }

    #[test]
    fn tail_integrability() {
        let u = PointFunction::new1(|x: f64| x.abs().sqrt(), Growth::Power { coeff: 1.0, exponent: 0.5 });
        assert!(u.require_tail_integrable(0.3).is_ok());
        assert!(matches!(u.require_tail_integrable(0.2), Err(LabError::NonIntegrableTail(_))));
    }
}
