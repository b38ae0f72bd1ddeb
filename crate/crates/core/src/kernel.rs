//! Symmetric jump kernels `k(x, y)` comparable to `|x - y|^(-n-2s)`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::geometry::distance;
use crate::quadrature::{Estimate, Quadrature};

pub type ProfileFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type PairFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Normalization {
    Plain,
    /// Multiplies the kernel by `1 - s`.
    OneMinusS,
}

#[derive(Clone)]
pub enum KernelFamily {
    /// `|x - y|^(-n-2s)`, without the fractional Laplacian's normalizing constant.
    Fractional,
    /// `k(x, y) = K(x - y)` with an even profile `K`.
    TranslationInvariant(ProfileFn),
    GeneralSymmetric(PairFn),
}

impl fmt::Debug for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl KernelFamily {
    pub fn tag(&self) -> &'static str {
        match self {
            KernelFamily::Fractional => "frac",
            KernelFamily::TranslationInvariant(_) => "ti",
            KernelFamily::GeneralSymmetric(_) => "general",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Kernel {
    pub n: usize,
    pub s: f64,
    pub lambda: f64,
    pub family: KernelFamily,
    pub normalization: Normalization,
    /// Extra positive multiplier, used to check scaling invariances.
    pub amplitude: f64,
    /// User-supplied closures cannot be rebuilt at another order.
    custom: bool,
}

fn check_order(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(LabError::InvalidParameter(format!("order s must lie in (0, 1), got {s}")))
    }
}

impl Kernel {
    fn build(n: usize, s: f64, lambda: f64, family: KernelFamily) -> Result<Self> {
        check_order(s)?;
        let family_tag = family.tag();
        if n == 0 {
            return Err(LabError::InvalidParameter("dimension must be positive".into()));
        }
        if !(lambda >= 1.0) {
            return Err(LabError::InvalidParameter(format!("ellipticity Λ must be >= 1, got {lambda}")));
        }
        Ok(Kernel {
            n,
            s,
            lambda,
            family,
            normalization: Normalization::Plain,
            amplitude: 1.0,
            custom: !matches!(family_tag, "frac"),
        })
    }

    pub fn fractional(n: usize, s: f64) -> Result<Self> {
        Kernel::build(n, s, 1.0, KernelFamily::Fractional)
    }

    pub fn translation_invariant(n: usize, s: f64, lambda: f64, profile: ProfileFn) -> Result<Self> {
        Kernel::build(n, s, lambda, KernelFamily::TranslationInvariant(profile))
    }

    pub fn general(n: usize, s: f64, lambda: f64, k: PairFn) -> Result<Self> {
        Kernel::build(n, s, lambda, KernelFamily::GeneralSymmetric(k))
    }

    /// Built-in translation-invariant example `(1 + cos²|h| / 2)|h|^(-n-2s)`, Λ = 1.5.
    pub fn builtin_translation_invariant(n: usize, s: f64) -> Result<Self> {
        let order = n as f64 + 2.0 * s;
        let profile: ProfileFn = Arc::new(move |h: &[f64]| {
            let r = h.iter().map(|v| v * v).sum::<f64>().sqrt();
            (1.0 + 0.5 * r.cos().powi(2)) * r.powf(-order)
        });
        let mut k = Kernel::translation_invariant(n, s, 1.5, profile)?;
        k.custom = false;
        Ok(k)
    }

    /// Built-in anisotropic example `(1 + sin²(Σ(x_i + y_i)) / 2)|x - y|^(-n-2s)`, Λ = 1.5.
    pub fn builtin_anisotropic(n: usize, s: f64) -> Result<Self> {
        let order = n as f64 + 2.0 * s;
        let k: PairFn = Arc::new(move |x: &[f64], y: &[f64]| {
            let phase: f64 = x.iter().zip(y).map(|(a, b)| a + b).sum();
            (1.0 + 0.5 * phase.sin().powi(2)) * distance(x, y).powf(-order)
        });
        let mut k = Kernel::general(n, s, 1.5, k)?;
        k.custom = false;
        Ok(k)
    }

    /// Kernel selected by its command-line tag (`frac`, `ti`, `general`).
    pub fn from_tag(tag: &str, n: usize, s: f64) -> Result<Self> {
        match tag {
            "frac" | "fractional" => Kernel::fractional(n, s),
            "ti" => Kernel::builtin_translation_invariant(n, s),
            "general" => Kernel::builtin_anisotropic(n, s),
            other => Err(LabError::InvalidParameter(format!("unknown kernel family {other:?}"))),
        }
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        if !(lambda >= 1.0) {
            return Err(LabError::InvalidParameter(format!("ellipticity Λ must be >= 1, got {lambda}")));
        }
        self.lambda = lambda;
        Ok(self)
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.amplitude *= c;
        self
    }

    /// Same family and normalization at another order `s`.
    pub fn with_order(&self, s: f64) -> Result<Self> {
        check_order(s)?;
        if self.custom {
            return Err(LabError::UnsupportedKernel(
                "a user-supplied kernel cannot be rebuilt at another order".into(),
            ));
        }
        let mut k = match &self.family {
            KernelFamily::Fractional => Kernel::fractional(self.n, s)?,
            // Built-in closures capture their exponent, so rebuild those by tag.
            KernelFamily::TranslationInvariant(_) => Kernel::builtin_translation_invariant(self.n, s)?,
            KernelFamily::GeneralSymmetric(_) => Kernel::builtin_anisotropic(self.n, s)?,
        };
        k.lambda = self.lambda;
        k.normalization = self.normalization;
        k.amplitude = self.amplitude;
        Ok(k)
    }

    /// Multiplier in front of the kernel shape: amplitude, times `1 - s` when normalized.
    pub fn factor(&self) -> f64 {
        match self.normalization {
            Normalization::Plain => self.amplitude,
            Normalization::OneMinusS => self.amplitude * (1.0 - self.s),
        }
    }

    pub fn normalization_factor(&self) -> f64 {
        match self.normalization {
            Normalization::Plain => 1.0,
            Normalization::OneMinusS => 1.0 - self.s,
        }
    }

    pub fn is_translation_invariant(&self) -> bool {
        !matches!(self.family, KernelFamily::GeneralSymmetric(_))
    }

    pub fn order(&self) -> f64 {
        self.n as f64 + 2.0 * self.s
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != self.n || y.len() != self.n {
            return Err(LabError::InvalidParameter(format!(
                "kernel of dimension {} evaluated at points of dimension {} and {}",
                self.n,
                x.len(),
                y.len()
            )));
        }
        if x == y {
            return Err(LabError::DiagonalEvaluation);
        }
        Ok(self.eval_unchecked(x, y))
    }

    fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let f = self.factor();
        match &self.family {
            KernelFamily::Fractional => f * distance(x, y).powf(-self.order()),
            KernelFamily::TranslationInvariant(profile) => {
                let h: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                f * profile(&h)
            }
            KernelFamily::GeneralSymmetric(k) => f * k(x, y),
        }
    }

    /// One-dimensional evaluation without the diagonal check.
    #[inline]
    pub fn eval1(&self, x: f64, y: f64) -> f64 {
        let f = self.factor();
        match &self.family {
            KernelFamily::Fractional => f * (x - y).abs().powf(-1.0 - 2.0 * self.s),
            KernelFamily::TranslationInvariant(profile) => f * profile(&[x - y]),
            KernelFamily::GeneralSymmetric(k) => f * k(&[x], &[y]),
        }
    }

    fn require_1d(&self) -> Result<()> {
        if self.n == 1 {
            Ok(())
        } else {
            Err(LabError::UnsupportedDimension(self.n))
        }
    }

    /// `∫_a^b k(x, y) dy` for `x` outside `(a, b)`; either end may be infinite.
    pub fn interval_integral(&self, x: f64, a: f64, b: f64, quad: &Quadrature) -> Result<Estimate> {
        self.require_1d()?;
        if !(a < b) {
            return Ok(Estimate::default());
        }
        if x > a && x < b {
            return Err(LabError::DomainViolation(format!(
                "point {x} lies inside the integration interval ({a}, {b})"
            )));
        }
        // Distances from x to the near and far ends.
        let (near, far) = if x <= a { (a - x, b - x) } else { (x - b, x - a) };
        if near <= 0.0 {
            return Err(LabError::DiagonalEvaluation);
        }
        let p = 2.0 * self.s;
        if let KernelFamily::Fractional = self.family {
            let far_term = if far.is_finite() { far.powf(-p) } else { 0.0 };
            return Ok(Estimate {
                value: self.factor() * (near.powf(-p) - far_term) / p,
                error: 0.0,
            });
        }
        let sign = if x <= a { 1.0 } else { -1.0 };
        let f = |t: f64| self.eval1(x, x + sign * t);
        if far.is_finite() {
            quad.integrate_geometric(&f, near, far, &[])
        } else {
            quad.integrate_to_infinity(&f, near, near, p, &[])
        }
    }

    /// `(∫_a^b k(x, y) dy, ∫_a^b (y - x) k(x, y) dy)` for a finite interval not containing `x`.
    pub fn linear_moments(&self, x: f64, a: f64, b: f64, quad: &Quadrature) -> Result<(f64, f64)> {
        self.require_1d()?;
        if !(a < b) {
            return Ok((0.0, 0.0));
        }
        if x > a && x < b {
            return Err(LabError::DomainViolation(format!(
                "point {x} lies inside the integration interval ({a}, {b})"
            )));
        }
        let (sign, d0, d1) = if x <= a { (1.0, a - x, b - x) } else { (-1.0, x - b, x - a) };
        if !(d0 > 0.0) {
            return Err(LabError::DiagonalEvaluation);
        }
        if let KernelFamily::Fractional = self.family {
            let lr = (d1 / d0).ln();
            let two_s = 2.0 * self.s;
            let m0 = d0.powf(-two_s) * -(-two_s * lr).exp_m1() / two_s;
            let e = 1.0 - two_s;
            let m1 = if e.abs() < 1e-12 {
                lr
            } else {
                d0.powf(e) * (e * lr).exp_m1() / e
            };
            return Ok((self.factor() * m0, sign * self.factor() * m1));
        }
        let f0 = |t: f64| self.eval1(x, x + sign * t);
        let f1 = |t: f64| t * self.eval1(x, x + sign * t);
        let m0 = quad.integrate_geometric(&f0, d0, d1, &[])?.value;
        let m1 = quad.integrate_geometric(&f1, d0, d1, &[])?.value;
        Ok((m0, sign * m1))
    }

    /// `∫_{|t|<δ} t² k(x, x + t) dt`, the weight of the second difference of a smooth function.
    pub fn second_moment(&self, x: f64, delta: f64, quad: &Quadrature) -> Result<Estimate> {
        self.require_1d()?;
        let q = 2.0 - 2.0 * self.s;
        if let KernelFamily::Fractional = self.family {
            return Ok(Estimate {
                value: self.factor() * 2.0 * delta.powf(q) / q,
                error: 0.0,
            });
        }
        // With v = t^q the integrand t^(1-2s)·(k t^(1+2s)) becomes bounded.
        let order = 1.0 + 2.0 * self.s;
        let g = |v: f64| {
            if v <= 0.0 {
                return 0.0;
            }
            // The amplitude k·t^(1+2s) is bounded; freeze it below a tiny offset.
            let t = v.powf(1.0 / q).max(1e-9 * (1.0 + x.abs()));
            let (tp, tm) = ((x + t) - x, x - (x - t));
            let amp = self.eval1(x, x + tp) * tp.powf(order) + self.eval1(x, x - tm) * tm.powf(order);
            amp / q
        };
        quad.integrate(&g, 0.0, delta.powf(q))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticityReport {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub pass: bool,
}

/// Extremes of `k(x, y)|x - y|^(n+2s)` (divided by `1 - s` when normalized) over the samples.
pub fn check_ellipticity(kernel: &Kernel, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<EllipticityReport> {
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = f64::NEG_INFINITY;
    let norm = kernel.normalization_factor();
    for (x, y) in pairs {
        let k = kernel.eval(x, y)?;
        let ratio = k * distance(x, y).powf(kernel.order()) / norm;
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
    }
    let lam = kernel.lambda;
    // Relative slack for rounding in the power evaluations.
    let slack = 1e-12;
    let pass = !pairs.is_empty()
        && min_ratio >= (1.0 / lam) * (1.0 - slack)
        && max_ratio <= lam * (1.0 + slack);
    Ok(EllipticityReport {
        min_ratio,
        max_ratio,
        pass,
    })
}

/// Seeded random pairs `x ≠ y` with coordinates in `[-extent, extent]`.
pub fn sample_pairs(n: usize, count: usize, extent: f64, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-extent..extent)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-extent..extent)).collect();
        if x != y {
            out.push((x, y));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractional_values() {
        let k = Kernel::fractional(1, 0.5).unwrap();
        assert_eq!(k.eval(&[0.0], &[2.0]).unwrap(), 0.25);
        let k = Kernel::fractional(1, 0.75)
            .unwrap()
            .with_normalization(Normalization::OneMinusS);
        assert_eq!(k.eval(&[0.0], &[1.0]).unwrap(), 0.25);
    }

    #[test]
    fn diagonal_is_rejected() {
        let k = Kernel::fractional(2, 0.3).unwrap();
        assert_eq!(k.eval(&[1.0, 2.0], &[1.0, 2.0]), Err(LabError::DiagonalEvaluation));
    }

    #[test]
    fn order_must_be_in_unit_interval() {
        assert!(Kernel::fractional(1, 1.0).is_err());
        assert!(Kernel::fractional(1, 0.0).is_err());
        assert!(Kernel::builtin_anisotropic(1, -0.2).is_err());
    }

    #[test]
    fn symmetry_on_random_pairs() {
        for tag in ["frac", "ti", "general"] {
            for n in [1, 2] {
                let k = Kernel::from_tag(tag, n, 0.4).unwrap();
                for (x, y) in sample_pairs(n, 1000, 5.0, 11) {
                    let a = k.eval(&x, &y).unwrap();
                    let b = k.eval(&y, &x).unwrap();
                    assert!((a - b).abs() <= 1e-14 * a.abs(), "{tag} n={n}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn repeat_evaluation_is_pure() {
        let k = Kernel::builtin_anisotropic(1, 0.3).unwrap();
        let a = k.eval(&[0.3], &[1.7]).unwrap();
        for _ in 0..10 {
            assert_eq!(k.eval(&[0.3], &[1.7]).unwrap(), a);
        }
    }

    #[test]
    fn ellipticity_of_builtins() {
        let pairs = sample_pairs(1, 500, 10.0, 3);
        for tag in ["frac", "ti", "general"] {
            for norm in [Normalization::Plain, Normalization::OneMinusS] {
                let k = Kernel::from_tag(tag, 1, 0.6).unwrap().with_normalization(norm);
                let rep = check_ellipticity(&k, &pairs).unwrap();
                assert!(rep.pass, "{tag} {norm:?}: {rep:?}");
            }
        }
        let k = Kernel::fractional(1, 0.6).unwrap();
        let rep = check_ellipticity(&k, &pairs).unwrap();
        assert!((rep.min_ratio - 1.0).abs() < 1e-12 && (rep.max_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ellipticity_of_scaled_general_kernels() {
        let pairs = sample_pairs(1, 200, 4.0, 5);
        let s = 0.3;
        let make = |c: f64| {
            let k: PairFn = Arc::new(move |x: &[f64], y: &[f64]| c * distance(x, y).powf(-1.0 - 2.0 * s));
            Kernel::general(1, s, 2.0, k).unwrap()
        };
        let rep = check_ellipticity(&make(2.0), &pairs).unwrap();
        assert!(rep.pass);
        assert!((rep.max_ratio - 2.0).abs() < 1e-12 && (rep.min_ratio - 2.0).abs() < 1e-12);
        let rep = check_ellipticity(&make(3.0), &pairs).unwrap();
        assert!(!rep.pass);
        assert!((rep.max_ratio - 3.0).abs() < 1e-12);
    }

    #[test]
    fn interval_integrals_match_quadrature() {
        let quad = Quadrature::new(1e-13);
        let frac = Kernel::fractional(1, 0.35).unwrap();
        let e = frac.interval_integral(0.0, 0.5, 2.0, &quad).unwrap().value;
        let q = quad
            .integrate(&|y: f64| frac.eval1(0.0, y), 0.5, 2.0)
            .unwrap()
            .value;
        assert!((e - q).abs() < 1e-12);
        let left = frac.interval_integral(0.0, f64::NEG_INFINITY, -1.0, &quad).unwrap().value;
        assert!((left - 1.0 / 0.7).abs() < 1e-14);

        let ti = Kernel::builtin_translation_invariant(1, 0.35).unwrap();
        let a = ti.interval_integral(0.0, 0.5, 2.0, &quad).unwrap().value;
        let b = quad.integrate(&|y: f64| ti.eval1(0.0, y), 0.5, 2.0).unwrap().value;
        assert!((a - b).abs() < 1e-11);
        let c = ti.interval_integral(0.0, -2.0, -0.5, &quad).unwrap().value;
        assert!((a - c).abs() < 1e-11);
    }

    #[test]
    fn linear_moments_match_quadrature() {
        let quad = Quadrature::new(1e-13);
        for s in [0.3, 0.5, 0.8] {
            let k = Kernel::fractional(1, s).unwrap();
            for (x, a, b) in [(0.0, 0.1, 0.7), (1.0, -3.0, 0.2), (0.0, 100.0, 100.5)] {
                let (m0, m1) = k.linear_moments(x, a, b, &quad).unwrap();
                let q0 = quad.integrate(&|y: f64| k.eval1(x, y), a, b).unwrap().value;
                let q1 = quad.integrate(&|y: f64| (y - x) * k.eval1(x, y), a, b).unwrap().value;
                assert!((m0 - q0).abs() < 1e-11 * q0.abs().max(1.0), "{m0} {q0}");
                assert!((m1 - q1).abs() < 1e-11 * q1.abs().max(1.0), "{m1} {q1}");
            }
        }
    }

    #[test]
    fn second_moment_matches_closed_form() {
        let quad = Quadrature::new(1e-13);
        let s = 0.8;
        let frac = Kernel::fractional(1, s).unwrap();
        let as_general = Kernel::general(
            1,
            s,
            1.0,
            Arc::new(move |x: &[f64], y: &[f64]| distance(x, y).powf(-1.0 - 2.0 * s)),
        )
        .unwrap();
        let a = frac.second_moment(0.3, 0.01, &quad).unwrap().value;
        let b = as_general.second_moment(0.3, 0.01, &quad).unwrap().value;
        assert!((a - b).abs() < 1e-10 * a, "{a} vs {b}");
    }
}
