//! Balls, the two-ball configuration and uniform cell meshes on unions of intervals.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Open ball `B_radius(center)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(LabError::InvalidParameter(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        if center.is_empty() {
            return Err(LabError::InvalidParameter("ball center has no coordinates".into()));
        }
        Ok(Ball { center, radius })
    }

    pub fn interval(center: f64, radius: f64) -> Result<Self> {
        Ball::new(vec![center], radius)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        distance(&self.center, x) < self.radius
    }

    pub fn contains1(&self, x: f64) -> bool {
        (x - self.center[0]).abs() < self.radius
    }

    /// The same ball with its radius multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Ball {
        Ball {
            center: self.center.clone(),
            radius: self.radius * factor,
        }
    }

    /// Endpoints of the ball as an interval (n = 1 only).
    pub fn as_interval(&self) -> Result<Interval> {
        if self.dim() != 1 {
            return Err(LabError::UnsupportedDimension(self.dim()));
        }
        Ok(Interval::new(
            self.center[0] - self.radius,
            self.center[0] + self.radius,
        ))
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B_{}({:?})", self.radius, self.center)
    }
}

/// Two balls `B_2r(x1)`, `B_2r(x2)` inside `B_(R/2)` with `4r <= |x1 - x2| <= 8r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisconnectedConfig {
    pub n: usize,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    /// Set when the geometric checks were skipped on request.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unchecked: bool,
}

/// Validated constructor for [`DisconnectedConfig`].
pub fn make_disconnected_config(
    n: usize,
    x1: Vec<f64>,
    x2: Vec<f64>,
    r: f64,
    big_r: f64,
) -> Result<DisconnectedConfig> {
    let cfg = build_config(n, x1, x2, r, big_r)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Like [`make_disconnected_config`] but records violations instead of rejecting
/// them; the returned config carries `unchecked = true` whenever a check failed.
pub fn make_disconnected_config_unchecked(
    n: usize,
    x1: Vec<f64>,
    x2: Vec<f64>,
    r: f64,
    big_r: f64,
) -> Result<DisconnectedConfig> {
    let mut cfg = build_config(n, x1, x2, r, big_r)?;
    cfg.unchecked = cfg.validate().is_err();
    Ok(cfg)
}

fn build_config(n: usize, x1: Vec<f64>, x2: Vec<f64>, r: f64, big_r: f64) -> Result<DisconnectedConfig> {
    if n == 0 {
        return Err(LabError::InvalidParameter("dimension must be positive".into()));
    }
    if x1.len() != n || x2.len() != n {
        return Err(LabError::InvalidParameter(format!(
            "centers must have {n} coordinates (got {} and {})",
            x1.len(),
            x2.len()
        )));
    }
    if !(r > 0.0 && r.is_finite()) || !(big_r > 0.0 && big_r.is_finite()) {
        return Err(LabError::InvalidParameter(format!(
            "radii must be positive and finite (r = {r}, R = {big_r})"
        )));
    }
    Ok(DisconnectedConfig {
        n,
        x1,
        x2,
        r,
        big_r,
        unchecked: false,
    })
}

impl DisconnectedConfig {
    /// The configuration of the symmetric two-interval setup: `x1 = -2r`, `x2 = 2r`, `R = ratio·r`.
    pub fn symmetric_1d(r: f64, ratio: f64) -> Result<Self> {
        make_disconnected_config(1, vec![-2.0 * r], vec![2.0 * r], r, ratio * r)
    }

    pub fn validate(&self) -> Result<()> {
        let d = distance(&self.x1, &self.x2);
        let (lo, hi) = (4.0 * self.r, 8.0 * self.r);
        // Relative slack so that e.g. 4r computed as x2 - x1 is not rejected by rounding.
        let eps = 1e-12 * hi;
        if d < lo - eps || d > hi + eps {
            return Err(LabError::SeparationViolation {
                distance: d,
                lower: lo,
                upper: hi,
            });
        }
        let limit = self.big_r / 2.0;
        for (index, x) in [(1, &self.x1), (2, &self.x2)] {
            let reach = norm(x) + 2.0 * self.r;
            if reach > limit * (1.0 + 1e-12) {
                return Err(LabError::ContainmentViolation { index, reach, limit });
            }
        }
        Ok(())
    }

    pub fn ball1(&self, factor: f64) -> Ball {
        Ball {
            center: self.x1.clone(),
            radius: factor * self.r,
        }
    }

    pub fn ball2(&self, factor: f64) -> Ball {
        Ball {
            center: self.x2.clone(),
            radius: factor * self.r,
        }
    }

    /// `B_R(0)`.
    pub fn outer_ball(&self) -> Ball {
        Ball {
            center: vec![0.0; self.n],
            radius: self.big_r,
        }
    }

    /// Flat `key = value` text with keys `n, x1, x2, r, R` and optionally `N`.
    pub fn to_key_value(&self, cells: Option<usize>) -> String {
        let join = |x: &[f64]| {
            x.iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut out = format!(
            "n = {}\nx1 = {}\nx2 = {}\nr = {}\nR = {}\n",
            self.n,
            join(&self.x1),
            join(&self.x2),
            self.r,
            self.big_r
        );
        if let Some(cells) = cells {
            out.push_str(&format!("N = {cells}\n"));
        }
        out
    }
}

/// Parsed flat key-value config. Unknown keys are kept so that callers can
/// read experiment settings from the same file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValueConfig {
    pub entries: BTreeMap<String, String>,
}

impl KeyValueConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| LabError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = k.trim();
            if key.is_empty() {
                return Err(LabError::Config(format!("line {}: empty key", lineno + 1)));
            }
            entries.insert(key.to_string(), v.trim().to_string());
        }
        Ok(KeyValueConfig { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| LabError::Config(format!("key `{key}`: not a number: {v:?}")))
            })
            .transpose()
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| LabError::Config(format!("key `{key}`: not a count: {v:?}")))
            })
            .transpose()
    }

    pub fn point(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key).map(|v| parse_point(v).map_err(|e| LabError::Config(format!("key `{key}`: {e}")))).transpose()
    }

    /// Builds and validates the geometry; returns it with the optional `N` entry.
    pub fn disconnected_config(&self) -> Result<(DisconnectedConfig, Option<usize>)> {
        let need = |key: &str| LabError::Config(format!("missing key `{key}`"));
        let x1 = self.point("x1")?.ok_or_else(|| need("x1"))?;
        let x2 = self.point("x2")?.ok_or_else(|| need("x2"))?;
        let n = self.usize("n")?.unwrap_or(x1.len());
        let r = self.f64("r")?.ok_or_else(|| need("r"))?;
        let big_r = self.f64("R")?.ok_or_else(|| need("R"))?;
        let cfg = make_disconnected_config(n, x1, x2, r, big_r)?;
        Ok((cfg, self.usize("N")?))
    }
}

pub fn parse_point(text: &str) -> std::result::Result<Vec<f64>, String> {
    let coords: std::result::Result<Vec<f64>, _> = text
        .trim()
        .trim_start_matches('(')
        .trim_end_matches(')')
        .split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect();
    match coords {
        Ok(c) if !c.is_empty() => Ok(c),
        _ => Err(format!("cannot parse point {text:?}")),
    }
}

/// Open interval `(left, right)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub left: f64,
    pub right: f64,
}

impl Interval {
    pub fn new(left: f64, right: f64) -> Self {
        Interval { left, right }
    }

    pub fn length(&self) -> f64 {
        self.right - self.left
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.left && x < self.right
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub interval: usize,
    pub left: f64,
    pub right: f64,
    pub center: f64,
    pub width: f64,
}

/// Uniform partition of an ordered union of disjoint open intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mesh1D {
    pub intervals: Vec<Interval>,
    pub cells: Vec<Cell>,
    pub cells_per_interval: usize,
}

pub const MIN_CELLS: usize = 4;

impl Mesh1D {
    pub fn uniform(intervals: Vec<Interval>, cells_per_interval: usize) -> Result<Self> {
        if cells_per_interval < MIN_CELLS {
            return Err(LabError::InvalidParameter(format!(
                "need at least {MIN_CELLS} cells per interval, got {cells_per_interval}"
            )));
        }
        if intervals.is_empty() {
            return Err(LabError::InvalidParameter("mesh needs at least one interval".into()));
        }
        for iv in &intervals {
            if !(iv.length() > 0.0) || !iv.left.is_finite() || !iv.right.is_finite() {
                return Err(LabError::InvalidParameter(format!("degenerate interval {iv:?}")));
            }
        }
        for w in intervals.windows(2) {
            if w[1].left < w[0].right {
                return Err(LabError::InvalidParameter(format!(
                    "intervals must be ordered and disjoint: {:?} then {:?}",
                    w[0], w[1]
                )));
            }
        }
        let mut cells = Vec::with_capacity(intervals.len() * cells_per_interval);
        for (k, iv) in intervals.iter().enumerate() {
            let width = iv.length() / cells_per_interval as f64;
            for i in 0..cells_per_interval {
                let left = iv.left + i as f64 * width;
                // Last edge pinned to the interval end so the cells tile it exactly.
                let right = if i + 1 == cells_per_interval {
                    iv.right
                } else {
                    iv.left + (i + 1) as f64 * width
                };
                cells.push(Cell {
                    interval: k,
                    left,
                    right,
                    center: 0.5 * (left + right),
                    width: right - left,
                });
            }
        }
        Ok(Mesh1D {
            intervals,
            cells,
            cells_per_interval,
        })
    }

    /// Mesh over a single ball (n = 1).
    pub fn over_ball(ball: &Ball, cells: usize) -> Result<Self> {
        Mesh1D::uniform(vec![ball.as_interval()?], cells)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.center).collect()
    }

    /// Index of the cell containing `x` (cell edges belong to no cell).
    pub fn locate(&self, x: f64) -> Option<usize> {
        let mut offset = 0;
        for iv in &self.intervals {
            if iv.contains(x) {
                let w = iv.length() / self.cells_per_interval as f64;
                let i = (((x - iv.left) / w).floor() as usize).min(self.cells_per_interval - 1);
                // Guard the floor against rounding at interior edges.
                let i = if x < self.cells[offset + i].left && i > 0 {
                    i - 1
                } else if x >= self.cells[offset + i].right && i + 1 < self.cells_per_interval {
                    i + 1
                } else {
                    i
                };
                let c = &self.cells[offset + i];
                return (x > c.left && x < c.right).then_some(offset + i);
            }
            offset += self.cells_per_interval;
        }
        None
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    /// Pieces of `R \ Ω` as `(left, right)` with infinite ends; zero-length gaps are kept.
    pub fn exterior_pieces(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        out.push((f64::NEG_INFINITY, self.intervals[0].left));
        for w in self.intervals.windows(2) {
            out.push((w[0].right, w[1].left));
        }
        out.push((self.intervals[self.intervals.len() - 1].right, f64::INFINITY));
        out
    }

    /// Indices of cells whose centers lie in `ball`.
    pub fn cells_in(&self, ball: &Ball) -> Vec<usize> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| ball.contains1(c.center))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Mesh tiling `B_2r(x1) ∪ B_2r(x2)` with `cells` uniform cells per ball.
pub fn mesh_over(config: &DisconnectedConfig, cells: usize) -> Result<Mesh1D> {
    if config.n != 1 {
        return Err(LabError::UnsupportedDimension(config.n));
    }
    let mut ivs = vec![
        config.ball1(2.0).as_interval()?,
        config.ball2(2.0).as_interval()?,
    ];
    ivs.sort_by(|a, b| a.left.total_cmp(&b.left));
    Mesh1D::uniform(ivs, cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_configuration_is_valid() {
        let cfg = make_disconnected_config(1, vec![-2.0], vec![2.0], 1.0, 16.0).unwrap();
        assert_eq!(cfg.ball1(1.0).as_interval().unwrap(), Interval::new(-3.0, -1.0));
        assert_eq!(cfg.ball2(1.0).as_interval().unwrap(), Interval::new(1.0, 3.0));
    }

    #[test]
    fn separation_too_small() {
        let err = make_disconnected_config(1, vec![0.0], vec![1.0], 1.0, 16.0).unwrap_err();
        assert!(matches!(err, LabError::SeparationViolation { .. }));
    }

    #[test]
    fn separation_too_large() {
        let err = make_disconnected_config(1, vec![-5.0], vec![5.0], 1.0, 40.0).unwrap_err();
        assert!(matches!(err, LabError::SeparationViolation { .. }));
    }

    #[test]
    fn containment_violation() {
        let err = make_disconnected_config(1, vec![-2.0], vec![2.0], 1.0, 7.9).unwrap_err();
        assert!(matches!(err, LabError::ContainmentViolation { index: 1, .. }));
    }

    #[test]
    fn two_dimensional_configuration() {
        let cfg = make_disconnected_config(2, vec![-3.0, 0.0], vec![3.0, 0.0], 1.0, 20.0).unwrap();
        assert_eq!(distance(&cfg.x1, &cfg.x2), 6.0);
        assert!(matches!(mesh_over(&cfg, 8), Err(LabError::UnsupportedDimension(2))));
    }

    #[test]
    fn unchecked_records_violation() {
        let cfg = make_disconnected_config_unchecked(1, vec![0.0], vec![1.0], 1.0, 16.0).unwrap();
        assert!(cfg.unchecked);
        let ok = make_disconnected_config_unchecked(1, vec![-2.0], vec![2.0], 1.0, 16.0).unwrap();
        assert!(!ok.unchecked);
    }

    #[test]
    fn mesh_of_four_cells() {
        let cfg = DisconnectedConfig::symmetric_1d(1.0, 16.0).unwrap();
        let mesh = mesh_over(&cfg, 4).unwrap();
        let centers = mesh.centers();
        assert_eq!(centers, vec![-3.5, -2.5, -1.5, -0.5, 0.5, 1.5, 2.5, 3.5]);
        assert!(mesh.cells.iter().all(|c| c.width == 1.0));
        assert!(matches!(mesh_over(&cfg, 0), Err(LabError::InvalidParameter(_))));
    }

    #[test]
    fn mesh_of_512_cells() {
        let cfg = DisconnectedConfig::symmetric_1d(1.0, 16.0).unwrap();
        let mesh = mesh_over(&cfg, 512).unwrap();
        assert_eq!(mesh.len(), 1024);
        assert!(mesh.cells.iter().all(|c| (c.width - 4.0 / 512.0).abs() < 1e-15));
        let total: f64 = mesh.cells.iter().map(|c| c.width).sum();
        assert!((total - 8.0).abs() < 1e-12);
    }

    #[test]
    fn locate_cells() {
        let mesh = Mesh1D::uniform(vec![Interval::new(-1.0, 1.0)], 8).unwrap();
        for (i, c) in mesh.cells.iter().enumerate() {
            assert_eq!(mesh.locate(c.center), Some(i));
        }
        assert_eq!(mesh.locate(1.5), None);
        assert_eq!(mesh.locate(-0.75), None);
    }

    #[test]
    fn key_value_round_trip() {
        let cfg = DisconnectedConfig::symmetric_1d(1.0, 16.0).unwrap();
        let text = cfg.to_key_value(Some(128));
        let parsed = KeyValueConfig::parse(&text).unwrap();
        let (back, n) = parsed.disconnected_config().unwrap();
        assert_eq!(back, cfg);
        assert_eq!(n, Some(128));
    }

    #[test]
    fn key_value_errors() {
        assert!(matches!(KeyValueConfig::parse("garbage"), Err(LabError::Config(_))));
        let kv = KeyValueConfig::parse("x1 = -2\nx2 = 2\nr = one\nR = 16").unwrap();
        assert!(matches!(kv.disconnected_config(), Err(LabError::Config(_))));
    }
}
