//! Dirichlet problems `Lu = f` in `Ω`, `u = g` outside, on unions of intervals.
//!
//! Collocation at cell centers `x_i`. Between consecutive nodes (cell centers and
//! the run boundaries, where `u = g`) the unknown is interpolated piecewise
//! linearly; pieces in the half of a run next to a boundary `b` are linear in
//! `τ = |y - b|^s` instead of `y`, so `A + B·dist(y, ∂Ω)^s` is reproduced
//! exactly. Row `i` collects
//!
//! * `2∫(u_i - u(y)) k(x_i, y) dy` over every interpolation piece outside the
//!   self window `|y - x_i| < h_i/2`, split into node weights;
//! * the self window through the local quadratic in the same coordinate, using
//!   the exact moments `J1 = 2∫(σ(x) - σ(y))k`, `J2 = 2∫(σ(y) - σ(x))²k`;
//! * `2∫_{R∖Ω} k(x_i, y) dy` on the diagonal and the data integral
//!   `2∫_{R∖Ω} g(y) k(x_i, y) dy` on the right-hand side.
//!
//! When the quadratic would give a positive off-diagonal the self window falls
//! back to a two-point profile through the boundary value, or to the plain
//! quadratic, so every row keeps nonpositive off-diagonals and dominance slack
//! equal to its exterior coupling: the matrix is an M-matrix and constants are
//! reproduced to rounding. Exterior integrals run to `|y - x_i| = T`; beyond `T`
//! the kernel mass is exact for the fractional kernel and bracketed through
//! ellipticity otherwise, and `g` is frozen at `g(x_i ± T)` there.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::function::{Growth, PointFunction};
use crate::geometry::{Ball, Mesh1D};
use crate::kernel::{Kernel, KernelFamily};
use crate::operator::FAR_TRUNCATION_FACTOR;
use crate::quadrature::{Estimate, Quadrature};

/// Residual target for direct solves.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct ExteriorPoint {
    pub position: f64,
    pub weight: f64,
}

/// Operator part of the scheme: everything except the data.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub kernel: Kernel,
    pub mesh: Mesh1D,
    pub matrix: DMatrix<f64>,
    /// `2E_i` plus the weights of exterior second-difference points.
    pub exterior_coupling: Vec<f64>,
    pub exterior_points: Vec<Vec<ExteriorPoint>>,
    pub truncation_radius: f64,
    /// Kernel mass beyond `T` on one side.
    pub beyond_mass: Estimate,
    pub quad: Quadrature,
}

#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub centers: Vec<f64>,
    pub widths: Vec<f64>,
    pub exterior_coupling: Vec<f64>,
    /// Bound on the error of the exterior data integrals in the right-hand side.
    pub assembly_error: f64,
}

#[derive(Debug, Clone)]
pub struct GridFunction {
    pub mesh: Mesh1D,
    pub values: Vec<f64>,
    pub exterior: PointFunction,
}

fn beyond_mass(kernel: &Kernel, t: f64) -> Estimate {
    let two_s = 2.0 * kernel.s;
    let shell = t.powf(-two_s) / two_s;
    match kernel.family {
        KernelFamily::Fractional => Estimate {
            value: kernel.factor() * shell,
            error: 0.0,
        },
        _ => {
            let (lo, hi) = (kernel.factor() / kernel.lambda * shell, kernel.factor() * kernel.lambda * shell);
            Estimate {
                value: 0.5 * (lo + hi),
                error: 0.5 * (hi - lo),
            }
        }
    }
}

/// Clip `(a, b)` to `(x - t, x + t)`.
fn clip(a: f64, b: f64, x: f64, t: f64) -> Option<(f64, f64)> {
    let (lo, hi) = (a.max(x - t), b.min(x + t));
    (hi > lo).then_some((lo, hi))
}

/// Maximal chains of touching cells; each has a boundary point at both ends.
#[derive(Debug, Clone, Copy)]
struct Run {
    start: usize,
    end: usize,
    left: f64,
    right: f64,
}

fn runs(mesh: &Mesh1D) -> Vec<Run> {
    let cells = &mesh.cells;
    let mut out = Vec::new();
    let mut start = 0;
    for j in 1..=cells.len() {
        let split = j == cells.len() || {
            let gap = cells[j].left - cells[j - 1].right;
            gap.abs() > 1e-14 * (1.0 + cells[j].left.abs())
        };
        if split {
            out.push(Run {
                start,
                end: j,
                left: cells[start].left,
                right: cells[j - 1].right,
            });
            start = j;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Node {
    Cell(usize),
    /// Exterior value at a run boundary.
    Boundary(f64),
}

impl Run {
    /// Boundary of the half of the run containing `x`.
    fn near_boundary(&self, x: f64) -> f64 {
        if x - self.left <= self.right - x {
            self.left
        } else {
            self.right
        }
    }
}

/// Interpolation piece between two nodes. With `boundary` set, the interpolant is
/// linear in `τ = |y - boundary|^s`, which reproduces `A + B·dist^s` exactly;
/// otherwise it is linear in `y`.
#[derive(Debug, Clone, Copy)]
struct Segment {
    p: f64,
    q: f64,
    at_p: Node,
    at_q: Node,
    boundary: Option<f64>,
}

fn segments(mesh: &Mesh1D, runs: &[Run]) -> Vec<Segment> {
    let c = &mesh.cells;
    let mut out = Vec::new();
    for run in runs {
        out.push(Segment {
            p: run.left,
            q: c[run.start].center,
            at_p: Node::Boundary(run.left),
            at_q: Node::Cell(run.start),
            boundary: Some(run.left),
        });
        for j in run.start..run.end - 1 {
            let (p, q) = (c[j].center, c[j + 1].center);
            let (bp, bq) = (run.near_boundary(p), run.near_boundary(q));
            out.push(Segment {
                p,
                q,
                at_p: Node::Cell(j),
                at_q: Node::Cell(j + 1),
                boundary: (bp == bq).then_some(bp),
            });
        }
        out.push(Segment {
            p: c[run.end - 1].center,
            q: run.right,
            at_p: Node::Cell(run.end - 1),
            at_q: Node::Boundary(run.right),
            boundary: Some(run.right),
        });
    }
    out
}

/// Parts of `[a, b]` outside the open window `(lo, hi)`.
fn outside(a: f64, b: f64, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> {
    let left = (a, b.min(lo));
    let right = (a.max(hi), b);
    [left, right].into_iter().filter(|(p, q)| q > p)
}

/// Point just outside `Ω` next to the boundary `b` of a run whose interior lies toward `inner`.
fn exterior_side_of(b: f64, inner: f64) -> f64 {
    let eps = 1e-10 * (1.0 + b.abs());
    if inner > b {
        b - eps
    } else {
        b + eps
    }
}

struct RowParts {
    row: Vec<f64>,
    coupling: f64,
    points: Vec<ExteriorPoint>,
}

impl Discretization {
    pub fn new(kernel: &Kernel, mesh: &Mesh1D) -> Result<Self> {
        let reach = mesh
            .intervals
            .iter()
            .map(|iv| 0.5 * iv.length())
            .fold(0.0, f64::max);
        Discretization::with_truncation(kernel, mesh, FAR_TRUNCATION_FACTOR * reach, Quadrature::new(1e-11))
    }

    pub fn with_truncation(kernel: &Kernel, mesh: &Mesh1D, truncation_radius: f64, quad: Quadrature) -> Result<Self> {
        if kernel.n != 1 {
            return Err(LabError::UnsupportedDimension(kernel.n));
        }
        let span = mesh.intervals[mesh.intervals.len() - 1].right - mesh.intervals[0].left;
        if !(truncation_radius > span) {
            return Err(LabError::InvalidParameter(format!(
                "truncation radius {truncation_radius} must exceed the mesh span {span}"
            )));
        }
        let n = mesh.len();
        let beyond = beyond_mass(kernel, truncation_radius);
        let pieces: Vec<(f64, f64)> = mesh.exterior_pieces().into_iter().filter(|(a, b)| b > a).collect();
        let runs = runs(mesh);
        let segs = segments(mesh, &runs);

        let rows: Vec<Result<RowParts>> = (0..n)
            .into_par_iter()
            .map(|i| assemble_row(kernel, mesh, &runs, &segs, &pieces, i, truncation_radius, beyond, &quad))
            .collect();

        let mut matrix = DMatrix::zeros(n, n);
        let mut exterior_coupling = Vec::with_capacity(n);
        let mut exterior_points = Vec::with_capacity(n);
        for (i, r) in rows.into_iter().enumerate() {
            let parts = r?;
            for (j, v) in parts.row.into_iter().enumerate() {
                matrix[(i, j)] = v;
            }
            exterior_coupling.push(parts.coupling);
            exterior_points.push(parts.points);
        }
        Ok(Discretization {
            kernel: kernel.clone(),
            mesh: mesh.clone(),
            matrix,
            exterior_coupling,
            exterior_points,
            truncation_radius,
            beyond_mass: beyond,
            quad,
        })
    }

    /// `2B_i` for every row plus exterior point terms and `f(x_i)`, with an error bound.
    pub fn rhs(&self, g: &PointFunction, f: Option<&PointFunction>) -> Result<(DVector<f64>, f64)> {
        g.require_tail_integrable(self.kernel.s)?;
        let t = self.truncation_radius;
        let kernel = &self.kernel;
        let quad = &self.quad;
        let pieces = self.mesh.exterior_pieces();
        let support = g.support.as_ref().map(|b| (b.center[0] - b.radius, b.center[0] + b.radius));

        let entries: Vec<Result<(f64, f64)>> = self
            .mesh
            .cells
            .par_iter()
            .enumerate()
            .map(|(i, cell)| {
                let x = cell.center;
                let mut total = Estimate::default();
                for &(a, b) in &pieces {
                    let (a, b) = match support {
                        Some((lo, hi)) => (a.max(lo), b.min(hi)),
                        None => (a, b),
                    };
                    let Some((lo, hi)) = clip(a, b, x, t) else { continue };
                    total += data_integral(kernel, g, x, lo, hi, quad)?;
                }
                let mut err = total.error;
                let mut value = total.value;
                if !g.supported_within(&[x], t) {
                    let (gl, gr) = (g.eval1(x - t), g.eval1(x + t));
                    value += self.beyond_mass.value * (gl + gr);
                    let sup = match g.growth {
                        Growth::Bounded(m) => m,
                        Growth::Power { coeff, exponent } => coeff * (1.0 + x.abs() + t).powf(exponent.max(0.0)),
                    };
                    // |∫_{beyond} (g - g(x±T)) k| with the upper kernel bracket.
                    let upper = self.beyond_mass.value + self.beyond_mass.error;
                    err += match g.growth {
                        Growth::Bounded(_) => 2.0 * 2.0 * sup * upper,
                        Growth::Power { coeff, exponent } => {
                            let p = exponent.max(0.0);
                            let two_s = 2.0 * kernel.s;
                            let kappa = 1.0 + (1.0 + x.abs()) / t;
                            let lam = kernel.factor() * kernel.lambda;
                            2.0 * (2.0 * coeff * kappa.powf(p) * lam * t.powf(p - two_s) / (two_s - p) + sup * upper)
                        }
                    };
                }
                let mut rhs = 2.0 * value;
                for pt in &self.exterior_points[i] {
                    rhs += pt.weight * g.eval1(pt.position);
                }
                if let Some(f) = f {
                    rhs += f.eval1(x);
                }
                Ok((rhs, 2.0 * err))
            })
            .collect();
        let mut rhs = DVector::zeros(self.mesh.len());
        let mut err: f64 = 0.0;
        for (i, e) in entries.into_iter().enumerate() {
            let (v, e) = e?;
            rhs[i] = v;
            err = err.max(e);
        }
        Ok((rhs, err))
    }

    pub fn system(&self, g: &PointFunction, f: Option<&PointFunction>) -> Result<LinearSystem> {
        let (rhs, assembly_error) = self.rhs(g, f)?;
        Ok(LinearSystem {
            matrix: self.matrix.clone(),
            rhs,
            centers: self.mesh.centers(),
            widths: self.mesh.cells.iter().map(|c| c.width).collect(),
            exterior_coupling: self.exterior_coupling.clone(),
            assembly_error,
        })
    }
}

/// Weight `∫_a^b k(x, y) ψ_q(y) dy` of the far node of a segment part.
fn far_node_weight(kernel: &Kernel, seg: &Segment, x: f64, a: f64, b: f64, m0: f64, quad: &Quadrature) -> Result<f64> {
    let Some(bd) = seg.boundary else {
        let (_, m1) = kernel.linear_moments(x, a, b, quad)?;
        return Ok(((m1 - m0 * (seg.p - x)) / (seg.q - seg.p)).clamp(0.0, m0));
    };
    let s = kernel.s;
    let tau = |y: f64| (y - bd).abs().powf(s);
    let (tp, tq) = (tau(seg.p), tau(seg.q));
    let dir = if seg.p + seg.q > 2.0 * bd { 1.0 } else { -1.0 };
    let (ta, tb) = {
        let (u, v) = (tau(a), tau(b));
        (u.min(v), u.max(v))
    };
    // Integrate in τ: y = bd ± τ^(1/s), dy = τ^(1/s - 1)/s dτ.
    let f = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let y = bd + dir * t.powf(1.0 / s);
        kernel.eval1(x, y) * (t - tp) / (tq - tp) * t.powf(1.0 / s - 1.0) / s
    };
    Ok(quad.integrate(&f, ta, tb)?.value.clamp(0.0, m0))
}

/// Coordinate in which the local interpolant is a polynomial.
#[derive(Debug, Clone, Copy)]
enum Coord {
    Plain,
    /// `τ = |y - b|^s`.
    Power(f64),
}

impl Coord {
    fn map(&self, y: f64, s: f64) -> f64 {
        match *self {
            Coord::Plain => y,
            Coord::Power(b) => (y - b).abs().powf(s),
        }
    }

    /// `σ(x + t) - σ(x)` without cancellation.
    fn diff(&self, x: f64, t: f64, s: f64) -> f64 {
        match *self {
            Coord::Plain => t,
            Coord::Power(b) => {
                let d = (x - b).abs();
                let rel = if x > b { t / d } else { -t / d };
                d.powf(s) * (s * rel.ln_1p()).exp_m1()
            }
        }
    }
}

/// `(2∫(σ(x) - σ(y)) k dy, 2∫(σ(y) - σ(x))² k dy)` over `|y - x| < δ`.
fn window_moments(kernel: &Kernel, x: f64, delta: f64, coord: Coord, quad: &Quadrature) -> Result<(f64, f64)> {
    let s = kernel.s;
    if let (Coord::Plain, KernelFamily::Fractional) = (coord, &kernel.family) {
        return Ok((0.0, 2.0 * kernel.second_moment(x, delta, quad)?.value));
    }
    let q = 2.0 - 2.0 * s;
    let floor = 1e-3 * delta;
    // v = t^q turns the t^(1-2s) behaviour at the center into a bounded integrand.
    let integrand = |v: f64, power: i32| {
        let t = v.max(0.0).powf(1.0 / q).max(floor);
        let (yp, ym) = (x + t, x - t);
        let (dp, dm) = (coord.diff(x, t, s), coord.diff(x, -t, s));
        let h = match power {
            1 => -dp * kernel.eval1(x, yp) - dm * kernel.eval1(x, ym),
            _ => dp * dp * kernel.eval1(x, yp) + dm * dm * kernel.eval1(x, ym),
        };
        h * t.powf(2.0 * s - 1.0) / q
    };
    let top = delta.powf(q);
    // The boundary end of the window has a dist^s singularity; ask for relative accuracy.
    let local = Quadrature {
        rel_tol: quad.rel_tol.max(1e-8),
        ..*quad
    };
    let j1 = local.integrate(&|v| integrand(v, 1), 0.0, top)?.value;
    let j2 = local.integrate(&|v| integrand(v, 2), 0.0, top)?.value;
    Ok((2.0 * j1, 2.0 * j2))
}

/// Three-point first and second derivative weights at `x0` from nodes `xm < x0 < xp`.
fn derivative_weights(xm: f64, x0: f64, xp: f64) -> ([f64; 3], [f64; 3]) {
    let (dm, dp) = (x0 - xm, xp - x0);
    let second = [2.0 / (dm * (dm + dp)), -2.0 / (dm * dp), 2.0 / (dp * (dm + dp))];
    let first = [-dp / (dm * (dm + dp)), (dp - dm) / (dm * dp), dm / (dp * (dm + dp))];
    (first, second)
}

/// Self-window coefficients on the nodes `(left, center, right)`:
/// the window integral of `u(x) - u(y)` for the local quadratic in `coord`.
fn self_coefficients(
    kernel: &Kernel,
    x: f64,
    xm: f64,
    xp: f64,
    delta: f64,
    coord: Coord,
    quad: &Quadrature,
) -> Result<[f64; 3]> {
    let s = kernel.s;
    let (j1, j2) = window_moments(kernel, x, delta, coord, quad)?;
    let (sm, s0, sp) = (coord.map(xm, s), coord.map(x, s), coord.map(xp, s));
    let swapped = sm > sp;
    let (lo, hi) = if swapped { (sp, sm) } else { (sm, sp) };
    let (first, second) = derivative_weights(lo, s0, hi);
    let mut c = [0.0; 3];
    for k in 0..3 {
        c[k] = first[k] * j1 - 0.5 * second[k] * j2;
    }
    if swapped {
        c.swap(0, 2);
    }
    Ok(c)
}

#[allow(clippy::too_many_arguments)]
fn assemble_row(
    kernel: &Kernel,
    mesh: &Mesh1D,
    runs: &[Run],
    segs: &[Segment],
    pieces: &[(f64, f64)],
    i: usize,
    t: f64,
    beyond: Estimate,
    quad: &Quadrature,
) -> Result<RowParts> {
    let n = mesh.len();
    let s = kernel.s;
    let cell = &mesh.cells[i];
    let x = cell.center;
    let delta = 0.5 * cell.width;
    let (lo, hi) = (x - delta, x + delta);
    let mut row = vec![0.0; n];
    let mut coupling = 0.0;
    let mut points: Vec<ExteriorPoint> = Vec::new();
    let mut couple = |node: Node, w: f64, row: &mut Vec<f64>| match node {
        Node::Cell(j) if j == i => {}
        Node::Cell(j) => row[j] -= w,
        Node::Boundary(b) => {
            coupling += w;
            points.push(ExteriorPoint {
                position: exterior_side_of(b, x),
                weight: w,
            });
        }
    };

    for seg in segs {
        for (a, b) in outside(seg.p, seg.q, lo, hi) {
            let m0 = kernel.interval_integral(x, a, b, quad)?.value;
            let wq = far_node_weight(kernel, seg, x, a, b, m0, quad)?;
            couple(seg.at_p, 2.0 * (m0 - wq), &mut row);
            couple(seg.at_q, 2.0 * wq, &mut row);
        }
    }

    // Self window: exact integral of the local quadratic in the boundary-adapted coordinate.
    let run = runs.iter().find(|r| r.start <= i && i < r.end).expect("every cell lies in a run");
    let bd = run.near_boundary(x);
    let c = &mesh.cells;
    let (left, xm) = if i == run.start { (Node::Boundary(run.left), run.left) } else { (Node::Cell(i - 1), c[i - 1].center) };
    let (right, xp) = if i + 1 == run.end { (Node::Boundary(run.right), run.right) } else { (Node::Cell(i + 1), c[i + 1].center) };
    let same_side = run.near_boundary(xm) == bd && run.near_boundary(xp) == bd;
    let coord = if same_side { Coord::Power(bd) } else { Coord::Plain };
    let mut coeffs = self_coefficients(kernel, x, xm, xp, delta, coord, quad)?;
    // Off-diagonal coefficients must stay nonpositive (entries are -coefficient here).
    if coeffs[0] > 0.0 || coeffs[2] > 0.0 {
        coeffs = match (left, right, coord) {
            (Node::Boundary(_), _, Coord::Power(_)) | (_, Node::Boundary(_), Coord::Power(_)) => {
                // Two-point profile `u = g(b) + B·τ` through the boundary value.
                let (j1, _) = window_moments(kernel, x, delta, coord, quad)?;
                let w = j1 / coord.map(x, s);
                if matches!(left, Node::Boundary(_)) {
                    [-w, w, 0.0]
                } else {
                    [0.0, w, -w]
                }
            }
            _ => self_coefficients(kernel, x, xm, xp, delta, Coord::Plain, quad)?,
        };
    }
    couple(left, -coeffs[0], &mut row);
    couple(right, -coeffs[2], &mut row);

    // Exterior mass.
    coupling += 2.0 * 2.0 * beyond.value;
    for &(a, b) in pieces {
        if let Some((pa, pb)) = clip(a, b, x, t) {
            coupling += 2.0 * kernel.interval_integral(x, pa, pb, quad)?.value;
        }
    }

    let off: f64 = row.iter().map(|v| -v).sum();
    row[i] = off + coupling;
    Ok(RowParts { row, coupling, points })
}

/// `∫_lo^hi g(y) k(x, y) dy` for an exterior piece not containing `x`.
fn data_integral(kernel: &Kernel, g: &PointFunction, x: f64, lo: f64, hi: f64, quad: &Quadrature) -> Result<Estimate> {
    let (sign, d0, d1) = if lo >= x { (1.0, lo - x, hi - x) } else { (-1.0, x - hi, x - lo) };
    if !(d0 > 0.0) {
        return Err(LabError::DiagonalEvaluation);
    }
    let f = |d: f64| {
        let y = x + sign * d;
        let gy = g.eval1(y);
        if gy == 0.0 {
            0.0
        } else {
            gy * kernel.eval1(x, y)
        }
    };
    let breaks: Vec<f64> = g.breaks.iter().map(|b| sign * (b - x)).filter(|d| *d > d0 && *d < d1).collect();
    quad.integrate_geometric(&f, d0, d1, &breaks)
}

pub fn assemble(kernel: &Kernel, mesh: &Mesh1D, g: &PointFunction, f: Option<&PointFunction>) -> Result<LinearSystem> {
    Discretization::new(kernel, mesh)?.system(g, f)
}

fn residual(matrix: &DMatrix<f64>, u: &DVector<f64>, rhs: &DVector<f64>) -> f64 {
    let r = (matrix * u - rhs).amax();
    let b = rhs.amax();
    if b > 0.0 {
        r / b
    } else {
        r
    }
}

/// Dense LU solve with a relative residual check.
pub fn solve_system(system: &LinearSystem) -> Result<DVector<f64>> {
    let lu = system.matrix.clone().lu();
    let u = lu
        .solve(&system.rhs)
        .ok_or(LabError::SingularSystem(0.0))?;
    let res = residual(&system.matrix, &u, &system.rhs);
    if !(res < RESIDUAL_TOL) {
        return Err(LabError::SingularSystem(res));
    }
    Ok(u)
}

/// Factored operator for repeated solves with different data.
pub struct DirichletSolver {
    pub disc: Discretization,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl DirichletSolver {
    pub fn new(kernel: &Kernel, mesh: &Mesh1D) -> Result<Self> {
        DirichletSolver::from_discretization(Discretization::new(kernel, mesh)?)
    }

    pub fn from_discretization(disc: Discretization) -> Result<Self> {
        let lu = disc.matrix.clone().lu();
        if !lu.is_invertible() {
            return Err(LabError::SingularSystem(f64::INFINITY));
        }
        Ok(DirichletSolver { disc, lu })
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.disc.mesh
    }

    pub fn solve_values(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        let u = self.lu.solve(rhs).ok_or(LabError::SingularSystem(0.0))?;
        let res = residual(&self.disc.matrix, &u, rhs);
        if !(res < RESIDUAL_TOL) {
            return Err(LabError::SingularSystem(res));
        }
        Ok(u)
    }

    pub fn solve(&self, g: &PointFunction, f: Option<&PointFunction>) -> Result<GridFunction> {
        let (rhs, _) = self.disc.rhs(g, f)?;
        let u = self.solve_values(&rhs)?;
        Ok(GridFunction {
            mesh: self.disc.mesh.clone(),
            values: u.iter().copied().collect(),
            exterior: g.clone(),
        })
    }
}

/// Assemble and solve in one step.
pub fn solve(kernel: &Kernel, mesh: &Mesh1D, g: &PointFunction, f: Option<&PointFunction>) -> Result<GridFunction> {
    let system = assemble(kernel, mesh, g, f)?;
    let u = solve_system(&system)?;
    Ok(GridFunction {
        mesh: mesh.clone(),
        values: u.iter().copied().collect(),
        exterior: g.clone(),
    })
}

impl GridFunction {
    /// Cell value inside `Ω`, exterior data outside.
    pub fn eval(&self, x: f64) -> f64 {
        match self.mesh.locate(x) {
            Some(i) => self.values[i],
            None if self.mesh.contains(x) => {
                // On a cell edge: average the neighbours.
                let left = self.mesh.locate(x - 1e-12 * (1.0 + x.abs()));
                let right = self.mesh.locate(x + 1e-12 * (1.0 + x.abs()));
                match (left, right) {
                    (Some(a), Some(b)) => 0.5 * (self.values[a] + self.values[b]),
                    (Some(a), None) | (None, Some(a)) => self.values[a],
                    (None, None) => self.exterior.eval1(x),
                }
            }
            None => self.exterior.eval1(x),
        }
    }

    /// The solution as a point function on the whole line.
    pub fn to_point_function(&self) -> PointFunction {
        let me = self.clone();
        let sup = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let growth = match self.exterior.growth {
            Growth::Bounded(m) => Growth::Bounded(m.max(sup)),
            Growth::Power { coeff, exponent } => Growth::Power {
                coeff: coeff.max(sup),
                exponent,
            },
        };
        let mut breaks: Vec<f64> = self.mesh.cells.iter().flat_map(|c| [c.left, c.right]).collect();
        breaks.extend_from_slice(&self.exterior.breaks);
        let mut out = PointFunction::new1(move |x| me.eval(x), growth)
            .with_breaks(breaks, crate::function::Regularity::Discontinuous);
        if let Some(b) = &self.exterior.support {
            let lo = (b.center[0] - b.radius).min(self.mesh.intervals[0].left);
            let hi = (b.center[0] + b.radius).max(self.mesh.intervals[self.mesh.intervals.len() - 1].right);
            out = out.with_support(Ball {
                center: vec![0.5 * (lo + hi)],
                radius: 0.5 * (hi - lo),
            });
        }
        out
    }

    fn values_in(&self, ball: &Ball) -> Result<Vec<f64>> {
        let idx = self.mesh.cells_in(ball);
        if idx.is_empty() {
            return Err(LabError::EmptySample(format!("no cell centers inside {ball}")));
        }
        Ok(idx.into_iter().map(|i| self.values[i]).collect())
    }

    pub fn sup_in(&self, ball: &Ball) -> Result<f64> {
        Ok(self.values_in(ball)?.into_iter().fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn inf_in(&self, ball: &Ball) -> Result<f64> {
        Ok(self.values_in(ball)?.into_iter().fold(f64::INFINITY, f64::min))
    }

    pub fn avg_in(&self, ball: &Ball) -> Result<f64> {
        let v = self.values_in(ball)?;
        Ok(v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonhomMp {
    pub min_u: f64,
    /// `-min_u / (C0·r^{2s})`.
    pub bound_constant: f64,
    /// `2^{2s}·s·Λ / |S^0|` for comparison.
    pub reference_threshold: f64,
}

/// Solve `Lu = -C0` in `ball`, `u = 0` outside, and report the depth of the minimum.
pub fn discrete_nonhom_mp(kernel: &Kernel, ball: &Ball, cells: usize, c0: f64) -> Result<NonhomMp> {
    if !(c0 >= 0.0) {
        return Err(LabError::InvalidParameter(format!("C0 must be nonnegative, got {c0}")));
    }
    let mesh = Mesh1D::over_ball(ball, cells)?;
    let solver = DirichletSolver::new(kernel, &mesh)?;
    let zero = PointFunction::constant(0.0);
    let rhs = PointFunction::constant(-c0);
    let u = solver.solve(&zero, Some(&rhs))?;
    let min_u = u.min().min(0.0);
    let s = kernel.s;
    let bound_constant = if c0 > 0.0 {
        -min_u / (c0 * ball.radius.powf(2.0 * s))
    } else {
        0.0
    };
    Ok(NonhomMp {
        min_u,
        bound_constant,
        reference_threshold: 2f64.powf(2.0 * s) * s * kernel.lambda / 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Interval;

    fn unit_mesh(n: usize) -> Mesh1D {
        Mesh1D::uniform(vec![Interval::new(-1.0, 1.0)], n).unwrap()
    }

    #[test]
    fn m_matrix_structure() {
        let k = Kernel::fractional(1, 0.5).unwrap();
        let d = Discretization::new(&k, &unit_mesh(4)).unwrap();
        for i in 0..4 {
            let off: f64 = (0..4).filter(|&j| j != i).map(|j| -d.matrix[(i, j)]).sum();
            assert!(d.matrix[(i, i)] > 0.0);
            assert!(d.exterior_coupling[i] > 0.0);
            assert!((d.matrix[(i, i)] - off - d.exterior_coupling[i]).abs() <= 1e-12 * d.matrix[(i, i)]);
            for j in 0..4 {
                if j != i {
                    assert!(d.matrix[(i, j)] <= 0.0);
                }
            }
        }
    }

    #[test]
    fn constants_reproduced() {
        let k = Kernel::builtin_translation_invariant(1, 0.4).unwrap();
        let u = solve(&k, &unit_mesh(16), &PointFunction::constant(5.0), None).unwrap();
        for v in &u.values {
            assert!((v - 5.0).abs() < 1e-10, "{v}");
        }
        let z = solve(&k, &unit_mesh(16), &PointFunction::constant(0.0), None).unwrap();
        assert!(z.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn kernel_scaling_invariance() {
        let k = Kernel::fractional(1, 0.3).unwrap();
        let g = PointFunction::indicator(1.0, 3.0, 1.0);
        let a = solve(&k, &unit_mesh(32), &g, None).unwrap();
        let b = solve(&k.scaled(7.0), &unit_mesh(32), &g, None).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn nonhomogeneous_linearity() {
        let k = Kernel::fractional(1, 0.25).unwrap();
        let ball = Ball::interval(0.0, 1.0).unwrap();
        let zero = discrete_nonhom_mp(&k, &ball, 32, 0.0).unwrap();
        assert_eq!(zero.min_u, 0.0);
        let one = discrete_nonhom_mp(&k, &ball, 32, 1.0).unwrap();
        let ten = discrete_nonhom_mp(&k, &ball, 32, 10.0).unwrap();
        assert!((ten.min_u - 10.0 * one.min_u).abs() < 1e-10 * ten.min_u.abs());
        assert!(one.bound_constant > 0.0 && one.bound_constant.is_finite());
    }
}
