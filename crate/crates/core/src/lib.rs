//! Numerical laboratory for symmetric nonlocal operators of order `2s`:
//! kernels, pointwise evaluation, tails, barriers, the fractional Poisson
//! kernel of a ball, a 1-D Dirichlet solver and Harnack experiments.

pub mod cli;
pub mod error;
pub mod function;
pub mod geometry;
pub mod harnack;
pub mod kernel;
pub mod operator;
pub mod poisson;
pub mod quadrature;
pub mod report;
pub mod selftest;
pub mod solver1d;

pub use error::{LabError, Result};
pub use function::{Growth, PointFunction, Regularity};
pub use geometry::{Ball, DisconnectedConfig, Mesh1D};
pub use kernel::{Kernel, KernelFamily, Normalization};
pub use quadrature::{Estimate, Quadrature};
