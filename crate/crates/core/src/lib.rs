//! Discrete magnetic Laplacians on planar billiards.
//!
//! The crate builds Peierls-phase discretizations of
//! `H_A = -(hbar^2 / 2m) (grad + i (e/hbar) A)^2` on rectangles, disks and
//! annuli, imposes Dirichlet, Neumann, Robin and chiral boundary conditions
//! through bulk-to-boundary operators, and checks gauge covariance,
//! Hermiticity and flux quantization on the lattice. A one-dimensional
//! module covers the unitary parametrization of self-adjoint interval
//! conditions and its Cayley transform.
//!
//! ```
//! use magbill::{geometry, gauge, boundary, operator, spectral};
//!
//! let grid = geometry::build_rectangle(1.0, 1.0, 32, 32).unwrap();
//! let params = gauge::PhysicalParams::default();
//! let links = gauge::link_phases(&grid, &gauge::PotentialSpec::Zero, params).unwrap();
//! let bc = boundary::make_bc(grid.chart(), boundary::BcKind::Dirichlet, None, None).unwrap();
//! let op = boundary::bc_operators(&bc, grid.chart(), &gauge::PotentialSpec::Zero, params).unwrap();
//! let h = operator::assemble(&grid, &links, &op, params).unwrap();
//! let spec = spectral::eigs_lowest(&h, 1, spectral::Method::Iterative, 1e-9).unwrap();
//! assert!((spec.values[0] - std::f64::consts::PI.powi(2)).abs() < 0.05);
//! ```

pub mod boundary;
pub mod cli;
pub mod error;
pub mod gauge;
pub mod geometry;
pub mod linalg;
pub mod operator;
pub mod selfadjoint1d;
pub mod spectral;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
